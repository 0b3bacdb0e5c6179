//! First-order solver for the relaxed problem: minimize `<A0, X>` over the
//! domain hull subject to the two-sided constraint box.
//!
//! The scheme is a primal-dual hybrid gradient splitting that alternates a
//! hull projection on the primal side with an interval projection of the
//! constraint values on the dual side. Residual balancing adapts the step
//! ratio. Multipliers come from the dual iterates and are then refined by a
//! nonnegative least-squares fit of the stationarity condition restricted
//! to binding constraints.

mod nnls;
mod oracle;
mod trs;

pub use oracle::{nonconvex_oracle, nonconvex_oracle_with_warm, warm_candidates, OracleOptions, OracleSolution};
pub(crate) use nnls::nnls_columns;
pub use trs::{solve_trs_oracle, TrsSolution};

use crate::hull::{self, HullDescriptor};
use crate::matrixcore::{eig_sym, SymMatrix};
use crate::model::{Mat, RcopInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    InfeasibleLinear,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Residual check cadence in iterations.
    pub check_every: usize,
    /// Initial primal/dual step balance; adapted during the run.
    pub step_ratio: f64,
    /// Allow the recession-cone probe that certifies unboundedness early.
    /// Disabled inside the probe itself.
    pub unbounded_probe: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-7,
            max_iter: 200_000,
            check_every: 25,
            step_ratio: 1.0,
            unbounded_probe: true,
        }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolveOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct DwrSolution {
    pub x_star: Mat,
    pub v_rel: f64,
    pub mu_upper: Vec<f64>,
    pub mu_lower: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub complementarity: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl DwrSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Signed multipliers `mu_upper - mu_lower`, one per constraint.
    pub fn signed_multipliers(&self) -> Vec<f64> {
        self.mu_upper.iter().zip(&self.mu_lower).map(|(u, l)| u - l).collect()
    }

    /// Stationarity direction `A0 + sum_i (mu_u - mu_l)_i A_i`.
    pub fn kkt_gradient(&self, inst: &RcopInstance) -> Mat {
        let mut g = inst.objective.clone();
        for (i, c) in inst.constraints.iter().enumerate() {
            let w = self.mu_upper[i] - self.mu_lower[i];
            if w != 0.0 {
                g.axpy(w, &c.a);
            }
        }
        g
    }

    /// Fixed-point residual of the projected stationarity condition with
    /// probe step `s = 1 / (1 + ||A0||_F)`.
    pub fn kkt_fixed_point_residual(&self, inst: &RcopInstance, h: &HullDescriptor) -> f64 {
        let s = 1.0 / (1.0 + inst.objective.norm_fro());
        let g = self.kkt_gradient(inst);
        let mut probe = self.x_star.clone();
        probe.axpy(-s, &g);
        let projected = hull::project(h, &probe);
        projected.sub(&self.x_star).norm_fro() / (1.0 + self.x_star.norm_fro())
    }
}

struct ScaledProblem {
    a0: Mat,
    c0: f64,
    rows: Vec<ScaledRow>,
}

struct ScaledRow {
    a: Mat,
    scale: f64,
    lo: f64,
    hi: f64,
    orig_lo: f64,
    orig_hi: f64,
}

fn scale_problem(inst: &RcopInstance) -> ScaledProblem {
    let c0 = inst.objective.norm_fro().max(1e-12);
    let a0 = inst.objective.scaled(1.0 / c0);
    let rows = inst
        .constraints
        .iter()
        .map(|c| {
            let scale = c.a.norm_fro().max(1e-12);
            ScaledRow {
                a: c.a.scaled(1.0 / scale),
                scale,
                lo: if c.lo.is_finite() { c.lo / scale } else { c.lo },
                hi: if c.hi.is_finite() { c.hi / scale } else { c.hi },
                orig_lo: c.lo,
                orig_hi: c.hi,
            }
        })
        .collect();
    ScaledProblem { a0, c0, rows }
}

fn operator_norm(rows: &[ScaledRow]) -> f64 {
    let m = rows.len();
    if m == 0 {
        return 0.0;
    }
    let gram = SymMatrix::from_fn(m, |i, j| rows[i].a.inner(&rows[j].a));
    match eig_sym(&gram) {
        Ok(e) => e.values.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => (m as f64).sqrt(),
    }
}

fn box_project(v: f64, lo: f64, hi: f64) -> f64 {
    v.clamp(lo, hi)
}

fn box_distance(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        (lo - v) / (1.0 + lo.abs())
    } else if v > hi {
        (v - hi) / (1.0 + hi.abs())
    } else {
        0.0
    }
}

/// Solves the relaxation and returns the primal point, value, multipliers,
/// and residuals. The contract is algorithm-agnostic: on `Optimal`, the
/// point is in the hull, constraint violations are within tolerance, and
/// the projected stationarity fixed-point condition holds.
pub fn solve_dwr(inst: &RcopInstance, opts: &SolveOptions) -> DwrSolution {
    let h = hull::hull_of(&inst.domain);
    let scaled = scale_problem(inst);
    let m = scaled.rows.len();
    let norm_k = operator_norm(&scaled.rows);

    let base_step = 0.95 / norm_k.max(1e-9);
    let mut tau = if m == 0 { 0.5 } else { base_step * opts.step_ratio };
    let mut sigma = if m == 0 { 0.0 } else { base_step / opts.step_ratio };

    let mut x = hull::interior_point(&h);
    let mut y = vec![0.0; m];

    // adaptive balancing state
    let mut adapt = 0.5f64;
    let check_every = opts.check_every.max(1);

    // unboundedness / stall tracking
    let mut decreasing_checks = 0usize;
    let mut last_obj = f64::INFINITY;
    let mut w_window = vec![0.0; m];
    let mut window_count = 0.0f64;
    let mut window_iters = 0usize;
    let mut prev_window_viol = f64::INFINITY;
    let mut stall_iters = 0usize;
    let mut y_norm_at_stall = f64::INFINITY;
    let mut snapshot = x.clone();
    let mut snapshot_obj = f64::INFINITY;
    let mut since_snapshot = 0usize;
    let mut probe_budget = 3usize;
    let mut probe_cooldown = 0usize;
    const STALL_WINDOW: usize = 1000;

    let mut status = SolveStatus::MaxIter;
    let mut iterations = opts.max_iter;

    let probe_step = 1.0 / (1.0 + inst.objective.norm_fro());

    let mut iter = 0usize;
    while iter < opts.max_iter {
        iter += 1;
        // primal: hull projection of a gradient step
        let mut g = scaled.a0.clone();
        for (i, row) in scaled.rows.iter().enumerate() {
            if y[i] != 0.0 {
                g.axpy(y[i], &row.a);
            }
        }
        let mut z = x.clone();
        z.axpy(-tau, &g);
        let x_new = hull::project(&h, &z);

        // dual: interval projection of the extrapolated constraint values
        let mut w_new = vec![0.0; m];
        for (i, row) in scaled.rows.iter().enumerate() {
            let w = {
                // <a_i, 2 x_new - x>
                2.0 * row.a.inner(&x_new) - row.a.inner(&x)
            };
            w_new[i] = row.a.inner(&x_new);
            let t = y[i] / sigma + w;
            y[i] += sigma * (w - box_project(t, row.lo, row.hi));
        }

        x = x_new;
        for i in 0..m {
            w_window[i] += w_new[i];
        }
        window_count += 1.0;
        window_iters += 1;

        if iter % check_every != 0 && iter != opts.max_iter {
            continue;
        }

        // residuals at the current point, in the same normalization the
        // final report uses (original matrices and bounds)
        let viol = scaled
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| box_distance(w_new[i] * r.scale, r.orig_lo, r.orig_hi))
            .fold(0.0f64, f64::max);
        let mut g_now = scaled.a0.clone();
        for (i, row) in scaled.rows.iter().enumerate() {
            if y[i] != 0.0 {
                g_now.axpy(y[i], &row.a);
            }
        }
        let mut probe = x.clone();
        probe.axpy(-probe_step * scaled.c0, &g_now);
        let fp = hull::project(&h, &probe).sub(&x).norm_fro() / (1.0 + x.norm_fro());
        let comp = scaled
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mu = y[i] * scaled.c0 / r.scale;
                let up = mu.max(0.0);
                let lo = (-mu).max(0.0);
                let v = w_new[i] * r.scale;
                let slack_hi = if r.orig_hi.is_finite() {
                    (r.orig_hi - v).abs() / (1.0 + r.orig_hi.abs())
                } else {
                    0.0
                };
                let slack_lo = if r.orig_lo.is_finite() {
                    (v - r.orig_lo).abs() / (1.0 + r.orig_lo.abs())
                } else {
                    0.0
                };
                let up_term = if r.orig_hi.is_finite() { up.min(slack_hi) } else { up };
                let lo_term = if r.orig_lo.is_finite() { lo.min(slack_lo) } else { lo };
                up_term.max(lo_term)
            })
            .fold(0.0f64, f64::max);

        if viol <= opts.tol && fp <= opts.tol && comp <= opts.tol.max(1e-5) {
            status = SolveStatus::Optimal;
            iterations = iter;
            break;
        }

        // unboundedness: norm blowup with a monotone objective, or an
        // explicit recession-direction certificate built from the drift
        // over a window and confirmed on two consecutive windows
        let obj = scaled.a0.inner(&x);
        if obj < last_obj - 1e-14 {
            decreasing_checks += 1;
        } else {
            decreasing_checks = 0;
        }
        last_obj = obj;
        if x.norm_fro() > 1e8 && decreasing_checks * check_every >= 1000 {
            status = SolveStatus::Unbounded;
            iterations = iter;
            break;
        }
        since_snapshot += check_every;
        if since_snapshot >= 500 {
            let drift = x.sub(&snapshot);
            let len = drift.norm_fro();
            let mut certified = false;
            probe_cooldown = probe_cooldown.saturating_sub(1);
            if opts.unbounded_probe
                && probe_budget > 0
                && probe_cooldown == 0
                && obj < snapshot_obj - 1e-12
                && len > 0.05
                && viol <= 1e-3
            {
                let d = drift.scaled(1.0 / len);
                if drift_looks_recessive(&h, &scaled.rows, &scaled.a0, &d) {
                    certified = recession_probe(inst, opts);
                    if !certified {
                        probe_budget -= 1;
                        probe_cooldown = 20;
                    }
                }
            }
            if certified {
                status = SolveStatus::Unbounded;
                iterations = iter;
                break;
            }
            snapshot = x.clone();
            snapshot_obj = obj;
            since_snapshot = 0;
        }

        // infeasibility heuristic: the windowed average violation stalls
        // above tolerance while the dual variable keeps growing
        if window_iters >= STALL_WINDOW {
            let avg_viol = scaled
                .rows
                .iter()
                .enumerate()
                .map(|(i, r)| box_distance(w_window[i] / window_count, r.lo, r.hi))
                .fold(0.0f64, f64::max);
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let improved = avg_viol < prev_window_viol * 0.99;
            let dual_diverging = y_norm > 1.02 * y_norm_at_stall || !y_norm_at_stall.is_finite();
            if !improved && avg_viol > 100.0 * opts.tol && viol > 100.0 * opts.tol && dual_diverging
            {
                if stall_iters == 0 {
                    y_norm_at_stall = y_norm;
                }
                stall_iters += window_iters;
            } else {
                stall_iters = 0;
                y_norm_at_stall = f64::INFINITY;
            }
            if stall_iters >= 5000 {
                status = SolveStatus::InfeasibleLinear;
                iterations = iter;
                break;
            }
            prev_window_viol = avg_viol;
            w_window.iter_mut().for_each(|v| *v = 0.0);
            window_count = 0.0;
            window_iters = 0;
        }

        // residual balancing: when the constraint violation dominates the
        // stationarity residual, grow the dual step (and vice versa),
        // keeping the product fixed
        if m > 0 && adapt > 1e-3 {
            if viol > 10.0 * fp {
                sigma *= 1.0 + adapt;
                tau /= 1.0 + adapt;
                adapt *= 0.97;
            } else if fp > 10.0 * viol {
                sigma /= 1.0 + adapt;
                tau *= 1.0 + adapt;
                adapt *= 0.97;
            }
        }
    }

    // unscale multipliers: mu_i = y_i * c0 / scale_i
    let mut mu_upper = vec![0.0; m];
    let mut mu_lower = vec![0.0; m];
    for i in 0..m {
        let mu = y[i] * scaled.c0 / scaled.rows[i].scale;
        mu_upper[i] = mu.max(0.0);
        mu_lower[i] = (-mu).max(0.0);
    }

    let mut sol = DwrSolution {
        v_rel: inst.objective.inner(&x),
        x_star: x,
        mu_upper,
        mu_lower,
        primal_residual: 0.0,
        dual_residual: 0.0,
        complementarity: 0.0,
        iterations,
        status,
    };

    if sol.status == SolveStatus::Optimal && h.is_symmetric() {
        refine_multipliers(inst, &h, &mut sol, opts.tol);
    }
    finalize_residuals(inst, &h, &mut sol);
    sol
}

/// Quick screen of a drift direction: approximately PSD and approximately
/// compatible with every constraint's recession bounds. A positive screen
/// is confirmed by [`recession_probe`].
fn drift_looks_recessive(h: &HullDescriptor, rows: &[ScaledRow], a0: &Mat, d: &Mat) -> bool {
    if h.kind != crate::model::DomainKind::PsdRankK {
        return false; // the capped hulls are bounded; recession cone is {0}
    }
    let eps = 1e-3;
    let Mat::Sym(sym) = d else { return false };
    let Ok(eig) = eig_sym(sym) else { return false };
    if eig.values.iter().any(|&v| v < -eps) {
        return false;
    }
    let rows_ok = rows.iter().all(|r| {
        let v = r.a.inner(d);
        let hi_ok = !r.hi.is_finite() || v <= eps;
        let lo_ok = !r.lo.is_finite() || v >= -eps;
        hi_ok && lo_ok
    });
    rows_ok && a0.inner(d) < -1e-4
}

/// Certifies unboundedness by minimizing the objective over the
/// trace-normalized recession cone of the relaxed feasible set. A strictly
/// negative optimum is a recession direction with decreasing objective.
fn recession_probe(inst: &RcopInstance, opts: &SolveOptions) -> bool {
    let n = inst.domain.n;
    let mut rows: Vec<crate::model::TwoSidedLmi> = Vec::new();
    for c in &inst.constraints {
        if c.is_unconstrained() {
            continue;
        }
        let (lo, hi) = match (c.lo.is_finite(), c.hi.is_finite()) {
            (true, true) => (0.0, 0.0),
            (false, true) => (f64::NEG_INFINITY, 0.0),
            (true, false) => (0.0, f64::INFINITY),
            (false, false) => unreachable!(),
        };
        rows.push(crate::model::TwoSidedLmi { a: c.a.clone(), lo, hi });
    }
    rows.push(
        crate::model::TwoSidedLmi::equality(Mat::Sym(SymMatrix::identity(n)), 1.0)
            .expect("trace row"),
    );
    let probe = match RcopInstance::new(
        format!("{}-recession-probe", inst.name),
        inst.domain,
        inst.objective.clone(),
        rows,
    ) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let probe_opts = SolveOptions {
        tol: opts.tol.max(1e-7),
        max_iter: opts.max_iter.min(15_000),
        unbounded_probe: false,
        ..opts.clone()
    };
    let sol = solve_dwr(&probe, &probe_opts);
    // a near-feasible direction with a decisively negative value certifies
    // unboundedness; full probe optimality is not required
    sol.primal_residual <= 1e-4
        && sol.v_rel < -1e-4 * (1.0 + inst.objective.norm_fro())
}


fn finalize_residuals(inst: &RcopInstance, h: &HullDescriptor, sol: &mut DwrSolution) {
    sol.primal_residual = inst.max_violation(&sol.x_star);
    sol.dual_residual = sol.kkt_fixed_point_residual(inst, h);
    let mut comp = 0.0f64;
    for (i, c) in inst.constraints.iter().enumerate() {
        let v = c.a.inner(&sol.x_star);
        if c.hi.is_finite() {
            comp = comp.max(sol.mu_upper[i].min((c.hi - v).abs() / (1.0 + c.hi.abs())));
        }
        if c.lo.is_finite() {
            comp = comp.max(sol.mu_lower[i].min((v - c.lo).abs() / (1.0 + c.lo.abs())));
        }
    }
    sol.complementarity = comp;
    sol.v_rel = inst.objective.inner(&sol.x_star);
}

use crate::kkt::{face_blocks, identity_rows, stationarity_rows};

/// Refits multipliers on the binding set by nonnegative least squares on
/// the face-restricted stationarity condition. The refit is kept only if
/// it does not worsen the fixed-point residual.
fn refine_multipliers(inst: &RcopInstance, h: &HullDescriptor, sol: &mut DwrSolution, tol: f64) {
    let x = match &sol.x_star {
        Mat::Sym(x) => x,
        Mat::Rect(_) => return,
    };
    let Some(blocks) = face_blocks(h, x, tol) else { return };
    if blocks.frac.is_empty() && blocks.zero.is_empty() && blocks.ones.is_empty() {
        return;
    }
    // only constraints binding at the complementarity scale may carry a
    // multiplier, so the refit cannot break the complementarity bound
    let bind_tol = (10.0 * tol).max(1e-6);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut meta: Vec<(usize, f64)> = Vec::new(); // (constraint, sign)
    for (i, c) in inst.constraints.iter().enumerate() {
        let v = c.a.inner(&sol.x_star);
        let rows = stationarity_rows(&blocks, &c.a);
        if c.hi.is_finite() && (v - c.hi).abs() <= bind_tol * (1.0 + c.hi.abs()) {
            columns.push(rows.iter().map(|r| -r).collect());
            meta.push((i, 1.0));
        }
        if c.lo.is_finite() && (v - c.lo).abs() <= bind_tol * (1.0 + c.lo.abs()) {
            columns.push(rows.clone());
            meta.push((i, -1.0));
        }
    }
    if blocks.trace_binding {
        columns.push(identity_rows(&blocks).iter().map(|r| -r).collect());
        meta.push((usize::MAX, 0.0));
    }
    if columns.is_empty() {
        return;
    }
    let target = stationarity_rows(&blocks, &inst.objective);
    let mu = nnls::nnls_columns(&columns, &target);

    let mut mu_upper = vec![0.0; inst.m()];
    let mut mu_lower = vec![0.0; inst.m()];
    for ((idx, sign), &w) in meta.iter().zip(&mu) {
        if *idx == usize::MAX {
            continue; // trace multiplier is internal to the hull
        }
        if *sign > 0.0 {
            mu_upper[*idx] += w;
        } else {
            mu_lower[*idx] += w;
        }
    }
    let refined = DwrSolution { mu_upper, mu_lower, ..sol.clone() };
    let old = sol.kkt_fixed_point_residual(inst, h);
    let new = refined.kkt_fixed_point_residual(inst, h);
    let comp_of = |s: &DwrSolution| -> f64 {
        let mut comp = 0.0f64;
        for (i, c) in inst.constraints.iter().enumerate() {
            let v = c.a.inner(&s.x_star);
            if c.hi.is_finite() {
                comp = comp.max(s.mu_upper[i].min((c.hi - v).abs() / (1.0 + c.hi.abs())));
            }
            if c.lo.is_finite() {
                comp = comp.max(s.mu_lower[i].min((v - c.lo).abs() / (1.0 + c.lo.abs())));
            }
        }
        comp
    };
    if new <= old + 1e-12 && comp_of(&refined) <= comp_of(sol).max(tol.max(1e-5)) {
        sol.mu_upper = refined.mu_upper;
        sol.mu_lower = refined.mu_lower;
    }
}

/// Solves every instance of an anchored family (fair PCA/SVD) and returns
/// the index attaining the smallest relaxed value together with all
/// solutions. The fair (maximization) value is `-v_rel` of the winner.
pub fn solve_anchored(family: &[RcopInstance], opts: &SolveOptions) -> (usize, Vec<DwrSolution>) {
    let sols: Vec<DwrSolution> = family.iter().map(|inst| solve_dwr(inst, opts)).collect();
    let mut best = 0;
    for (i, s) in sols.iter().enumerate() {
        if s.is_optimal() && (!sols[best].is_optimal() || s.v_rel < sols[best].v_rel) {
            best = i;
        }
    }
    (best, sols)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DomainSpec, Mat, RcopInstance, TwoSidedLmi};

    fn e_sym(n: usize, i: usize, j: usize) -> SymMatrix {
        let mut a = SymMatrix::zeros(n);
        a.set_sym(i, j, if i == j { 1.0 } else { 0.5 });
        a
    }

    /// min -X_11 over {PSD, tr <= 1, spectral <= 1} with X_12 = 0 and
    /// X_11 <= 0.5: the optimum is -0.5.
    #[test]
    fn spectral_instance_value() {
        let domain = DomainSpec::psd_rank_k_spectral(2, 1).unwrap();
        let mut obj = SymMatrix::zeros(2);
        obj.set_sym(0, 0, -1.0);
        let inst = RcopInstance::new(
            "eg-spectral",
            domain,
            Mat::Sym(obj),
            vec![
                TwoSidedLmi::equality(Mat::Sym(e_sym(2, 0, 1)), 0.0).unwrap(),
                TwoSidedLmi::upper(Mat::Sym(e_sym(2, 0, 0)), 0.5).unwrap(),
            ],
        )
        .unwrap();
        let sol = solve_dwr(&inst, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.v_rel + 0.5).abs() < 1e-6, "v_rel = {}", sol.v_rel);
        assert!(sol.primal_residual < 1e-6);
        assert!(sol.dual_residual < 1e-6);
    }

    #[test]
    fn zero_objective_feasible() {
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let inst = RcopInstance::new(
            "zero",
            domain,
            Mat::Sym(SymMatrix::zeros(2)),
            vec![TwoSidedLmi::equality(Mat::Sym(e_sym(2, 0, 0)), 1.0).unwrap()],
        )
        .unwrap();
        let sol = solve_dwr(&inst, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.v_rel.abs() < 1e-8);
        assert!(inst.max_violation(&sol.x_star) < 1e-6);
    }

    /// min X_22 - X_11 over {PSD, X_12 = 0, X_11 <= X_22, X_22 >= 1}:
    /// the relaxed optimum is 0 on the diagonal ray.
    #[test]
    fn unbounded_optimal_set_still_attains() {
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let mut obj = SymMatrix::zeros(2);
        obj.set_sym(0, 0, -1.0);
        obj.set_sym(1, 1, 1.0);
        let mut diff = SymMatrix::zeros(2);
        diff.set_sym(0, 0, 1.0);
        diff.set_sym(1, 1, -1.0);
        let inst = RcopInstance::new(
            "ray-optimum",
            domain,
            Mat::Sym(obj),
            vec![
                TwoSidedLmi::equality(Mat::Sym(e_sym(2, 0, 1)), 0.0).unwrap(),
                TwoSidedLmi::upper(Mat::Sym(diff), 0.0).unwrap(),
                TwoSidedLmi::lower(Mat::Sym(e_sym(2, 1, 1)), 1.0).unwrap(),
            ],
        )
        .unwrap();
        let sol = solve_dwr(&inst, &SolveOptions::default());
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.v_rel.abs() < 1e-6, "v_rel = {}", sol.v_rel);
    }

    #[test]
    fn detects_linear_infeasibility() {
        // X_11 = 1 and X_11 <= -1 cannot both hold on the PSD cone
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let inst = RcopInstance::new(
            "infeasible",
            domain,
            Mat::Sym(SymMatrix::zeros(2)),
            vec![
                TwoSidedLmi::equality(Mat::Sym(e_sym(2, 0, 0)), 1.0).unwrap(),
                TwoSidedLmi::upper(Mat::Sym(e_sym(2, 0, 0)), -1.0).unwrap(),
            ],
        )
        .unwrap();
        let sol = solve_dwr(&inst, &SolveOptions { max_iter: 60_000, ..Default::default() });
        assert_eq!(sol.status, SolveStatus::InfeasibleLinear);
    }

    #[test]
    fn detects_unbounded_objective() {
        // min -X_11 over the PSD cone with no constraints
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let mut obj = SymMatrix::zeros(2);
        obj.set_sym(0, 0, -1.0);
        let inst = RcopInstance::new("unbounded", domain, Mat::Sym(obj), vec![]).unwrap();
        let sol = solve_dwr(&inst, &SolveOptions { max_iter: 100_000, ..Default::default() });
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn scaling_equivariance_of_value() {
        let domain = DomainSpec::psd_rank_k_spectral(3, 1).unwrap();
        let obj = SymMatrix::from_fn(3, |i, j| if i == j { -(i as f64 + 1.0) } else { 0.2 });
        let a = e_sym(3, 0, 0);
        let mk = |c: f64| {
            RcopInstance::new(
                "scaled",
                domain,
                Mat::Sym({
                    let mut o = obj.clone();
                    o.scale(c);
                    o
                }),
                vec![TwoSidedLmi::upper(Mat::Sym(a.clone()), 0.5).unwrap()],
            )
            .unwrap()
        };
        let s1 = solve_dwr(&mk(1.0), &SolveOptions::default());
        let s3 = solve_dwr(&mk(3.0), &SolveOptions::default());
        assert_eq!(s1.status, SolveStatus::Optimal);
        assert_eq!(s3.status, SolveStatus::Optimal);
        assert!((3.0 * s1.v_rel - s3.v_rel).abs() <= 1e-5 * (1.0 + s3.v_rel.abs()));
    }

    #[test]
    fn complementarity_holds_on_random_instances() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..10 {
            let n = rng.gen_range(2..=4);
            let domain = DomainSpec::psd_rank_k_spectral(n, 1).unwrap();
            let obj = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let a = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let inst = RcopInstance::new(
                format!("rand-{trial}"),
                domain,
                Mat::Sym(obj),
                vec![TwoSidedLmi::new(Mat::Sym(a), -0.3, 0.4).unwrap()],
            )
            .unwrap();
            let sol = solve_dwr(&inst, &SolveOptions::default());
            assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
            for (i, c) in inst.constraints.iter().enumerate() {
                let v = c.a.inner(&sol.x_star);
                if c.hi.is_finite() {
                    let r = sol.mu_upper[i].min((c.hi - v).abs());
                    assert!(r <= 1e-5 * (1.0 + c.hi.abs()), "upper complementarity {r}");
                }
                if c.lo.is_finite() {
                    let r = sol.mu_lower[i].min((v - c.lo).abs());
                    assert!(r <= 1e-5 * (1.0 + c.lo.abs()), "lower complementarity {r}");
                }
                // a two-sided constraint cannot have both multipliers active
                assert!(sol.mu_upper[i].min(sol.mu_lower[i]) <= 1e-7);
            }
        }
    }

    #[test]
    fn one_sided_form_gives_same_value() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..6 {
            let n = 3;
            let domain = DomainSpec::psd_rank_k_spectral(n, 2).unwrap();
            let obj = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let a1 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let a2 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let inst = RcopInstance::new(
                format!("two-sided-{trial}"),
                domain,
                Mat::Sym(obj),
                vec![
                    TwoSidedLmi::new(Mat::Sym(a1), -0.2, 0.6).unwrap(),
                    TwoSidedLmi::equality(Mat::Sym(a2), 0.1).unwrap(),
                ],
            )
            .unwrap();
            let (one_sided, _) = crate::model::to_one_sided(&inst);
            let s1 = solve_dwr(&inst, &SolveOptions::default());
            let s2 = solve_dwr(&one_sided, &SolveOptions::default());
            assert_eq!(s1.status, SolveStatus::Optimal);
            assert_eq!(s2.status, SolveStatus::Optimal);
            assert!(
                (s1.v_rel - s2.v_rel).abs() <= 1e-6 * (1.0 + s1.v_rel.abs()),
                "trial {trial}: {} vs {}",
                s1.v_rel,
                s2.v_rel
            );
        }
    }
}
