//! Exactness certification: decision rules predicting when the relaxation
//! matches the rank-constrained problem, together with numerical
//! verification on the instance at hand.
//!
//! The rule set is driven by three integers attached to an instance —
//! the constraint dimension `m_tilde`, the binding dimension `m_bind`, and
//! the refined multiplier support `m_star` — compared against the largest
//! face dimension of the hull known to stay inside the domain set. A
//! report records each rule's verdict, the numerically verified flags,
//! and the certified gap.

mod gtrs;

pub use gtrs::{gtrs_recession_certificate, GtrsCertificate, GtrsError};

use serde::{Deserialize, Serialize};

use crate::facial::{reduce_to_extreme, Equality, Guard, ReduceOptions};
use crate::hull::{self, domain_contains};
use crate::kkt::{face_blocks, identity_rows, stationarity_rows};
use crate::matrixcore::{eig_sym, numerical_rank, svd_rect, SymMatrix};
use crate::model::{
    constraint_dimension, lift_marker, to_one_sided, unlift_qcqp, DomainKind, Mat, QcqpData,
    RcopInstance, TwoSidedLmi,
};
use crate::signs::{balance_coloring, sign_graph};
use crate::solver::{
    nnls_columns, nonconvex_oracle_with_warm, solve_dwr, warm_candidates, DwrSolution,
    OracleOptions, SolveOptions, SolveStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TriState {
    True,
    False,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub rule: String,
    pub applies: bool,
    pub reason: String,
}

/// Numerically verified flags for one instance.
///
/// `objective` carries the hard sandwich semantics: `True` is backed by a
/// domain-feasible point attaining the relaxed value within tolerance,
/// `False` by a high-effort search staying clearly above it.
///
/// `extreme_point` and `convex_hull` are witness-based: `False` means an
/// extreme point of the relaxed set with rank above the cap was exhibited
/// (a genuine disproof); `True` means every witnessed extreme point was a
/// domain member (no counterexample found, not a proof over all faces).
/// `convex_hull` is only decided when the feasible set is bounded, where
/// it coincides with the extreme-point verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verified {
    pub extreme_point: TriState,
    pub objective: TriState,
    pub convex_hull: TriState,
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    pub m: usize,
    pub m_tilde: usize,
    pub m_bind: usize,
    pub m_star: Option<usize>,
    pub predictions: Vec<Prediction>,
    pub verified: Verified,
    pub gap: Option<f64>,
    pub v_ub: Option<f64>,
    pub extracted: Option<Mat>,
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub solve: SolveOptions,
    /// Tolerance for binding detection and reported verdicts.
    pub report_tol: f64,
    pub oracle_starts: usize,
    pub seed: u64,
    /// Extra random-objective probes feeding the extreme-point and
    /// convex-hull verification flags.
    pub hull_probes: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            solve: SolveOptions::default(),
            report_tol: 1e-6,
            oracle_starts: 32,
            seed: 0,
            hull_probes: 4,
        }
    }
}

/// Indices of constraints binding at the solution, and the numerical rank
/// of their matrices (the binding dimension).
pub fn binding_dimension(
    sol: &DwrSolution,
    inst: &RcopInstance,
    tol: f64,
) -> (Vec<usize>, usize) {
    let mut t = Vec::new();
    for (i, c) in inst.constraints.iter().enumerate() {
        let v = c.a.inner(&sol.x_star);
        let at_hi = c.hi.is_finite() && (v - c.hi).abs() <= tol * (1.0 + c.hi.abs());
        let at_lo = c.lo.is_finite() && (v - c.lo).abs() <= tol * (1.0 + c.lo.abs());
        if at_hi || at_lo {
            t.push(i);
        }
    }
    let vecs: Vec<Vec<f64>> = t.iter().map(|&i| inst.constraints[i].a.flat_coords()).collect();
    let m_bind = numerical_rank(&vecs, 1e-8);
    (t, m_bind)
}

#[derive(Debug, Clone)]
pub struct MultiplierSupport {
    /// Constraint indices with a nonzero refined multiplier.
    pub support: Vec<usize>,
    /// Count of nonzero multipliers; `None` when stationarity could not be
    /// reproduced within tolerance on the binding set.
    pub m_star: Option<usize>,
    pub mu_upper: Vec<f64>,
    pub mu_lower: Vec<f64>,
}

/// Refits multipliers by a sparse nonnegative fit of the face-restricted
/// stationarity condition: nonnegative least squares on the binding set,
/// then a dependency-elimination pass that drives redundant coefficients
/// to zero without changing the residual.
pub fn multiplier_support(sol: &DwrSolution, inst: &RcopInstance, tol: f64) -> MultiplierSupport {
    let none = MultiplierSupport {
        support: Vec::new(),
        m_star: None,
        mu_upper: sol.mu_upper.clone(),
        mu_lower: sol.mu_lower.clone(),
    };
    let h = hull::hull_of(&inst.domain);
    let Mat::Sym(x) = &sol.x_star else { return none };
    let Some(blocks) = face_blocks(&h, x, tol.max(1e-9)) else { return none };

    let bind_tol = tol.max(1e-6);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut meta: Vec<(usize, f64)> = Vec::new();
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
    let target = stationarity_rows(&blocks, &inst.objective);
    let target_norm: f64 = target.iter().map(|v| v * v).sum::<f64>().sqrt();
    let resid_of = |mu: &[f64]| -> f64 {
        let mut r = target.clone();
        for (j, col) in columns.iter().enumerate() {
            if mu[j] != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri -= mu[j] * ci;
                }
            }
        }
        r.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    let threshold = bind_tol.sqrt().max(1e-5) * (1.0 + target_norm);

    let mut mu = nnls_columns(&columns, &target);
    if resid_of(&mu) > threshold {
        return none;
    }

    // dependency elimination: while the active columns are dependent, move
    // along a null combination until a coefficient hits zero; the residual
    // is unchanged because the combination maps to zero
    let snap = 1e-12 * (1.0 + mu.iter().cloned().fold(0.0, f64::max));
    loop {
        let active: Vec<usize> = (0..mu.len()).filter(|&j| mu[j] > 0.0).collect();
        if active.is_empty() {
            break;
        }
        let cols: Vec<Vec<f64>> = active.iter().map(|&j| columns[j].clone()).collect();
        if numerical_rank(&cols, 1e-10) >= active.len() {
            break;
        }
        let dim = columns[0].len().max(1);
        let null =
            crate::matrixcore::null_space_of_rows(&transpose(&cols, dim), active.len(), 1e-9);
        let Some(nu) = null.first() else { break };
        // pick the orientation and the largest step keeping mu nonnegative
        let mut moved = false;
        for dir in [1.0, -1.0] {
            let mut best: Option<f64> = None;
            for (idx, &j) in active.iter().enumerate() {
                let rate = dir * nu[idx];
                if rate > 1e-12 {
                    let t = mu[j] / rate;
                    if best.map_or(true, |b| t < b) {
                        best = Some(t);
                    }
                }
            }
            if let Some(t) = best {
                for (idx, &j) in active.iter().enumerate() {
                    mu[j] -= t * dir * nu[idx];
                    if mu[j] < snap {
                        mu[j] = 0.0;
                    }
                }
                moved = true;
                break;
            }
        }
        if !moved {
            break;
        }
    }

    // greedy support shrink: drop the smallest coefficients if the fit
    // still reproduces stationarity
    let mut order: Vec<usize> = (0..mu.len()).filter(|&j| mu[j] > 0.0).collect();
    order.sort_by(|&a, &b| mu[a].partial_cmp(&mu[b]).unwrap());
    for j in order {
        if mu[j] == 0.0 {
            continue;
        }
        let keep: Vec<usize> = (0..mu.len()).filter(|&i| i != j && mu[i] > 0.0).collect();
        let sub: Vec<Vec<f64>> = keep.iter().map(|&i| columns[i].clone()).collect();
        let trial = nnls_columns(&sub, &target);
        let mut full = vec![0.0; mu.len()];
        for (idx, &i) in keep.iter().enumerate() {
            full[i] = trial[idx];
        }
        if resid_of(&full) <= threshold {
            mu = full;
        }
    }

    let sup_tol = 1e-6 * (1.0 + mu.iter().cloned().fold(0.0, f64::max));
    let mut mu_upper = vec![0.0; inst.m()];
    let mut mu_lower = vec![0.0; inst.m()];
    let mut support = Vec::new();
    for ((i, sign), &w) in meta.iter().zip(&mu) {
        if *i == usize::MAX || w <= sup_tol {
            continue;
        }
        if *sign > 0.0 {
            mu_upper[*i] += w;
        } else {
            mu_lower[*i] += w;
        }
        if !support.contains(i) {
            support.push(*i);
        }
    }
    support.sort_unstable();

    // the sparse refit must itself witness stationarity: gate the count on
    // the projected fixed-point residual of the refitted solution
    let refit = DwrSolution { mu_upper: mu_upper.clone(), mu_lower: mu_lower.clone(), ..sol.clone() };
    let fp = refit.kkt_fixed_point_residual(inst, &h);
    let gate = tol.max(10.0 * sol.dual_residual).max(1e-6);
    if fp > gate {
        return MultiplierSupport {
            support: Vec::new(),
            m_star: None,
            mu_upper: sol.mu_upper.clone(),
            mu_lower: sol.mu_lower.clone(),
        };
    }
    MultiplierSupport { m_star: Some(support.len()), support, mu_upper, mu_lower }
}

fn transpose(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let k = rows.len();
    (0..dim).map(|d| (0..k).map(|j| rows[j][d]).collect()).collect()
}

/// Checks the parallel-residual condition on a one-sided instance: after
/// projecting the non-binding matrices onto the span of the binding ones,
/// all nonzero residuals must be pairwise parallel with nonnegative ratio.
pub fn parallel_residual_check(inst: &RcopInstance, t_rows: &[usize], tol: f64) -> bool {
    let in_t = |j: usize| t_rows.contains(&j);
    let basis_rows: Vec<Vec<f64>> =
        t_rows.iter().map(|&i| inst.constraints[i].a.flat_coords()).collect();
    // orthonormal basis of the binding span
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in &basis_rows {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = w.iter().zip(b).map(|(a, x)| a * x).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-10 {
            for wi in &mut w {
                *wi /= n;
            }
            basis.push(w);
        }
    }
    let mut residuals: Vec<Vec<f64>> = Vec::new();
    for (j, c) in inst.constraints.iter().enumerate() {
        if in_t(j) || c.is_unconstrained() {
            continue;
        }
        let mut r = c.a.flat_coords();
        let scale: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        for b in &basis {
            let cof: f64 = r.iter().zip(b).map(|(a, x)| a * x).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= cof * bi;
            }
        }
        let n: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol * (1.0 + scale) {
            residuals.push(r);
        }
    }
    for i in 0..residuals.len() {
        for j in (i + 1)..residuals.len() {
            let ni: f64 = residuals[i].iter().map(|x| x * x).sum::<f64>().sqrt();
            let nj: f64 = residuals[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            let dot: f64 = residuals[i].iter().zip(&residuals[j]).map(|(a, b)| a * b).sum();
            if dot < (1.0 - tol) * ni * nj {
                return false;
            }
        }
    }
    true
}

/// Sign-definite check for a one-sided QCQP: `applies` when every
/// off-diagonal position carries one sign across all data matrices,
/// `balanced` when the induced signed graph satisfies the cycle condition.
pub fn sign_definite_check(q: &QcqpData) -> (bool, bool) {
    let g = sign_graph(q);
    if !g.sign_definite {
        return (false, false);
    }
    (true, balance_coloring(&g).is_some())
}

/// Diagonal variant: all quadratic blocks diagonal and each linear-term
/// coordinate sign-definite across the data.
pub fn diag_sign_check(q: &QcqpData) -> bool {
    let n = q.dim();
    let mut all: Vec<(&SymMatrix, &Vec<f64>)> = vec![(&q.obj_quad, &q.obj_lin)];
    for c in &q.constraints {
        all.push((&c.quad, &c.lin));
    }
    for (quad, _) in &all {
        for i in 0..n {
            for j in (i + 1)..n {
                if quad.get(i, j).abs() > 1e-12 {
                    return false;
                }
            }
        }
    }
    for i in 0..n {
        let mut pos = false;
        let mut neg = false;
        for (_, lin) in &all {
            if lin[i] > 0.0 {
                pos = true;
            }
            if lin[i] < 0.0 {
                neg = true;
            }
        }
        if pos && neg {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Boundedness / Slater probes
// ---------------------------------------------------------------------------

/// Whether the relaxed feasible set is bounded: immediate for the compact
/// hulls, otherwise decided by a recession-cone feasibility solve.
pub fn feasible_set_bounded(inst: &RcopInstance, opts: &SolveOptions) -> Option<bool> {
    let h = hull::hull_of(&inst.domain);
    if h.is_bounded() {
        return Some(true);
    }
    let n = inst.domain.n;
    let mut constraints = Vec::new();
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
        constraints.push(TwoSidedLmi { a: c.a.clone(), lo, hi });
    }
    constraints.push(
        TwoSidedLmi::equality(Mat::Sym(SymMatrix::identity(n)), 1.0).expect("trace row"),
    );
    let probe = RcopInstance::new(
        format!("{}-recession", inst.name),
        inst.domain,
        Mat::Sym(SymMatrix::zeros(n)),
        constraints,
    )
    .expect("recession instance");
    let limited = SolveOptions { max_iter: opts.max_iter.min(60_000), ..opts.clone() };
    match solve_dwr(&probe, &limited).status {
        SolveStatus::Optimal => Some(false),
        SolveStatus::InfeasibleLinear => Some(true),
        _ => None,
    }
}

/// Whether the optimal set of the relaxation is bounded, probed by pinning
/// the objective near its optimum and maximizing the trace.
pub fn optimal_set_bounded(
    inst: &RcopInstance,
    sol: &DwrSolution,
    opts: &SolveOptions,
) -> Option<bool> {
    let h = hull::hull_of(&inst.domain);
    if h.is_bounded() {
        return Some(true);
    }
    let n = inst.domain.n;
    let band = (10.0 * opts.tol).max(1e-7) * (1.0 + sol.v_rel.abs());
    let mut constraints = inst.constraints.clone();
    constraints.push(TwoSidedLmi {
        a: inst.objective.clone(),
        lo: f64::NEG_INFINITY,
        hi: sol.v_rel + band,
    });
    let mut neg_eye = SymMatrix::identity(n);
    neg_eye.scale(-1.0);
    let probe = RcopInstance::new(
        format!("{}-optimal-set", inst.name),
        inst.domain,
        Mat::Sym(neg_eye),
        constraints,
    )
    .expect("optimal-set probe");
    let limited = SolveOptions { max_iter: opts.max_iter.min(60_000), ..opts.clone() };
    match solve_dwr(&probe, &limited).status {
        SolveStatus::Optimal => Some(true),
        SolveStatus::Unbounded => Some(false),
        _ => None,
    }
}

/// Relaxed Slater probe: feasibility of the constraints over a hull shrunk
/// toward its relative-interior witness.
pub fn relaxed_slater(inst: &RcopInstance, opts: &SolveOptions) -> Option<bool> {
    let h = hull::hull_of(&inst.domain);
    let center = hull::interior_point(&h);
    let eps = 1e-3;
    let mut constraints = Vec::new();
    for c in &inst.constraints {
        let ci = c.a.inner(&center);
        let lo = if c.lo.is_finite() { (c.lo - eps * ci) / (1.0 - eps) } else { c.lo };
        let hi = if c.hi.is_finite() { (c.hi - eps * ci) / (1.0 - eps) } else { c.hi };
        if lo > hi {
            return Some(false);
        }
        constraints.push(TwoSidedLmi { a: c.a.clone(), lo, hi });
    }
    let probe = RcopInstance::new(
        format!("{}-slater", inst.name),
        inst.domain,
        inst.objective.zeros_like(),
        constraints,
    )
    .expect("slater probe");
    let limited = SolveOptions { max_iter: opts.max_iter.min(60_000), ..opts.clone() };
    match solve_dwr(&probe, &limited).status {
        SolveStatus::Optimal => Some(true),
        SolveStatus::InfeasibleLinear => Some(false),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

/// Solution-side facts feeding the solution-dependent rules.
#[derive(Debug, Clone)]
pub struct SolutionAnalysis {
    pub binding: Vec<usize>,
    pub m_bind: usize,
    pub support: MultiplierSupport,
    pub bounded_optimal_set: Option<bool>,
    pub slater: Option<bool>,
    pub parallel_nonbinding: bool,
    pub parallel_nonsupport: bool,
}

pub fn analyze_solution(
    inst: &RcopInstance,
    sol: &DwrSolution,
    opts: &CertifyOptions,
) -> SolutionAnalysis {
    let (binding, m_bind) = binding_dimension(sol, inst, opts.report_tol.max(1e-6));
    let support = multiplier_support(sol, inst, opts.report_tol.max(1e-6));
    let bounded_optimal_set = optimal_set_bounded(inst, sol, &opts.solve);
    let slater = relaxed_slater(inst, &opts.solve);

    // parallel checks run on the one-sided form, mapping index sets through
    let (one_sided, map) = to_one_sided(inst);
    let rows_of = |set: &[usize]| -> Vec<usize> {
        map.iter()
            .enumerate()
            .filter(|(_, (orig, _))| set.contains(orig))
            .map(|(row, _)| row)
            .collect()
    };
    let parallel_nonbinding =
        parallel_residual_check(&one_sided, &rows_of(&binding), opts.report_tol.max(1e-6));
    let parallel_nonsupport =
        parallel_residual_check(&one_sided, &rows_of(&support.support), opts.report_tol.max(1e-6));
    SolutionAnalysis {
        binding,
        m_bind,
        support,
        bounded_optimal_set,
        slater,
        parallel_nonbinding,
        parallel_nonsupport,
    }
}

/// Decision rules. Rules needing a solution are only emitted when one is
/// supplied, so adding a solution never removes a prediction.
pub fn predict(
    inst: &RcopInstance,
    analysis: Option<&SolutionAnalysis>,
    opts: &CertifyOptions,
) -> Vec<Prediction> {
    let h = hull::hull_of(&inst.domain);
    let m_tilde = constraint_dimension(inst);
    let d_incl = h.inclusive_face_dim();
    let mut out = Vec::new();

    let extreme_ok = m_tilde <= d_incl;
    out.push(Prediction {
        rule: "extreme-point/face-dimension".into(),
        applies: extreme_ok,
        reason: format!(
            "constraint dimension {m_tilde} {} the inclusive-face bound {d_incl} of the domain",
            if extreme_ok { "is within" } else { "exceeds" }
        ),
    });

    match h.kind {
        DomainKind::PsdRankK => {
            let hull_ok = m_tilde + 1 <= d_incl;
            out.push(Prediction {
                rule: "convex-hull/conic-face-dimension".into(),
                applies: hull_ok,
                reason: format!(
                    "conic domain needs faces up to dimension {} inside the domain; bound is {d_incl}",
                    m_tilde + 1
                ),
            });
            if extreme_ok {
                let bounded = feasible_set_bounded(inst, &opts.solve);
                out.push(Prediction {
                    rule: "convex-hull/bounded-feasible-set".into(),
                    applies: bounded == Some(true),
                    reason: match bounded {
                        Some(true) => {
                            "feasible set is bounded, so extreme-point exactness upgrades to convex-hull exactness".into()
                        }
                        Some(false) => "feasible set is unbounded".into(),
                        None => "boundedness probe was inconclusive".into(),
                    },
                });
            }
        }
        DomainKind::PsdRankKSpectral | DomainKind::RectRankKSpectral => {
            out.push(Prediction {
                rule: "convex-hull/bounded-hull".into(),
                applies: extreme_ok,
                reason: format!(
                    "the hull is compact, so convex-hull exactness matches the extreme-point rule (dimension {m_tilde} vs bound {d_incl})"
                ),
            });
        }
    }

    // structural rules for lifted single-constraint quadratic problems
    if let Some(marker) = lift_marker(inst) {
        let others: Vec<&TwoSidedLmi> = inst
            .constraints
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != marker && !c.is_unconstrained())
            .map(|(_, c)| c)
            .collect();
        if others.len() == 1 {
            let c = others[0];
            let n = inst.domain.n;
            let is_ball = {
                let mut ok = c.hi == 1.0 && c.lo == f64::NEG_INFINITY;
                for i in 0..n {
                    for j in 0..n {
                        let want = if i == j && i > 0 { 1.0 } else { 0.0 };
                        if (c.a.get(i, j) - want).abs() > 1e-12 {
                            ok = false;
                        }
                    }
                }
                ok
            };
            if is_ball {
                out.push(Prediction {
                    rule: "convex-hull/trust-region".into(),
                    applies: true,
                    reason: "single unit-ball constraint on a lifted quadratic problem".into(),
                });
            } else if c.lo == f64::NEG_INFINITY || c.hi == f64::INFINITY {
                out.push(Prediction {
                    rule: "convex-hull/one-sided-quadratic".into(),
                    applies: true,
                    reason: "single one-sided quadratic constraint on a lifted problem".into(),
                });
            } else {
                // two-sided: needs a nonzero quadratic block
                let mut q_norm = 0.0f64;
                for i in 1..n {
                    for j in 1..n {
                        q_norm += c.a.get(i, j) * c.a.get(i, j);
                    }
                }
                let nonzero = q_norm.sqrt() > 1e-12;
                out.push(Prediction {
                    rule: "convex-hull/two-sided-quadratic".into(),
                    applies: nonzero,
                    reason: if nonzero {
                        "single finite two-sided quadratic constraint with a nonzero quadratic block".into()
                    } else {
                        "two-sided constraint has a zero quadratic block; no hull guarantee".into()
                    },
                });
            }
        }
        if let Some(q) = unlift_qcqp(inst) {
            if q.is_one_sided() {
                let (applies, balanced) = sign_definite_check(&q);
                out.push(Prediction {
                    rule: "objective/sign-definite-cycles".into(),
                    applies: applies && balanced,
                    reason: if applies && balanced {
                        "off-diagonal data is sign-definite and every cycle satisfies the sign condition".into()
                    } else if applies {
                        "sign-definite data but the cycle condition fails".into()
                    } else {
                        "off-diagonal data carries mixed signs".into()
                    },
                });
                let diag = diag_sign_check(&q);
                out.push(Prediction {
                    rule: "objective/diagonal-sign".into(),
                    applies: diag,
                    reason: if diag {
                        "diagonal quadratic blocks with sign-definite linear terms".into()
                    } else {
                        "not a diagonal problem with sign-definite linear terms".into()
                    },
                });
            }
        }
    }

    if let Some(a) = analysis {
        let bind_ok = a.m_bind <= d_incl;
        let applies = bind_ok
            && a.parallel_nonbinding
            && a.bounded_optimal_set == Some(true);
        out.push(Prediction {
            rule: "objective/binding-dimension".into(),
            applies,
            reason: format!(
                "binding dimension {} vs bound {d_incl}; parallel residuals {}; bounded optimal set {:?}",
                a.m_bind, a.parallel_nonbinding, a.bounded_optimal_set
            ),
        });
        let star_ok = a.support.m_star.map_or(false, |s| s <= d_incl);
        let applies = star_ok
            && a.parallel_nonsupport
            && a.slater == Some(true)
            && a.bounded_optimal_set == Some(true);
        out.push(Prediction {
            rule: "objective/multiplier-support".into(),
            applies,
            reason: format!(
                "multiplier support {:?} vs bound {d_incl}; parallel residuals {}; relaxed Slater {:?}; bounded optimal set {:?}",
                a.support.m_star, a.parallel_nonsupport, a.slater, a.bounded_optimal_set
            ),
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Reduces the solver point to an extreme point of the optimal face:
/// objective pinned at the optimum, binding constraints pinned at their
/// values, the rest guarded.
pub fn reduce_optimal_face(
    inst: &RcopInstance,
    sol: &DwrSolution,
    bind_tol: f64,
) -> Result<crate::facial::ExtremePointResult, crate::facial::FacialError> {
    reduce_optimal_face_with(inst, sol, bind_tol, &ReduceOptions::default())
}

pub fn reduce_optimal_face_with(
    inst: &RcopInstance,
    sol: &DwrSolution,
    bind_tol: f64,
    reduce_opts: &ReduceOptions,
) -> Result<crate::facial::ExtremePointResult, crate::facial::FacialError> {
    let h = hull::hull_of(&inst.domain);
    let mut equalities = vec![Equality { a: inst.objective.clone(), value: sol.v_rel }];
    let mut guards = Vec::new();
    for c in &inst.constraints {
        let v = c.a.inner(&sol.x_star);
        let at_hi = c.hi.is_finite() && (v - c.hi).abs() <= bind_tol * (1.0 + c.hi.abs());
        let at_lo = c.lo.is_finite() && (v - c.lo).abs() <= bind_tol * (1.0 + c.lo.abs());
        if at_hi || at_lo {
            equalities.push(Equality { a: c.a.clone(), value: v });
        } else {
            guards.push(Guard { a: c.a.clone(), lo: c.lo, hi: c.hi });
        }
    }
    reduce_to_extreme(&h, &sol.x_star, &equalities, &guards, reduce_opts)
}

fn matrix_rank(x: &Mat, tol: f64) -> usize {
    match x {
        Mat::Sym(a) => {
            let eig = eig_sym(a).expect("finite");
            let top = eig.values.first().copied().unwrap_or(0.0).abs().max(1.0);
            eig.values.iter().filter(|&&v| v.abs() > tol * top).count()
        }
        Mat::Rect(a) => {
            let svd = svd_rect(a).expect("finite");
            let top = svd.sigma.first().copied().unwrap_or(0.0).max(1.0);
            svd.sigma.iter().filter(|&&v| v > tol * top).count()
        }
    }
}

#[derive(Debug, Clone)]
pub struct ObjectiveVerification {
    pub verdict: TriState,
    pub gap: Option<f64>,
    pub v_ub: Option<f64>,
    /// Domain-feasible point backing the bound, when one was found.
    pub witness: Option<Mat>,
}

/// Objective-exactness verdict by the sandwich `V_rel <= V_opt <= v_ub`:
/// true when a domain-feasible point attains the relaxed value, false when
/// a high-effort search stays clearly above it, unknown otherwise.
pub fn verify_objective(
    inst: &RcopInstance,
    sol: &DwrSolution,
    extracted: Option<&Mat>,
    opts: &CertifyOptions,
) -> ObjectiveVerification {
    let h = hull::hull_of(&inst.domain);
    let scale = 1.0 + sol.v_rel.abs();
    let tol = opts.report_tol;
    if let Some(x) = extracted {
        if domain_contains(&h, x, 1e-6) && inst.max_violation(x) <= 1e-6 {
            let v = inst.objective.inner(x);
            if v <= sol.v_rel + tol * scale {
                return ObjectiveVerification {
                    verdict: TriState::True,
                    gap: Some((v - sol.v_rel).max(0.0)),
                    v_ub: Some(v),
                    witness: Some(x.clone()),
                };
            }
        }
    }
    let warm = warm_candidates(inst, sol);
    let oracle_opts = OracleOptions {
        starts: opts.oracle_starts.max(8) * 2,
        seed: opts.seed,
        ..Default::default()
    };
    match nonconvex_oracle_with_warm(inst, &warm, &oracle_opts) {
        Some(best) => {
            let gap = best.value - sol.v_rel;
            let verdict = if gap <= tol * scale {
                TriState::True
            } else if gap > 10.0 * tol * scale {
                TriState::False
            } else {
                TriState::Unknown
            };
            ObjectiveVerification {
                verdict,
                gap: Some(gap.max(0.0)),
                v_ub: Some(best.value),
                witness: Some(best.x),
            }
        }
        None => ObjectiveVerification {
            verdict: TriState::Unknown,
            gap: None,
            v_ub: None,
            witness: None,
        },
    }
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Certified {
    pub solution: DwrSolution,
    pub report: ExactnessReport,
}

/// Full pipeline: solve, analyze, predict, reduce, extract, verify.
pub fn certify(inst: &RcopInstance, opts: &CertifyOptions) -> Certified {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let sol = solve_dwr(inst, &opts.solve);
    let m = inst.m();
    let m_tilde = constraint_dimension(inst);

    if !sol.is_optimal() {
        let predictions = predict(inst, None, opts);
        return Certified {
            solution: sol,
            report: ExactnessReport {
                m,
                m_tilde,
                m_bind: 0,
                m_star: None,
                predictions,
                verified: Verified {
                    extreme_point: TriState::Unknown,
                    objective: TriState::Unknown,
                    convex_hull: TriState::Unknown,
                },
                gap: None,
                v_ub: None,
                extracted: None,
            },
        };
    }

    let analysis = analyze_solution(inst, &sol, opts);
    let predictions = predict(inst, Some(&analysis), opts);

    // extreme-point witnesses: the optimal face of the solved objective,
    // plus a few random supported faces
    let h = hull::hull_of(&inst.domain);
    let k = inst.domain.k;
    let rank_tol = 1e-6;
    let mut witness_ranks: Vec<usize> = Vec::new();
    let mut extracted: Option<Mat> = None;
    if let Ok(res) = reduce_optimal_face(inst, &sol, opts.report_tol.max(1e-6)) {
        witness_ranks.push(res.rank);
        if domain_contains(&h, &res.x, rank_tol) {
            extracted = Some(res.x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(17));
    let diag_probe = |sign: f64| -> Mat {
        let mut m = inst.objective.zeros_like();
        let (rows, cols) = m.shape();
        let data = m.data_mut();
        for i in 0..rows.min(cols) {
            data[i * cols + i] = sign;
        }
        m
    };
    for probe_idx in 0..opts.hull_probes {
        let probe_obj = match probe_idx {
            // trace probes first: high-rank extreme points sit on the
            // faces these objectives expose
            0 => diag_probe(-1.0),
            1 => diag_probe(1.0),
            _ => match &inst.objective {
                Mat::Sym(a) => {
                    Mat::Sym(SymMatrix::from_fn(a.order(), |_, _| rng.gen_range(-1.0..1.0)))
                }
                Mat::Rect(a) => {
                    let data: Vec<f64> =
                        (0..a.rows() * a.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    Mat::Rect(
                        crate::matrixcore::RectMatrix::from_rows(a.rows(), a.cols(), &data)
                            .expect("probe shape"),
                    )
                }
            },
        };
        let probe = RcopInstance {
            name: format!("{}-probe", inst.name),
            domain: inst.domain,
            objective: probe_obj,
            constraints: inst.constraints.clone(),
        };
        let limited = SolveOptions { max_iter: opts.solve.max_iter.min(60_000), ..opts.solve.clone() };
        let psol = solve_dwr(&probe, &limited);
        if !psol.is_optimal() {
            continue;
        }
        let hunting = ReduceOptions { seek_high_rank: true, ..Default::default() };
        if let Ok(res) = reduce_optimal_face_with(&probe, &psol, opts.report_tol.max(1e-6), &hunting)
        {
            witness_ranks.push(res.rank);
        }
    }
    let extreme_point = if witness_ranks.is_empty() {
        TriState::Unknown
    } else if witness_ranks.iter().any(|&r| r > k) {
        TriState::False
    } else {
        TriState::True
    };

    let verification = verify_objective(inst, &sol, extracted.as_ref(), opts);
    let (objective, gap, v_ub) = (verification.verdict, verification.gap, verification.v_ub);
    if extracted.is_none() && objective == TriState::True {
        extracted = verification.witness;
    }

    let bounded = feasible_set_bounded(inst, &opts.solve);
    let convex_hull = match bounded {
        Some(true) => extreme_point,
        _ => TriState::Unknown,
    };

    let report = ExactnessReport {
        m,
        m_tilde,
        m_bind: analysis.m_bind,
        m_star: analysis.support.m_star,
        predictions,
        verified: Verified { extreme_point, objective, convex_hull },
        gap,
        v_ub,
        extracted,
    };
    Certified { solution: sol, report }
}

/// Extreme-point witness rank of the solved instance (used in tests).
pub fn witness_rank(inst: &RcopInstance, sol: &DwrSolution, tol: f64) -> Option<usize> {
    reduce_optimal_face(inst, sol, tol).ok().map(|r| r.rank)
}

pub use report::{read_report, report_to_json, write_report, Report};

mod report {
    use super::*;
    use crate::model::ModelError;

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct MatrixJson {
        pub rows: usize,
        pub cols: usize,
        pub data: Vec<f64>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct Report {
        pub name: String,
        pub status: String,
        pub v_rel: f64,
        pub x_star: MatrixJson,
        pub rank: usize,
        pub multipliers: Multipliers,
        pub residuals: Residuals,
        pub iterations: usize,
        pub m: usize,
        pub m_tilde: usize,
        pub m_bind: usize,
        pub m_star: Option<usize>,
        pub predictions: Vec<Prediction>,
        pub verified: Verified,
        pub gap: Option<f64>,
        pub v_ub: Option<f64>,
        pub extracted: Option<MatrixJson>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct Multipliers {
        pub upper: Vec<f64>,
        pub lower: Vec<f64>,
    }

    #[derive(Debug, Clone, Serialize, Deserialize)]
    pub struct Residuals {
        pub primal: f64,
        pub dual: f64,
        pub complementarity: f64,
    }

    fn mat_json(m: &Mat) -> MatrixJson {
        let (rows, cols) = m.shape();
        MatrixJson { rows, cols, data: m.data().to_vec() }
    }

    pub fn build_report(name: &str, certified: &Certified) -> Report {
        let sol = &certified.solution;
        let rep = &certified.report;
        Report {
            name: name.to_string(),
            status: match sol.status {
                SolveStatus::Optimal => "optimal",
                SolveStatus::MaxIter => "max_iter",
                SolveStatus::InfeasibleLinear => "infeasible_linear",
                SolveStatus::Unbounded => "unbounded",
            }
            .to_string(),
            v_rel: sol.v_rel,
            x_star: mat_json(&sol.x_star),
            rank: super::matrix_rank(&sol.x_star, 1e-7),
            multipliers: Multipliers { upper: sol.mu_upper.clone(), lower: sol.mu_lower.clone() },
            residuals: Residuals {
                primal: sol.primal_residual,
                dual: sol.dual_residual,
                complementarity: sol.complementarity,
            },
            iterations: sol.iterations,
            m: rep.m,
            m_tilde: rep.m_tilde,
            m_bind: rep.m_bind,
            m_star: rep.m_star,
            predictions: rep.predictions.clone(),
            verified: rep.verified.clone(),
            gap: rep.gap,
            v_ub: rep.v_ub,
            extracted: rep.extracted.as_ref().map(mat_json),
        }
    }

    pub fn report_to_json(name: &str, certified: &Certified) -> String {
        serde_json::to_string_pretty(&build_report(name, certified))
            .expect("report serialization cannot fail")
    }

    pub fn write_report(path: &std::path::Path, name: &str, certified: &Certified) -> Result<(), ModelError> {
        std::fs::write(path, report_to_json(name, certified))?;
        Ok(())
    }

    pub fn read_report(path: &std::path::Path) -> Result<Report, ModelError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| ModelError::Parse { path: "$".into(), message: e.to_string() })
    }
}
