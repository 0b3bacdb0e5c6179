//! Multi-start local search over the rank-constrained domain set. Produces
//! domain-feasible points and hence upper bounds `v_ub >= V_opt >= V_rel`
//! used by the objective-exactness certificates.
//!
//! Lifted QCQP instances are searched directly in the vector variable; the
//! other kinds in a rank-k factor parameterization with the spectral cap
//! enforced by projection. Constraint handling is an augmented Lagrangian
//! on the two-sided interval; inner steps are Barzilai-Borwein gradient
//! descent with a backtracking safeguard.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::facial::{reduce_to_extreme, Equality, Guard, ReduceOptions};
use crate::hull::{self, domain_contains};
use crate::matrixcore::{eig_sym, svd_rect, RectMatrix, SymMatrix};
use crate::model::{lift_marker, lift_vector, Mat, RcopInstance};

use super::{solve_dwr, DwrSolution, SolveOptions};

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub starts: usize,
    pub seed: u64,
    pub outer_rounds: usize,
    pub inner_iters: usize,
    /// Relative feasibility tolerance for accepting a candidate.
    pub feas_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { starts: 32, seed: 0, outer_rounds: 14, inner_iters: 160, feas_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub x: Mat,
    pub value: f64,
}

/// Runs the oracle with its own relaxation warm start.
pub fn nonconvex_oracle(inst: &RcopInstance, starts: usize, seed: u64) -> Option<OracleSolution> {
    let opts = OracleOptions { starts, seed, ..Default::default() };
    let sol = solve_dwr(inst, &SolveOptions::default());
    let warm = if sol.is_optimal() { warm_candidates(inst, &sol) } else { Vec::new() };
    nonconvex_oracle_with_warm(inst, &warm, &opts)
}

/// Domain-feasible warm candidates derived from a relaxation solution:
/// the rank-reduced optimal-face point and its rank-k truncation.
pub fn warm_candidates(inst: &RcopInstance, sol: &DwrSolution) -> Vec<Mat> {
    let h = hull::hull_of(&inst.domain);
    let mut cands = Vec::new();
    let mut equalities = vec![Equality { a: inst.objective.clone(), value: sol.v_rel }];
    let mut guards = Vec::new();
    let bind_tol = 1e-6;
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
    if let Ok(res) = reduce_to_extreme(&h, &sol.x_star, &equalities, &guards, &ReduceOptions::default())
    {
        cands.push(res.x);
    }
    cands.push(truncate_to_domain(&h, &sol.x_star));
    cands
}

/// Nearest rank-k domain representative of a hull point (spectral
/// truncation plus cap clipping).
fn truncate_to_domain(h: &hull::HullDescriptor, x: &Mat) -> Mat {
    let capped = h.kind != crate::model::DomainKind::PsdRankK;
    match x {
        Mat::Sym(a) => {
            let eig = eig_sym(a).expect("finite");
            let vals: Vec<f64> = eig
                .values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    if j >= h.k {
                        0.0
                    } else if capped {
                        v.clamp(0.0, 1.0)
                    } else {
                        v.max(0.0)
                    }
                })
                .collect();
            Mat::Sym(eig.reassemble(&vals))
        }
        Mat::Rect(a) => {
            let svd = svd_rect(a).expect("finite");
            let vals: Vec<f64> = svd
                .sigma
                .iter()
                .enumerate()
                .map(|(j, &s)| if j >= h.k { 0.0 } else { s.min(1.0) })
                .collect();
            Mat::Rect(svd.reassemble(&vals))
        }
    }
}

pub fn nonconvex_oracle_with_warm(
    inst: &RcopInstance,
    warm: &[Mat],
    opts: &OracleOptions,
) -> Option<OracleSolution> {
    let h = hull::hull_of(&inst.domain);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<OracleSolution> = None;

    let consider = |x: Mat, best: &mut Option<OracleSolution>| {
        if !domain_contains(&h, &x, 1e-6) {
            return;
        }
        if inst.max_violation(&x) > opts.feas_tol.max(1e-8) {
            return;
        }
        let value = inst.objective.inner(&x);
        if best.as_ref().map_or(true, |b| value < b.value) {
            *best = Some(OracleSolution { x, value });
        }
    };

    for w in warm {
        consider(w.clone(), &mut best);
    }

    let lift = lift_marker(inst);
    for start in 0..opts.starts.max(1) {
        let candidate = if let Some(marker) = lift {
            search_lifted(inst, marker, warm, start, &mut rng, opts)
        } else {
            search_factored(inst, &h, warm, start, &mut rng, opts)
        };
        if let Some(x) = candidate {
            consider(x, &mut best);
        }
    }
    best
}

/// Augmented-Lagrangian weight of an interval constraint: with `s` the
/// projection of `v + lam/rho` onto the interval, the weight
/// `lam + rho (v - s)` is simultaneously the penalty-gradient factor, the
/// next multiplier, and zero on inactive constraints.
fn interval_al(v: f64, lo: f64, hi: f64, lam: f64, rho: f64) -> f64 {
    let shifted = v + lam / rho;
    let s = shifted.clamp(lo, hi);
    lam + rho * (v - s)
}

fn search_lifted(
    inst: &RcopInstance,
    marker: usize,
    warm: &[Mat],
    start: usize,
    rng: &mut ChaCha8Rng,
    opts: &OracleOptions,
) -> Option<Mat> {
    let n = inst.domain.n - 1;
    // quadratic data in x: value = <A, lift(x)> = a00 + 2 a[0,1:]^T x + x^T A[1:,1:] x
    let eval = |a: &Mat, x: &[f64]| -> f64 {
        let mut v = a.get(0, 0);
        for i in 0..n {
            v += 2.0 * a.get(0, i + 1) * x[i];
            for j in 0..n {
                v += a.get(i + 1, j + 1) * x[i] * x[j];
            }
        }
        v
    };
    let grad = |a: &Mat, x: &[f64], g: &mut [f64], w: f64| {
        for i in 0..n {
            let mut gi = 2.0 * a.get(0, i + 1);
            for j in 0..n {
                gi += 2.0 * a.get(i + 1, j + 1) * x[j];
            }
            g[i] += w * gi;
        }
    };

    let mut x: Vec<f64> = if start == 0 && !warm.is_empty() {
        let w = &warm[0];
        let x11 = w.get(0, 0).max(1e-9);
        (0..n).map(|i| w.get(i + 1, 0) / x11).collect()
    } else {
        (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect()
    };

    let cons: Vec<usize> = (0..inst.m()).filter(|&i| i != marker).collect();
    let mut lam = vec![0.0; cons.len()];
    let mut rho = 10.0;

    for _round in 0..opts.outer_rounds {
        // inner BB gradient descent on the AL function
        let mut g = vec![0.0; n];
        let al_grad = |x: &[f64], lam: &[f64], g: &mut Vec<f64>| -> f64 {
            g.iter_mut().for_each(|v| *v = 0.0);
            let mut val = eval(&inst.objective, x);
            grad(&inst.objective, x, g, 1.0);
            for (idx, &ci) in cons.iter().enumerate() {
                let c = &inst.constraints[ci];
                let v = eval(&c.a, x);
                let w = interval_al(v, c.lo, c.hi, lam[idx], rho);
                val += 0.5 / rho * w * w;
                grad(&c.a, x, g, w);
            }
            val
        };
        let mut fx = al_grad(&x, &lam, &mut g);
        let mut step = 1.0 / (1.0 + g.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut x_prev = x.clone();
        let mut g_prev = g.clone();
        for it in 0..opts.inner_iters {
            let mut trial = x.clone();
            for i in 0..n {
                trial[i] -= step * g[i];
            }
            let mut gt = vec![0.0; n];
            let ft = al_grad(&trial, &lam, &mut gt);
            if ft <= fx - 1e-14 * fx.abs() || ft < fx {
                // BB step from the accepted move
                let mut sy = 0.0;
                let mut ss = 0.0;
                for i in 0..n {
                    let s = trial[i] - x_prev[i];
                    let yv = gt[i] - g_prev[i];
                    sy += s * yv;
                    ss += s * s;
                }
                x_prev = x.clone();
                g_prev = g.clone();
                x = trial;
                g = gt;
                fx = ft;
                step = if sy > 1e-16 { (ss / sy).clamp(1e-9, 1e4) } else { step * 1.5 };
            } else {
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
            if g.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-12 && it > 5 {
                break;
            }
        }
        // multiplier update and mild penalty growth
        for (idx, &ci) in cons.iter().enumerate() {
            let c = &inst.constraints[ci];
            let v = eval(&c.a, &x);
            lam[idx] = interval_al(v, c.lo, c.hi, lam[idx], rho);
        }
        rho = (rho * 4.0).min(1e9);
    }
    kkt_polish_lifted(inst, &cons, &mut x, &lam);
    Some(Mat::Sym(lift_vector(&x)))
}

/// Newton polish of the stationarity system on the active constraint set:
/// `grad f + sum lam_a grad g_a = 0`, `g_a = bound_a`. Quadratically sharp
/// near a regular local optimum; kept only if it improves feasibility and
/// does not worsen the objective.
fn kkt_polish_lifted(inst: &RcopInstance, cons: &[usize], x: &mut Vec<f64>, lam_warm: &[f64]) {
    let n = inst.domain.n - 1;
    let eval = |a: &Mat, x: &[f64]| -> f64 {
        let mut v = a.get(0, 0);
        for i in 0..n {
            v += 2.0 * a.get(0, i + 1) * x[i];
            for j in 0..n {
                v += a.get(i + 1, j + 1) * x[i] * x[j];
            }
        }
        v
    };
    let grad_vec = |a: &Mat, x: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let mut gi = 2.0 * a.get(0, i + 1);
                for j in 0..n {
                    gi += 2.0 * a.get(i + 1, j + 1) * x[j];
                }
                gi
            })
            .collect()
    };
    // active set from the warm multipliers and near-binding values
    let act_tol = 1e-5;
    let mut active: Vec<(usize, f64)> = Vec::new(); // (constraint index, bound)
    for (idx, &ci) in cons.iter().enumerate() {
        let c = &inst.constraints[ci];
        let v = eval(&c.a, x);
        let near_hi = c.hi.is_finite() && (v - c.hi).abs() <= act_tol * (1.0 + c.hi.abs());
        let near_lo = c.lo.is_finite() && (v - c.lo).abs() <= act_tol * (1.0 + c.lo.abs());
        if near_hi && (lam_warm[idx] >= 0.0 || !near_lo) {
            active.push((ci, c.hi));
        } else if near_lo {
            active.push((ci, c.lo));
        }
    }
    let m_act = active.len();
    let dim = n + m_act;
    let mut z: Vec<f64> = x.clone();
    let mut mults: Vec<f64> = active
        .iter()
        .map(|(ci, _)| {
            let idx = cons.iter().position(|c| c == ci).unwrap();
            lam_warm[idx]
        })
        .collect();

    let system = |z: &[f64], mults: &[f64]| -> (Vec<f64>, Vec<Vec<f64>>) {
        // residual and Jacobian columns (column-major) of the KKT system
        let mut res = grad_vec(&inst.objective, z);
        for (a, (ci, _)) in mults.iter().zip(&active) {
            let g = grad_vec(&inst.constraints[*ci].a, z);
            for i in 0..n {
                res[i] += a * g[i];
            }
        }
        for (ci, bound) in &active {
            res.push(eval(&inst.constraints[*ci].a, z) - bound);
        }
        let mut cols = Vec::with_capacity(dim);
        for j in 0..n {
            // d residual / d z_j
            let mut col = vec![0.0; n + m_act];
            for i in 0..n {
                let mut h = 2.0 * inst.objective.get(i + 1, j + 1);
                for (a, (ci, _)) in mults.iter().zip(&active) {
                    h += 2.0 * a * inst.constraints[*ci].a.get(i + 1, j + 1);
                }
                col[i] = h;
            }
            for (t, (ci, _)) in active.iter().enumerate() {
                col[n + t] = grad_vec(&inst.constraints[*ci].a, z)[j];
            }
            cols.push(col);
        }
        for (t, (ci, _)) in active.iter().enumerate() {
            let mut col = vec![0.0; n + m_act];
            let g = grad_vec(&inst.constraints[*ci].a, z);
            col[..n].copy_from_slice(&g);
            let _ = t;
            cols.push(col);
        }
        (res, cols)
    };

    for _ in 0..30 {
        let (res, cols) = system(&z, &mults);
        let rnorm: f64 = res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm < 1e-13 {
            break;
        }
        let neg: Vec<f64> = res.iter().map(|v| -v).collect();
        let step = super::nnls::lstsq_columns(&cols, &neg);
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let zt: Vec<f64> = (0..n).map(|i| z[i] + t * step[i]).collect();
            let mt: Vec<f64> = (0..m_act).map(|i| mults[i] + t * step[n + i]).collect();
            let (rt, _) = system(&zt, &mt);
            let rt_norm: f64 = rt.iter().map(|v| v * v).sum::<f64>().sqrt();
            if rt_norm < rnorm {
                z = zt;
                mults = mt;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    // accept only if feasibility holds and the objective did not get worse
    let feas = |x: &[f64]| -> f64 {
        cons.iter()
            .map(|&ci| {
                let c = &inst.constraints[ci];
                let v = eval(&c.a, x);
                let hi = if c.hi.is_finite() { (v - c.hi).max(0.0) / (1.0 + c.hi.abs()) } else { 0.0 };
                let lo = if c.lo.is_finite() { (c.lo - v).max(0.0) / (1.0 + c.lo.abs()) } else { 0.0 };
                hi.max(lo)
            })
            .fold(0.0f64, f64::max)
    };
    let f_old = eval(&inst.objective, x);
    let f_new = eval(&inst.objective, &z);
    if feas(&z) <= feas(x).max(1e-9) && f_new <= f_old + 1e-9 * (1.0 + f_old.abs()) {
        *x = z;
    }
}

/// Factor-space search for the non-lifted kinds. Symmetric kinds use
/// `X = V V^T`; the rectangular kind uses `X = L R^T`. The spectral cap is
/// enforced by projecting through the domain truncation.
fn search_factored(
    inst: &RcopInstance,
    h: &hull::HullDescriptor,
    warm: &[Mat],
    start: usize,
    rng: &mut ChaCha8Rng,
    opts: &OracleOptions,
) -> Option<Mat> {
    let k = h.k;
    let (n, p) = (h.n, h.p);
    let sym = h.is_symmetric();
    let capped = h.kind != crate::model::DomainKind::PsdRankK;
    let dim = if sym { n * k } else { n * k + p * k };

    let assemble = |z: &[f64]| -> Mat {
        if sym {
            let mut x = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for t in 0..k {
                        s += z[i * k + t] * z[j * k + t];
                    }
                    x.set_sym(i, j, s);
                }
            }
            Mat::Sym(x)
        } else {
            let l = &z[..n * k];
            let r = &z[n * k..];
            let mut x = RectMatrix::zeros(n, p).expect("valid shape");
            for i in 0..n {
                for j in 0..p {
                    let mut s = 0.0;
                    for t in 0..k {
                        s += l[i * k + t] * r[j * k + t];
                    }
                    x.set(i, j, s);
                }
            }
            Mat::Rect(x)
        }
    };
    // gradient of <A, X(z)> with respect to the factors
    let add_grad = |a: &Mat, z: &[f64], g: &mut [f64], w: f64| {
        if sym {
            for i in 0..n {
                for t in 0..k {
                    let mut s = 0.0;
                    for j in 0..n {
                        s += a.get(i, j) * z[j * k + t];
                    }
                    g[i * k + t] += 2.0 * w * s;
                }
            }
        } else {
            let (l, r) = z.split_at(n * k);
            for i in 0..n {
                for t in 0..k {
                    let mut s = 0.0;
                    for j in 0..p {
                        s += a.get(i, j) * r[j * k + t];
                    }
                    g[i * k + t] += w * s;
                }
            }
            for j in 0..p {
                for t in 0..k {
                    let mut s = 0.0;
                    for i in 0..n {
                        s += a.get(i, j) * l[i * k + t];
                    }
                    g[n * k + j * k + t] += w * s;
                }
            }
        }
    };
    let factor_of = |x: &Mat| -> Vec<f64> {
        let mut z = vec![0.0; dim];
        match x {
            Mat::Sym(a) => {
                let eig = eig_sym(a).expect("finite");
                for t in 0..k.min(n) {
                    let lam = eig.values[t].max(0.0);
                    let s = lam.sqrt();
                    for i in 0..n {
                        z[i * k + t] = s * eig.vector(t)[i];
                    }
                }
            }
            Mat::Rect(a) => {
                let svd = svd_rect(a).expect("finite");
                for t in 0..k.min(n) {
                    let s = svd.sigma[t].max(0.0).sqrt();
                    for i in 0..n {
                        z[i * k + t] = s * svd.left(t)[i];
                    }
                    for j in 0..p {
                        z[n * k + j * k + t] = s * svd.right(t)[j];
                    }
                }
            }
        }
        z
    };
    let cap_project = |z: &mut Vec<f64>| {
        if !capped {
            return;
        }
        let x = assemble(z);
        let trunc = truncate_to_domain(h, &x);
        *z = factor_of(&trunc);
    };

    let mut z: Vec<f64> = if start < warm.len() {
        factor_of(&warm[start])
    } else {
        (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };
    cap_project(&mut z);

    let mut lam = vec![0.0; inst.m()];
    let mut rho = 10.0;
    for _round in 0..opts.outer_rounds {
        let al_grad = |z: &[f64], lam: &[f64], g: &mut Vec<f64>| -> f64 {
            g.iter_mut().for_each(|v| *v = 0.0);
            let x = assemble(z);
            let mut val = inst.objective.inner(&x);
            add_grad(&inst.objective, z, g, 1.0);
            for (i, c) in inst.constraints.iter().enumerate() {
                let v = c.a.inner(&x);
                let w = interval_al(v, c.lo, c.hi, lam[i], rho);
                val += 0.5 / rho * w * w;
                add_grad(&c.a, z, g, w);
            }
            val
        };
        let mut g = vec![0.0; dim];
        let mut fz = al_grad(&z, &lam, &mut g);
        let mut step = 0.1 / (1.0 + g.iter().map(|v| v * v).sum::<f64>().sqrt());
        for _it in 0..opts.inner_iters {
            let mut trial: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            cap_project(&mut trial);
            let mut gt = vec![0.0; dim];
            let ft = al_grad(&trial, &lam, &mut gt);
            if ft < fz {
                z = trial;
                g = gt;
                fz = ft;
                step *= 1.3;
            } else {
                step *= 0.5;
                if step < 1e-16 {
                    break;
                }
            }
        }
        let x = assemble(&z);
        for (i, c) in inst.constraints.iter().enumerate() {
            let v = c.a.inner(&x);
            lam[i] = interval_al(v, c.lo, c.hi, lam[i], rho);
        }
        rho = (rho * 4.0).min(1e9);
    }
    Some(assemble(&z))
}
