//! Constructive rank reduction: walk a feasible hull point down to an
//! extreme point of the intersection with pinned equalities, by null-space
//! steps inside the active eigen/singular block.
//!
//! Each step finds a nonzero symmetric direction orthogonal (in the
//! compressed block) to every pinned matrix, then line-searches to the
//! spectral boundary. Hitting zero drops the rank; hitting the cap freezes
//! an eigenvalue; hitting a guard bound pins that constraint. Pinned
//! values are preserved exactly because the move is linear and orthogonal
//! to every pinned matrix.

use thiserror::Error;

use crate::hull::{self, HullDescriptor};
use crate::matrixcore::{
    eig_sym, null_space_of_rows, numerical_rank, svd_rect, svec, unsvec, SymMatrix,
};
use crate::model::{DomainKind, Mat};

#[derive(Debug, Error)]
pub enum FacialError {
    #[error("starting point violates {what} by {violation:.3e}")]
    Precondition { what: String, violation: f64 },
    #[error("reduction did not terminate within {0} steps")]
    StepLimit(usize),
    #[error("decomposition failed: {0}")]
    Decomposition(#[from] crate::matrixcore::MatrixError),
}

/// Pinned equality `<A, X> = value`, preserved exactly by the reduction.
#[derive(Debug, Clone)]
pub struct Equality {
    pub a: Mat,
    pub value: f64,
}

/// Inequality that must keep holding during the reduction; it becomes a
/// pinned equality the moment a bound is hit.
#[derive(Debug, Clone)]
pub struct Guard {
    pub a: Mat,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone)]
pub struct ExtremePointResult {
    pub x: Mat,
    pub rank: usize,
    pub pinned: Vec<Equality>,
    pub steps: usize,
    pub bound_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ReduceOptions {
    /// Eigenvalues above `rank_tol * max(1, lambda_max)` count toward the rank.
    pub rank_tol: f64,
    /// Relative tolerance for pinned-value and guard checks.
    pub value_tol: f64,
    pub max_steps: usize,
    /// Prefer steps that freeze or pin over steps that drop the rank.
    /// Extraction wants low-rank endpoints (the default); witness hunting
    /// wants the opposite. Either preference terminates at an extreme
    /// point of the pinned system.
    pub seek_high_rank: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { rank_tol: 1e-7, value_tol: 1e-6, max_steps: 0, seek_high_rank: false }
    }
}

/// Largest integer `r` with `r (r + 1) <= 2 m_tilde`.
pub fn rank_bound(m_tilde: usize) -> usize {
    let mut r = (((8 * m_tilde + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    while (r + 1) * (r + 2) <= 2 * m_tilde {
        r += 1;
    }
    while r > 0 && r * (r + 1) > 2 * m_tilde {
        r -= 1;
    }
    r
}

/// Dimension of the minimal face of the PSD cone containing `x`:
/// `r (r + 1) / 2` for a rank-`r` point.
pub fn face_dimension_psd(x: &SymMatrix, tol: f64) -> usize {
    let eig = eig_sym(x).expect("finite symmetric input");
    let top = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let r = eig.values.iter().filter(|&&v| v > tol * top.max(1.0)).count();
    r * (r + 1) / 2
}

enum StepEvent {
    RankDrop,
    Freeze,
    BudgetHit,
    GuardPin(usize, f64),
    NoRoom,
}

struct Blocks {
    /// eigen/singular pairs in the open interval (ordered as in the
    /// decomposition); `left[j]`/`right[j]` are the block columns
    frac_vals: Vec<f64>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    rank: usize,
    total: f64,
    trace_binding: bool,
}

fn split_blocks(h: &HullDescriptor, x: &Mat, opts: &ReduceOptions) -> Result<Blocks, FacialError> {
    let capped = h.kind != DomainKind::PsdRankK;
    let freeze = 1e-7;
    match x {
        Mat::Sym(a) => {
            let eig = eig_sym(a)?;
            let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
            let cut = opts.rank_tol * top;
            let mut frac_vals = Vec::new();
            let mut left = Vec::new();
            let mut rank = 0;
            for (j, &lam) in eig.values.iter().enumerate() {
                if lam <= cut {
                    continue;
                }
                rank += 1;
                if capped && lam >= 1.0 - freeze {
                    continue; // frozen at the cap
                }
                frac_vals.push(lam);
                left.push(eig.vector(j).to_vec());
            }
            let total: f64 = eig.values.iter().filter(|&&v| v > cut).sum();
            let trace_binding = capped && (h.k as f64 - total) <= freeze * (1.0 + h.k as f64);
            Ok(Blocks { right: left.clone(), frac_vals, left, rank, total, trace_binding })
        }
        Mat::Rect(a) => {
            let svd = svd_rect(a)?;
            let top = svd.sigma.first().copied().unwrap_or(0.0).max(1.0);
            let cut = opts.rank_tol * top;
            let mut frac_vals = Vec::new();
            let mut left = Vec::new();
            let mut right = Vec::new();
            let mut rank = 0;
            for (j, &s) in svd.sigma.iter().enumerate() {
                if s <= cut {
                    continue;
                }
                rank += 1;
                if s >= 1.0 - freeze {
                    continue;
                }
                frac_vals.push(s);
                left.push(svd.left(j).to_vec());
                right.push(svd.right(j).to_vec());
            }
            let total: f64 = svd.sigma.iter().filter(|&&v| v > cut).sum();
            let trace_binding = (h.k as f64 - total) <= freeze * (1.0 + h.k as f64);
            Ok(Blocks { frac_vals, left, right, rank, total, trace_binding })
        }
    }
}

/// Compressed block `sym(U_f^T A V_f)` of a pinned matrix.
fn compress(blocks: &Blocks, a: &Mat) -> SymMatrix {
    let r = blocks.frac_vals.len();
    SymMatrix::from_fn(r, |i, j| {
        let u = &blocks.left[i];
        let v = &blocks.right[j];
        let mut s = 0.0;
        match a {
            Mat::Sym(m) => {
                let n = m.order();
                for p in 0..n {
                    let mut av = 0.0;
                    for q in 0..n {
                        av += m.get(p, q) * v[q];
                    }
                    s += u[p] * av;
                }
            }
            Mat::Rect(m) => {
                for p in 0..m.rows() {
                    let mut av = 0.0;
                    for q in 0..m.cols() {
                        av += m.get(p, q) * v[q];
                    }
                    s += u[p] * av;
                }
            }
        }
        s
    })
}

/// Expands a block direction `Delta` back to the ambient space:
/// `U_f Delta V_f^T` (symmetric when left == right).
fn expand(blocks: &Blocks, delta: &SymMatrix, template: &Mat) -> Mat {
    let r = blocks.frac_vals.len();
    let mut m = template.zeros_like();
    let (rows, cols) = m.shape();
    let data = m.data_mut();
    for a in 0..r {
        for b in 0..r {
            let w = delta.get(a, b);
            if w == 0.0 {
                continue;
            }
            let u = &blocks.left[a];
            let v = &blocks.right[b];
            for i in 0..rows {
                let ui = w * u[i];
                for j in 0..cols {
                    data[i * cols + j] += ui * v[j];
                }
            }
        }
    }
    if template.as_sym().is_some() {
        // symmetrize against rounding
        for i in 0..rows {
            for j in (i + 1)..rows {
                let avg = 0.5 * (data[i * cols + j] + data[j * cols + i]);
                data[i * cols + j] = avg;
                data[j * cols + i] = avg;
            }
        }
    }
    m
}

/// Largest step `delta >= 0` keeping the block spectrum inside `[0, cap]`,
/// found by doubling then bisection on the small block eigenproblem.
fn spectral_step(frac: &[f64], delta: &SymMatrix, cap: Option<f64>) -> f64 {
    let r = frac.len();
    let feasible = |t: f64| -> bool {
        let m = SymMatrix::from_fn(r, |i, j| {
            delta.get(i, j) * t + if i == j { frac[i] } else { 0.0 }
        });
        match eig_sym(&m) {
            Ok(e) => {
                let min = e.values.last().copied().unwrap_or(0.0);
                let max = e.values.first().copied().unwrap_or(0.0);
                min >= 0.0 && cap.map_or(true, |c| max <= c)
            }
            Err(_) => false,
        }
    };
    let mut hi = 1.0f64;
    let mut grow = 0;
    while feasible(hi) {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + hi) {
            break;
        }
    }
    lo
}

/// Reduces `x0` to an extreme point of `{X in hull : pinned equalities}`,
/// promoting guards to pins as their bounds are hit.
pub fn reduce_to_extreme(
    h: &HullDescriptor,
    x0: &Mat,
    equalities: &[Equality],
    guards: &[Guard],
    opts: &ReduceOptions,
) -> Result<ExtremePointResult, FacialError> {
    let pre_tol = opts.value_tol.max(1e-9);
    if !hull::contains(h, x0, pre_tol) {
        return Err(FacialError::Precondition { what: "hull membership".into(), violation: f64::NAN });
    }
    for (i, eq) in equalities.iter().enumerate() {
        let v = eq.a.inner(x0);
        let err = (v - eq.value).abs() / (1.0 + eq.value.abs());
        if err > pre_tol {
            return Err(FacialError::Precondition { what: format!("equality {i}"), violation: err });
        }
    }
    for (i, g) in guards.iter().enumerate() {
        let v = g.a.inner(x0);
        let err = (g.lo - v).max(v - g.hi).max(0.0) / (1.0 + v.abs());
        if err > pre_tol {
            return Err(FacialError::Precondition { what: format!("guard {i}"), violation: err });
        }
    }

    let (n, p) = x0.shape();
    let max_steps = if opts.max_steps > 0 {
        opts.max_steps
    } else {
        n.max(p) * (n.max(p) + 1) / 2 + guards.len() + 4
    };

    let mut x = x0.clone();
    let mut pinned: Vec<Equality> = equalities.to_vec();
    let mut guards: Vec<Guard> = guards.to_vec();
    let mut steps = 0usize;
    let cap = if h.kind == DomainKind::PsdRankK { None } else { Some(1.0) };
    let bind_tol = opts.value_tol;

    loop {
        // promote guards sitting on a bound
        let mut remaining = Vec::new();
        for g in guards.drain(..) {
            let v = g.a.inner(&x);
            let at_lo = g.lo.is_finite() && (v - g.lo).abs() <= bind_tol * (1.0 + g.lo.abs());
            let at_hi = g.hi.is_finite() && (v - g.hi).abs() <= bind_tol * (1.0 + g.hi.abs());
            if at_lo || at_hi {
                pinned.push(Equality { a: g.a, value: v });
            } else {
                remaining.push(g);
            }
        }
        guards = remaining;

        let blocks = split_blocks(h, &x, opts)?;
        let r = blocks.frac_vals.len();
        if r == 0 {
            break;
        }

        // null space of the compressed pinned system (svec coordinates)
        let mut rows: Vec<Vec<f64>> = pinned.iter().map(|eq| svec(&compress(&blocks, &eq.a))).collect();
        if blocks.trace_binding {
            rows.push(svec(&SymMatrix::identity(r)));
        }
        let dim = r * (r + 1) / 2;
        let null = null_space_of_rows(&rows, dim, 1e-9);
        let Some(first) = null.first() else { break };
        let delta = unsvec(first, r);
        let direction = expand(&blocks, &delta, &x);

        // line-search bounds per direction sign
        let budget_room = if cap.is_some() && !blocks.trace_binding {
            h.k as f64 - blocks.total
        } else {
            f64::INFINITY
        };
        let trace_delta: f64 = (0..r).map(|i| delta.get(i, i)).sum();
        let assess = |sign: f64| -> (f64, StepEvent) {
            let signed = SymMatrix::from_fn(r, |i, j| sign * delta.get(i, j));
            let mut best = spectral_step(&blocks.frac_vals, &signed, cap);
            let mut event = if best.is_finite() { classify_spectral(&blocks, &signed, best, cap) } else { StepEvent::NoRoom };
            if budget_room.is_finite() && sign * trace_delta > 1e-14 {
                let t = budget_room / (sign * trace_delta);
                if t < best {
                    best = t;
                    event = StepEvent::BudgetHit;
                }
            }
            for (gi, g) in guards.iter().enumerate() {
                let rate = sign * g.a.inner(&direction);
                let v = g.a.inner(&x);
                if rate > 1e-14 && g.hi.is_finite() {
                    let t = (g.hi - v) / rate;
                    if t < best {
                        best = t;
                        event = StepEvent::GuardPin(gi, g.hi);
                    }
                } else if rate < -1e-14 && g.lo.is_finite() {
                    let t = (g.lo - v) / rate;
                    if t < best {
                        best = t;
                        event = StepEvent::GuardPin(gi, g.lo);
                    }
                }
            }
            (best, event)
        };

        let (d_plus, e_plus) = assess(1.0);
        let (d_minus, e_minus) = assess(-1.0);
        let prefer_drop = !opts.seek_high_rank;
        let pick_plus = match (&e_plus, &e_minus) {
            (StepEvent::NoRoom, _) => false,
            (_, StepEvent::NoRoom) => true,
            (StepEvent::RankDrop, StepEvent::RankDrop) => d_plus <= d_minus,
            (StepEvent::RankDrop, _) => prefer_drop,
            (_, StepEvent::RankDrop) => !prefer_drop,
            _ => d_plus <= d_minus,
        };
        let (delta_step, event) = if pick_plus { (d_plus, e_plus) } else { (d_minus, e_minus) };
        if !delta_step.is_finite() {
            // both directions unbounded cannot happen for a nonzero block
            // direction; treat as termination to stay safe
            break;
        }
        let sign = if pick_plus { 1.0 } else { -1.0 };
        x.axpy(sign * delta_step, &direction);
        if let StepEvent::GuardPin(gi, bound) = event {
            let g = guards.remove(gi);
            pinned.push(Equality { a: g.a, value: bound });
        }
        steps += 1;
        if steps > max_steps {
            return Err(FacialError::StepLimit(max_steps));
        }
    }

    let blocks = split_blocks(h, &x, opts)?;
    let rank = blocks.rank;
    let bound_ok = if h.kind == DomainKind::PsdRankK {
        let vecs: Vec<Vec<f64>> = pinned.iter().map(|eq| eq.a.flat_coords()).collect();
        let m_tilde = numerical_rank(&vecs, 1e-8);
        rank * (rank + 1) <= 2 * m_tilde
    } else {
        true
    };
    Ok(ExtremePointResult { x, rank, pinned, steps, bound_ok })
}

fn classify_spectral(blocks: &Blocks, signed: &SymMatrix, step: f64, cap: Option<f64>) -> StepEvent {
    let r = blocks.frac_vals.len();
    let m = SymMatrix::from_fn(r, |i, j| {
        signed.get(i, j) * step + if i == j { blocks.frac_vals[i] } else { 0.0 }
    });
    match eig_sym(&m) {
        Ok(e) => {
            let min = e.values.last().copied().unwrap_or(0.0);
            if min <= 1e-9 {
                StepEvent::RankDrop
            } else if cap.is_some() {
                StepEvent::Freeze
            } else {
                StepEvent::RankDrop
            }
        }
        Err(_) => StepEvent::RankDrop,
    }
}
