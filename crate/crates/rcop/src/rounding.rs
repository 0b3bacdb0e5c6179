//! Extraction of domain-feasible solutions from relaxation optima:
//! rank-one vector recovery for lifted QCQP, sign-definite off-diagonal
//! adjustment with two-coloring recovery, and generic rank-k factors.

use thiserror::Error;

use crate::hull::HullDescriptor;
use crate::matrixcore::{eig_sym, svd_rect, SymMatrix};
use crate::model::{lift_block, Mat, QcqpData};
use crate::signs::{balance_coloring, sign_graph};

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("sign pattern is not sign-definite")]
    NotSignDefinite,
    #[error("signed graph is unbalanced; no consistent rank-one signs exist")]
    Unbalanced,
    #[error("adjusted point violates constraint {index} by {violation:.3e}")]
    InfeasibleAdjustment { index: usize, violation: f64 },
}

/// Recovers `x` from a rank-one lifted matrix `[1; x][1; x]^T`.
///
/// Returns `None` when the matrix is not numerically rank one or its
/// corner is not one.
pub fn extract_qcqp(x_star: &SymMatrix) -> Option<Vec<f64>> {
    let n1 = x_star.order();
    if n1 < 2 {
        return None;
    }
    let tol = 1e-6;
    let eig = eig_sym(x_star).ok()?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return None;
    }
    let rank = eig.values.iter().filter(|&&v| v.abs() > tol * top.max(1.0)).count();
    if rank != 1 {
        return None;
    }
    if (x_star.get(0, 0) - 1.0).abs() > tol {
        return None;
    }
    let x: Vec<f64> = (1..n1).map(|i| x_star.get(i, 0)).collect();
    // consistency of the quadratic block
    let mut err = 0.0f64;
    for i in 1..n1 {
        for j in 1..n1 {
            let d = x[i - 1] * x[j - 1] - x_star.get(i, j);
            err += d * d;
        }
    }
    if err.sqrt() > 1e-6 * (1.0 + x_star.norm_fro()) {
        return None;
    }
    Some(x)
}

#[derive(Debug, Clone)]
pub struct RoundedSolution {
    /// Lifted rank-one matrix after adjustment.
    pub x_hat: SymMatrix,
    /// Recovered vector (the lifted coordinates divided by the corner).
    pub x: Vec<f64>,
}

/// Sign-definite rounding: replaces off-diagonal entries that violate the
/// rank-one correlation by `-sigma_ij sqrt(X_ii X_jj)` and recovers a
/// vector through the balanced two-coloring.
///
/// Requires a sign-definite, balanced pattern (see
/// [`crate::certify::sign_definite_check`]). The result never increases
/// the objective and never breaks one-sided feasibility, because every
/// adjusted entry moves opposite to the shared sign of the data.
pub fn sign_definite_round(q: &QcqpData, x_star: &SymMatrix) -> Result<RoundedSolution, RoundingError> {
    let g = sign_graph(q);
    if !g.sign_definite {
        return Err(RoundingError::NotSignDefinite);
    }
    let Some(coloring) = balance_coloring(&g) else {
        return Err(RoundingError::Unbalanced);
    };
    let n1 = x_star.order();

    // adjustment pass in decreasing violation order (kept for determinism;
    // the final vector recovery subsumes it)
    let mut work = x_star.clone();
    let mut order: Vec<(usize, usize, i8)> = g.edges.clone();
    order.sort_by(|a, b| {
        let va = (work.get(a.0, a.1).powi(2) - work.get(a.0, a.0) * work.get(a.1, a.1)).abs();
        let vb = (work.get(b.0, b.1).powi(2) - work.get(b.0, b.0) * work.get(b.1, b.1)).abs();
        vb.partial_cmp(&va).unwrap()
    });
    for (i, j, sigma) in order {
        let target = -(sigma as f64) * (work.get(i, i).max(0.0) * work.get(j, j).max(0.0)).sqrt();
        work.set_sym(i, j, target);
    }

    // vector recovery: component signs from the coloring, normalized so
    // the homogenizing coordinate is positive
    let mut signs: Vec<f64> = coloring.iter().map(|&s| s as f64).collect();
    if signs[0] < 0.0 {
        // flip the component containing node zero
        let flip = flood_component(&g, 0);
        for i in flip {
            signs[i] = -signs[i];
        }
    }
    let lifted: Vec<f64> = (0..n1).map(|i| signs[i] * x_star.get(i, i).max(0.0).sqrt()).collect();
    let x_hat = SymMatrix::outer(&lifted);
    let corner = lifted[0];
    let x: Vec<f64> = if corner.abs() > 1e-9 {
        (1..n1).map(|i| lifted[i] / corner).collect()
    } else {
        (1..n1).map(|i| lifted[i]).collect()
    };

    // feasibility audit against the one-sided constraints
    for (idx, c) in q.constraints.iter().enumerate() {
        let a = lift_block(&c.quad, &c.lin);
        let v = a.inner(&x_hat);
        let v_star = a.inner(x_star);
        let slack = if c.hi.is_finite() { (v - c.hi).max(0.0) } else { 0.0 };
        if slack > 1e-7 * (1.0 + c.hi.abs()) && v > v_star + 1e-9 * (1.0 + v_star.abs()) {
            return Err(RoundingError::InfeasibleAdjustment { index: idx, violation: slack });
        }
    }
    Ok(RoundedSolution { x_hat, x })
}

/// Rank-k spectral factor of a hull point: columns `left[t] right[t]^T`
/// summing to the input within tolerance, or `None` when the numerical
/// rank exceeds `k`.
#[derive(Debug, Clone)]
pub struct RankKFactor {
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
}

impl RankKFactor {
    pub fn reconstruct(&self, template: &Mat) -> Mat {
        let mut m = template.zeros_like();
        let (rows, cols) = m.shape();
        let data = m.data_mut();
        for (l, r) in self.left.iter().zip(&self.right) {
            for i in 0..rows {
                for j in 0..cols {
                    data[i * cols + j] += l[i] * r[j];
                }
            }
        }
        m
    }
}

pub fn extract_rank_k(h: &HullDescriptor, x_star: &Mat, k: usize) -> Option<RankKFactor> {
    if x_star.shape() != (h.n, h.p) {
        return None;
    }
    let tol = 1e-6;
    let factor = match x_star {
        Mat::Sym(a) => {
            let eig = eig_sym(a).ok()?;
            let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
            let rank = eig.values.iter().filter(|&&v| v.abs() > tol * top).count();
            if rank > k {
                return None;
            }
            let mut left = Vec::new();
            for j in 0..rank.min(k) {
                let lam = eig.values[j];
                if lam <= 0.0 {
                    return None; // indefinite input cannot factor as V V^T
                }
                let s = lam.sqrt();
                left.push(eig.vector(j).iter().map(|v| s * v).collect());
            }
            RankKFactor { right: left.clone(), left }
        }
        Mat::Rect(a) => {
            let svd = svd_rect(a).ok()?;
            let top = svd.sigma.first().copied().unwrap_or(0.0).max(1.0);
            let rank = svd.sigma.iter().filter(|&&v| v > tol * top).count();
            if rank > k {
                return None;
            }
            let mut left = Vec::new();
            let mut right = Vec::new();
            for j in 0..rank.min(k) {
                let s = svd.sigma[j].sqrt();
                left.push(svd.left(j).iter().map(|v| s * v).collect());
                right.push(svd.right(j).iter().map(|v| s * v).collect());
            }
            RankKFactor { left, right }
        }
    };
    let rec = factor.reconstruct(x_star);
    if rec.sub(x_star).norm_fro() > 1e-6 * (1.0 + x_star.norm_fro()) {
        return None;
    }

    Some(factor)
}

fn flood_component(g: &crate::signs::SignGraph, root: usize) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); g.nodes];
    for &(i, j, _) in &g.edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; g.nodes];
    seen[root] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    let mut out = vec![root];
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                out.push(v);
                queue.push_back(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lift_vector;

    #[test]
    fn extract_inverts_lift() {
        let x = vec![1.0, -2.0];
        let lifted = lift_vector(&x);
        let got = extract_qcqp(&lifted).expect("rank-one lift extracts");
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_rejects_rank_two() {
        let mut m = lift_vector(&[1.0, 0.0]);
        m.set_sym(2, 2, 1.0); // adds a second eigendirection
        assert!(extract_qcqp(&m).is_none());
    }

    #[test]
    fn round_keeps_rank_one_unchanged() {
        let q = QcqpData {
            obj_quad: SymMatrix::diag(&[1.0]),
            obj_lin: vec![-1.0],
            constraints: vec![],
        };
        let x_star = lift_vector(&[0.5]);
        let r = sign_definite_round(&q, &x_star).unwrap();
        let mut diff = r.x_hat.clone();
        diff.axpy(-1.0, &x_star);
        assert!(diff.norm_fro() < 1e-12);
        assert!((r.x[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn round_identity_with_neutral_offdiagonals() {
        // 2x2 lifted identity with zero (1,2) entries everywhere: the
        // formula fills X_12 = +1 and the result is rank one
        let q = QcqpData {
            obj_quad: SymMatrix::diag(&[0.5]),
            obj_lin: vec![0.0],
            constraints: vec![],
        };
        let x_star = SymMatrix::identity(2);
        let r = sign_definite_round(&q, &x_star).unwrap();
        assert!((r.x_hat.get(0, 1) - 1.0).abs() < 1e-12);
        let eig = eig_sym(&r.x_hat).unwrap();
        assert!(eig.values[1].abs() < 1e-12, "rank one");
    }

    #[test]
    fn rank_k_factor_round_trip() {
        let h = crate::hull::hull_of(&crate::model::DomainSpec::psd_rank_k(3, 2).unwrap());
        let mut x = SymMatrix::outer(&[1.0, 0.0, 1.0]);
        x.axpy(0.5, &SymMatrix::outer(&[0.0, 1.0, -1.0]));
        let f = extract_rank_k(&h, &Mat::Sym(x.clone()), 2).expect("rank-two factor");
        let rec = f.reconstruct(&Mat::Sym(SymMatrix::zeros(3)));
        assert!(rec.sub(&Mat::Sym(x.clone())).norm_fro() < 1e-9);
        assert!(extract_rank_k(&h, &Mat::Sym(x), 1).is_none(), "rank cap enforced");
    }
}
