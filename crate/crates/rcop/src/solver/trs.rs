//! Analytic trust-region subproblem oracle: minimize
//! `x^T Q x + q^T x` over the unit ball via eigendecomposition and a
//! secular-equation root solve on the shift multiplier.

use crate::matrixcore::{eig_sym, SymMatrix};

#[derive(Debug, Clone)]
pub struct TrsSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Shift multiplier: `(Q + lambda I) x = -q/2`, `lambda >= 0`.
    pub lambda: f64,
}

pub fn solve_trs_oracle(q0: &SymMatrix, q_lin: &[f64]) -> TrsSolution {
    let n = q0.order();
    let eig = eig_sym(q0).expect("finite symmetric input");
    // target in the eigenbasis: (Lambda + lambda I) z = c with c = Q^T(-q/2)
    let c: Vec<f64> = (0..n)
        .map(|j| {
            let v = eig.vector(j);
            -0.5 * v.iter().zip(q_lin).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    let lam_min = eig.values.last().copied().unwrap_or(0.0);
    let scale = eig.values.first().copied().unwrap_or(0.0).abs().max(1.0);

    let norm_sq = |shift: f64| -> f64 {
        (0..n)
            .map(|j| {
                let d = eig.values[j] + shift;
                if d.abs() < 1e-300 {
                    if c[j].abs() > 0.0 {
                        return f64::INFINITY;
                    }
                    return 0.0;
                }
                (c[j] / d) * (c[j] / d)
            })
            .sum()
    };
    let x_at = |shift: f64| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for j in 0..n {
            let d = eig.values[j] + shift;
            if d.abs() < 1e-300 {
                continue;
            }
            let z = c[j] / d;
            for i in 0..n {
                x[i] += z * eig.vector(j)[i];
            }
        }
        x
    };
    let finish = |x: Vec<f64>, lambda: f64| -> TrsSolution {
        let value = q0.quad_form(&x) + q_lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        TrsSolution { x, value, lambda }
    };

    // interior solution when Q is positive definite and the step fits
    if lam_min > 1e-14 * scale && norm_sq(0.0) <= 1.0 {
        return finish(x_at(0.0), 0.0);
    }

    let lam_req = (-lam_min).max(0.0);
    // component of c on the bottom eigenspace decides the hard case
    let bottom_tol = 1e-12 * scale;
    let bottom_mass: f64 = (0..n)
        .filter(|&j| (eig.values[j] - lam_min).abs() <= bottom_tol)
        .map(|j| c[j] * c[j])
        .sum();

    if bottom_mass <= (1e-12 * scale) * (1e-12 * scale) {
        // c is (numerically) orthogonal to the bottom eigenspace
        let at_req: f64 = (0..n)
            .filter(|&j| (eig.values[j] - lam_min).abs() > bottom_tol)
            .map(|j| {
                let d = eig.values[j] + lam_req;
                (c[j] / d) * (c[j] / d)
            })
            .sum();
        if at_req <= 1.0 {
            // hard case: pad with the bottom eigenvector to reach the sphere
            let mut x = vec![0.0; n];
            for j in 0..n {
                if (eig.values[j] - lam_min).abs() > bottom_tol {
                    let z = c[j] / (eig.values[j] + lam_req);
                    for i in 0..n {
                        x[i] += z * eig.vector(j)[i];
                    }
                }
            }
            let pad = (1.0 - at_req).max(0.0).sqrt();
            let bottom = eig.vector(n - 1);
            for i in 0..n {
                x[i] += pad * bottom[i];
            }
            return finish(x, lam_req);
        }
    }

    // secular root: ||x(shift)||^2 = 1 for shift in (lam_req, inf);
    // the norm decreases monotonically, so bisection is safe
    let mut lo = lam_req;
    let mut hi = lam_req.max(1.0);
    while norm_sq(hi) > 1.0 {
        hi = 2.0 * hi + 1.0;
        if hi > 1e18 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm_sq(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut x = x_at(lambda);
    // snap exactly onto the sphere to cancel bisection residue
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for v in &mut x {
            *v /= norm;
        }
    }
    finish(x, lambda)
}
