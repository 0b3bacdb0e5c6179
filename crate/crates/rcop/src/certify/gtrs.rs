//! Recession-direction certificate for the single-constraint quadratic
//! problem: given a direction `y` with `y^T Q1 y <= 0`, exhibits the lifted
//! ray point `x_hat + alpha D`, `D = blkdiag(0, y y^T)`, as a convex
//! combination of two rank-one feasible points.

use thiserror::Error;

use crate::matrixcore::{eig_sym, null_space_of_rows, SymMatrix};
use crate::model::lift_vector;

#[derive(Debug, Error)]
pub enum GtrsError {
    #[error("hypothesis violated: {inequality} (value {value:.3e})")]
    Hypothesis { inequality: String, value: f64 },
    #[error("constraint set is infeasible; no base point exists")]
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct GtrsCertificate {
    pub x_hat: SymMatrix,
    pub x1: SymMatrix,
    pub x2: SymMatrix,
    pub theta: f64,
    /// Certified ray direction (equals `blkdiag(0, y y^T)` up to the
    /// epsilon perturbation used in the doubly degenerate case).
    pub direction: SymMatrix,
    /// `|| theta X1 + (1 - theta) X2 - (x_hat + alpha D) ||_F` with `D`
    /// built from the input `y`.
    pub residual: f64,
    /// Worst violation of the quadratic constraint by `x1`/`x2`.
    pub feasibility: f64,
}

fn quad_value(q1: &SymMatrix, q_lin: &[f64], x: &[f64]) -> f64 {
    q1.quad_form(x) + q_lin.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

fn block_direction(n: usize, y: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(n + 1, |i, j| {
        if i == 0 || j == 0 {
            0.0
        } else {
            y[i - 1] * y[j - 1]
        }
    })
}

/// Feasible point of `{x : x^T Q1 x + q1^T x <= b1}`, optionally restricted
/// to the subspace orthogonal to `orth`. Searches analytically: zero, a
/// negative-curvature escape, a null-space escape along the linear term,
/// or the convex minimizer.
fn feasible_point(
    q1: &SymMatrix,
    q_lin: &[f64],
    b1: f64,
    orth: Option<&[f64]>,
) -> Option<Vec<f64>> {
    let n = q1.order();
    let basis: Vec<Vec<f64>> = match orth {
        Some(v) if v.iter().any(|&x| x != 0.0) => null_space_of_rows(&[v.to_vec()], n, 1e-12),
        _ => (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect(),
    };
    let d = basis.len();
    if d == 0 {
        return if b1 >= 0.0 { Some(vec![0.0; n]) } else { None };
    }
    let embed = |z: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (zb, b) in z.iter().zip(&basis) {
            for i in 0..n {
                x[i] += zb * b[i];
            }
        }
        x
    };
    let qr = SymMatrix::from_fn(d, |a, b| {
        let qa = q1.matvec(&basis[b]);
        basis[a].iter().zip(&qa).map(|(x, y)| x * y).sum()
    });
    let lr: Vec<f64> =
        basis.iter().map(|b| b.iter().zip(q_lin).map(|(x, y)| x * y).sum()).collect();
    let scale = 1.0 + qr.norm_fro() + lr.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tau = 1e-10 * scale;

    if b1 >= 0.0 {
        return Some(vec![0.0; n]);
    }
    let eig = eig_sym(&qr).ok()?;
    let lam_min = eig.values.last().copied().unwrap_or(0.0);
    let reduced_value = |z: &[f64]| -> f64 {
        qr.quad_form(z) + lr.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
    };
    if lam_min < -tau {
        // ride the negative-curvature direction until feasible
        let w = eig.vector(d - 1).to_vec();
        let lin: f64 = lr.iter().zip(&w).map(|(a, b)| a * b).sum();
        let w = if lin > 0.0 { w.iter().map(|v| -v).collect::<Vec<_>>() } else { w };
        let mut gamma = 1.0;
        for _ in 0..200 {
            let z: Vec<f64> = w.iter().map(|v| gamma * v).collect();
            if reduced_value(&z) <= b1 {
                return Some(embed(&z));
            }
            gamma *= 2.0;
        }
        return None;
    }
    // PSD block: escape along a kernel direction with a linear component
    for j in (0..d).rev() {
        if eig.values[j].abs() > tau {
            break;
        }
        let w = eig.vector(j).to_vec();
        let lin: f64 = lr.iter().zip(&w).map(|(a, b)| a * b).sum();
        if lin.abs() > tau {
            let sgn = -lin.signum();
            let mut gamma = 1.0;
            for _ in 0..200 {
                let z: Vec<f64> = w.iter().map(|v| sgn * gamma * v).collect();
                if reduced_value(&z) <= b1 {
                    return Some(embed(&z));
                }
                gamma *= 2.0;
            }
        }
    }
    // convex minimizer through the pseudo-inverse
    let mut z = vec![0.0; d];
    for j in 0..d {
        let lam = eig.values[j];
        if lam > tau {
            let c: f64 = eig.vector(j).iter().zip(&lr).map(|(a, b)| a * b).sum();
            let w = -0.5 * c / lam;
            for i in 0..d {
                z[i] += w * eig.vector(j)[i];
            }
        }
    }
    if reduced_value(&z) <= b1 + 1e-12 * (1.0 + b1.abs()) {
        Some(embed(&z))
    } else {
        None
    }
}

pub fn gtrs_recession_certificate(
    q1: &SymMatrix,
    q_lin: &[f64],
    b1: f64,
    y: &[f64],
    alpha: f64,
) -> Result<GtrsCertificate, GtrsError> {
    let n = q1.order();
    let y_norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y_norm == 0.0 {
        return Err(GtrsError::Hypothesis { inequality: "y != 0".into(), value: 0.0 });
    }
    if alpha < 0.0 {
        return Err(GtrsError::Hypothesis { inequality: "alpha >= 0".into(), value: alpha });
    }
    let scale = (1.0 + q1.norm_fro()) * (1.0 + y_norm * y_norm);
    let tol = 1e-9 * scale;
    let s = q1.quad_form(y);
    let t: f64 = q_lin.iter().zip(y).map(|(a, b)| a * b).sum();
    if s > tol {
        return Err(GtrsError::Hypothesis { inequality: "y^T Q1 y <= 0".into(), value: s });
    }

    let strict = s < -tol || t.abs() > tol;
    if strict {
        let y: Vec<f64> = if t > 0.0 { y.iter().map(|v| -v).collect() } else { y.to_vec() };
        let s = s.min(0.0);
        let t: f64 = q_lin.iter().zip(&y).map(|(a, b)| a * b).sum();
        let drop = s + t; // strictly negative here
        let gamma = if b1 >= 0.0 { 1.0 } else { (b1 / drop).max(1.0) * (1.0 + 1e-12) };
        return Ok(assemble_strict(q1, q_lin, b1, &y, alpha, gamma, block_direction(n, &y)));
    }

    // doubly degenerate: y^T Q1 y = 0 and q1^T y = 0
    let q1y = q1.matvec(y);
    let q1y_norm: f64 = q1y.iter().map(|v| v * v).sum::<f64>().sqrt();
    // exact route: a feasible base point orthogonal to Q1 y keeps both
    // split points on the same constraint value
    let orth = if q1y_norm > tol { Some(q1y.as_slice()) } else { None };
    if let Some(y_hat) = feasible_point(q1, q_lin, b1, orth) {
        let sqrt_a = alpha.sqrt();
        let plus: Vec<f64> = y_hat.iter().zip(y).map(|(a, b)| a + sqrt_a * b).collect();
        let minus: Vec<f64> = y_hat.iter().zip(y).map(|(a, b)| a - sqrt_a * b).collect();
        let x_hat = lift_vector(&y_hat);
        let x1 = lift_vector(&plus);
        let x2 = lift_vector(&minus);
        let direction = block_direction(n, y);
        let mut combo = x1.clone();
        combo.scale(0.5);
        combo.axpy(0.5, &x2);
        let mut target = x_hat.clone();
        target.axpy(alpha, &direction);
        combo.axpy(-1.0, &target);
        let residual = combo.norm_fro();
        let feasibility = quad_value(q1, q_lin, &plus)
            .max(quad_value(q1, q_lin, &minus))
            .max(b1)
            - b1;
        return Ok(GtrsCertificate {
            x_hat,
            x1,
            x2,
            theta: 0.5,
            direction,
            residual,
            feasibility: feasibility.max(0.0),
        });
    }
    if q1y_norm <= tol {
        return Err(GtrsError::Infeasible);
    }
    // fall back to the epsilon-perturbed direction: split y along the
    // negative-curvature part and retreat to the strict case
    let eig = eig_sym(q1).map_err(|_| GtrsError::Infeasible)?;
    let mut y2 = vec![0.0; n];
    for j in 0..n {
        if eig.values[j] < -tol {
            let c: f64 = eig.vector(j).iter().zip(y).map(|(a, b)| a * b).sum();
            for i in 0..n {
                y2[i] += c * eig.vector(j)[i];
            }
        }
    }
    let y2_norm: f64 = y2.iter().map(|v| v * v).sum::<f64>().sqrt();
    if y2_norm <= tol {
        return Err(GtrsError::Hypothesis {
            inequality: "degenerate direction admits no negative split".into(),
            value: y2_norm,
        });
    }
    let eps = 1e-9 / ((1.0 + alpha) * (1.0 + y_norm) * (1.0 + y2_norm));
    let y_eps: Vec<f64> = y.iter().zip(&y2).map(|(a, b)| a + eps * b).collect();
    let s_eps = q1.quad_form(&y_eps);
    let t_eps: f64 = q_lin.iter().zip(&y_eps).map(|(a, b)| a * b).sum();
    let y_eps: Vec<f64> =
        if t_eps > 0.0 { y_eps.iter().map(|v| -v).collect() } else { y_eps };
    let t_eps: f64 = q_lin.iter().zip(&y_eps).map(|(a, b)| a * b).sum();
    let drop = s_eps.min(0.0) + t_eps;
    if drop >= 0.0 {
        return Err(GtrsError::Infeasible);
    }
    let gamma = if b1 >= 0.0 { 1.0 } else { (b1 / drop).max(1.0) * (1.0 + 1e-12) };
    let mut cert = assemble_strict(q1, q_lin, b1, &y_eps, alpha, gamma, block_direction(n, &y_eps));
    // report the residual against the unperturbed direction
    let direction = block_direction(n, y);
    let mut combo = cert.x1.clone();
    combo.scale(cert.theta);
    combo.axpy(1.0 - cert.theta, &cert.x2);
    let mut target = cert.x_hat.clone();
    target.axpy(alpha, &direction);
    combo.axpy(-1.0, &target);
    cert.residual = combo.norm_fro();
    cert.direction = direction;
    Ok(cert)
}

fn assemble_strict(
    q1: &SymMatrix,
    q_lin: &[f64],
    b1: f64,
    y: &[f64],
    alpha: f64,
    gamma: f64,
    direction: SymMatrix,
) -> GtrsCertificate {
    let scale2 = |c: f64| -> Vec<f64> { y.iter().map(|v| c * v).collect() };
    let x_hat = lift_vector(&scale2(2.0 * gamma));
    let x1 = lift_vector(&scale2(gamma));
    let gamma2 = (alpha + 2.0 * gamma * gamma) / gamma;
    let x2 = lift_vector(&scale2(gamma2));
    let theta = alpha / (alpha + gamma * gamma);
    let mut combo = x1.clone();
    combo.scale(theta);
    combo.axpy(1.0 - theta, &x2);
    let mut target = x_hat.clone();
    target.axpy(alpha, &direction);
    combo.axpy(-1.0, &target);
    let residual = combo.norm_fro();
    let feasibility = quad_value(q1, q_lin, &scale2(gamma))
        .max(quad_value(q1, q_lin, &scale2(gamma2)))
        .max(b1)
        - b1;
    GtrsCertificate {
        x_hat,
        x1,
        x2,
        theta,
        direction,
        residual,
        feasibility: feasibility.max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn assert_valid(cert: &GtrsCertificate, tol: f64) {
        assert!(cert.residual <= tol, "combination residual {}", cert.residual);
        assert!(cert.feasibility <= tol, "feasibility violation {}", cert.feasibility);
        // both split points are rank one by construction (lifted vectors)
        for x in [&cert.x1, &cert.x2] {
            let eig = eig_sym(x).unwrap();
            let top = eig.values[0].max(1.0);
            let rank = eig.values.iter().filter(|&&v| v.abs() > 1e-8 * top).count();
            assert_eq!(rank, 1);
        }
    }

    #[test]
    fn positive_definite_block_rejects() {
        let err = gtrs_recession_certificate(&SymMatrix::identity(2), &[0.0, 0.0], 1.0, &[1.0, 0.0], 1.0)
            .unwrap_err();
        assert!(matches!(err, GtrsError::Hypothesis { .. }));
    }

    #[test]
    fn indefinite_example_certifies() {
        let q1 = SymMatrix::diag(&[-1.0, 1.0]);
        let cert =
            gtrs_recession_certificate(&q1, &[0.0, 0.0], 0.0, &[1.0, 0.0], 3.0).unwrap();
        assert_valid(&cert, 1e-8);
    }

    #[test]
    fn alpha_zero_degenerates_to_base_point() {
        let q1 = SymMatrix::diag(&[-1.0, 1.0]);
        let cert =
            gtrs_recession_certificate(&q1, &[0.3, 0.0], 0.5, &[1.0, 0.0], 0.0).unwrap();
        assert_valid(&cert, 1e-8);
        assert!(cert.theta.abs() < 1e-12);
    }

    #[test]
    fn doubly_degenerate_null_direction() {
        // Q1 y = 0 and q1^T y = 0
        let q1 = SymMatrix::diag(&[0.0, 1.0]);
        let cert =
            gtrs_recession_certificate(&q1, &[0.0, 1.0], 0.5, &[1.0, 0.0], 2.0).unwrap();
        assert_valid(&cert, 1e-8);
    }

    #[test]
    fn random_hypothesis_satisfying_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut count = 0;
        while count < 100 {
            let n = rng.gen_range(2..=6);
            let q1 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let eig = eig_sym(&q1).unwrap();
            if eig.values.last().copied().unwrap() >= 0.0 {
                continue; // needs a direction with nonpositive curvature
            }
            let y: Vec<f64> = eig.vector(n - 1).to_vec();
            let q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let b1 = rng.gen_range(-1.0..1.0);
            let alpha = rng.gen_range(0.0..4.0);
            let cert = gtrs_recession_certificate(&q1, &q_lin, b1, &y, alpha).unwrap();
            assert_valid(&cert, 1e-8);
            count += 1;
        }
    }
}
