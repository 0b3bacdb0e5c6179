//! Recession-ray certificate for a one-sided quadratic constraint: a
//! direction y with nonpositive curvature spans a ray of the relaxed set,
//! and the certificate exhibits every ray point as a convex combination of
//! two rank-one feasible points.

use rcop::certify::gtrs_recession_certificate;
use rcop::matrixcore::SymMatrix;

fn main() {
    let q1 = SymMatrix::diag(&[-1.0, 1.0]);
    let q_lin = vec![0.0, 0.0];
    let b1 = 0.0;
    let y = vec![1.0, 0.0];

    for alpha in [0.0, 1.0, 3.0] {
        let cert = gtrs_recession_certificate(&q1, &q_lin, b1, &y, alpha).unwrap();
        println!(
            "alpha = {alpha}: theta = {:.4}, combination residual {:.1e}, feasibility {:.1e}",
            cert.theta, cert.residual, cert.feasibility
        );
        println!(
            "  X1[1..,0] = [{:+.3}, {:+.3}], X2[1..,0] = [{:+.3}, {:+.3}]",
            cert.x1.get(1, 0),
            cert.x1.get(2, 0),
            cert.x2.get(1, 0),
            cert.x2.get(2, 0)
        );
    }

    // hypothesis violations are rejected with the failed inequality
    let err = gtrs_recession_certificate(&SymMatrix::identity(2), &q_lin, b1, &y, 1.0).unwrap_err();
    println!("positive-curvature direction: {err}");
}
