//! Sign-definite rounding: when every off-diagonal position carries one
//! sign across the data matrices and the signed graph is balanced, any
//! relaxation optimum rounds to a rank-one point without increasing the
//! objective or breaking one-sided feasibility.

use rcop::certify::sign_definite_check;
use rcop::matrixcore::SymMatrix;
use rcop::model::{lift_qcqp, Mat, QcqpConstraint, QcqpData};
use rcop::rounding::sign_definite_round;
use rcop::solver::{solve_dwr, SolveOptions};

fn main() {
    // all off-diagonal couplings nonpositive: balanced by construction
    let mut q0 = SymMatrix::diag(&[0.5, -0.2, 0.4]);
    q0.set_sym(0, 1, -0.6);
    q0.set_sym(1, 2, -0.3);
    let mut q1 = SymMatrix::identity(3);
    q1.set_sym(0, 1, -0.2);
    let data = QcqpData {
        obj_quad: q0,
        obj_lin: vec![-0.4, 0.0, 0.0],
        constraints: vec![QcqpConstraint {
            quad: q1,
            lin: vec![0.0, 0.0, -0.2],
            lo: f64::NEG_INFINITY,
            hi: 1.0,
        }],
    };

    let (applies, balanced) = sign_definite_check(&data);
    println!("sign-definite: {applies}, balanced cycles: {balanced}");

    let inst = lift_qcqp(&data).unwrap();
    let sol = solve_dwr(&inst, &SolveOptions { tol: 1e-9, ..Default::default() });
    println!("v_rel = {:.9} ({:?})", sol.v_rel, sol.status);

    let rounded = sign_definite_round(&data, sol.x_star.as_sym().unwrap()).unwrap();
    let value = inst.objective.inner(&Mat::Sym(rounded.x_hat.clone()));
    println!("rounded rank-one value = {value:.9}");
    println!("recovered x = {:.4?}", rounded.x);
    println!("gap = {:.2e}", (value - sol.v_rel).abs());
}
