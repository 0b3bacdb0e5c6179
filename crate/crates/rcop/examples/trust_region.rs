//! Trust-region subproblem two ways: the analytic secular-equation oracle
//! against the lifted matrix relaxation. Convex-hull exactness makes the
//! two values agree to solver precision.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rcop::matrixcore::SymMatrix;
use rcop::model::{lift_qcqp, QcqpConstraint, QcqpData};
use rcop::solver::{solve_dwr, solve_trs_oracle, SolveOptions};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..5 {
        let n = rng.gen_range(3..=8);
        let q0 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let q_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let analytic = solve_trs_oracle(&q0, &q_lin);

        let data = QcqpData {
            obj_quad: q0,
            obj_lin: q_lin,
            constraints: vec![QcqpConstraint {
                quad: SymMatrix::identity(n),
                lin: vec![0.0; n],
                lo: f64::NEG_INFINITY,
                hi: 1.0,
            }],
        };
        let inst = lift_qcqp(&data).unwrap();
        let sol = solve_dwr(&inst, &SolveOptions { tol: 1e-9, ..Default::default() });

        println!(
            "trial {trial} (n={n}): oracle {:+.9}  relaxation {:+.9}  |diff| {:.2e}  shift {:.4}",
            analytic.value,
            sol.v_rel,
            (analytic.value - sol.v_rel).abs(),
            analytic.lambda
        );
    }
}
