//! The full pipeline on a single-constraint quadratic problem:
//! solve the relaxation, reduce the optimum to an extreme point of its
//! optimal face, and extract the rank-one vector. With one two-sided
//! quadratic constraint the extreme points of the relaxed set are exact,
//! so the extraction always succeeds with zero gap.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rcop::certify::reduce_optimal_face;
use rcop::matrixcore::SymMatrix;
use rcop::model::{lift_qcqp, QcqpConstraint, QcqpData};
use rcop::rounding::extract_qcqp;
use rcop::solver::{solve_dwr, SolveOptions};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 5;
    let q0 = SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let q0_lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    // positive-definite constraint block keeps the relaxation bounded
    let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q1 = SymMatrix::from_fn(n, |i, j| {
        let base: f64 = (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum();
        base / n as f64 + if i == j { 0.3 } else { 0.0 }
    });
    let data = QcqpData {
        obj_quad: q0.clone(),
        obj_lin: q0_lin.clone(),
        constraints: vec![QcqpConstraint {
            quad: q1,
            lin: vec![0.1; n],
            lo: 0.2,
            hi: 1.1,
        }],
    };

    let inst = lift_qcqp(&data).unwrap();
    let sol = solve_dwr(&inst, &SolveOptions { tol: 1e-9, ..Default::default() });
    println!("relaxation: {:?}, v_rel = {:.9}", sol.status, sol.v_rel);

    let reduced = reduce_optimal_face(&inst, &sol, 1e-6).expect("optimal face reduces");
    println!("reduced to rank {} in {} steps", reduced.rank, reduced.steps);

    let x = reduced.x.as_sym().and_then(extract_qcqp).expect("rank-one extraction");
    let value = q0.quad_form(&x) + q0_lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    println!("extracted x = {x:.4?}");
    println!("objective at x = {value:.9}, gap = {:.2e}", (value - sol.v_rel).abs());
}
