//! Build a small instance in code and solve its relaxation.
//!
//! The problem minimizes `X_22 - X_11` over the PSD cone with the
//! constraints `X_12 = 0`, `X_11 <= X_22`, and `X_22 >= 1`: the relaxed
//! optimum is 0 on the diagonal ray, while every rank-one feasible point
//! has value at least 1.

use rcop::matrixcore::SymMatrix;
use rcop::model::{DomainSpec, Mat, RcopInstance, TwoSidedLmi};
use rcop::solver::{solve_dwr, SolveOptions};

fn main() {
    let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
    let objective = Mat::Sym(SymMatrix::diag(&[-1.0, 1.0]));
    let mut off = SymMatrix::zeros(2);
    off.set_sym(0, 1, 0.5);
    let constraints = vec![
        TwoSidedLmi::equality(Mat::Sym(off), 0.0).unwrap(),
        TwoSidedLmi::upper(Mat::Sym(SymMatrix::diag(&[1.0, -1.0])), 0.0).unwrap(),
        TwoSidedLmi::lower(Mat::Sym(SymMatrix::diag(&[0.0, 1.0])), 1.0).unwrap(),
    ];
    let inst = RcopInstance::new("ray-gap", domain, objective, constraints).unwrap();

    let sol = solve_dwr(&inst, &SolveOptions::default());
    println!("status:        {:?}", sol.status);
    println!("v_rel:         {:.9}", sol.v_rel);
    println!("iterations:    {}", sol.iterations);
    println!("primal resid:  {:.2e}", sol.primal_residual);
    println!("dual resid:    {:.2e}", sol.dual_residual);
    println!("multipliers:   upper {:?}", sol.mu_upper);
    println!("               lower {:?}", sol.mu_lower);
    println!(
        "X* = [{:+.4} {:+.4}; {:+.4} {:+.4}]",
        sol.x_star.get(0, 0),
        sol.x_star.get(0, 1),
        sol.x_star.get(1, 0),
        sol.x_star.get(1, 1)
    );
}
