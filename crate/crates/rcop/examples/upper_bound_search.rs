//! Multistart search over the rank-constrained domain set. The best
//! feasible point gives an upper bound sandwiching the true optimum
//! against the relaxation value.

use rcop::demos;
use rcop::solver::{nonconvex_oracle, solve_dwr, SolveOptions};

fn main() {
    for name in ["trs", "egbd", "hqp2"] {
        let inst = demos::instance(name).unwrap();
        let sol = solve_dwr(&inst, &SolveOptions::default());
        match nonconvex_oracle(&inst, 32, 0) {
            Some(found) => println!(
                "{name:6} v_rel = {:+.6}, v_ub = {:+.6}, certified gap interval [0, {:.2e}]",
                sol.v_rel,
                found.value,
                (found.value - sol.v_rel).max(0.0)
            ),
            None => println!("{name:6} no feasible rank-constrained point found"),
        }
    }
}
