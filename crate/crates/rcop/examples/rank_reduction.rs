//! Rank reduction to an extreme point: start from a random full-rank PSD
//! point satisfying a handful of pinned equalities and walk it down. The
//! final rank r obeys r(r+1)/2 <= dimension of the pinned matrices.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rcop::facial::{rank_bound, reduce_to_extreme, Equality, ReduceOptions};
use rcop::hull;
use rcop::matrixcore::SymMatrix;
use rcop::model::{DomainSpec, Mat};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 8;
    let h = hull::hull_of(&DomainSpec::psd_rank_k(n, 1).unwrap());

    for m in [1usize, 3, 6, 10] {
        // random PSD starting point of full rank
        let f: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x0 = Mat::Sym(SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|t| f[i * n + t] * f[j * n + t]).sum()
        }));
        let equalities: Vec<Equality> = (0..m)
            .map(|_| {
                let a = Mat::Sym(SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)));
                let value = a.inner(&x0);
                Equality { a, value }
            })
            .collect();
        let res = reduce_to_extreme(&h, &x0, &equalities, &[], &ReduceOptions::default())
            .expect("feasible start");
        println!(
            "m = {m:2} pinned equalities: rank {} after {} steps (bound {} -> {}), drift {:.1e}",
            res.rank,
            res.steps,
            rank_bound(m),
            if res.bound_ok { "holds" } else { "violated" },
            res.pinned
                .iter()
                .map(|eq| (eq.a.inner(&res.x) - eq.value).abs())
                .fold(0.0f64, f64::max)
        );
    }
}
