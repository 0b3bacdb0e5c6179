//! Euclidean projection onto the three hulls, and the box-capped simplex
//! subproblem that powers the spectrally capped kinds.

use rcop::hull::{capped_simplex_project, contains, hull_of, interior_point, project};
use rcop::matrixcore::SymMatrix;
use rcop::model::{DomainSpec, Mat};

fn main() {
    // eigenvalue clipping on the PSD cone
    let h = hull_of(&DomainSpec::psd_rank_k(2, 1).unwrap());
    let y = Mat::Sym(SymMatrix::diag(&[1.0, -2.0]));
    let p = project(&h, &y);
    println!("PSD cone:      diag(1, -2)    -> diag({:.1}, {:.1})", p.get(0, 0), p.get(1, 1));

    // trace-capped spectral hull: symmetric overflow splits evenly
    let h = hull_of(&DomainSpec::psd_rank_k_spectral(2, 1).unwrap());
    let y = Mat::Sym(SymMatrix::diag(&[2.0, 2.0]));
    let p = project(&h, &y);
    println!("capped hull:   diag(2, 2)     -> diag({:.2}, {:.2})", p.get(0, 0), p.get(1, 1));
    println!("               member at 1e-8: {}", contains(&h, &p, 1e-8));

    // the scalar subproblem: clip, then shift onto the budget
    println!("capped simplex, cap 1.0:");
    for (y, budget) in [(vec![0.2, 0.3], 1.0), (vec![2.0, 2.0], 1.0), (vec![0.9, 0.8, 0.1], 1.5)] {
        println!("  project {:?} with budget {budget} -> {:?}", y, capped_simplex_project(&y, 1.0, budget));
    }

    // relative-interior witnesses carry strict margins
    for domain in [
        DomainSpec::psd_rank_k(3, 1).unwrap(),
        DomainSpec::psd_rank_k_spectral(2, 1).unwrap(),
        DomainSpec::rect_rank_k_spectral(2, 3, 1).unwrap(),
    ] {
        let h = hull_of(&domain);
        let x = interior_point(&h);
        println!("interior point of {:?}: first entry {:.3}", domain.kind, x.get(0, 0));
    }
}
