//! Property tests for the algebraic invariants of the kernels and the
//! model transformations.

use proptest::prelude::*;

use rcop::hull::{self, capped_simplex_project};
use rcop::matrixcore::{eig_sym, numerical_rank, svec, unsvec, SymMatrix};
use rcop::model::{lift_qcqp, lift_vector, to_one_sided, DomainSpec, Mat, QcqpData, RcopInstance, TwoSidedLmi};

fn sym_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    proptest::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |data| SymMatrix::from_rows(n, &data).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn svec_is_an_isometry(a in sym_strategy(5), b in sym_strategy(5)) {
        let want = a.inner(&b);
        let got: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        prop_assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()));
        let back = unsvec(&svec(&a), 5);
        for (x, y) in back.data().iter().zip(a.data()) {
            prop_assert!((x - y).abs() <= 1e-14);
        }
    }

    #[test]
    fn eig_reconstructs(a in sym_strategy(6)) {
        let e = eig_sym(&a).unwrap();
        let rec = e.reassemble(&e.values);
        let mut err = 0.0f64;
        for (x, y) in rec.data().iter().zip(a.data()) {
            err += (x - y) * (x - y);
        }
        prop_assert!(err.sqrt() <= 1e-10 * (1.0 + a.norm_fro()));
        // eigenvalues sorted descending
        for w in e.values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn lift_objective_identity(
        quad in sym_strategy(4),
        lin in proptest::collection::vec(-1.0f64..1.0, 4),
        x in proptest::collection::vec(-2.0f64..2.0, 4),
    ) {
        let data = QcqpData { obj_quad: quad.clone(), obj_lin: lin.clone(), constraints: vec![] };
        let inst = lift_qcqp(&data).unwrap();
        let want = quad.quad_form(&x) + lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let got = inst.objective.inner(&Mat::Sym(lift_vector(&x)));
        prop_assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn capped_simplex_is_feasible_and_optimal_on_its_face(
        y in proptest::collection::vec(-1.5f64..2.5, 1..6),
        budget in 0.4f64..3.0,
    ) {
        let p = capped_simplex_project(&y, 1.0, budget);
        let sum: f64 = p.iter().sum();
        prop_assert!(sum <= budget + 1e-9);
        for (&pi, &yi) in p.iter().zip(&y) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&pi));
            // each coordinate is a clipped shift: it never moves past its input upward
            prop_assert!(pi <= yi.max(0.0) + 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        d1 in proptest::collection::vec(-2.0f64..2.0, 16),
        d2 in proptest::collection::vec(-2.0f64..2.0, 16),
    ) {
        let h = hull::hull_of(&DomainSpec::psd_rank_k_spectral(4, 2).unwrap());
        let y1 = Mat::Sym(SymMatrix::from_rows(4, &d1).unwrap());
        let y2 = Mat::Sym(SymMatrix::from_rows(4, &d2).unwrap());
        let p1 = hull::project(&h, &y1);
        let p2 = hull::project(&h, &y2);
        prop_assert!(hull::project(&h, &p1).sub(&p1).norm_fro() <= 1e-10);
        prop_assert!(p1.sub(&p2).norm_fro() <= y1.sub(&y2).norm_fro() + 1e-10);
        prop_assert!(hull::contains(&h, &p1, 1e-8));
    }

    #[test]
    fn rank_is_invariant_under_scaling_and_permutation(
        rows in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 5), 1..5),
        scale in 0.1f64..10.0,
    ) {
        let r = numerical_rank(&rows, 1e-8);
        let mut scaled: Vec<Vec<f64>> = rows.iter().map(|v| v.iter().map(|x| scale * x).collect()).collect();
        scaled.reverse();
        prop_assert_eq!(numerical_rank(&scaled, 1e-8), r);
        prop_assert!(r <= rows.len());
    }

    #[test]
    fn one_sided_form_preserves_membership(
        data in proptest::collection::vec(-1.0f64..1.0, 9),
        probe in proptest::collection::vec(-1.0f64..1.0, 9),
        lo in -1.0f64..0.0,
        width in 0.1f64..2.0,
    ) {
        let domain = DomainSpec::psd_rank_k(3, 1).unwrap();
        let a = Mat::Sym(SymMatrix::from_rows(3, &data).unwrap());
        prop_assume!(!a.is_zero(1e-12));
        let inst = RcopInstance::new(
            "membership",
            domain,
            Mat::Sym(SymMatrix::zeros(3)),
            vec![TwoSidedLmi::new(a, lo, lo + width).unwrap()],
        )
        .unwrap();
        let (one_sided, _) = to_one_sided(&inst);
        let x = Mat::Sym(SymMatrix::from_rows(3, &probe).unwrap());
        let two_ok = inst.max_violation(&x) <= 1e-12;
        let one_ok = one_sided.max_violation(&x) <= 1e-12;
        prop_assert_eq!(two_ok, one_ok);
    }
}
