//! Closed convex hulls of the three domain kinds: membership tests,
//! Euclidean projection, and relative-interior witnesses.
//!
//! - `PsdRankK` relaxes to the PSD cone.
//! - `PsdRankKSpectral` relaxes to `{X PSD : tr(X) <= k, ||X||_2 <= 1}`.
//! - `RectRankKSpectral` relaxes to `{X : ||X||_* <= k, ||X||_2 <= 1}`.
//!
//! Projections reduce to the spectral side: eigen/singular values are
//! projected onto the box-capped simplex `{0 <= s_i <= 1, sum s_i <= k}`.

use crate::matrixcore::{eig_sym, svd_rect, RectMatrix, SymMatrix};
use crate::model::{DomainKind, DomainSpec, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HullDescriptor {
    pub kind: DomainKind,
    pub n: usize,
    pub p: usize,
    pub k: usize,
}

pub fn hull_of(domain: &DomainSpec) -> HullDescriptor {
    HullDescriptor { kind: domain.kind, n: domain.n, p: domain.p, k: domain.k }
}

impl HullDescriptor {
    pub fn is_symmetric(&self) -> bool {
        self.kind.is_symmetric()
    }

    /// The hull is compact for the spectrally capped kinds; the PSD cone
    /// is the only unbounded hull.
    pub fn is_bounded(&self) -> bool {
        self.kind != DomainKind::PsdRankK
    }

    /// Largest face dimension of the hull that the domain set is known to
    /// contain: `k(k+3)/2` for the PSD cone, one for the capped kinds.
    pub fn inclusive_face_dim(&self) -> usize {
        match self.kind {
            DomainKind::PsdRankK => self.k * (self.k + 3) / 2,
            DomainKind::PsdRankKSpectral | DomainKind::RectRankKSpectral => 1,
        }
    }
}

/// Membership in the hull up to `tol` (relative on the spectral scale).
pub fn contains(h: &HullDescriptor, x: &Mat, tol: f64) -> bool {
    match (h.kind, x) {
        (DomainKind::PsdRankK, Mat::Sym(a)) => {
            let eig = match eig_sym(a) {
                Ok(e) => e,
                Err(_) => return false,
            };
            eig.values.iter().all(|&v| v >= -tol)
        }
        (DomainKind::PsdRankKSpectral, Mat::Sym(a)) => {
            let eig = match eig_sym(a) {
                Ok(e) => e,
                Err(_) => return false,
            };
            let trace: f64 = eig.values.iter().sum();
            eig.values.iter().all(|&v| v >= -tol && v <= 1.0 + tol) && trace <= h.k as f64 + tol
        }
        (DomainKind::RectRankKSpectral, Mat::Rect(a)) => {
            let svd = match svd_rect(a) {
                Ok(s) => s,
                Err(_) => return false,
            };
            let nuclear: f64 = svd.sigma.iter().sum();
            svd.sigma.iter().all(|&s| s <= 1.0 + tol) && nuclear <= h.k as f64 + tol
        }
        _ => false,
    }
}

/// Euclidean projection of `y` onto the box-capped simplex
/// `{s : 0 <= s_i <= cap, sum s_i <= budget}`.
///
/// Clip first; if the clipped sum exceeds the budget, bisect on a shift
/// `theta >= 0` so that `sum clip(y_i - theta, 0, cap) = budget`.
pub fn capped_simplex_project(y: &[f64], cap: f64, budget: f64) -> Vec<f64> {
    let clip = |v: f64| v.clamp(0.0, cap);
    let clipped: Vec<f64> = y.iter().map(|&v| clip(v)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= budget {
        return clipped;
    }
    let sum_at = |theta: f64| -> f64 { y.iter().map(|&v| clip(v - theta)).sum() };
    let mut lo = 0.0f64;
    let mut hi = y.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-12 * (1.0 + budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = sum_at(mid);
        if (s - budget).abs() <= tol {
            lo = mid;
            hi = mid;
            break;
        }
        if s > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * (1.0 + hi) {
            break;
        }
    }
    // final theta: midpoint of the bracket keeps the sum within tolerance
    let theta = 0.5 * (lo + hi);
    y.iter().map(|&v| clip(v - theta)).collect()
}

/// Euclidean projection onto the hull.
pub fn project(h: &HullDescriptor, y: &Mat) -> Mat {
    match (h.kind, y) {
        (DomainKind::PsdRankK, Mat::Sym(a)) => {
            let eig = eig_sym(a).expect("finite symmetric input");
            let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
            Mat::Sym(eig.reassemble(&clipped))
        }
        (DomainKind::PsdRankKSpectral, Mat::Sym(a)) => {
            let eig = eig_sym(a).expect("finite symmetric input");
            let capped = capped_simplex_project(&eig.values, 1.0, h.k as f64);
            Mat::Sym(eig.reassemble(&capped))
        }
        (DomainKind::RectRankKSpectral, Mat::Rect(a)) => {
            let svd = svd_rect(a).expect("finite rectangular input");
            let capped = capped_simplex_project(&svd.sigma, 1.0, h.k as f64);
            Mat::Rect(svd.reassemble(&capped))
        }
        _ => panic!("matrix shape does not match hull kind"),
    }
}

/// A point in the relative interior of the hull, with strict margins.
pub fn interior_point(h: &HullDescriptor) -> Mat {
    match h.kind {
        DomainKind::PsdRankK => {
            let mut m = SymMatrix::identity(h.n);
            m.scale(0.1);
            Mat::Sym(m)
        }
        DomainKind::PsdRankKSpectral => {
            let v = (h.k.min(h.n) as f64) / (2.0 * h.n as f64);
            let mut m = SymMatrix::identity(h.n);
            m.scale(v);
            Mat::Sym(m)
        }
        DomainKind::RectRankKSpectral => {
            let v = (h.k.min(h.n) as f64) / (2.0 * h.n as f64);
            let mut m = RectMatrix::zeros(h.n, h.p).expect("valid hull shape");
            for i in 0..h.n {
                m.set(i, i, v);
            }
            Mat::Rect(m)
        }
    }
}

/// Membership in the original (rank-constrained) domain set, not the hull:
/// rank at most k at `tol`, plus the spectral cap for the capped kinds.
pub fn domain_contains(h: &HullDescriptor, x: &Mat, tol: f64) -> bool {
    match (h.kind, x) {
        (DomainKind::PsdRankK, Mat::Sym(a)) => {
            let eig = match eig_sym(a) {
                Ok(e) => e,
                Err(_) => return false,
            };
            let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
            let rank = eig.values.iter().filter(|&&v| v > tol * top).count();
            eig.values.iter().all(|&v| v >= -tol * top) && rank <= h.k
        }
        (DomainKind::PsdRankKSpectral, Mat::Sym(a)) => {
            let eig = match eig_sym(a) {
                Ok(e) => e,
                Err(_) => return false,
            };
            let rank = eig.values.iter().filter(|&&v| v > tol).count();
            eig.values.iter().all(|&v| v >= -tol && v <= 1.0 + tol) && rank <= h.k
        }
        (DomainKind::RectRankKSpectral, Mat::Rect(a)) => {
            let svd = match svd_rect(a) {
                Ok(s) => s,
                Err(_) => return false,
            };
            let rank = svd.sigma.iter().filter(|&&s| s > tol).count();
            svd.sigma.iter().all(|&s| s <= 1.0 + tol) && rank <= h.k
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainSpec;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sym(h_n: usize, rng: &mut impl Rng) -> Mat {
        Mat::Sym(SymMatrix::from_fn(h_n, |_, _| rng.gen_range(-2.0..2.0)))
    }

    fn rect(n: usize, p: usize, rng: &mut impl Rng) -> Mat {
        let data: Vec<f64> = (0..n * p).map(|_| rng.gen_range(-2.0..2.0)).collect();
        Mat::Rect(RectMatrix::from_rows(n, p, &data).unwrap())
    }

    fn hulls() -> Vec<HullDescriptor> {
        vec![
            hull_of(&DomainSpec::psd_rank_k(4, 1).unwrap()),
            hull_of(&DomainSpec::psd_rank_k_spectral(4, 2).unwrap()),
            hull_of(&DomainSpec::rect_rank_k_spectral(3, 5, 1).unwrap()),
        ]
    }

    fn random_in_shape(h: &HullDescriptor, rng: &mut impl Rng) -> Mat {
        if h.is_symmetric() {
            sym(h.n, rng)
        } else {
            rect(h.n, h.p, rng)
        }
    }

    #[test]
    fn hull_descriptors_match_domains() {
        let h = hull_of(&DomainSpec::psd_rank_k(3, 1).unwrap());
        assert_eq!((h.n, h.k), (3, 1));
        assert!(!h.is_bounded());
        let h = hull_of(&DomainSpec::psd_rank_k_spectral(4, 2).unwrap());
        assert!(h.is_bounded());
        assert_eq!(h.inclusive_face_dim(), 1);
        let h = hull_of(&DomainSpec::rect_rank_k_spectral(3, 5, 1).unwrap());
        assert_eq!((h.n, h.p), (3, 5));
    }

    #[test]
    fn membership_examples() {
        for h in hulls() {
            let zero = if h.is_symmetric() {
                Mat::Sym(SymMatrix::zeros(h.n))
            } else {
                Mat::Rect(RectMatrix::zeros(h.n, h.p).unwrap())
            };
            assert!(contains(&h, &zero, 1e-10), "zero matrix is in every hull");
        }
        let h = hull_of(&DomainSpec::psd_rank_k_spectral(2, 2).unwrap());
        assert!(!contains(&h, &Mat::Sym(SymMatrix::diag(&[1.5, 0.0])), 1e-8));
        let h1 = hull_of(&DomainSpec::psd_rank_k_spectral(2, 1).unwrap());
        assert!(!contains(&h1, &Mat::Sym(SymMatrix::diag(&[0.6, 0.6])), 1e-8));
        assert!(contains(&h1, &Mat::Sym(SymMatrix::diag(&[0.6, 0.4])), 1e-8));
    }

    #[test]
    fn projection_examples() {
        let h = hull_of(&DomainSpec::psd_rank_k(2, 1).unwrap());
        let x = project(&h, &Mat::Sym(SymMatrix::diag(&[1.0, -2.0])));
        assert!((x.get(0, 0) - 1.0).abs() < 1e-12);
        assert!(x.get(1, 1).abs() < 1e-12);

        let h = hull_of(&DomainSpec::psd_rank_k_spectral(2, 1).unwrap());
        let x = project(&h, &Mat::Sym(SymMatrix::diag(&[2.0, 2.0])));
        assert!((x.get(0, 0) - 0.5).abs() < 1e-9);
        assert!((x.get(1, 1) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn capped_simplex_cases() {
        assert_eq!(capped_simplex_project(&[0.2, 0.3], 1.0, 1.0), vec![0.2, 0.3]);
        let p = capped_simplex_project(&[2.0, 2.0], 1.0, 1.0);
        assert!((p[0] - 0.5).abs() < 1e-10 && (p[1] - 0.5).abs() < 1e-10);
        let p = capped_simplex_project(&[-1.0, 0.5], 1.0, 1.0);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    /// Exhaustive oracle: enumerate the 3^n clip patterns (at zero, free,
    /// at cap), solve each reduced problem, keep the feasible minimizer.
    fn capped_simplex_oracle(y: &[f64], cap: f64, budget: f64) -> Vec<f64> {
        let n = y.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut consider = |candidate: Vec<f64>| {
            let sum: f64 = candidate.iter().sum();
            if candidate.iter().any(|&v| !(-1e-12..=cap + 1e-12).contains(&v)) || sum > budget + 1e-9 {
                return;
            }
            let d: f64 = candidate.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().map_or(true, |(bd, _)| d < *bd - 1e-15) {
                best = Some((d, candidate));
            }
        };
        for pattern in 0..3usize.pow(n as u32) {
            let mut digits = Vec::with_capacity(n);
            let mut rest = pattern;
            for _ in 0..n {
                digits.push(rest % 3);
                rest /= 3;
            }
            let free: Vec<usize> = (0..n).filter(|&i| digits[i] == 1).collect();
            let fixed_sum: f64 = (0..n)
                .map(|i| match digits[i] {
                    0 => 0.0,
                    2 => cap,
                    _ => 0.0,
                })
                .sum();
            // theta = 0 (budget slack)
            let mut cand = vec![0.0; n];
            for i in 0..n {
                cand[i] = match digits[i] {
                    0 => 0.0,
                    2 => cap,
                    _ => y[i],
                };
            }
            consider(cand);
            // budget tight: free entries shifted by common theta
            if !free.is_empty() {
                let free_sum: f64 = free.iter().map(|&i| y[i]).sum();
                let theta = (free_sum + fixed_sum - budget) / free.len() as f64;
                if theta >= -1e-12 {
                    let mut cand = vec![0.0; n];
                    for i in 0..n {
                        cand[i] = match digits[i] {
                            0 => 0.0,
                            2 => cap,
                            _ => y[i] - theta,
                        };
                    }
                    consider(cand);
                }
            }
        }
        best.expect("pattern enumeration always yields a feasible point").1
    }

    #[test]
    fn capped_simplex_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..2.5)).collect();
            let budget = rng.gen_range(0.5..3.0);
            let got = capped_simplex_project(&y, 1.0, budget);
            let want = capped_simplex_oracle(&y, 1.0, budget);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-8, "y={y:?} budget={budget} got={got:?} want={want:?}");
            }
        }
    }

    #[test]
    fn projection_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for h in hulls() {
            for _ in 0..200 {
                let y1 = random_in_shape(&h, &mut rng);
                let y2 = random_in_shape(&h, &mut rng);
                let p1 = project(&h, &y1);
                let p2 = project(&h, &y2);
                // idempotence
                let pp1 = project(&h, &p1);
                assert!(pp1.sub(&p1).norm_fro() <= 1e-10, "idempotence ({:?})", h.kind);
                // nonexpansiveness
                let d_in = y1.sub(&y2).norm_fro();
                let d_out = p1.sub(&p2).norm_fro();
                assert!(d_out <= d_in + 1e-10, "nonexpansive ({:?})", h.kind);
                // membership
                assert!(contains(&h, &p1, 1e-8), "projection lands in hull ({:?})", h.kind);
                // variational inequality against a random member
                let z = project(&h, &random_in_shape(&h, &mut rng));
                let gap = y1.sub(&p1).inner(&z.sub(&p1));
                assert!(gap <= 1e-8, "variational inequality ({:?}): {gap}", h.kind);
            }
        }
    }

    #[test]
    fn interior_points_have_margin() {
        let h = hull_of(&DomainSpec::psd_rank_k(3, 1).unwrap());
        let x = interior_point(&h);
        assert!((x.get(0, 0) - 0.1).abs() < 1e-15);
        assert!(contains(&h, &x, 0.0));

        let h = hull_of(&DomainSpec::psd_rank_k_spectral(2, 1).unwrap());
        let x = interior_point(&h);
        assert!((x.get(0, 0) - 0.25).abs() < 1e-15);
        assert!(contains(&h, &x, 0.0));

        let h = hull_of(&DomainSpec::rect_rank_k_spectral(2, 3, 1).unwrap());
        let x = interior_point(&h);
        assert!((x.get(0, 0) - 0.25).abs() < 1e-15);
        assert!(contains(&h, &x, 0.0));
    }
}
