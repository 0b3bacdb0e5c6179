//! Shared stationarity machinery: eigenvalue blocks of a hull point and
//! the face-restricted residual rows of the normal-cone condition
//! `-(A0 + sum mu_i A_i) in N_hull(X)`.
//!
//! For the PSD cone the condition is: the gradient vanishes on the range
//! block and on the range-kernel cross block. For the capped hulls the
//! fractional block must equal `-nu I` (trace multiplier) and all cross
//! blocks between the fractional, zero, and one blocks must vanish.

use crate::hull::HullDescriptor;
use crate::matrixcore::{eig_sym, SymMatrix};
use crate::model::{DomainKind, Mat};

pub(crate) struct FaceBlocks {
    pub frac: Vec<Vec<f64>>,
    pub zero: Vec<Vec<f64>>,
    pub ones: Vec<Vec<f64>>,
    pub trace_binding: bool,
}

pub(crate) fn face_blocks(h: &HullDescriptor, x: &SymMatrix, tol: f64) -> Option<FaceBlocks> {
    let eig = eig_sym(x).ok()?;
    let top = eig.values.first().copied().unwrap_or(0.0).max(1.0);
    let eps = tol.sqrt().max(1e-7) * top;
    let capped = !matches!(h.kind, DomainKind::PsdRankK);
    let mut frac = Vec::new();
    let mut zero = Vec::new();
    let mut ones = Vec::new();
    for (j, &lam) in eig.values.iter().enumerate() {
        let q = eig.vector(j).to_vec();
        if lam <= eps {
            zero.push(q);
        } else if capped && lam >= 1.0 - eps {
            ones.push(q);
        } else {
            frac.push(q);
        }
    }
    let trace: f64 = eig.values.iter().sum();
    let trace_binding = capped && (h.k as f64 - trace).abs() <= eps;
    Some(FaceBlocks { frac, zero, ones, trace_binding })
}

/// Residual rows of the stationarity condition for one direction matrix:
/// the fractional block (svec layout) followed by the cross blocks.
pub(crate) fn stationarity_rows(blocks: &FaceBlocks, a: &Mat) -> Vec<f64> {
    let a = a.as_sym().expect("symmetric stationarity only");
    let project = |u: &[f64], v: &[f64]| -> f64 {
        let av = a.matvec(v);
        u.iter().zip(&av).map(|(x, y)| x * y).sum()
    };
    let mut rows = Vec::new();
    let f = &blocks.frac;
    for (i, u) in f.iter().enumerate() {
        for (j, v) in f.iter().enumerate().skip(i) {
            let weight = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
            rows.push(weight * project(u, v));
        }
    }
    for u in f {
        for v in &blocks.zero {
            rows.push(std::f64::consts::SQRT_2 * project(u, v));
        }
        for v in &blocks.ones {
            rows.push(std::f64::consts::SQRT_2 * project(u, v));
        }
    }
    for u in &blocks.zero {
        for v in &blocks.ones {
            rows.push(std::f64::consts::SQRT_2 * project(u, v));
        }
    }
    rows
}

/// Identity-direction rows matching the [`stationarity_rows`] layout, for
/// the trace multiplier column.
pub(crate) fn identity_rows(blocks: &FaceBlocks) -> Vec<f64> {
    let f = blocks.frac.len();
    let mut rows = Vec::new();
    for i in 0..f {
        for j in i..f {
            rows.push(if i == j { 1.0 } else { 0.0 });
        }
    }
    let crosses =
        f * (blocks.zero.len() + blocks.ones.len()) + blocks.zero.len() * blocks.ones.len();
    rows.extend(std::iter::repeat(0.0).take(crosses));
    rows
}
