//! Dense symmetric/rectangular matrix kernels.
//!
//! Everything here is sized for desk-scale problems (n up to a few dozen):
//! cyclic Jacobi eigendecomposition, one-sided Jacobi SVD, the scaled
//! symmetric vectorization `svec`, and numerical rank of a vector family.
//! All operations are pure functions of their inputs and thread-safe.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("rectangular matrix requires n <= p, got n={n}, p={p}")]
    BadShape { n: usize, p: usize },
    #[error("eigensolver did not converge: off-diagonal norm {off:.3e} after {sweeps} sweeps")]
    NoConvergence { off: f64, sweeps: usize },
}

/// Dense symmetric matrix of order `n`, stored row-major in full.
///
/// Construction symmetrizes the input, so `get(i, j) == get(j, i)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = values[i];
        }
        m
    }

    /// Builds from row-major entries, averaging `a_ij` and `a_ji`.
    pub fn from_rows(n: usize, rows: &[f64]) -> Result<Self, MatrixError> {
        if rows.len() != n * n {
            return Err(MatrixError::DimensionMismatch { expected: n * n, got: rows.len() });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = 0.5 * (rows[i * n + j] + rows[j * n + i]);
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (f(i, j) + f(j, i));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    /// Rank-one matrix `x x^T`.
    pub fn outer(x: &[f64]) -> Self {
        Self::from_fn(x.len(), |i, j| x[i] * x[j])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn inner(&self, other: &SymMatrix) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_fro(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn axpy(&mut self, c: f64, other: &SymMatrix) {
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v += c * w;
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            y[i] = dot(row, x);
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(&self.matvec(x), x)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Dense rectangular matrix, `n` rows by `p` columns with `n <= p`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl RectMatrix {
    pub fn zeros(n: usize, p: usize) -> Result<Self, MatrixError> {
        if n > p {
            return Err(MatrixError::BadShape { n, p });
        }
        Ok(RectMatrix { n, p, data: vec![0.0; n * p] })
    }

    pub fn from_rows(n: usize, p: usize, rows: &[f64]) -> Result<Self, MatrixError> {
        if n > p {
            return Err(MatrixError::BadShape { n, p });
        }
        if rows.len() != n * p {
            return Err(MatrixError::DimensionMismatch { expected: n * p, got: rows.len() });
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(RectMatrix { n, p, data: rows.to_vec() })
    }

    /// Rank-one matrix `u v^T`.
    pub fn outer(u: &[f64], v: &[f64]) -> Result<Self, MatrixError> {
        let n = u.len();
        let p = v.len();
        let mut m = Self::zeros(n, p)?;
        for i in 0..n {
            for j in 0..p {
                m.data[i * p + j] = u[i] * v[j];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.p + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn inner(&self, other: &RectMatrix) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_fro(&self) -> f64 {
        dot(&self.data, &self.data).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn axpy(&mut self, c: f64, other: &RectMatrix) {
        for (v, w) in self.data.iter_mut().zip(&other.data) {
            *v += c * w;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Eigendecomposition `A = Q diag(values) Q^T` with eigenvalues sorted
/// descending. Column `j` of `Q` is `vectors[j*n..(j+1)*n]`.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    pub values: Vec<f64>,
    vectors: Vec<f64>,
    n: usize,
}

impl EigenDecomp {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    /// Rebuilds `Q diag(f(values)) Q^T`.
    pub fn reassemble(&self, values: &[f64]) -> SymMatrix {
        let n = self.n;
        let mut m = SymMatrix::zeros(n);
        for (j, &lam) in values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            let q = self.vector(j);
            for i in 0..n {
                let qi = lam * q[i];
                for k in i..n {
                    m.data[i * n + k] += qi * q[k];
                }
            }
        }
        for i in 0..n {
            for k in 0..i {
                m.data[i * n + k] = m.data[k * n + i];
            }
        }
        m
    }
}

/// Thin SVD `A = U diag(sigma) V^T` with `U` of order `n`, `V` of shape
/// `p x n`, and `sigma` sorted descending. Columns of `U`/`V` are contiguous.
#[derive(Debug, Clone)]
pub struct Svd {
    pub sigma: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    n: usize,
    p: usize,
}

impl Svd {
    pub fn left(&self, j: usize) -> &[f64] {
        &self.u[j * self.n..(j + 1) * self.n]
    }

    pub fn right(&self, j: usize) -> &[f64] {
        &self.v[j * self.p..(j + 1) * self.p]
    }

    /// Rebuilds `U diag(f(sigma)) V^T`.
    pub fn reassemble(&self, sigma: &[f64]) -> RectMatrix {
        let (n, p) = (self.n, self.p);
        let mut m = RectMatrix { n, p, data: vec![0.0; n * p] };
        for (j, &s) in sigma.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let u = self.left(j);
            let v = self.right(j);
            for i in 0..n {
                let ui = s * u[i];
                for k in 0..p {
                    m.data[i * p + k] += ui * v[k];
                }
            }
        }
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Rotates until the off-diagonal Frobenius norm falls below
/// `1e-12 * ||A||_F` or the sweep cap is hit.
pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomp, MatrixError> {
    if !a.is_finite() {
        return Err(MatrixError::NonFinite);
    }
    let n = a.n;
    let mut w = a.data.clone();
    // q column-major: column j at q[j*n..]
    let mut q = vec![0.0; n * n];
    for j in 0..n {
        q[j * n + j] = 1.0;
    }
    let norm = a.norm_fro();
    let tol = 1e-12 * norm;

    let off_norm = |w: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * w[i * n + j] * w[i * n + j];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&w) > tol {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(MatrixError::NoConvergence { off: off_norm(&w), sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = w[p * n + r];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[r * n + r];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // w <- J^T w J for the (p, r) rotation
                for k in 0..n {
                    let wkp = w[k * n + p];
                    let wkq = w[k * n + r];
                    w[k * n + p] = c * wkp - s * wkq;
                    w[k * n + r] = s * wkp + c * wkq;
                }
                for k in 0..n {
                    let wpk = w[p * n + k];
                    let wqk = w[r * n + k];
                    w[p * n + k] = c * wpk - s * wqk;
                    w[r * n + k] = s * wpk + c * wqk;
                }
                for k in 0..n {
                    let qkp = q[p * n + k];
                    let qkq = q[r * n + k];
                    q[p * n + k] = c * qkp - s * qkq;
                    q[r * n + k] = s * qkp + c * qkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j * n + j].partial_cmp(&w[i * n + i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| w[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&q[src * n..(src + 1) * n]);
    }
    Ok(EigenDecomp { values, vectors, n })
}

const SVD_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD of a rectangular matrix (`n <= p`).
///
/// Works on the columns of `A^T`, so small singular values come out
/// accurately even for exactly rank-deficient inputs.
pub fn svd_rect(a: &RectMatrix) -> Result<Svd, MatrixError> {
    if !a.is_finite() {
        return Err(MatrixError::NonFinite);
    }
    let (n, p) = (a.n, a.p);
    // cols[j] = column j of A^T = row j of A
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.row(j).to_vec()).collect();
    let mut r = vec![0.0; n * n]; // accumulated rotations, column-major
    for j in 0..n {
        r[j * n + j] = 1.0;
    }

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let aii = dot(&cols[i], &cols[i]);
                let ajj = dot(&cols[j], &cols[j]);
                let g = dot(&cols[i], &cols[j]);
                let scale = (aii * ajj).sqrt();
                if scale <= 1e-300 {
                    continue;
                }
                worst = worst.max(g.abs() / scale);
                if g.abs() <= 1e-15 * scale {
                    continue;
                }
                rotated = true;
                let tau = (ajj - aii) / (2.0 * g);
                let t = if tau.abs() > 1e150 {
                    1.0 / (2.0 * tau)
                } else {
                    tau.signum() / (tau.abs() + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let vi = cols[i][k];
                    let vj = cols[j][k];
                    cols[i][k] = c * vi - s * vj;
                    cols[j][k] = s * vi + c * vj;
                }
                for k in 0..n {
                    let ri = r[i * n + k];
                    let rj = r[j * n + k];
                    r[i * n + k] = c * ri - s * rj;
                    r[j * n + k] = s * ri + c * rj;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps >= SVD_MAX_SWEEPS {
            return Err(MatrixError::NoConvergence { off: worst, sweeps });
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut sigma = Vec::with_capacity(n);
    let mut u = vec![0.0; n * n];
    let mut v = vec![0.0; n * p];
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        u[dst * n..(dst + 1) * n].copy_from_slice(&r[src * n..(src + 1) * n]);
        if s > 1e-300 {
            for k in 0..p {
                v[dst * p + k] = cols[src][k] / s;
            }
        }
    }
    Ok(Svd { sigma, u, v, n, p })
}

/// Scaled symmetric vectorization: diagonal entries as-is, off-diagonal
/// entries times sqrt(2), so `<A, B> == dot(svec(A), svec(B))`.
pub fn svec(a: &SymMatrix) -> Vec<f64> {
    let n = a.n;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    let sqrt2 = std::f64::consts::SQRT_2;
    for i in 0..n {
        out.push(a.get(i, i));
        for j in (i + 1)..n {
            out.push(sqrt2 * a.get(i, j));
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn unsvec(v: &[f64], n: usize) -> SymMatrix {
    let mut a = SymMatrix::zeros(n);
    let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
    let mut idx = 0;
    for i in 0..n {
        a.set_sym(i, i, v[idx]);
        idx += 1;
        for j in (i + 1)..n {
            a.set_sym(i, j, v[idx] * inv_sqrt2);
            idx += 1;
        }
    }
    a
}

/// Number of linearly independent vectors, judged by singular values above
/// `tol * sigma_max`. Empty input or all-zero vectors give rank 0.
pub fn numerical_rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let dim = vectors[0].len();
    if dim == 0 {
        return 0;
    }
    let sigma = singular_values_of_rows(vectors);
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > tol * max).count()
}

/// Singular values (descending) of the matrix whose rows are `vectors`.
pub fn singular_values_of_rows(vectors: &[Vec<f64>]) -> Vec<f64> {
    let k = vectors.len();
    let dim = vectors[0].len();
    // one-sided Jacobi on the k columns of the transpose
    let mut cols: Vec<Vec<f64>> = vectors.to_vec();
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let aii = dot(&cols[i], &cols[i]);
                let ajj = dot(&cols[j], &cols[j]);
                let g = dot(&cols[i], &cols[j]);
                let scale = (aii * ajj).sqrt();
                if scale <= 1e-300 || g.abs() <= 1e-15 * scale {
                    continue;
                }
                rotated = true;
                let tau = (ajj - aii) / (2.0 * g);
                let t = if tau.abs() > 1e150 {
                    1.0 / (2.0 * tau)
                } else {
                    tau.signum() / (tau.abs() + (tau * tau + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for m in 0..dim {
                    let vi = cols[i][m];
                    let vj = cols[j][m];
                    cols[i][m] = c * vi - s * vj;
                    cols[j][m] = s * vi + c * vj;
                }
            }
        }
        if !rotated || sweeps >= SVD_MAX_SWEEPS {
            break;
        }
        sweeps += 1;
    }
    let mut sigma: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigma
}

/// Orthonormal basis of the null space of the matrix whose rows are
/// `vectors` (as vectors in R^dim), i.e. the orthogonal complement of the
/// row span. Returns `dim` basis vectors when `vectors` is empty.
pub fn null_space_of_rows(vectors: &[Vec<f64>], dim: usize, tol: f64) -> Vec<Vec<f64>> {
    // Orthonormalize the rows first (modified Gram-Schmidt, two passes),
    // then extend to a full basis; the extension is the null space.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        let orig = dot(v, v).sqrt();
        if norm > tol * (1.0 + orig) {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    let rank = basis.len();
    let mut null = Vec::new();
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut w = vec![0.0; dim];
        w[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > 1e-8 {
            for wi in &mut w {
                *wi /= norm;
            }
            basis.push(w.clone());
            null.push(w);
        }
    }
    debug_assert_eq!(rank + null.len(), dim.max(rank));
    null
}
