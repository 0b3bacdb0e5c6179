//! Problem data model: domain descriptors, two-sided linear matrix
//! inequalities, instances, and the builders that lift QCQP and fair
//! PCA/SVD data into the common schema. Also instance/report file I/O.
//!
//! An instance is `min <A0, X>` over the rank-constrained domain subject to
//! `lo_i <= <A_i, X> <= hi_i`. Instances are immutable after construction.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::matrixcore::{self, numerical_rank, svec, MatrixError, RectMatrix, SymMatrix};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("domain: {0}")]
    BadDomain(String),
    #[error("constraint {index}: {message}")]
    BadConstraint { index: usize, message: String },
    #[error("objective: {0}")]
    BadObjective(String),
    #[error("input matrix {index} is not positive semidefinite (most negative eigenvalue {eig:.3e})")]
    NotPsd { index: usize, eig: f64 },
    #[error("{0}")]
    BadInput(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Supported domain kinds. The symmetric kinds live in S^n, the
/// rectangular kind in R^{n x p} with n <= p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainKind {
    /// PSD matrices of rank at most k; the hull is the PSD cone.
    #[serde(rename = "psd_rank_k")]
    PsdRankK,
    /// PSD, rank at most k, spectral norm at most one (fair-PCA domain).
    #[serde(rename = "psd_rank_k_spectral")]
    PsdRankKSpectral,
    /// Rectangular, rank at most k, spectral norm at most one (fair-SVD domain).
    #[serde(rename = "rect_rank_k_spectral")]
    RectRankKSpectral,
}

impl DomainKind {
    pub fn is_symmetric(self) -> bool {
        !matches!(self, DomainKind::RectRankKSpectral)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub n: usize,
    pub p: usize,
    pub k: usize,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, n: usize, p: usize, k: usize) -> Result<Self, ModelError> {
        let p = if kind.is_symmetric() { n } else { p };
        if n == 0 || k == 0 {
            return Err(ModelError::BadDomain("n and k must be positive".into()));
        }
        if k > n {
            return Err(ModelError::BadDomain(format!("rank cap k={k} exceeds order n={n}")));
        }
        if n > p {
            return Err(ModelError::BadDomain(format!("need n <= p, got n={n}, p={p}")));
        }
        Ok(DomainSpec { kind, n, p, k })
    }

    pub fn psd_rank_k(n: usize, k: usize) -> Result<Self, ModelError> {
        Self::new(DomainKind::PsdRankK, n, n, k)
    }

    pub fn psd_rank_k_spectral(n: usize, k: usize) -> Result<Self, ModelError> {
        Self::new(DomainKind::PsdRankKSpectral, n, n, k)
    }

    pub fn rect_rank_k_spectral(n: usize, p: usize, k: usize) -> Result<Self, ModelError> {
        Self::new(DomainKind::RectRankKSpectral, n, p, k)
    }
}

/// A matrix value matching either the symmetric or rectangular domain shape.
#[derive(Debug, Clone, PartialEq)]
pub enum Mat {
    Sym(SymMatrix),
    Rect(RectMatrix),
}

impl Mat {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Mat::Sym(a) => (a.order(), a.order()),
            Mat::Rect(a) => (a.rows(), a.cols()),
        }
    }

    pub fn data(&self) -> &[f64] {
        match self {
            Mat::Sym(a) => a.data(),
            Mat::Rect(a) => a.data(),
        }
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        match self {
            Mat::Sym(a) => a.data_mut(),
            Mat::Rect(a) => a.data_mut(),
        }
    }

    pub fn zeros_like(&self) -> Mat {
        match self {
            Mat::Sym(a) => Mat::Sym(SymMatrix::zeros(a.order())),
            Mat::Rect(a) => Mat::Rect(RectMatrix::zeros(a.rows(), a.cols()).unwrap()),
        }
    }

    pub fn inner(&self, other: &Mat) -> f64 {
        self.data().iter().zip(other.data()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.data_mut() {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Mat {
        let mut m = self.clone();
        m.scale(c);
        m
    }

    pub fn axpy(&mut self, c: f64, other: &Mat) {
        for (v, w) in self.data_mut().iter_mut().zip(other.data()) {
            *v += c * w;
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        let mut m = self.clone();
        m.axpy(-1.0, other);
        m
    }

    pub fn as_sym(&self) -> Option<&SymMatrix> {
        match self {
            Mat::Sym(a) => Some(a),
            Mat::Rect(_) => None,
        }
    }

    pub fn as_rect(&self) -> Option<&RectMatrix> {
        match self {
            Mat::Rect(a) => Some(a),
            Mat::Sym(_) => None,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Mat::Sym(a) => a.get(i, j),
            Mat::Rect(a) => a.get(i, j),
        }
    }

    /// Flattened coordinates used for rank computations: `svec` for
    /// symmetric matrices (isometric), plain row-major for rectangular.
    pub fn flat_coords(&self) -> Vec<f64> {
        match self {
            Mat::Sym(a) => svec(a),
            Mat::Rect(a) => a.data().to_vec(),
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.data().iter().all(|v| v.abs() <= tol)
    }
}

/// Two-sided linear matrix inequality `lo <= <A, X> <= hi`, with infinite
/// bounds allowed on either side.
#[derive(Debug, Clone)]
pub struct TwoSidedLmi {
    pub a: Mat,
    pub lo: f64,
    pub hi: f64,
}

impl TwoSidedLmi {
    pub fn new(a: Mat, lo: f64, hi: f64) -> Result<Self, ModelError> {
        let bad = |message: &str| ModelError::BadConstraint { index: 0, message: message.into() };
        if lo.is_nan() || hi.is_nan() {
            return Err(bad("bounds must not be NaN"));
        }
        if lo > hi {
            return Err(bad("lower bound exceeds upper bound"));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(bad("bounds must not both be infinite of the same sign"));
        }
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            // unconstrained rows are allowed but carry no information
        } else if a.is_zero(0.0) {
            return Err(bad("constraint matrix must be nonzero when a bound is finite"));
        }
        Ok(TwoSidedLmi { a, lo, hi })
    }

    pub fn equality(a: Mat, value: f64) -> Result<Self, ModelError> {
        Self::new(a, value, value)
    }

    pub fn upper(a: Mat, hi: f64) -> Result<Self, ModelError> {
        Self::new(a, f64::NEG_INFINITY, hi)
    }

    pub fn lower(a: Mat, lo: f64) -> Result<Self, ModelError> {
        Self::new(a, lo, f64::INFINITY)
    }

    pub fn is_unconstrained(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }
}

/// A full problem instance: domain, linear objective, and constraint list.
#[derive(Debug, Clone)]
pub struct RcopInstance {
    pub name: String,
    pub domain: DomainSpec,
    pub objective: Mat,
    pub constraints: Vec<TwoSidedLmi>,
}

impl RcopInstance {
    pub fn new(
        name: impl Into<String>,
        domain: DomainSpec,
        objective: Mat,
        constraints: Vec<TwoSidedLmi>,
    ) -> Result<Self, ModelError> {
        let shape = (domain.n, domain.p);
        let sym = domain.kind.is_symmetric();
        let check = |m: &Mat| -> bool {
            m.shape() == shape && (!sym || m.as_sym().is_some()) && (sym || m.as_rect().is_some())
        };
        if !check(&objective) {
            return Err(ModelError::BadObjective(format!(
                "objective shape {:?} does not match domain {:?}",
                objective.shape(),
                shape
            )));
        }
        for (i, c) in constraints.iter().enumerate() {
            if !check(&c.a) {
                return Err(ModelError::BadConstraint {
                    index: i,
                    message: format!("matrix shape {:?} does not match domain {:?}", c.a.shape(), shape),
                });
            }
        }
        Ok(RcopInstance { name: name.into(), domain, objective, constraints })
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    /// Values `<A_i, X>` for every constraint.
    pub fn constraint_values(&self, x: &Mat) -> Vec<f64> {
        self.constraints.iter().map(|c| c.a.inner(x)).collect()
    }

    /// Largest relative violation of the constraint box at `x`.
    pub fn max_violation(&self, x: &Mat) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let v = c.a.inner(x);
            let lo_gap = if c.lo.is_finite() { (c.lo - v).max(0.0) / (1.0 + c.lo.abs()) } else { 0.0 };
            let hi_gap = if c.hi.is_finite() { (v - c.hi).max(0.0) / (1.0 + c.hi.abs()) } else { 0.0 };
            worst = worst.max(lo_gap).max(hi_gap);
        }
        worst
    }
}

/// Raw QCQP data: `min x^T Q0 x + q0^T x` subject to
/// `lo_i <= x^T Q_i x + q_i^T x <= hi_i`.
#[derive(Debug, Clone)]
pub struct QcqpData {
    pub obj_quad: SymMatrix,
    pub obj_lin: Vec<f64>,
    pub constraints: Vec<QcqpConstraint>,
}

#[derive(Debug, Clone)]
pub struct QcqpConstraint {
    pub quad: SymMatrix,
    pub lin: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl QcqpData {
    pub fn dim(&self) -> usize {
        self.obj_quad.order()
    }

    pub fn is_one_sided(&self) -> bool {
        self.constraints.iter().all(|c| c.lo == f64::NEG_INFINITY)
    }
}

/// Lifted block matrix `[[0, q^T/2], [q/2, Q]]` of order n+1.
pub fn lift_block(quad: &SymMatrix, lin: &[f64]) -> SymMatrix {
    let n = quad.order();
    let mut a = SymMatrix::zeros(n + 1);
    for i in 0..n {
        a.set_sym(0, i + 1, 0.5 * lin[i]);
        for j in i..n {
            a.set_sym(i + 1, j + 1, quad.get(i, j));
        }
    }
    a
}

/// Lifts `x` to the rank-one matrix `[1; x][1; x]^T`.
pub fn lift_vector(x: &[f64]) -> SymMatrix {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(1.0);
    v.extend_from_slice(x);
    SymMatrix::outer(&v)
}

/// Index of the homogenization constraint `X_11 = 1` appended by
/// [`lift_qcqp`]: always the last constraint.
pub fn lift_qcqp(q: &QcqpData) -> Result<RcopInstance, ModelError> {
    let n = q.dim();
    if q.obj_lin.len() != n {
        return Err(ModelError::BadObjective("objective linear term has wrong length".into()));
    }
    let domain = DomainSpec::psd_rank_k(n + 1, 1)?;
    let objective = Mat::Sym(lift_block(&q.obj_quad, &q.obj_lin));
    let mut constraints = Vec::with_capacity(q.constraints.len() + 1);
    for (i, c) in q.constraints.iter().enumerate() {
        if c.lin.len() != n || c.quad.order() != n {
            return Err(ModelError::BadConstraint { index: i, message: "shape mismatch".into() });
        }
        constraints.push(TwoSidedLmi::new(Mat::Sym(lift_block(&c.quad, &c.lin)), c.lo, c.hi)?);
    }
    let mut e11 = SymMatrix::zeros(n + 1);
    e11.set_sym(0, 0, 1.0);
    constraints.push(TwoSidedLmi::equality(Mat::Sym(e11), 1.0)?);
    RcopInstance::new("lifted-qcqp", domain, objective, constraints)
}

/// Checks for the homogenization marker: the instance is a QCQP lift when
/// the domain is PsdRankK with k = 1 and some constraint is exactly
/// `X_11 = 1`.
pub fn lift_marker(inst: &RcopInstance) -> Option<usize> {
    if inst.domain.kind != DomainKind::PsdRankK || inst.domain.k != 1 {
        return None;
    }
    inst.constraints.iter().position(|c| {
        if c.lo != 1.0 || c.hi != 1.0 {
            return false;
        }
        let a = &c.a;
        if (a.get(0, 0) - 1.0).abs() > 0.0 {
            return false;
        }
        let n = inst.domain.n;
        for i in 0..n {
            for j in 0..n {
                if (i, j) != (0, 0) && a.get(i, j) != 0.0 {
                    return false;
                }
            }
        }
        true
    })
}

/// Recovers QCQP data from a lifted instance, if it has the lift shape.
pub fn unlift_qcqp(inst: &RcopInstance) -> Option<QcqpData> {
    let marker = lift_marker(inst)?;
    let n = inst.domain.n - 1;
    let split = |a: &Mat| -> (SymMatrix, Vec<f64>) {
        let quad = SymMatrix::from_fn(n, |i, j| a.get(i + 1, j + 1));
        let lin: Vec<f64> = (0..n).map(|i| 2.0 * a.get(0, i + 1)).collect();
        (quad, lin)
    };
    let (obj_quad, obj_lin) = split(&inst.objective);
    let mut constraints = Vec::new();
    for (i, c) in inst.constraints.iter().enumerate() {
        if i == marker {
            continue;
        }
        if c.a.get(0, 0) != 0.0 {
            return None;
        }
        let (quad, lin) = split(&c.a);
        constraints.push(QcqpConstraint { quad, lin, lo: c.lo, hi: c.hi });
    }
    Some(QcqpData { obj_quad, obj_lin, constraints })
}

/// Builds the anchored fair-PCA family: one instance per anchor group j
/// with objective `-<A_j, X>` and constraints `<A_j - A_i, X> <= 0`.
/// The fair value is the best (largest) of `-v_rel` over the family.
pub fn build_fpca(a_list: &[SymMatrix], k: usize) -> Result<Vec<RcopInstance>, ModelError> {
    if a_list.is_empty() {
        return Err(ModelError::BadInput("fair PCA needs at least one group".into()));
    }
    let n = a_list[0].order();
    for (i, a) in a_list.iter().enumerate() {
        if a.order() != n {
            return Err(ModelError::BadInput(format!("group {i} has mismatched order")));
        }
        let eig = matrixcore::eig_sym(a)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -1e-8 * (1.0 + a.norm_fro()) {
            return Err(ModelError::NotPsd { index: i, eig: min });
        }
    }
    let domain = DomainSpec::psd_rank_k_spectral(n, k)?;
    let mut out = Vec::with_capacity(a_list.len());
    for (j, aj) in a_list.iter().enumerate() {
        let mut constraints = Vec::new();
        for (i, ai) in a_list.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut diff = aj.clone();
            diff.axpy(-1.0, ai);
            if diff.norm_fro() <= 1e-14 * (1.0 + aj.norm_fro()) {
                continue; // identical groups contribute nothing
            }
            constraints.push(TwoSidedLmi::upper(Mat::Sym(diff), 0.0)?);
        }
        let objective = Mat::Sym({
            let mut o = aj.clone();
            o.scale(-1.0);
            o
        });
        out.push(RcopInstance::new(format!("fpca-anchor-{j}"), domain, objective, constraints)?);
    }
    Ok(out)
}

/// Rectangular analogue of [`build_fpca`] without the PSD requirement.
pub fn build_fsvd(a_list: &[RectMatrix], k: usize) -> Result<Vec<RcopInstance>, ModelError> {
    if a_list.is_empty() {
        return Err(ModelError::BadInput("fair SVD needs at least one group".into()));
    }
    let (n, p) = (a_list[0].rows(), a_list[0].cols());
    for (i, a) in a_list.iter().enumerate() {
        if a.rows() != n || a.cols() != p {
            return Err(ModelError::BadInput(format!("group {i} has mismatched shape")));
        }
    }
    let domain = DomainSpec::rect_rank_k_spectral(n, p, k)?;
    let mut out = Vec::with_capacity(a_list.len());
    for (j, aj) in a_list.iter().enumerate() {
        let mut constraints = Vec::new();
        for (i, ai) in a_list.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut diff = aj.clone();
            diff.axpy(-1.0, ai);
            if diff.norm_fro() <= 1e-14 * (1.0 + aj.norm_fro()) {
                continue;
            }
            constraints.push(TwoSidedLmi::upper(Mat::Rect(diff), 0.0)?);
        }
        let mut o = aj.clone();
        o.scale(-1.0);
        out.push(RcopInstance::new(format!("fsvd-anchor-{j}"), domain, Mat::Rect(o), constraints)?);
    }
    Ok(out)
}

/// Dimension of the constraint family: the numerical rank of the flattened
/// technology matrices, ignoring rows with both bounds infinite.
pub fn constraint_dimension(inst: &RcopInstance) -> usize {
    let vecs: Vec<Vec<f64>> = inst
        .constraints
        .iter()
        .filter(|c| !c.is_unconstrained())
        .map(|c| c.a.flat_coords())
        .collect();
    numerical_rank(&vecs, 1e-8)
}

/// Map from one-sided constraint rows back to the original index and side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

/// Rewrites every constraint as an upper-bounded one:
/// `lo <= <A, X>` becomes `<-A, X> <= -lo`. Returns the instance together
/// with the (original index, side) provenance per emitted row.
pub fn to_one_sided(inst: &RcopInstance) -> (RcopInstance, Vec<(usize, Side)>) {
    let mut constraints = Vec::new();
    let mut map = Vec::new();
    for (i, c) in inst.constraints.iter().enumerate() {
        if c.hi.is_finite() {
            constraints.push(TwoSidedLmi { a: c.a.clone(), lo: f64::NEG_INFINITY, hi: c.hi });
            map.push((i, Side::Upper));
        }
        if c.lo.is_finite() {
            constraints.push(TwoSidedLmi { a: c.a.scaled(-1.0), lo: f64::NEG_INFINITY, hi: -c.lo });
            map.push((i, Side::Lower));
        }
    }
    let inst = RcopInstance {
        name: format!("{}-one-sided", inst.name),
        domain: inst.domain,
        objective: inst.objective.clone(),
        constraints,
    };
    (inst, map)
}

// ---------------------------------------------------------------------------
// Instance file format (JSON)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DomainJson {
    kind: DomainKind,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    k: usize,
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    #[serde(rename = "A")]
    a: Vec<f64>,
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_bound")]
    bl: f64,
    #[serde(serialize_with = "ser_bound", deserialize_with = "de_bound")]
    bu: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    name: String,
    domain: DomainJson,
    objective: Vec<f64>,
    constraints: Vec<ConstraintJson>,
}

fn ser_bound<S: Serializer>(b: &f64, s: S) -> Result<S::Ok, S::Error> {
    if *b == f64::INFINITY {
        s.serialize_str("inf")
    } else if *b == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(*b)
    }
}

fn de_bound<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) if v.is_nan() => Err(D::Error::custom("bound must not be NaN")),
        Raw::Num(v) => Ok(v),
        Raw::Text(t) => match t.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(D::Error::custom(format!("unrecognized bound string {other:?}"))),
        },
    }
}

fn mat_from_flat(domain: &DomainSpec, flat: &[f64], path: &str) -> Result<Mat, ModelError> {
    let want = domain.n * domain.p;
    if flat.len() != want {
        return Err(ModelError::Parse {
            path: path.into(),
            message: format!(
                "expected {want} row-major entries for a {}x{} matrix, got {}",
                domain.n,
                domain.p,
                flat.len()
            ),
        });
    }
    let m = if domain.kind.is_symmetric() {
        Mat::Sym(SymMatrix::from_rows(domain.n, flat).map_err(|e| ModelError::Parse {
            path: path.into(),
            message: e.to_string(),
        })?)
    } else {
        Mat::Rect(RectMatrix::from_rows(domain.n, domain.p, flat).map_err(|e| ModelError::Parse {
            path: path.into(),
            message: e.to_string(),
        })?)
    };
    Ok(m)
}

pub fn instance_to_json(inst: &RcopInstance) -> String {
    let json = InstanceJson {
        name: inst.name.clone(),
        domain: DomainJson {
            kind: inst.domain.kind,
            n: inst.domain.n,
            p: if inst.domain.kind.is_symmetric() { None } else { Some(inst.domain.p) },
            k: inst.domain.k,
        },
        objective: inst.objective.data().to_vec(),
        constraints: inst
            .constraints
            .iter()
            .map(|c| ConstraintJson { a: c.a.data().to_vec(), bl: c.lo, bu: c.hi })
            .collect(),
    };
    serde_json::to_string_pretty(&json).expect("instance serialization cannot fail")
}

pub fn instance_from_json(text: &str) -> Result<RcopInstance, ModelError> {
    let json: InstanceJson = serde_json::from_str(text)
        .map_err(|e| ModelError::Parse { path: "$".into(), message: e.to_string() })?;
    let domain = DomainSpec::new(json.domain.kind, json.domain.n, json.domain.p.unwrap_or(json.domain.n), json.domain.k)?;
    let objective = mat_from_flat(&domain, &json.objective, "objective")?;
    let mut constraints = Vec::with_capacity(json.constraints.len());
    for (i, c) in json.constraints.iter().enumerate() {
        let a = mat_from_flat(&domain, &c.a, &format!("constraints[{i}].A"))?;
        let lmi = TwoSidedLmi::new(a, c.bl, c.bu)
            .map_err(|e| ModelError::BadConstraint { index: i, message: e.to_string() })?;
        constraints.push(lmi);
    }
    RcopInstance::new(json.name, domain, objective, constraints)
}

pub fn write_instance(path: &std::path::Path, inst: &RcopInstance) -> Result<(), ModelError> {
    std::fs::write(path, instance_to_json(inst))?;
    Ok(())
}

pub fn read_instance(path: &std::path::Path) -> Result<RcopInstance, ModelError> {
    let text = std::fs::read_to_string(path)?;
    instance_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ball_constraint(n: usize) -> QcqpConstraint {
        QcqpConstraint {
            quad: SymMatrix::identity(n),
            lin: vec![0.0; n],
            lo: f64::NEG_INFINITY,
            hi: 1.0,
        }
    }

    #[test]
    fn lift_trs_block_structure() {
        let n = 3;
        let q = QcqpData {
            obj_quad: SymMatrix::diag(&[1.0, -1.0, 0.5]),
            obj_lin: vec![0.0; n],
            constraints: vec![ball_constraint(n)],
        };
        let inst = lift_qcqp(&q).unwrap();
        assert_eq!(inst.m(), 2);
        // ball row is diag(0, I_n) with hi = 1
        let ball = &inst.constraints[0];
        assert_eq!(ball.hi, 1.0);
        assert_eq!(ball.a.get(0, 0), 0.0);
        for i in 1..=n {
            assert_eq!(ball.a.get(i, i), 1.0);
        }
        // homogenization row
        let h = &inst.constraints[1];
        assert_eq!((h.lo, h.hi), (1.0, 1.0));
        assert_eq!(h.a.get(0, 0), 1.0);
        assert_eq!(lift_marker(&inst), Some(1));
    }

    #[test]
    fn lift_zero_and_empty_qcqp() {
        let q = QcqpData {
            obj_quad: SymMatrix::zeros(2),
            obj_lin: vec![0.0, 0.0],
            constraints: vec![],
        };
        let inst = lift_qcqp(&q).unwrap();
        assert_eq!(inst.m(), 1); // only X_11 = 1
        assert!(inst.objective.is_zero(0.0));
    }

    #[test]
    fn lift_objective_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let q = QcqpData {
                obj_quad: SymMatrix::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                obj_lin: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                constraints: vec![],
            };
            let inst = lift_qcqp(&q).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let want = q.obj_quad.quad_form(&x)
                + q.obj_lin.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            let got = inst.objective.inner(&Mat::Sym(lift_vector(&x)));
            assert!((want - got).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn unlift_round_trips() {
        let q = QcqpData {
            obj_quad: SymMatrix::diag(&[2.0, -1.0]),
            obj_lin: vec![0.5, 0.25],
            constraints: vec![ball_constraint(2)],
        };
        let inst = lift_qcqp(&q).unwrap();
        let back = unlift_qcqp(&inst).unwrap();
        assert_eq!(back.obj_quad, q.obj_quad);
        assert_eq!(back.obj_lin, q.obj_lin);
        assert_eq!(back.constraints.len(), 1);
    }

    #[test]
    fn fpca_single_group() {
        let inst = build_fpca(&[SymMatrix::identity(3)], 1).unwrap();
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].m(), 0);
        assert_eq!(inst[0].objective.get(0, 0), -1.0);
    }

    #[test]
    fn fpca_identical_groups_drop_constraint() {
        let a = SymMatrix::diag(&[1.0, 2.0]);
        let fam = build_fpca(&[a.clone(), a], 1).unwrap();
        assert_eq!(fam.len(), 2);
        for inst in &fam {
            assert_eq!(inst.m(), 0);
            assert_eq!(constraint_dimension(inst), 0);
        }
    }

    #[test]
    fn fpca_rejects_indefinite() {
        let err = build_fpca(&[SymMatrix::diag(&[1.0, -0.5])], 1).unwrap_err();
        match err {
            ModelError::NotPsd { index: 0, eig } => assert!((eig + 0.5).abs() < 1e-9),
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn fsvd_square_matches_fpca_shape() {
        let a1 = SymMatrix::diag(&[1.0, 0.0]);
        let a2 = SymMatrix::diag(&[0.0, 1.0]);
        let fpca = build_fpca(&[a1.clone(), a2.clone()], 1).unwrap();
        let r1 = RectMatrix::from_rows(2, 2, a1.data()).unwrap();
        let r2 = RectMatrix::from_rows(2, 2, a2.data()).unwrap();
        let fsvd = build_fsvd(&[r1, r2], 1).unwrap();
        assert_eq!(fpca.len(), fsvd.len());
        for (a, b) in fpca.iter().zip(&fsvd) {
            assert_eq!(a.m(), b.m());
            assert_eq!(a.objective.data(), b.objective.data());
        }
    }

    #[test]
    fn dimension_counts_independent_matrices() {
        let a = SymMatrix::diag(&[1.0, 2.0]);
        let double = {
            let mut d = a.clone();
            d.scale(2.0);
            d
        };
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let inst = RcopInstance::new(
            "dim",
            domain,
            Mat::Sym(SymMatrix::zeros(2)),
            vec![
                TwoSidedLmi::upper(Mat::Sym(a), 1.0).unwrap(),
                TwoSidedLmi::upper(Mat::Sym(double), 1.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(constraint_dimension(&inst), 1);

        let empty = RcopInstance::new("empty", domain, Mat::Sym(SymMatrix::zeros(2)), vec![]).unwrap();
        assert_eq!(constraint_dimension(&empty), 0);
    }

    #[test]
    fn lifted_trs_dimension_is_two() {
        let q = QcqpData {
            obj_quad: SymMatrix::diag(&[1.0, -2.0]),
            obj_lin: vec![0.3, 0.0],
            constraints: vec![ball_constraint(2)],
        };
        let inst = lift_qcqp(&q).unwrap();
        assert_eq!(constraint_dimension(&inst), 2);
    }

    #[test]
    fn one_sided_split() {
        let domain = DomainSpec::psd_rank_k(2, 1).unwrap();
        let a = Mat::Sym(SymMatrix::diag(&[1.0, 0.0]));
        let inst = RcopInstance::new(
            "eq",
            domain,
            Mat::Sym(SymMatrix::zeros(2)),
            vec![TwoSidedLmi::equality(a.clone(), 1.0).unwrap(), TwoSidedLmi::upper(a, 3.0).unwrap()],
        )
        .unwrap();
        let (one, map) = to_one_sided(&inst);
        assert_eq!(one.m(), 3);
        assert!(one.constraints.iter().all(|c| c.lo == f64::NEG_INFINITY));
        assert_eq!(map, vec![(0, Side::Upper), (0, Side::Lower), (1, Side::Upper)]);
        assert_eq!(one.constraints[1].hi, -1.0);
    }

    #[test]
    fn instance_json_round_trip_bit_exact() {
        let domain = DomainSpec::psd_rank_k_spectral(2, 1).unwrap();
        let mut a = SymMatrix::zeros(2);
        a.set_sym(0, 1, 0.1234567890123456789);
        let inst = RcopInstance::new(
            "round-trip",
            domain,
            Mat::Sym(SymMatrix::diag(&[-1.0, 0.0])),
            vec![
                TwoSidedLmi::equality(Mat::Sym(a), 0.0).unwrap(),
                TwoSidedLmi::upper(Mat::Sym(SymMatrix::diag(&[1.0, 0.0])), 0.5).unwrap(),
                TwoSidedLmi::lower(Mat::Sym(SymMatrix::diag(&[0.0, 1.0])), -3.25).unwrap(),
            ],
        )
        .unwrap();
        let text = instance_to_json(&inst);
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back.name, inst.name);
        assert_eq!(back.domain, inst.domain);
        assert_eq!(back.objective.data(), inst.objective.data());
        for (x, y) in back.constraints.iter().zip(&inst.constraints) {
            assert_eq!(x.a.data(), y.a.data());
            assert_eq!(x.lo, y.lo);
            assert_eq!(x.hi, y.hi);
        }
    }

    #[test]
    fn inf_bound_strings_parse() {
        let text = r#"{
            "name": "bounds",
            "domain": {"kind": "psd_rank_k", "n": 1, "k": 1},
            "objective": [1.0],
            "constraints": [{"A": [1.0], "bl": "-inf", "bu": "inf"}]
        }"#;
        let inst = instance_from_json(text).unwrap();
        assert_eq!(inst.constraints[0].lo, f64::NEG_INFINITY);
        assert_eq!(inst.constraints[0].hi, f64::INFINITY);
    }

    #[test]
    fn shape_error_names_constraint() {
        let text = r#"{
            "name": "bad",
            "domain": {"kind": "psd_rank_k", "n": 2, "k": 1},
            "objective": [0.0, 0.0, 0.0, 0.0],
            "constraints": [{"A": [1.0, 0.0], "bl": 0.0, "bu": 1.0}]
        }"#;
        let err = instance_from_json(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("constraints[0].A"), "got: {msg}");
        assert!(msg.contains("expected 4"), "got: {msg}");
    }
}
