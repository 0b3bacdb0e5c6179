//! Small dense least-squares helpers used for multiplier refinement.

/// Minimum-norm least-squares solution of `A x = b` where `A` is given by
/// columns. Uses the eigendecomposition of the Gram matrix; adequate at the
/// handful-of-columns scale this crate needs.
pub fn lstsq_columns(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let gram = crate::matrixcore::SymMatrix::from_fn(k, |i, j| dot(&cols[i], &cols[j]));
    let rhs: Vec<f64> = cols.iter().map(|c| dot(c, b)).collect();
    let eig = crate::matrixcore::eig_sym(&gram).expect("finite gram matrix");
    let lam_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = 1e-12 * lam_max;
    let mut x = vec![0.0; k];
    for j in 0..k {
        let lam = eig.values[j];
        if lam <= cut || lam <= 0.0 {
            continue;
        }
        let q = eig.vector(j);
        let c = dot(q, &rhs) / lam;
        for i in 0..k {
            x[i] += c * q[i];
        }
    }
    x
}

/// Lawson-Hanson style nonnegative least squares: minimize `||A x - b||`
/// subject to `x >= 0`, with `A` given by columns.
pub fn nnls_columns(cols: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let mut x = vec![0.0; k];
    if k == 0 {
        return x;
    }
    let mut passive = vec![false; k];
    let residual = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (j, c) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= x[j] * ci;
                }
            }
        }
        r
    };
    let scale: f64 = cols.iter().map(|c| dot(c, c).sqrt()).fold(0.0, f64::max).max(1e-300);

    for _outer in 0..(30 * k + 30) {
        let r = residual(&x);
        // most positive gradient among the active set
        let mut best = None;
        for j in 0..k {
            if passive[j] {
                continue;
            }
            let g = dot(&cols[j], &r);
            if g > 1e-12 * scale * norm(&r).max(1.0)
                && best.map_or(true, |(_, bg)| g > bg)
            {
                best = Some((j, g));
            }
        }
        let Some((enter, _)) = best else { break };
        passive[enter] = true;

        // inner loop: solve on the passive set, clip negatives back out
        for _inner in 0..(30 * k + 30) {
            let pset: Vec<usize> = (0..k).filter(|&j| passive[j]).collect();
            let sub: Vec<Vec<f64>> = pset.iter().map(|&j| cols[j].clone()).collect();
            let z = lstsq_columns(&sub, b);
            if z.iter().all(|&v| v > 0.0) {
                for v in x.iter_mut() {
                    *v = 0.0;
                }
                for (idx, &j) in pset.iter().enumerate() {
                    x[j] = z[idx];
                }
                break;
            }
            // step toward z until the first coordinate hits zero
            let mut alpha = 1.0f64;
            for (idx, &j) in pset.iter().enumerate() {
                if z[idx] <= 0.0 {
                    let denom = x[j] - z[idx];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (idx, &j) in pset.iter().enumerate() {
                x[j] += alpha * (z[idx] - x[j]);
                if x[j] <= 1e-14 * scale || z[idx] <= 0.0 && x[j] < 1e-12 {
                    x[j] = 0.0;
                }
            }
            for &j in &pset {
                if x[j] == 0.0 {
                    passive[j] = false;
                }
            }
            if pset.iter().all(|&j| !passive[j]) {
                break;
            }
        }
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
