//! Small dense helpers on top of nalgebra with fixed sign and ordering
//! conventions, so fitted maps are reproducible bit for bit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row-major `n × d` slice into a matrix.
pub fn from_rows(data: &[f64], n: usize, d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, d, data)
}

/// Matrix back to row-major order.
pub fn to_rows(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        out.extend(m.row(i).iter());
    }
    out
}

pub fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

/// Subtracts `mean` from every row.
pub fn center_rows(m: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        for (x, mu) in row.iter_mut().zip(mean.iter()) {
            *x -= mu;
        }
    }
    out
}

/// Thin SVD `m = U diag(s) Vᵀ` with singular values descending and each
/// left singular vector's largest-magnitude entry made positive.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let raw = m
        .clone()
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = raw.u.expect("requested U");
    let v = raw.v_t.expect("requested Vᵀ").transpose();
    let s = raw.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    // Stable sort keeps the solver's order among exactly equal values.
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let mut su = DMatrix::zeros(u.nrows(), order.len());
    let mut sv = DMatrix::zeros(v.nrows(), order.len());
    let mut values = Vec::with_capacity(order.len());
    for (j, &k) in order.iter().enumerate() {
        let col = u.column(k);
        let mut pivot = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        su.set_column(j, &(col * sign));
        sv.set_column(j, &(v.column(k) * sign));
        values.push(s[k]);
    }
    Ok(Svd {
        u: su,
        singular_values: values,
        v: sv,
    })
}

/// `C^(-1/2)` for a symmetric positive-definite matrix via its
/// eigendecomposition. Fails when the smallest eigenvalue is not clearly
/// positive relative to the largest.
pub fn inverse_sqrt_spd(c: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let eig = c.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    if !(max > 0.0) || !(min > 1e-12 * max) {
        return Err(Error::Numerical(format!(
            "{what} covariance is not positive definite (eigenvalues in [{min:e}, {max:e}]); use a larger ridge"
        )));
    }
    let inv_sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    let q = &eig.eigenvectors;
    let scaled = q * DMatrix::from_diagonal(&inv_sqrt);
    let mut out = scaled * q.transpose();
    // Symmetrize against rounding.
    let t = out.transpose();
    out = (out + t) * 0.5;
    Ok(out)
}

/// Moore–Penrose pseudoinverse through [`svd`], dropping singular values
/// below `rcond · σ_max`.
pub fn pseudo_inverse(m: &DMatrix<f64>, rcond: f64) -> Result<DMatrix<f64>> {
    let Svd { u, singular_values, v } = svd(m)?;
    let cutoff = rcond * singular_values.first().copied().unwrap_or(0.0);
    let inv = DVector::from_iterator(
        singular_values.len(),
        singular_values.iter().map(|&s| if s > cutoff { 1.0 / s } else { 0.0 }),
    );
    Ok(v * DMatrix::from_diagonal(&inv) * u.transpose())
}
