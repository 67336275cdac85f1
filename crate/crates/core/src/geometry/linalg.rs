//! Small dense helpers generic over [`Scalar`], so inverses carry jets.

use crate::error::{GeomError, Result};
use crate::jets::Scalar;
use nalgebra::DMatrix;

/// Gauss-Jordan inverse with partial pivoting on the value part.
pub fn invert<T: Scalar, const N: usize>(m: &[[T; N]; N]) -> Result<[[T; N]; N]> {
    let scale = m
        .iter()
        .flatten()
        .fold(0.0_f64, |s, x| s.max(x.value().abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(GeomError::Degenerate("zero or non-finite matrix".into()));
    }
    let mut a = *m;
    let mut inv = [[T::cst(0.0); N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = T::cst(1.0);
    }
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].value().abs().total_cmp(&a[j][col].value().abs()))
            .unwrap();
        if a[piv][col].value().abs() < 1e-12 * scale {
            return Err(GeomError::Degenerate(format!(
                "singular matrix at column {col}"
            )));
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for k in 0..N {
            a[col][k] = a[col][k] / p;
            inv[col][k] = inv[col][k] / p;
        }
        for r in 0..N {
            if r != col {
                let f = a[r][col];
                for k in 0..N {
                    a[r][k] = a[r][k] - f * a[col][k];
                    inv[r][k] = inv[r][k] - f * inv[col][k];
                }
            }
        }
    }
    Ok(inv)
}

pub fn det_f64<const N: usize>(m: &[[f64; N]; N]) -> f64 {
    DMatrix::from_fn(N, N, |i, j| m[i][j]).determinant()
}

/// (positive, negative) eigenvalue counts of a symmetric matrix; eigenvalues
/// with magnitude below `tol·max|λ|` count as neither.
pub fn inertia<const N: usize>(m: &[[f64; N]; N], tol: f64) -> (usize, usize) {
    let eig = DMatrix::from_fn(N, N, |i, j| 0.5 * (m[i][j] + m[j][i])).symmetric_eigenvalues();
    let big = eig.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    let pos = eig.iter().filter(|&&x| x > tol * big).count();
    let neg = eig.iter().filter(|&&x| x < -tol * big).count();
    (pos, neg)
}

/// Least-squares solve via SVD; returns the solution and the residual norm.
pub fn lstsq(
    a: &DMatrix<f64>,
    b: &nalgebra::DVector<f64>,
) -> Result<(nalgebra::DVector<f64>, f64)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(b, 1e-12 * smax.max(1e-300))
        .map_err(|e| GeomError::Degenerate(e.to_string()))?;
    let r = (a * &x - b).norm();
    Ok((x, r))
}
