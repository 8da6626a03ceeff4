use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Solves `a x = b` for square row-major `a` (n × n) by LU decomposition
/// with partial pivoting.
pub fn solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    check_len("solve matrix", n * n, a.len())?;
    let m = DMatrix::from_row_slice(n, n, a);
    let x = m
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| Error::Input("singular matrix".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("singular matrix".into()));
    }
    Ok(x.as_slice().to_vec())
}

/// Row-major `a` (rows × cols) times `x`.
pub fn mat_vec(a: &[f64], rows: usize, x: &[f64]) -> Vec<f64> {
    let cols = x.len();
    (0..rows)
        .map(|r| a[r * cols..(r + 1) * cols].iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}
