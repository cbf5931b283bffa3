//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector, Matrix2};

use crate::C64;

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn condition_number2(m: &Matrix2<C64>) -> f64 {
    condition_number(&DMatrix::from_iterator(2, 2, m.iter().copied()))
}

/// Solves `m x = b` by LU with partial pivoting. `None` if singular.
pub fn solve(m: &DMatrix<C64>, b: &DVector<C64>) -> Option<DVector<C64>> {
    m.clone().lu().solve(b)
}
