//! Small dense linear-algebra helpers that nalgebra does not provide in the
//! form we need.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Natural log of `|det(m)|`, via LU factorization with partial pivoting.
///
/// The magnitude is accumulated as a sum of `ln|pivot|`, so determinants far
/// below `f64::MIN_POSITIVE` are still representable. A singular matrix gives
/// `-inf`.
pub fn log_abs_det(m: &DMatrix<Complex64>) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: m.ncols(),
        });
    }
    let mut lu = m.clone();
    let mut log_det = 0.0;
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !pivot_abs.is_finite() {
            return Err(Error::numerical("non-finite entry in determinant input"));
        }
        if pivot_abs == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if pivot_row != col {
            lu.swap_rows(pivot_row, col);
        }
        let pivot_inv = (lu[(col, col)].conj() / pivot_abs) / pivot_abs;
        log_det += pivot_abs.ln();
        for r in (col + 1)..n {
            let factor = lu[(r, col)] * pivot_inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in (col + 1)..n {
                let delta = factor * lu[(col, c)];
                lu[(r, c)] -= delta;
            }
        }
    }
    Ok(log_det)
}

/// Sum in a fixed pairwise order. Results depend only on the slice contents,
/// never on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Largest absolute entry of `q^H q - I`.
pub fn unitarity_defect(q: &DMatrix<Complex64>) -> f64 {
    let gram = q.adjoint() * q;
    let mut worst: f64 = 0.0;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_det_matches_nalgebra_on_small_matrix() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.5),
                c(2.0, 0.0),
                c(0.0, -1.0),
                c(0.3, 0.0),
                c(0.0, 0.0),
                c(4.0, 1.0),
                c(-1.0, 2.0),
                c(0.5, 0.5),
                c(1.0, 0.0),
            ],
        );
        let expected = m.clone().determinant().norm().ln();
        let got = log_abs_det(&m).unwrap();
        assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
    }

    #[test]
    fn log_det_survives_underflow() {
        // det = 1e-200^4 = 1e-800, far below f64 range.
        let m = DMatrix::from_diagonal_element(4, 4, c(1e-200, 0.0));
        let got = log_abs_det(&m).unwrap();
        let expected = 4.0 * (1e-200f64).ln();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn singular_matrix_gives_negative_infinity() {
        let m = DMatrix::from_element(3, 3, c(1.0, 0.0));
        assert_eq!(log_abs_det(&m).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 999.0 * 1000.0 / 2.0);
    }
}
