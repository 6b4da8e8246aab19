//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Pivot magnitudes below this (relative to the row scale) are treated as singular.
const PIVOT_TOL: f64 = 1e-14;

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place.
///
/// `lower[0]` and `upper[n-1]` are ignored. The solution overwrites `rhs`;
/// `scratch` must have the same length and is clobbered. No pivoting, so the
/// matrix should be diagonally dominant.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n && scratch.len() == n);
    if n == 0 {
        return Ok(());
    }

    let check = |pivot: f64, row: usize, scale: f64| -> Result<()> {
        if !pivot.is_finite() || pivot.abs() <= PIVOT_TOL * scale.max(f64::MIN_POSITIVE) {
            Err(Error::SingularSystem { row })
        } else {
            Ok(())
        }
    };

    let mut pivot = diag[0];
    check(pivot, 0, diag[0].abs() + upper[0].abs())?;
    scratch[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * scratch[i - 1];
        check(pivot, i, diag[i].abs() + lower[i].abs() + upper[i].abs())?;
        scratch[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multiply(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn solves_dominant_system() {
        let n = 50;
        let lower: Vec<f64> = (0..n).map(|i| -0.3 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.005 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i % 3) as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut rhs = multiply(&lower, &diag, &upper, &x);
        let mut scratch = vec![0.0; n];
        solve_in_place(&lower, &diag, &upper, &mut rhs, &mut scratch).unwrap();
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_and_single_row() {
        let mut rhs = vec![3.0];
        let mut s = vec![0.0];
        solve_in_place(&[0.0], &[2.0], &[0.0], &mut rhs, &mut s).unwrap();
        assert_eq!(rhs[0], 1.5);
    }

    #[test]
    fn singular_is_reported() {
        let mut rhs = vec![1.0, 1.0];
        let mut s = vec![0.0; 2];
        let err = solve_in_place(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &mut rhs, &mut s).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { row: 1 }));
    }
}
