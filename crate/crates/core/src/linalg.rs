//! Small dense helpers. Matrices are row-major `Vec<f64>` with an explicit dimension.

/// In-place lower Cholesky factorization of a symmetric positive definite `n x n` matrix.
/// Returns `None` on a non-positive pivot. The strict upper triangle is zeroed.
pub(crate) fn cholesky_in_place(a: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for k in (j + 1)..n {
            a[j * n + k] = 0.0;
        }
    }
    Some(())
}

/// Solves `L y = b` for lower-triangular `L` (row-major, `n x n`), overwriting `b`.
pub(crate) fn forward_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let s: f64 = row.iter().zip(&b[..i]).map(|(a, y)| a * y).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

/// `log det A` from its Cholesky factor.
pub(crate) fn chol_logdet(l: &[f64], n: usize) -> f64 {
    (0..n).map(|i| 2.0 * l[i * n + i].ln()).sum()
}
