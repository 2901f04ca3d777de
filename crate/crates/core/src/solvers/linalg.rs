use alloc::vec::Vec;

use crate::math;

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
/// `a` is row-major `n x n`. Returns `None` for a numerically singular matrix.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let (pivot, max) = (col..n)
            .map(|r| (r, math::abs(a[r * n + col])))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if max < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for j in r + 1..n {
            acc -= a[r * n + j] * x[j];
        }
        x[r] = acc / a[r * n + r];
    }
    Some(x)
}
