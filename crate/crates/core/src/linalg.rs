//! Dense LU with partial pivoting, enough for Jacobians of a few hundred rows.

/// Pivots smaller than this are treated as singular.
pub const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

/// Solve `a * x = b` in place. `a` is row-major `n x n` and is overwritten
/// with its LU factors; `b` becomes `x`.
pub fn lu_solve(a: &mut [f64], b: &mut [f64]) -> Result<(), Singular> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|r| (r, a[r * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pivot_abs >= PIVOT_EPS) {
            return Err(Singular);
        }
        if pivot_row != k {
            for c in 0..n {
                a.swap(k * n + c, pivot_row * n + c);
            }
            b.swap(k, pivot_row);
        }
        let pivot = a[k * n + k];
        for r in k + 1..n {
            let factor = a[r * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r * n + k] = factor;
            for c in k + 1..n {
                a[r * n + c] -= factor * a[k * n + c];
            }
            b[r] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut sum = b[k];
        for c in k + 1..n {
            sum -= a[k * n + c] * b[c];
        }
        b[k] = sum / a[k * n + k];
    }
    Ok(())
}
