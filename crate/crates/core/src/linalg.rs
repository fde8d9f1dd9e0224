use ndarray::{Array2, ArrayView2};

/// Solves `gram · X = rhs` for a small square `gram` by Gaussian elimination
/// with partial pivoting. When the system is singular the diagonal is shifted
/// by `ridge` and the solve repeated, so the call never fails.
pub fn solve_regularized(gram: ArrayView2<f64>, rhs: ArrayView2<f64>, ridge: f64) -> Array2<f64> {
    if let Some(x) = lu_solve(gram, rhs) {
        return x;
    }
    let mut shifted = gram.to_owned();
    for i in 0..shifted.nrows() {
        shifted[[i, i]] += ridge;
    }
    lu_solve(shifted.view(), rhs).unwrap_or_else(|| Array2::zeros(rhs.dim()))
}

fn lu_solve(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    debug_assert_eq!(n, b.nrows());
    let mut m = a.to_owned();
    let mut x = b.to_owned();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = f64::EPSILON * n as f64 * scale.max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, m[[i, k]].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= tol {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap([k, j], [p, j]);
            }
            for j in 0..x.ncols() {
                x.swap([k, j], [p, j]);
            }
        }
        for i in k + 1..n {
            let f = m[[i, k]] / m[[k, k]];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[[i, j]] -= f * m[[k, j]];
            }
            for j in 0..x.ncols() {
                x[[i, j]] -= f * x[[k, j]];
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.ncols() {
            let mut s = x[[k, j]];
            for i in k + 1..n {
                s -= m[[k, i]] * x[[i, j]];
            }
            x[[k, j]] = s / m[[k, k]];
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_well_posed_system() {
        let a = array![[4.0, 1.0], [2.0, 3.0]];
        let b = array![[1.0, 0.0], [2.0, 1.0]];
        let x = solve_regularized(a.view(), b.view(), 1e-10);
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn singular_system_falls_back_to_ridge() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let b = array![[2.0], [2.0]];
        let x = solve_regularized(a.view(), b.view(), 1e-10);
        assert!(x.iter().all(|v| v.is_finite()));
        let r = a.dot(&x) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn zero_system_gives_zero() {
        let a = Array2::<f64>::zeros((3, 3));
        let b = Array2::<f64>::zeros((3, 2));
        assert_eq!(solve_regularized(a.view(), b.view(), 1e-10), b);
    }
}
