//! Small numerical helpers shared across the crate: bracketed root
//! refinement, dense-grid sign scans, cosine-clustered sampling, and a
//! pivoted Gaussian solver for the fixed-size systems that show up in
//! Newton refinements.

/// Refine a bracketed root of `f` by bisection until the interval is
/// shorter than `tol`. Requires `f(a)` and `f(b)` of opposite sign (or
/// one of them zero).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "bisect requires a sign change");
    while (b - a).abs() > tol {
        let mid = 0.5 * (a + b);
        // float exhaustion: the bracket cannot shrink below one ULP even
        // when that is larger than the requested tolerance
        if mid == a || mid == b {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Newton polish of a simple root from a bisection estimate, with a
/// central-difference derivative. Stops when the residual stops improving,
/// which leaves `|f|` at its evaluation noise floor.
pub fn polish_root<F: Fn(f64) -> f64>(f: F, mut x: f64) -> f64 {
    let mut fx = f(x);
    for _ in 0..12 {
        if fx == 0.0 {
            break;
        }
        let h = 1e-7 * x.abs().max(1e-3);
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d == 0.0 {
            break;
        }
        let step = fx / d;
        let xn = x - step;
        let fxn = f(xn);
        if fxn.abs() >= fx.abs() {
            break;
        }
        x = xn;
        fx = fxn;
        if step.abs() < 1e-15 * x.abs().max(1e-3) {
            break;
        }
    }
    x
}

/// Scan `f` on a uniform grid of `n` points over `[a, b]` and return every
/// bracket `(x0, x1)` across which the sign changes, plus the grid points
/// where `|f|` dips below `flat_tol` without a sign change (tangency
/// suspects).
pub fn scan_sign_changes<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n: usize,
    flat_tol: f64,
) -> (Vec<(f64, f64)>, Vec<f64>) {
    assert!(n >= 2);
    let mut brackets = Vec::new();
    let mut tangencies = Vec::new();
    let h = (b - a) / (n - 1) as f64;
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..n {
        let x = a + i as f64 * h;
        let fx = f(x);
        if f_prev == 0.0 {
            brackets.push((x_prev, x_prev));
        } else if f_prev * fx < 0.0 {
            brackets.push((x_prev, x));
        } else if fx.abs() < flat_tol && i + 1 < n {
            tangencies.push(x);
        }
        x_prev = x;
        f_prev = fx;
    }
    (brackets, tangencies)
}

/// `n` samples of `[a, b]` clustered toward both endpoints by the cosine
/// (Chebyshev-extrema) map. The first and last samples hit `a` and `b`
/// exactly.
pub fn cosine_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|k| {
            let t = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos());
            a + (b - a) * t
        })
        .collect()
}

/// Solve the dense system `A x = rhs` in place by Gaussian elimination with
/// partial pivoting. `a` is row-major `n x n`. Returns `None` when a pivot
/// falls below `1e-14` times the largest initial entry.
pub fn solve_dense(a: &mut [f64], rhs: &mut [f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(rhs.len(), n);
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = row;
            }
        }
        if pivot_val < 1e-14 * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            rhs.swap(col, pivot_row);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = rhs[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// Cubic Hermite interpolation of `y(t)` on `[t0, t1]` given endpoint
/// values and derivatives.
pub fn hermite(t: f64, t0: f64, t1: f64, y0: f64, y1: f64, dy0: f64, dy1: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * dy0 + h01 * y1 + h11 * h * dy1
}

/// Derivative in `t` of the cubic Hermite interpolant above.
pub fn hermite_deriv(t: f64, t0: f64, t1: f64, y0: f64, y1: f64, dy0: f64, dy1: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    dh00 * y0 + dh10 * dy0 + dh01 * y1 + dh11 * dy1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12);
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn scan_brackets_quadratic_roots() {
        let (brackets, _) = scan_sign_changes(|x| (x - 1.0) * (x - 3.0), 0.0, 4.0, 1000, 1e-14);
        assert_eq!(brackets.len(), 2);
        assert!(brackets[0].0 < 1.0 && 1.0 < brackets[0].1);
        assert!(brackets[1].0 < 3.0 && 3.0 < brackets[1].1);
    }

    #[test]
    fn cosine_grid_hits_endpoints() {
        let g = cosine_grid(2.0, 5.0, 11);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 2.0);
        assert!((g[10] - 5.0).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        // clustering: first gap smaller than the middle gap
        assert!(g[1] - g[0] < g[6] - g[5]);
    }

    #[test]
    fn solve_dense_4x4() {
        // A = diag-dominant test matrix, x = (1, -2, 3, 0.5)
        let a = [
            4.0, 1.0, 0.0, 2.0, //
            1.0, 5.0, 1.0, 0.0, //
            0.0, 1.0, 6.0, 1.0, //
            2.0, 0.0, 1.0, 7.0,
        ];
        let x_true = [1.0, -2.0, 3.0, 0.5];
        let mut rhs = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                rhs[i] += a[i * 4 + j] * x_true[j];
            }
        }
        let mut a_mut = a.to_vec();
        let x = solve_dense(&mut a_mut, &mut rhs.to_vec(), 4).unwrap();
        for i in 0..4 {
            assert!((x[i] - x_true[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_dense_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut rhs = vec![1.0, 2.0];
        assert!(solve_dense(&mut a, &mut rhs, 2).is_none());
    }

    #[test]
    fn hermite_reproduces_cubic() {
        // y = t^3 - 2t on [1, 3]
        let y = |t: f64| t * t * t - 2.0 * t;
        let dy = |t: f64| 3.0 * t * t - 2.0;
        for k in 0..=20 {
            let t = 1.0 + 2.0 * k as f64 / 20.0;
            let v = hermite(t, 1.0, 3.0, y(1.0), y(3.0), dy(1.0), dy(3.0));
            assert!((v - y(t)).abs() < 1e-12);
            let d = hermite_deriv(t, 1.0, 3.0, y(1.0), y(3.0), dy(1.0), dy(3.0));
            assert!((d - dy(t)).abs() < 1e-11);
        }
    }
}
