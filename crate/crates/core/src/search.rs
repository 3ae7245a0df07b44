//! Scalar bracketing search: bisection for roots, golden section for minima.

use crate::error::Error;
use crate::real::Real;

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// Requires a sign change over the bracket. Stops when the bracket width is
/// at most `x_tol`. Non-finite values at the endpoints are treated by their
/// sign (an infinite positive endpoint is a valid bracket side).
pub fn bisect_root<R: Real>(
    mut f: impl FnMut(R) -> R,
    mut lo: R,
    mut hi: R,
    x_tol: R,
    max_iter: usize,
) -> Result<R, Error> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == R::zero() {
        return Ok(lo);
    }
    if f_hi == R::zero() {
        return Ok(hi);
    }
    if (f_lo > R::zero()) == (f_hi > R::zero()) {
        return Err(Error::Solver(format!(
            "bisection bracket [{lo}, {hi}] has no sign change"
        )));
    }
    for _ in 0..max_iter {
        if hi - lo < x_tol {
            break;
        }
        let mid = lo + (hi - lo) * R::c(0.5);
        if mid <= lo || mid >= hi {
            break; // bracket collapsed to adjacent floats
        }
        let f_mid = f(mid);
        if f_mid == R::zero() {
            return Ok(mid);
        }
        if (f_mid > R::zero()) == (f_lo > R::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) * R::c(0.5))
}

/// Minimizes a unimodal `f` on `[a, b]` by golden-section search.
///
/// Returns `(x_min, f_min)` once the interval shrinks below `x_tol` or the
/// evaluation budget runs out.
pub fn golden_section_min<R: Real>(
    mut f: impl FnMut(R) -> R,
    mut a: R,
    mut b: R,
    x_tol: R,
    max_iter: usize,
) -> (R, R) {
    let inv_phi = R::c(0.618_033_988_749_894_8);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisect_finds_cubic_root() {
        let root = bisect_root(|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert_relative_eq!(root, 2.0f64.powf(1.0 / 3.0), max_relative = 1e-10);
    }

    #[test]
    fn bisect_rejects_bad_bracket() {
        assert!(bisect_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn bisect_accepts_infinite_endpoint_value() {
        let root = bisect_root(|x: f64| 1.0 / x - 2.0, 0.0, 5.0, 1e-12, 200).unwrap();
        assert_relative_eq!(root, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x: f64| (x - 1.3).powi(2) + 0.25, -4.0, 6.0, 1e-10, 200);
        assert_relative_eq!(x, 1.3, epsilon = 1e-8);
        assert_relative_eq!(fx, 0.25, epsilon = 1e-12);
    }
}
