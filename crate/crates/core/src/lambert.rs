//! Principal branch of the Lambert-W function.
//!
//! `lambert_w0(x)` solves `w * exp(w) = x` for `x >= -1/e` by Halley
//! iteration from a piecewise initial guess, stopping on the residual
//! `|w e^w - x| <= 1e-12 * max(1, |x|)`.

use crate::error::Error;
use crate::real::Real;

const MAX_ITER: usize = 100;

fn initial_guess<R: Real>(x: R) -> R {
    let e = R::c(std::f64::consts::E);
    if x < R::c(-0.25) {
        // Series around the branch point x = -1/e.
        let p = (R::c(2.0) * (e * x + R::one()).max(R::zero())).sqrt();
        -R::one() + p - p * p / R::c(3.0) + R::c(11.0 / 72.0) * p * p * p
    } else if x <= e {
        // ln(1 + x) tracks W well on moderate arguments.
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// Principal-branch Lambert-W.
pub fn lambert_w0<R: Real>(x: R) -> Result<R, Error> {
    let branch_point = -R::c(std::f64::consts::E).recip();
    if !x.is_finite() || x < branch_point * (R::one() + R::c(1e-12)) {
        return Err(Error::ModelDomain(format!(
            "lambert_w0 argument {x} below branch point -1/e"
        )));
    }
    if x <= branch_point {
        return Ok(-R::one());
    }
    if x == R::zero() {
        return Ok(R::zero());
    }

    let tol = R::c(1e-12) * R::one().max(x.abs());
    let mut w = initial_guess(x);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= tol {
            return Ok(w);
        }
        // Halley step.
        let wp1 = w + R::one();
        let denom = ew * wp1 - (w + R::c(2.0)) * f / (R::c(2.0) * wp1);
        let step = f / denom;
        w = w - step;
        if w < -R::one() {
            w = -R::one() + R::c(1e-12);
        }
    }
    let residual = w * w.exp() - x;
    if residual.abs() <= R::c(1e-10) * R::one().max(x.abs()) {
        Ok(w)
    } else {
        Err(Error::Solver(format!(
            "lambert_w0({x}) did not converge: residual {residual}"
        )))
    }
}
