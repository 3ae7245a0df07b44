//! Convexifying bounds used by the trajectory subproblems.
//!
//! Both bounds touch the function they replace at the linearization point:
//! [`ProductBound`] majorizes a bilinear product, and
//! [`induced_slack_bound`] minorizes the induced-power slack relation.

/// Convex quadratic upper bound on the product `(sa * a) * q`, tight at the
/// linearization point: `¼[(p + q)^2 - 2 dhat (p - q) + dhat^2]` with
/// `p = sa * a` and `dhat = p̂ - q̂`. The gap to the true product is
/// `¼((p - q) - dhat)^2 >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct ProductBound {
    pub(crate) sa: f64,
    pub(crate) dhat: f64,
}

impl ProductBound {
    /// Bound around the linearization point `(point_a, point_q)`; `sa` is
    /// the sign applied to the first factor.
    pub fn at_point(sa: f64, point_a: f64, point_q: f64) -> Self {
        Self {
            sa,
            dhat: sa * point_a - point_q,
        }
    }

    #[inline]
    pub fn value(&self, a: f64, q: f64) -> f64 {
        let p = self.sa * a;
        0.25 * ((p + q) * (p + q) - 2.0 * self.dhat * (p - q) + self.dhat * self.dhat)
    }

    /// `(d/da, d/dq)`.
    #[inline]
    pub(crate) fn grad(&self, a: f64, q: f64) -> (f64, f64) {
        let s = self.sa * a + q;
        (self.sa * 0.5 * (s - self.dhat), 0.5 * (s + self.dhat))
    }

    /// Constant Hessian `(aa, aq, qq)`.
    #[inline]
    pub(crate) fn hess(&self) -> (f64, f64, f64) {
        (0.5 * self.sa * self.sa, 0.5 * self.sa, 0.5)
    }
}

/// Linear coefficients `(r_a, r_v, r_0)` of the tangent-plane lower bound on
/// the induced-slack relation `sqrt(1 + A^2 + c4^2 v^4) + c4 v^2` around
/// `(a_lin, v_lin)`. The function is jointly convex, so
/// `r_a A + r_v v + r_0` never exceeds it and touches it at the point.
pub fn induced_slack_coefficients(c4: f64, a_lin: f64, v_lin: f64) -> (f64, f64, f64) {
    let s0 = (1.0 + a_lin * a_lin + (c4 * v_lin * v_lin).powi(2)).sqrt();
    let r_a = a_lin / s0;
    let r_v = 2.0 * c4 * c4 * v_lin.powi(3) / s0 + 2.0 * c4 * v_lin;
    let r_0 = s0 + c4 * v_lin * v_lin - r_a * a_lin - r_v * v_lin;
    (r_a, r_v, r_0)
}

/// Tangent-plane lower bound on `sqrt(1 + A^2 + c4^2 v^4) + c4 v^2`.
pub fn induced_slack_bound(c4: f64, a_lin: f64, v_lin: f64, a: f64, v: f64) -> f64 {
    let (r_a, r_v, r_0) = induced_slack_coefficients(c4, a_lin, v_lin);
    r_a * a + r_v * v + r_0
}
