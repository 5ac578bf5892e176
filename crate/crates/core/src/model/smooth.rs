//! The one-dimensional mollified absolute value and the smooth max built on it.
//!
//! h_μ = |·| * k_μ with k_μ(t) = 35/(32μ) (1 − t²/μ²)³ on [−μ, μ]. Then h_μ is
//! C⁴, convex, even, equal to |t| for |t| ≥ μ, and |t| ≤ h_μ(t) ≤ |t| + 35μ/128.

/// (h, h', h'') of the mollified absolute value at t.
pub fn hump(t: f64, mu: f64) -> (f64, f64, f64) {
    if t.abs() >= mu {
        return (t.abs(), t.signum(), 0.0);
    }
    let s = t / mu;
    let s2 = s * s;
    let c = 35.0 / 16.0;
    let val = mu * c * s2 * (0.5 - s2 * (0.25 - s2 * (0.1 - s2 / 56.0))) + 35.0 * mu / 128.0;
    let d1 = c * s * (1.0 - s2 * (1.0 - s2 * (0.6 - s2 / 7.0)));
    let one = 1.0 - s2;
    let d2 = c / mu * one * one * one;
    (val, d1, d2)
}

/// Largest gap between h_μ and |·|, attained at 0.
pub fn hump_excess(mu: f64) -> f64 {
    35.0 * mu / 128.0
}

/// smax_μ(a, b) = (a + b)/2 + h_μ((a − b)/2) with its partial derivatives
/// (∂_a, ∂_b) and the curvature ∂²_a = −∂_a∂_b = ∂²_b.
#[derive(Clone, Copy, Debug)]
pub struct SmaxJet {
    pub value: f64,
    pub wa: f64,
    pub wb: f64,
    pub curv: f64,
}

pub fn smax(a: f64, b: f64, mu: f64) -> SmaxJet {
    let t = 0.5 * (a - b);
    if t.abs() >= mu {
        let (wa, wb) = if a >= b { (1.0, 0.0) } else { (0.0, 1.0) };
        return SmaxJet { value: a.max(b), wa, wb, curv: 0.0 };
    }
    let (h, h1, h2) = hump(t, mu);
    SmaxJet {
        value: 0.5 * (a + b) + h,
        wa: 0.5 * (1.0 + h1),
        wb: 0.5 * (1.0 - h1),
        curv: 0.25 * h2,
    }
}
