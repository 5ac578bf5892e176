//! Compactly supported quadratic bumps V_{H,r}(A) = ½ ζ(A/r) ⟨A, H A⟩.
//!
//! ζ(A) = φ(|A|²) with φ(u) = exp(1 − 1/(1 − u)) for u < 1 and 0 otherwise.
//! H acts on row-major flattened 2×n matrices.

use nalgebra::{DMatrix, DVector};

/// (φ, φ', φ'') at u.
pub fn profile(u: f64) -> (f64, f64, f64) {
    if !(u < 1.0) {
        return (0.0, 0.0, 0.0);
    }
    let w = 1.0 / (1.0 - u);
    let phi = (1.0 - w).exp();
    let d1 = -phi * w * w;
    let d2 = phi * w * w * w * (w - 2.0);
    (phi, d1, d2)
}

#[derive(Clone, Debug)]
pub struct CutoffJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// V_{H,r} and its first two derivatives at the flattened point x.
pub fn cutoff_v(h: &DMatrix<f64>, r: f64, x: &DVector<f64>) -> CutoffJet {
    let m = x.len();
    let r2 = r * r;
    let u = x.norm_squared() / r2;
    if !(u < 1.0) {
        return CutoffJet { value: 0.0, grad: DVector::zeros(m), hess: DMatrix::zeros(m, m) };
    }
    let (phi, d1, d2) = profile(u);
    let hx = h * x;
    let q = x.dot(&hx);
    let value = 0.5 * phi * q;
    let grad = x * (d1 * q / r2) + &hx * phi;
    let mut hess = h * phi;
    for k in 0..m {
        hess[(k, k)] += d1 * q / r2;
    }
    hess.ger(2.0 * d2 * q / (r2 * r2), x, x, 1.0);
    hess.ger(2.0 * d1 / r2, x, &hx, 1.0);
    hess.ger(2.0 * d1 / r2, &hx, x, 1.0);
    CutoffJet { value, grad, hess }
}

/// Bound on |D²V_{H,r}(A)|_op / |H|_op over all A, r.
///
/// With u = |A|²/r² the four Hessian terms are bounded by 2u²|φ''|, 4u|φ'|,
/// u|φ'| and φ times |H|. The supremum of their sum is taken on a fine grid of
/// u ∈ [0, 1) (the function is smooth and vanishes to all orders at u = 1) and
/// inflated by 1%.
pub fn certified_c0() -> f64 {
    let steps = 200_000;
    let mut sup = 0.0f64;
    for k in 0..steps {
        let u = k as f64 / steps as f64;
        let (phi, d1, d2) = profile(u);
        sup = sup.max(2.0 * u * u * d2.abs() + 5.0 * u * d1.abs() + phi);
    }
    1.01 * sup
}
