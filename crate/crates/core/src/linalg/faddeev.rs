//! Faddeev–LeVerrier recurrence: characteristic polynomial and the matrix
//! coefficients of adj(xI − M).
//!
//! With c_s = 1, M_1 = I and
//!   M_k = M M_{k−1} + c_{s−k+1} I,   c_{s−k} = −tr(M M_k) / k,
//! one has det(xI − M) = Σ c_k x^k and adj(xI − M) = Σ_{k=1}^{s} x^{s−k} M_k.

use nalgebra::DMatrix;

use super::dense::balance;
use super::poly::Poly;
use crate::error::{OcnError, Result};

/// Trace magnitudes above this bound mark the run as ill-conditioned.
pub const TRACE_BOUND: f64 = 1e150;

/// Points (relative to 1 + ‖M‖) at which the adjugate identity is spot-checked.
const CHECK_POINTS: [f64; 3] = [0.731, -1.379, 2.113];

#[derive(Clone, Debug)]
pub struct CharpolyAdj {
    /// det(xI − M), descending degree.
    pub charpoly: Poly,
    /// B_k with adj(xI − M) = Σ_k x^k B_k, indexed by the power k = 0..s−1.
    pub adj_coeffs: Vec<DMatrix<f64>>,
    /// Largest relative residual of (xI − M)·adj(xI − M) − det(xI − M)·I at the check points.
    pub identity_residual: f64,
    pub ill_conditioned: bool,
}

impl CharpolyAdj {
    pub fn adj_at(&self, x: f64) -> DMatrix<f64> {
        let mut acc = self.adj_coeffs.last().expect("s >= 1").clone();
        for b in self.adj_coeffs.iter().rev().skip(1) {
            acc = acc * x + b;
        }
        acc
    }
}

pub fn faddeev_leverrier(m: &DMatrix<f64>) -> Result<CharpolyAdj> {
    let s = m.nrows();
    if s == 0 || m.ncols() != s {
        return Err(OcnError::Shape(format!(
            "Faddeev-LeVerrier needs a non-empty square matrix, got {:?}",
            m.shape()
        )));
    }
    let id = DMatrix::<f64>::identity(s, s);
    // desc[k] is the coefficient of x^{s−k}
    let mut desc = vec![0.0; s + 1];
    desc[0] = 1.0;
    let mut mk = id.clone();
    let mut by_index = Vec::with_capacity(s);
    let mut ill = false;
    for k in 1..=s {
        if k > 1 {
            mk = m * &mk + &id * desc[k - 1];
        }
        let tr = (m * &mk).trace();
        if !tr.is_finite() || tr.abs() > TRACE_BOUND {
            ill = true;
        }
        desc[k] = -tr / k as f64;
        by_index.push(mk.clone());
    }
    // adj coefficient of x^j is M_{s−j}
    let adj_coeffs: Vec<DMatrix<f64>> = (0..s).map(|j| by_index[s - 1 - j].clone()).collect();
    let mut out = CharpolyAdj {
        charpoly: Poly::new(desc),
        adj_coeffs,
        identity_residual: 0.0,
        ill_conditioned: ill,
    };
    let scale = 1.0 + m.norm();
    for &t in &CHECK_POINTS {
        let x = t * scale;
        let shifted = &id * x - m;
        let adj = out.adj_at(x);
        let p = out.charpoly.eval(x);
        let lhs = &shifted * &adj - &id * p;
        let denom = shifted.norm() * adj.norm() + p.abs();
        let rel = if denom > 0.0 { lhs.norm() / denom } else { lhs.norm() };
        out.identity_residual = out.identity_residual.max(rel);
    }
    if !out.identity_residual.is_finite() || out.identity_residual > 1e-9 {
        out.ill_conditioned = true;
    }
    Ok(out)
}

/// Faddeev–LeVerrier applied to the balanced matrix D⁻¹MD, with the adjugate
/// coefficients mapped back: adj(xI − M) = D adj(xI − D⁻¹MD) D⁻¹.
pub fn faddeev_leverrier_balanced(m: &DMatrix<f64>) -> Result<CharpolyAdj> {
    let (bal, d) = balance(m);
    let mut out = faddeev_leverrier(&bal)?;
    let s = m.nrows();
    for b in &mut out.adj_coeffs {
        for i in 0..s {
            for j in 0..s {
                b[(i, j)] *= d[i] / d[j];
            }
        }
    }
    Ok(out)
}
