//! Points of the phase space ℝ^{2×n} × ℝ^{2×n}.
//!
//! The canonical flattening to ℝ^{4n} is the first matrix in row-major order
//! followed by the second matrix in row-major order. Every Jacobian in the
//! crate uses this ordering.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{OcnError, Result};

/// A real 2×n matrix.
pub type SpaceMatrix = DMatrix<f64>;

/// Row-major flattening of a matrix.
pub fn flatten_rows(m: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`flatten_rows`] for a 2×n matrix.
pub fn unflatten_rows(v: &[f64], n: usize) -> SpaceMatrix {
    debug_assert_eq!(v.len(), 2 * n);
    DMatrix::from_row_slice(2, n, v)
}

/// Frobenius inner product ⟨A, B⟩ = tr(AᵀB).
pub fn frob_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub first: SpaceMatrix,
    pub second: SpaceMatrix,
}

impl PhasePoint {
    pub fn new(first: SpaceMatrix, second: SpaceMatrix) -> Result<Self> {
        if first.nrows() != 2 || second.shape() != first.shape() {
            return Err(OcnError::Shape(format!(
                "phase point needs two 2xn blocks, got {:?} and {:?}",
                first.shape(),
                second.shape()
            )));
        }
        Ok(Self { first, second })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            first: DMatrix::zeros(2, n),
            second: DMatrix::zeros(2, n),
        }
    }

    pub fn n(&self) -> usize {
        self.first.ncols()
    }

    pub fn vectorize(&self) -> DVector<f64> {
        let n = self.n();
        let mut v = DVector::zeros(4 * n);
        for r in 0..2 {
            for c in 0..n {
                v[r * n + c] = self.first[(r, c)];
                v[2 * n + r * n + c] = self.second[(r, c)];
            }
        }
        v
    }

    pub fn devectorize(v: &[f64], n: usize) -> Result<Self> {
        if v.len() != 4 * n {
            return Err(OcnError::Shape(format!(
                "expected a vector of length {}, got {}",
                4 * n,
                v.len()
            )));
        }
        Ok(Self {
            first: unflatten_rows(&v[..2 * n], n),
            second: unflatten_rows(&v[2 * n..], n),
        })
    }

    pub fn norm(&self) -> f64 {
        (self.first.norm_squared() + self.second.norm_squared()).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            first: &self.first * s,
            second: &self.second * s,
        }
    }
}

impl Add for &PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: &PhasePoint) -> PhasePoint {
        PhasePoint {
            first: &self.first + &rhs.first,
            second: &self.second + &rhs.second,
        }
    }
}

impl Sub for &PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: &PhasePoint) -> PhasePoint {
        PhasePoint {
            first: &self.first - &rhs.first,
            second: &self.second - &rhs.second,
        }
    }
}

impl Mul<f64> for &PhasePoint {
    type Output = PhasePoint;
    fn mul(self, s: f64) -> PhasePoint {
        self.scale(s)
    }
}
