//! A local quadratic graph through the base points, for n ∈ {2, 3}.
//!
//! Near η_i¹ the map is σ(A) = η_i² + H_i (A − η_i¹) with H_i symmetric, the
//! gradient of a quadratic. No global convex potential is claimed; the
//! interpolant only feeds the local (OC)_N checks when the embedding step is
//! unavailable.

use nalgebra::DMatrix;
use serde::Serialize;

use super::energy::{min_separation, GraphMap};
use crate::error::{OcnError, Result};
use crate::linalg::phase::{flatten_rows, unflatten_rows, PhasePoint, SpaceMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct LocalInterpolant {
    pub n: usize,
    pub centers: Vec<SpaceMatrix>,
    pub targets: Vec<SpaceMatrix>,
    pub hessians: Vec<DMatrix<f64>>,
    pub radius: f64,
}

impl LocalInterpolant {
    pub fn new(eta: &[PhasePoint], hessians: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = eta.first().map(|e| e.n()).ok_or(OcnError::EmptyMatrix)?;
        if hessians.len() != eta.len() {
            return Err(OcnError::Shape(format!("{} points but {} Hessians", eta.len(), hessians.len())));
        }
        for h in &hessians {
            if h.shape() != (2 * n, 2 * n) || (h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
                return Err(OcnError::Shape("Hessians must be symmetric 2n x 2n".into()));
            }
        }
        let centers: Vec<_> = eta.iter().map(|e| e.first.clone()).collect();
        let r0 = min_separation(&centers);
        if !(r0 > 0.0) {
            return Err(OcnError::OverlappingSupports(format!("coincident base points, r0 = {r0:e}")));
        }
        Ok(Self {
            n,
            centers,
            targets: eta.iter().map(|e| e.second.clone()).collect(),
            hessians,
            radius: 0.25 * r0,
        })
    }
}

impl GraphMap for LocalInterpolant {
    fn n(&self) -> usize {
        self.n
    }

    fn centers(&self) -> &[SpaceMatrix] {
        &self.centers
    }

    fn working_radius(&self) -> f64 {
        self.radius
    }

    fn gradient(&self, i: usize, a: &SpaceMatrix) -> Result<SpaceMatrix> {
        self.zone_check(i, a)?;
        let dx = flatten_rows(&(a - &self.centers[i]));
        Ok(&self.targets[i] + unflatten_rows((&self.hessians[i] * dx).as_slice(), self.n))
    }

    fn hessian(&self, i: usize, a: &SpaceMatrix) -> Result<DMatrix<f64>> {
        self.zone_check(i, a)?;
        Ok(self.hessians[i].clone())
    }
}
