use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frames::{build_frames, FrameData};
use super::param::ParamU;
use crate::error::{OcnError, Result};
use crate::linalg::phase::PhasePoint;

#[derive(Clone, Debug)]
pub struct TauConfig {
    pub rho: PhasePoint,
    /// η_i = Σ_{k<i} γ_k + κ_i γ_i.
    pub eta: Vec<PhasePoint>,
    /// ξ_i = ρ + η_i.
    pub xi: Vec<PhasePoint>,
    /// π_1 = ρ, π_{i+1} = π_i + γ_i.
    pub pi: Vec<PhasePoint>,
    pub chi: Vec<f64>,
    pub zeta: Vec<PhasePoint>,
    pub frames: FrameData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauResiduals {
    /// max_i |π_{i+1} − χ_i ξ_i − (1 − χ_i) π_i|, relative, indices mod N.
    pub recursion: f64,
    /// |Σ γ_i| relative, i.e. π_{N+1} against π_1.
    pub closure: f64,
    /// max_i σ_2/σ_1 of the first component of γ_i.
    pub rank_one: f64,
}

/// η_i(U) for every i, without building the full configuration.
pub fn eta_of(u: &ParamU) -> Result<Vec<PhasePoint>> {
    let frames = build_frames(u)?;
    Ok(eta_from_frames(&frames, &u.kappa))
}

pub fn eta_from_frames(frames: &FrameData, kappa: &[f64]) -> Vec<PhasePoint> {
    let n = frames.n;
    let mut partial = PhasePoint::zeros(n);
    let mut out = Vec::with_capacity(kappa.len());
    for (g, &k) in frames.gamma.iter().zip(kappa) {
        out.push(&partial + &g.scale(k));
        partial = &partial + g;
    }
    out
}

pub fn build_tau(u: &ParamU, rho: &PhasePoint) -> Result<TauConfig> {
    u.check_kappa()?;
    if rho.n() != u.n {
        return Err(OcnError::Shape(format!("rho has n = {}, expected {}", rho.n(), u.n)));
    }
    let frames = build_frames(u)?;
    let eta = eta_from_frames(&frames, &u.kappa);
    let xi = eta.iter().map(|e| rho + e).collect();
    let mut pi = Vec::with_capacity(eta.len());
    let mut cur = rho.clone();
    for g in &frames.gamma {
        pi.push(cur.clone());
        cur = &cur + g;
    }
    let zeta = frames
        .gamma
        .iter()
        .zip(&u.kappa)
        .map(|(g, &k)| g.scale(k))
        .collect();
    Ok(TauConfig {
        rho: rho.clone(),
        eta,
        xi,
        pi,
        chi: u.kappa.iter().map(|k| 1.0 / k).collect(),
        zeta,
        frames,
    })
}

impl TauConfig {
    pub fn big_n(&self) -> usize {
        self.eta.len()
    }

    pub fn residuals(&self) -> TauResiduals {
        let big_n = self.big_n();
        let mut recursion = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..big_n {
            let next = &self.pi[(i + 1) % big_n];
            let chi = self.chi[i];
            let rhs = &self.xi[i].scale(chi) + &self.pi[i].scale(1.0 - chi);
            recursion = recursion.max((next - &rhs).norm());
            scale = scale.max(self.xi[i].norm()).max(self.pi[i].norm());
        }
        let mut sum = PhasePoint::zeros(self.frames.n);
        let mut gscale = 0.0;
        let mut rank_one = 0.0f64;
        for g in &self.frames.gamma {
            sum = &sum + g;
            gscale += g.norm();
            let sv = g.first.clone().svd(false, false).singular_values;
            let ratio = if sv[0] > 0.0 { sv[1] / sv[0] } else { 0.0 };
            rank_one = rank_one.max(ratio);
        }
        TauResiduals {
            recursion: recursion / scale,
            closure: if gscale > 0.0 { sum.norm() / gscale } else { sum.norm() },
            rank_one,
        }
    }

    /// η_i¹ as 2×n matrices.
    pub fn eta_first(&self) -> Vec<DMatrix<f64>> {
        self.eta.iter().map(|e| e.first.clone()).collect()
    }
}
