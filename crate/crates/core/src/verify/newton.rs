//! U(ρ) from Ψ(ρ, U(ρ)) = 0 by Newton's method with continuation in |ρ|.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::psi::{jac_psi, psi, PsiJacobian};
use crate::error::{OcnError, Result};
use crate::linalg::phase::PhasePoint;
use crate::model::energy::GraphMap;
use crate::tau::param::ParamU;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub max_iters: usize,
    /// Max-abs residual of Ψ at convergence.
    pub tol: f64,
    /// Number of continuation stages from ρ = 0.
    pub stages: usize,
    /// Finite-difference step for the structured η-Jacobians.
    pub fd_step: f64,
    /// Largest Newton step, relative to 1 + |U|.
    pub max_step: f64,
    /// Iterations taken even when the start already meets `tol`.
    pub min_iters: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { max_iters: 30, tol: 1e-11, stages: 2, fd_step: 1e-4, max_step: 0.1, min_iters: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct USolution {
    pub rho: PhasePoint,
    pub u: ParamU,
    /// DU(ρ) = −[∂Ψ/∂U]⁻¹ ∂Ψ/∂ρ, D × 4n.
    pub du: DMatrix<f64>,
    pub jac: PsiJacobian,
    pub iterations: usize,
    /// Residual after each iteration of the last stage, starting with the initial one.
    pub trace: Vec<f64>,
    /// Residual after the polishing step, when it was kept.
    pub polished: Option<f64>,
}

impl USolution {
    /// Ratio of the residuals before and after the last Newton iteration.
    pub fn last_ratio(&self) -> Option<f64> {
        let t = &self.trace;
        (t.len() >= 2).then(|| t[t.len() - 1] / t[t.len() - 2])
    }

    pub fn final_residual(&self) -> f64 {
        self.polished.or(self.trace.last().copied()).unwrap_or(0.0)
    }
}

/// First-order radius in ρ keeping every ξ_i = ρ + η_i(U(ρ)) within the working zone.
pub fn linear_zone_radius(sol: &USolution, working_radius: f64) -> f64 {
    let worst = sol
        .jac
        .config
        .deta_all()
        .iter()
        .map(|d| {
            let mut m = d * &sol.du;
            for k in 0..m.nrows() {
                m[(k, k)] += 1.0;
            }
            m.singular_values().max()
        })
        .fold(0.0_f64, f64::max);
    working_radius / worst
}

fn newton_stage(
    rho: &PhasePoint,
    start: ParamU,
    model: &dyn GraphMap,
    cfg: &NewtonConfig,
) -> Result<(ParamU, Vec<f64>, usize, Option<f64>)> {
    let n = start.n;
    let mut x = start.to_vec();
    let mut u = start;
    let mut r = psi(rho, &u, model)?;
    let mut trace = vec![r.amax()];
    let mut iters = 0;
    while r.amax() >= cfg.tol || iters < cfg.min_iters {
        if iters == cfg.max_iters {
            return Err(OcnError::NonConvergence { trace });
        }
        let jac = jac_psi(rho, &u, model, cfg.fd_step)?;
        let step = jac
            .du
            .clone()
            .lu()
            .solve(&r)
            .ok_or_else(|| OcnError::JacobianSingular("dPsi/dU is singular during Newton".into()))?;
        let limit = cfg.max_step * (1.0 + x.amax());
        let scale = if step.amax() > limit { limit / step.amax() } else { 1.0 };
        x -= step * scale;
        u = ParamU::from_vec(n, x.as_slice())?;
        r = psi(rho, &u, model)?;
        trace.push(r.amax());
        iters += 1;
    }
    let mut polished = None;
    if iters > 0 {
        // one polishing step, kept only if it lowers the residual
        let jac = jac_psi(rho, &u, model, cfg.fd_step)?;
        if let Some(step) = jac.du.clone().lu().solve(&r) {
            let cand = ParamU::from_vec(n, (&x - step).as_slice())?;
            if let Ok(rc) = psi(rho, &cand, model) {
                if rc.amax() < r.amax() {
                    u = cand;
                    polished = Some(rc.amax());
                }
            }
        }
    }
    Ok((u, trace, iters, polished))
}

/// Solve for U(ρ) starting from U₀, in `cfg.stages` continuation stages.
pub fn solve_u_of_rho(rho: &PhasePoint, u0: &ParamU, model: &dyn GraphMap, cfg: &NewtonConfig) -> Result<USolution> {
    let stages = if rho.norm() == 0.0 { 1 } else { cfg.stages.max(1) };
    let mut u = u0.clone();
    let mut iterations = 0;
    let mut trace = Vec::new();
    let mut polished = None;
    for s in 1..=stages {
        let target = rho.scale(s as f64 / stages as f64);
        let (next, t, k, p) = newton_stage(&target, u, model, cfg)?;
        u = next;
        iterations += k;
        trace = t;
        polished = p;
    }
    finish(rho, u, model, cfg, iterations, trace, polished)
}

/// Newton from a given starting point without continuation.
pub fn solve_u_direct(rho: &PhasePoint, start: &ParamU, model: &dyn GraphMap, cfg: &NewtonConfig) -> Result<USolution> {
    let (u, trace, iterations, polished) = newton_stage(rho, start.clone(), model, cfg)?;
    finish(rho, u, model, cfg, iterations, trace, polished)
}

fn finish(
    rho: &PhasePoint,
    u: ParamU,
    model: &dyn GraphMap,
    cfg: &NewtonConfig,
    iterations: usize,
    trace: Vec<f64>,
    polished: Option<f64>,
) -> Result<USolution> {
    let jac = jac_psi(rho, &u, model, cfg.fd_step)?;
    let du = jac
        .du
        .clone()
        .lu()
        .solve(&(-&jac.drho))
        .ok_or_else(|| OcnError::JacobianSingular("dPsi/dU is singular at the solution".into()))?;
    Ok(USolution { rho: rho.clone(), u, du, jac, iterations, trace, polished })
}
