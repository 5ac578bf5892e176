//! Ψ(ρ, U) = (Φ(ρ + η_1(U)), …, Φ(ρ + η_N(U))) and its partial Jacobians.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{OcnError, Result};
use crate::linalg::phase::{flatten_rows, PhasePoint};
use crate::model::energy::GraphMap;
use crate::tau::config::eta_of;
use crate::tau::derivatives::{config_jacobians, ConfigJacobians};
use crate::tau::param::ParamU;

fn check_shapes(rho: &PhasePoint, u: &ParamU, model: &dyn GraphMap) -> Result<()> {
    if rho.n() != u.n || u.n != model.n() || model.centers().len() != u.big_n() {
        return Err(OcnError::Shape(format!(
            "rho has n = {}, U has n = {}, model has n = {} with {} centres",
            rho.n(),
            u.n,
            model.n(),
            model.centers().len()
        )));
    }
    Ok(())
}

pub fn psi(rho: &PhasePoint, u: &ParamU, model: &dyn GraphMap) -> Result<DVector<f64>> {
    check_shapes(rho, u, model)?;
    let m = 2 * u.n;
    let eta = eta_of(u)?;
    let mut out = DVector::zeros(m * eta.len());
    for (i, e) in eta.iter().enumerate() {
        let xi = rho + e;
        let phi = model.phi(i, &xi)?;
        out.rows_mut(i * m, m).copy_from(&flatten_rows(&phi));
    }
    Ok(out)
}

/// DΦ(ξ) = [D²F(A), −I] as a 2n × 4n matrix.
pub fn dphi(model: &dyn GraphMap, i: usize, xi: &PhasePoint) -> Result<DMatrix<f64>> {
    let m = 2 * model.n();
    let h = model.hessian(i, &xi.first)?;
    let mut out = DMatrix::zeros(m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&h);
    for k in 0..m {
        out[(k, m + k)] = -1.0;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PsiJacobian {
    /// ∂Ψ/∂U, 2nN × D.
    pub du: DMatrix<f64>,
    /// ∂Ψ/∂ρ, 2nN × 4n.
    pub drho: DMatrix<f64>,
    pub config: ConfigJacobians,
}

pub fn jac_psi(rho: &PhasePoint, u: &ParamU, model: &dyn GraphMap, fd_step: f64) -> Result<PsiJacobian> {
    check_shapes(rho, u, model)?;
    let m = 2 * u.n;
    let big_n = u.big_n();
    let config = config_jacobians(u, fd_step)?;
    let eta = eta_of(u)?;
    let dim = u.layout().len();
    let mut du = DMatrix::zeros(m * big_n, dim);
    let mut drho = DMatrix::zeros(m * big_n, 2 * m);
    for (i, deta) in config.deta_all().iter().enumerate() {
        let dp = dphi(model, i, &(rho + &eta[i]))?;
        du.rows_mut(i * m, m).copy_from(&(&dp * deta));
        drho.rows_mut(i * m, m).copy_from(&dp);
    }
    Ok(PsiJacobian { du, drho, config })
}

/// Sign and size of det ∂Ψ/∂U, with σ_min/σ_max as a scale-free margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetReport {
    pub sign: f64,
    pub log10_abs: f64,
    pub inverse_condition: f64,
}

pub fn det_report(m: &DMatrix<f64>) -> DetReport {
    let lu = m.clone().lu();
    let u = lu.u();
    let mut log = 0.0;
    let mut sign = lu.determinant().signum();
    for k in 0..u.nrows() {
        let d = u[(k, k)];
        if d == 0.0 {
            sign = 0.0;
            log = f64::NEG_INFINITY;
            break;
        }
        log += d.abs().log10();
    }
    let sv = m.singular_values();
    let hi = sv.max();
    let inverse_condition = if hi > 0.0 { sv.min() / hi } else { 0.0 };
    DetReport { sign, log10_abs: log, inverse_condition }
}
