//! Predicates at ρ = 0: J(H⁰, U₀) ≠ 0, det Dπ_i(0) ≠ 0, rank DU(0) = 4n,
//! eigenstructure of M_i(0), simplicity and rank-drop margins.

use serde::{Deserialize, Serialize};

use super::build::{Candidate, Rejection};
use super::eigen::{eigen_all, need1, need2, EigenReport, Need1, Need2};
use super::newton::{solve_u_of_rho, NewtonConfig, USolution};
use super::psi::{det_report, psi, DetReport};
use super::thresholds::Thresholds;
use crate::error::OcnError;
use crate::linalg::phase::PhasePoint;
use crate::linalg::rank::{numeric_rank, RankReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseReport {
    /// max |Ψ(0, U₀)|.
    pub psi_residual: f64,
    pub fd_jacobian: f64,
    pub jacobian: DetReport,
    pub du_rank: RankReport,
    pub det_dpi: Vec<DetReport>,
    pub eigen: Vec<EigenReport>,
    pub need1: Vec<Need1>,
    pub need2: Vec<Need2>,
}

impl BaseReport {
    pub fn need1_margin(&self) -> f64 {
        self.need1.iter().map(|x| x.margin()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest rank-drop margin, or None when every E_i(0) is empty.
    pub fn need2_margin(&self) -> Option<f64> {
        self.need2.iter().filter_map(|x| x.margin()).reduce(f64::min)
    }
}

pub struct BaseOutcome {
    pub report: BaseReport,
    pub solution: USolution,
}

fn fail(predicate: &'static str, msg: String) -> Rejection {
    Rejection { predicate, error: OcnError::Inadmissible(msg) }
}

/// Richardson correction of the finite-differenced η-Jacobians over their largest entry.
pub fn fd_relative_error(sol: &USolution) -> f64 {
    let c = &sol.jac.config;
    let scale = c.dzeta.iter().chain(&c.dgamma).map(|m| m.amax()).fold(0.0, f64::max);
    c.error_estimate / scale.max(1.0)
}

pub fn newton_config(t: &Thresholds) -> NewtonConfig {
    NewtonConfig { tol: t.newton, ..NewtonConfig::default() }
}

pub fn base_checks(c: &Candidate, t: &Thresholds) -> std::result::Result<BaseOutcome, Rejection> {
    let n = c.u0.n;
    let model = c.graph.map();
    let zero = PhasePoint::zeros(n);
    let psi_residual = psi(&zero, &c.u0, model).map_err(|error| Rejection { predicate: "psi", error })?.amax();
    if psi_residual >= 1e-9 {
        return Err(fail("psi", format!("|Psi(0, U0)| = {psi_residual:e}")));
    }
    let sol = solve_u_of_rho(&zero, &c.u0, model, &newton_config(t)).map_err(|error| Rejection { predicate: "jacobian", error })?;
    let fd_relative = fd_relative_error(&sol);
    if fd_relative >= t.fd_jacobian {
        return Err(fail("fd_jacobian", format!("eta-Jacobian Richardson correction {fd_relative:e} (relative)")));
    }
    let jacobian = det_report(&sol.jac.du);
    if jacobian.inverse_condition < t.jacobian {
        return Err(fail("jacobian", format!("dPsi/dU inverse condition {:e}", jacobian.inverse_condition)));
    }
    let du_rank = numeric_rank(&sol.du, t.du_rank).map_err(|error| Rejection { predicate: "du_rank", error })?;
    if du_rank.rank != 4 * n {
        return Err(fail("du_rank", format!("rank DU(0) = {}", du_rank.rank)));
    }
    let all = eigen_all(&sol).map_err(|error| Rejection { predicate: "det_dpi", error })?;
    let mut det_dpi = Vec::new();
    let mut eigen = Vec::new();
    let mut n1 = Vec::new();
    let mut n2 = Vec::new();
    for (lm, m, fl, r) in &all {
        let d = det_report(&lm.dpi);
        if d.inverse_condition < t.det_dpi {
            return Err(fail("det_dpi", format!("D pi_{} inverse condition {:e}", r.i, d.inverse_condition)));
        }
        det_dpi.push(d);
        if !r.multiplicities_ok(n) || r.flagged > 0 {
            return Err(fail(
                "multiplicity",
                format!("piece {}: {} at 0, {} at -1, {} flagged", r.i, r.count_zero, r.count_minus_one, r.flagged),
            ));
        }
        if r.remainder >= t.deflation || r.q_mismatch >= t.q_agreement {
            return Err(fail("deflation", format!("piece {}: remainder {:e}, Q mismatch {:e}", r.i, r.remainder, r.q_mismatch)));
        }
        let a = need1(r);
        if a.margin() < t.need1 {
            return Err(fail("need1", format!("piece {}: margin {:e}", r.i, a.margin())));
        }
        let b = need2(n, lm, m, fl, r).map_err(|error| Rejection { predicate: "need1", error })?;
        for root in &b.roots {
            if root.margin < t.need2 {
                return Err(fail("need2", format!("piece {} at x = {}: margin {:e}", r.i, root.x, root.margin)));
            }
            if root.singularity_residual >= t.singularity {
                return Err(fail("need2", format!("piece {}: adj(S) S residual {:e}", r.i, root.singularity_residual)));
            }
        }
        eigen.push(r.clone());
        n1.push(a);
        n2.push(b);
    }
    Ok(BaseOutcome {
        report: BaseReport { psi_residual, fd_jacobian: fd_relative, jacobian, du_rank, det_dpi, eigen, need1: n1, need2: n2 },
        solution: sol,
    })
}
