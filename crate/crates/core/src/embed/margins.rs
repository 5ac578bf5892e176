//! Strict dominance margins before and after fixing the prescribed gradients Q_i.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::system::ordered_pairs;
use crate::error::{OcnError, Result};
use crate::linalg::minors::{contract_jacobian, minor_vector};
use crate::linalg::phase::frob_dot;
use crate::tau::config::TauConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMargins {
    /// (j, i, margin) for every ordered pair i ≠ j, lexicographic in (j, i).
    pub entries: Vec<(usize, usize, f64)>,
    pub min: f64,
}

impl PairMargins {
    fn from_fn(big_n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let entries: Vec<_> = ordered_pairs(big_n).into_iter().map(|(j, i)| (j, i, f(j, i))).collect();
        let min = entries.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        Self { entries, min }
    }

    pub fn argmin(&self) -> Option<(usize, usize, f64)> {
        self.entries.iter().copied().min_by(|a, b| a.2.total_cmp(&b.2))
    }
}

/// c_j − c_i − ⟨η_i², η_j¹ − η_i¹⟩ − d_i·J(η_j¹ − η_i¹).
pub fn check_emb2(tau: &TauConfig, c: &[f64], d: &[DVector<f64>]) -> PairMargins {
    PairMargins::from_fn(tau.big_n(), |j, i| {
        let diff = &tau.eta[j].first - &tau.eta[i].first;
        c[j] - c[i] - frob_dot(&tau.eta[i].second, &diff) - d[i].dot(&minor_vector(&diff))
    })
}

/// Q_i = η_i² − ε η_i¹ − Σ_k d_ik ∇J_k(η_i¹).
pub fn q_from_emb1(tau: &TauConfig, d: &[DVector<f64>], eps: f64) -> Vec<DMatrix<f64>> {
    tau.eta
        .iter()
        .zip(d)
        .map(|(e, di)| &e.second - &e.first * eps - contract_jacobian(&e.first, di))
        .collect()
}

/// c_j − c_i − ⟨Q_i, η_j¹ − η_i¹⟩ − d_i·(J(η_j¹) − J(η_i¹)).
pub fn cx0_margins(tau: &TauConfig, c: &[f64], d: &[DVector<f64>], q: &[DMatrix<f64>]) -> PairMargins {
    let jv: Vec<_> = tau.eta.iter().map(|e| minor_vector(&e.first)).collect();
    PairMargins::from_fn(tau.big_n(), |j, i| {
        let diff = &tau.eta[j].first - &tau.eta[i].first;
        c[j] - c[i] - frob_dot(&q[i], &diff) - d[i].dot(&(&jv[j] - &jv[i]))
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    pub halvings: usize,
    pub emb2_min: f64,
    pub cx0_min: f64,
}

/// Halve ε from `eps0` until the smallest convexity margin exceeds half the
/// smallest embedding margin.
pub fn select_epsilon(tau: &TauConfig, c: &[f64], d: &[DVector<f64>], eps0: f64) -> Result<EpsilonChoice> {
    let emb2 = check_emb2(tau, c, d);
    if emb2.min <= 0.0 {
        let (j, i, margin) = emb2.argmin().unwrap_or((0, 0, emb2.min));
        return Err(OcnError::NonPositiveMargin { i: i + 1, j: j + 1, margin });
    }
    let mut eps = eps0;
    for halvings in 0..60 {
        let cx0 = cx0_margins(tau, c, d, &q_from_emb1(tau, d, eps));
        if cx0.min > 0.5 * emb2.min {
            return Ok(EpsilonChoice { epsilon: eps, halvings, emb2_min: emb2.min, cx0_min: cx0.min });
        }
        eps *= 0.5;
    }
    Err(OcnError::NonPositiveMargin { i: 0, j: 0, margin: emb2.min })
}
