//! Numerical rank with a visible singular-value gap.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dense::singular_values;
use crate::error::{OcnError, Result};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// σ_rank / σ_{rank+1} when a value was rejected; when every value was
    /// accepted, σ_rank / (tol · σ_max), i.e. how far the smallest accepted
    /// value clears the threshold. Large means a clean decision.
    pub gap: f64,
    pub tol: f64,
    pub singular_values: Vec<f64>,
}

impl RankReport {
    pub fn full(&self) -> bool {
        self.rank == self.singular_values.len()
    }
}

pub fn numeric_rank(m: &DMatrix<f64>, tol: f64) -> Result<RankReport> {
    if m.is_empty() {
        return Err(OcnError::EmptyMatrix);
    }
    let sv = singular_values(m);
    let smax = sv[0];
    if smax == 0.0 {
        return Ok(RankReport {
            rank: 0,
            gap: 0.0,
            tol,
            singular_values: sv,
        });
    }
    let threshold = tol * smax;
    let rank = sv.iter().take_while(|&&s| s > threshold).count();
    let gap = if rank < sv.len() {
        let floor = f64::EPSILON * smax * 1e-3;
        sv[rank - 1] / sv[rank].max(floor)
    } else {
        sv[rank - 1] / threshold
    };
    Ok(RankReport {
        rank,
        gap,
        tol,
        singular_values: sv,
    })
}
