//! Acceptance thresholds for every verifier predicate.

use serde::{Deserialize, Serialize};

use crate::error::{OcnError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// ε below which a candidate is rejected.
    pub min_epsilon: f64,
    /// σ_min/σ_max of ∂Ψ/∂U at (0, U₀).
    pub jacobian: f64,
    /// Richardson correction of the η-Jacobians at ρ = 0, relative to their size.
    pub fd_jacobian: f64,
    /// σ_min/σ_max of every Dπ_i on the ball.
    pub det_dpi: f64,
    /// Relative singular-value cutoff for rank DU(0).
    pub du_rank: f64,
    /// Eigenvalue distance for counting multiplicities at 0 and −1.
    pub multiplicity: f64,
    pub deflation: f64,
    /// Agreement of Q from the charpoly with Q from the eigenvalues.
    pub q_agreement: f64,
    pub need1: f64,
    pub need2: f64,
    pub singularity: f64,
    pub newton: f64,
    pub recursion: f64,
    /// Sampled image distance over the smallest base-point distance.
    pub separation: f64,
    pub du_fd: f64,
    pub two_path: f64,
    /// Relative error of det[Dπ + λDz] = det Dπ · det[I + λM].
    pub factorization: f64,
    /// Relative error of the adjugate relation at λ = −1/x.
    pub adjugate_relation: f64,
    /// |adj[Dπ + λDz] z| / (‖adj‖ |z|) at singular λ.
    pub adjugate_margin: f64,
    /// min |1 + λμ| over eigenvalues μ of M_i for λ ∈ [δ₁, 1).
    pub sweep_det: f64,
    /// Centre distance over summed sample spreads of S_i(λ), S_j(λ).
    pub disjoint: f64,
    pub grid: usize,
    pub random_directions: usize,
    pub max_halvings: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            min_epsilon: 1e-6,
            jacobian: 1e-10,
            fd_jacobian: 1e-6,
            det_dpi: 1e-10,
            du_rank: 1e-9,
            multiplicity: 1e-6,
            deflation: 1e-7,
            q_agreement: 1e-6,
            need1: 1e-6,
            need2: 1e-10,
            singularity: 1e-7,
            newton: 1e-11,
            recursion: 1e-10,
            separation: 0.5,
            du_fd: 1e-6,
            two_path: 1e-9,
            factorization: 1e-8,
            adjugate_relation: 1e-6,
            adjugate_margin: 1e-10,
            sweep_det: 1e-6,
            disjoint: 2.0,
            grid: 64,
            random_directions: 32,
            max_halvings: 40,
        }
    }
}

impl Thresholds {
    pub fn names() -> Vec<String> {
        match serde_json::to_value(Self::default()) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Override one threshold by its field name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let mut v = serde_json::to_value(&*self).map_err(|e| OcnError::Config(e.to_string()))?;
        let slot = v
            .get_mut(name)
            .ok_or_else(|| OcnError::Config(format!("unknown tolerance {name:?}")))?;
        *slot = if slot.is_u64() {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(OcnError::Config(format!("{name} needs a non-negative integer, got {value}")));
            }
            serde_json::json!(value as u64)
        } else {
            if !value.is_finite() || value < 0.0 {
                return Err(OcnError::Config(format!("{name} needs a finite non-negative value, got {value}")));
            }
            serde_json::json!(value)
        };
        *self = serde_json::from_value(v).map_err(|e| OcnError::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_by_name() {
        let mut t = Thresholds::default();
        t.set("need2", 1e-3).unwrap();
        assert_eq!(t.need2, 1e-3);
        t.set("grid", 10.0).unwrap();
        assert_eq!(t.grid, 10);
        assert!(t.set("grid", 1.5).is_err());
        assert!(t.set("nonsense", 1.0).is_err());
        assert!(t.set("need1", f64::NAN).is_err());
        assert!(Thresholds::names().contains(&"du_fd".to_string()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Thresholds>(r#"{"need3": 1}"#).is_err());
        let t: Thresholds = serde_json::from_str(r#"{"need1": 0.5}"#).unwrap();
        assert_eq!(t.need1, 0.5);
        assert_eq!(t.grid, 64);
    }
}
