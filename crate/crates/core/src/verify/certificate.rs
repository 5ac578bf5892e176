//! The certificate: every predicate outcome with its margin, and the seed reproducing it.

use serde::{Deserialize, Serialize};

use super::ball::{check_ball, sample_directions, BallReport, SAMPLING};
use super::base::BaseReport;
use super::build::{BuildConfig, ModelRecord};
use super::search::{screen, search_nondegenerate, Accepted, Exhaustion, LastFailure, SearchConfig, SearchStats};
use super::sweep::{lambda_sweep, SweepReport, SURROGATES};
use super::thresholds::Thresholds;
use crate::error::{OcnError, Result};
use crate::linalg::phase::PhasePoint;
use crate::tau::config::build_tau;
use crate::tau::dims::{dims, DimSummary};
use crate::tau::frames::SetVReport;

pub const SCHEMA_VERSION: &str = "1.0";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// What the certificate does not establish.
pub const GAPS: [&str; 3] = [
    "all predicates are checked on a finite sample of the rho-ball, not on the whole ball",
    "openness of Sigma(lambda) is witnessed on a finite lambda grid and at the sampled singular lambda only",
    "the weak solutions built from the configuration are not constructed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// σ_min/σ_max of ∂Ψ/∂U at (0, U₀).
    pub jacobian: f64,
    /// Smallest σ_min/σ_max of Dπ_i(0) over i.
    pub det_dpi: f64,
    pub du_rank: usize,
    pub du_rank_expected: usize,
    pub du_rank_gap: f64,
    pub min_count_zero: usize,
    pub min_count_minus_one: usize,
    pub deflation_remainder: f64,
    pub need1: f64,
    /// None when every E_i(0) is empty.
    pub need2: Option<f64>,
    pub need2_vacuous: bool,
    pub radius: f64,
    pub separation: f64,
    pub adjugate: Option<f64>,
    pub sweep_det: f64,
    pub disjoint: f64,
    pub delta1: f64,
}

/// ξ_i(0) and π_i(0) as vectors in ℝ^{4n}, for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub xi: Vec<Vec<f64>>,
    pub pi: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureSection {
    /// "exhaustion" or "internal".
    pub kind: String,
    pub message: String,
    pub last: Option<LastFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: String,
    pub tool_version: String,
    /// "CERTIFIED" or "FAILED".
    pub status: String,
    pub n: usize,
    pub seed: u64,
    pub budget: u64,
    pub dims: DimSummary,
    pub thresholds: Thresholds,
    pub build: BuildConfig,
    pub search: SearchStats,
    pub candidate_index: Option<u64>,
    pub u0: Option<Vec<f64>>,
    pub h0: Option<Vec<Vec<Vec<f64>>>>,
    pub model: Option<ModelRecord>,
    pub set_v: Option<SetVReport>,
    pub configuration: Option<ConfigurationRecord>,
    pub base: Option<BaseReport>,
    pub ball: Option<BallReport>,
    pub sweep: Option<SweepReport>,
    pub margins: Option<Margins>,
    pub sampling: String,
    pub surrogates: Vec<String>,
    pub gaps: Vec<String>,
    pub failure: Option<FailureSection>,
}

fn margins(n: usize, a: &Accepted) -> Margins {
    let b = &a.base.report;
    Margins {
        jacobian: b.jacobian.inverse_condition,
        det_dpi: b.det_dpi.iter().map(|d| d.inverse_condition).fold(f64::INFINITY, f64::min),
        du_rank: b.du_rank.rank,
        du_rank_expected: 4 * n,
        du_rank_gap: b.du_rank.gap,
        min_count_zero: a.sweep.min_count_zero,
        min_count_minus_one: a.sweep.min_count_minus_one,
        deflation_remainder: a.sweep.remainder_max,
        need1: b.need1_margin(),
        need2: b.need2_margin(),
        need2_vacuous: b.need2.iter().all(|x| x.roots.is_empty()),
        radius: a.ball.radius,
        separation: a.ball.separation_xi.min(a.ball.separation_pi),
        adjugate: a.sweep.adjugate_margin(),
        sweep_det: a.sweep.det_margin,
        disjoint: a.sweep.disjoint_ratio,
        delta1: a.sweep.delta1,
    }
}

impl Certificate {
    fn empty(cfg: &SearchConfig, stats: SearchStats) -> Result<Self> {
        Ok(Self {
            schema_version: SCHEMA_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            status: "FAILED".into(),
            n: cfg.n,
            seed: cfg.seed,
            budget: cfg.budget,
            dims: dims(cfg.n)?,
            thresholds: cfg.thresholds.clone(),
            build: cfg.build.clone(),
            search: stats,
            candidate_index: None,
            u0: None,
            h0: None,
            model: None,
            set_v: None,
            configuration: None,
            base: None,
            ball: None,
            sweep: None,
            margins: None,
            sampling: SAMPLING.into(),
            surrogates: SURROGATES.iter().map(|s| s.to_string()).collect(),
            gaps: GAPS.iter().map(|s| s.to_string()).collect(),
            failure: None,
        })
    }

    pub fn from_accepted(cfg: &SearchConfig, a: Accepted) -> Result<Self> {
        let c = &a.candidate;
        let tau = build_tau(&c.u0, &PhasePoint::zeros(cfg.n))?;
        let mut cert = Self::empty(cfg, a.stats.clone())?;
        cert.status = "CERTIFIED".into();
        cert.candidate_index = Some(a.index);
        cert.u0 = Some(c.u0.to_vec().iter().copied().collect());
        cert.h0 = Some(c.record.h0.clone());
        cert.model = Some(c.record.clone());
        cert.set_v = Some(c.set_v.clone());
        cert.configuration = Some(ConfigurationRecord {
            xi: tau.xi.iter().map(|p| p.vectorize().iter().copied().collect()).collect(),
            pi: tau.pi.iter().map(|p| p.vectorize().iter().copied().collect()).collect(),
            chi: tau.chi.clone(),
        });
        cert.margins = Some(margins(cfg.n, &a));
        cert.base = Some(a.base.report);
        cert.ball = Some(a.ball);
        cert.sweep = Some(a.sweep);
        let problems = cert.violations();
        if !problems.is_empty() {
            cert.status = "FAILED".into();
            cert.failure = Some(FailureSection { kind: "internal".into(), message: problems.join("; "), last: None });
        }
        Ok(cert)
    }

    pub fn from_exhaustion(cfg: &SearchConfig, e: Exhaustion) -> Result<Self> {
        let mut cert = Self::empty(cfg, e.stats)?;
        let message = format!("no candidate passed within budget {}", cfg.budget);
        cert.failure = Some(FailureSection { kind: "exhaustion".into(), message, last: e.last });
        Ok(cert)
    }

    /// Invariants every certified result must satisfy; a non-empty list is a tool bug.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let Some(m) = &self.margins else {
            return vec!["margins missing".into()];
        };
        let n = self.n;
        if m.du_rank != 4 * n {
            out.push(format!("rank DU(0) = {} != {}", m.du_rank, 4 * n));
        }
        if m.min_count_zero < n + 1 || m.min_count_minus_one < 2 * n {
            out.push("eigenvalue multiplicities below n+1 / 2n".into());
        }
        if !(m.delta1 > 0.0 && m.delta1 < 1.0) {
            out.push(format!("delta1 = {} outside (0, 1)", m.delta1));
        }
        let positive = [m.jacobian, m.det_dpi, m.need1, m.radius, m.separation, m.sweep_det, m.disjoint];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            out.push("non-positive or non-finite margin".into());
        }
        if m.need2.is_none() != m.need2_vacuous {
            out.push("need2 vacuity inconsistent".into());
        }
        out
    }

    pub fn certified(&self) -> bool {
        self.status == "CERTIFIED"
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| OcnError::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| OcnError::Config(e.to_string()))
    }
}

/// Search and assemble the certificate, successful or not.
pub fn certify(cfg: &SearchConfig) -> Result<Certificate> {
    match search_nondegenerate(cfg) {
        Ok(a) => Certificate::from_accepted(cfg, a),
        Err(e) => Certificate::from_exhaustion(cfg, e),
    }
}

/// Regenerate the certified candidate and rerun the λ-sweep on a grid of `grid` points.
pub fn resweep(cert: &Certificate, grid: usize) -> Result<SweepReport> {
    let missing = |what: &str| OcnError::Config(format!("certificate has no {what}"));
    let index = cert.candidate_index.ok_or_else(|| missing("candidate_index"))?;
    let ball = cert.ball.as_ref().ok_or_else(|| missing("ball"))?;
    let mut cfg = SearchConfig::new(cert.n, cert.seed, cert.budget);
    cfg.thresholds = cert.thresholds.clone();
    cfg.build = cert.build.clone();
    let mut s = screen(&cfg, &cfg.effective_build(), index).map_err(|r| r.error)?;
    let u0: Vec<f64> = s.candidate.u0.to_vec().iter().copied().collect();
    if cert.u0.as_ref() != Some(&u0) {
        return Err(OcnError::Config("regenerated U0 differs from the certificate".into()));
    }
    cfg.thresholds.grid = grid;
    let dirs = sample_directions(cert.n, cfg.thresholds.random_directions, &mut s.rng);
    let (_, samples) = check_ball(&s.candidate, &s.base, ball.radius, &dirs, &cfg.thresholds).map_err(OcnError::Inadmissible)?;
    lambda_sweep(cert.n, &samples, &cfg.thresholds).map_err(OcnError::Inadmissible)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, seed: u64) -> SearchConfig {
        let mut cfg = SearchConfig::new(n, seed, 100);
        cfg.thresholds.grid = 8;
        cfg.thresholds.random_directions = 4;
        cfg
    }

    #[test]
    fn certificate_round_trips_and_repeats() {
        let cfg = small(2, 5);
        let a = certify(&cfg).unwrap();
        assert!(a.certified(), "{:?}", a.failure);
        assert!(a.violations().is_empty());
        let json = a.to_json().unwrap();
        assert_eq!(Certificate::from_json(&json).unwrap(), a);
        assert_eq!(certify(&cfg).unwrap().to_json().unwrap(), json);
        let m = a.margins.as_ref().unwrap();
        assert_eq!(m.du_rank, 8);
        assert!(m.delta1 > 0.0 && m.delta1 < 1.0);
        let conf = a.configuration.as_ref().unwrap();
        assert_eq!(conf.xi.len(), 5);
        assert_eq!(conf.pi[0], vec![0.0; 8]);
        assert_eq!(a.model.as_ref().unwrap().embedding.reason.as_deref(), Some("20×14 system"));
    }

    #[test]
    fn resweep_reproduces_the_certified_sweep() {
        let cfg = small(2, 6);
        let c = certify(&cfg).unwrap();
        assert!(c.certified());
        let again = resweep(&c, 8).unwrap();
        assert_eq!(Some(&again), c.sweep.as_ref());
        let finer = resweep(&c, 20).unwrap();
        assert_eq!(finer.lambdas.len(), 20);
        assert_eq!(finer.x0, again.x0);
    }

    #[test]
    fn exhaustion_fills_the_failure_section() {
        let mut cfg = small(2, 5);
        cfg.budget = 5;
        cfg.thresholds.need1 = 2.0;
        let c = certify(&cfg).unwrap();
        assert!(!c.certified());
        let f = c.failure.as_ref().unwrap();
        assert_eq!(f.kind, "exhaustion");
        assert_eq!(c.search.tried, 5);
        assert!(c.margins.is_none() && c.u0.is_none());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let cfg = small(2, 5);
        let c = certify(&cfg).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(Certificate::from_json(&v.to_string()).is_err());
    }
}
