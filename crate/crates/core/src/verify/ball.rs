//! Local solvability and openness on a sampled ρ-ball, with the radius found by bisection.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::base::{newton_config, BaseOutcome};
use super::build::Candidate;
use super::eigen::{local_maps, LocalMaps};
use super::newton::{solve_u_direct, solve_u_of_rho, NewtonConfig, USolution};
use super::psi::det_report;
use super::thresholds::Thresholds;
use crate::error::{OcnError, Result};
use crate::linalg::phase::PhasePoint;
use crate::tau::config::{build_tau, TauConfig};

/// How the ρ-sample set is built, recorded verbatim in the certificate.
pub const SAMPLING: &str = "rho = 0, rho = +-r e_k for every coordinate k, and r u for random unit u";

/// Unit directions: ±e_k for k < 4n, then `random` Gaussian directions normalized.
pub fn sample_directions<R: Rng>(n: usize, random: usize, rng: &mut R) -> Vec<DVector<f64>> {
    let dim = 4 * n;
    let mut out = Vec::with_capacity(2 * dim + random);
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = DVector::zeros(dim);
            v[k] = s;
            out.push(v);
        }
    }
    for _ in 0..random {
        let v = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        out.push(v.normalize());
    }
    out
}

#[derive(Clone, Debug)]
pub struct BallSample {
    pub rho: PhasePoint,
    pub sol: USolution,
    pub tau: TauConfig,
    pub maps: Vec<LocalMaps>,
}

impl BallSample {
    pub fn solve(c: &Candidate, rho: PhasePoint, t: &Thresholds) -> Result<Self> {
        let sol = solve_u_of_rho(&rho, &c.u0, c.graph.map(), &newton_config(t))?;
        let tau = build_tau(&sol.u, &rho)?;
        let maps = local_maps(&sol)?;
        Ok(Self { rho, sol, tau, maps })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallAttempt {
    pub radius: f64,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallReport {
    pub radius: f64,
    pub samples: usize,
    pub sampling: String,
    pub attempts: Vec<BallAttempt>,
    pub recursion_max: f64,
    pub newton_residual_max: f64,
    pub nu0: f64,
    pub nu1: f64,
    /// max |π_1(ρ) − ρ|.
    pub pi1_deviation: f64,
    pub det_dpi_min_inverse_condition: f64,
    pub det_dpi_signs: Vec<f64>,
    pub base_distance_xi: f64,
    pub base_distance_pi: f64,
    /// Sampled min distance between ξ_i¹ and ξ_j¹ images over the base distance.
    pub separation_xi: f64,
    pub separation_pi: f64,
    /// Worst relative error of DU against central differences of U(ρ).
    pub du_fd_error: f64,
    pub du_fd_points: usize,
    /// |U_continuation − U_direct| at |ρ| = r/2.
    pub two_path: f64,
}

fn first_part(v: &DVector<f64>, n: usize) -> DVector<f64> {
    v.rows(0, 2 * n).into_owned()
}

fn min_pair_distance(sets: &[Vec<DVector<f64>>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            for a in &sets[i] {
                for b in &sets[j] {
                    best = best.min((a - b).norm());
                }
            }
        }
    }
    best
}

/// Central-difference check of DU at one sample, over every column.
fn du_fd_error(c: &Candidate, s: &BallSample, h: f64, t: &Thresholds) -> Result<f64> {
    let n = c.u0.n;
    let cfg = NewtonConfig { min_iters: 1, ..newton_config(t) };
    let base = s.rho.vectorize();
    let mut worst: f64 = 0.0;
    let scale = s.sol.du.amax();
    for k in 0..4 * n {
        let mut e = base.clone();
        e[k] += h;
        let up = solve_u_direct(&PhasePoint::devectorize(e.as_slice(), n)?, &s.sol.u, c.graph.map(), &cfg)?;
        e[k] -= 2.0 * h;
        let um = solve_u_direct(&PhasePoint::devectorize(e.as_slice(), n)?, &s.sol.u, c.graph.map(), &cfg)?;
        let fd = (up.u.to_vec() - um.u.to_vec()) / (2.0 * h);
        worst = worst.max((fd - s.sol.du.column(k)).amax() / scale);
    }
    Ok(worst)
}

/// All ball checks at radius r. Err carries the first failure.
pub fn check_ball(
    c: &Candidate,
    base: &BaseOutcome,
    r: f64,
    dirs: &[DVector<f64>],
    t: &Thresholds,
) -> std::result::Result<(BallReport, Vec<BallSample>), String> {
    let n = c.u0.n;
    let mut rhos = vec![PhasePoint::zeros(n)];
    for d in dirs {
        rhos.push(PhasePoint::devectorize((d * r).as_slice(), n).map_err(|e| e.to_string())?);
    }
    let samples: Vec<BallSample> = rhos
        .into_par_iter()
        .map(|rho| BallSample::solve(c, rho, t))
        // first failure in sample order, whatever the scheduling
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()
        .map_err(|e| format!("solve: {e}"))?;
    let big_n = c.u0.big_n();
    let mut recursion_max: f64 = 0.0;
    let mut newton_residual_max: f64 = 0.0;
    let (mut nu0, mut nu1) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut pi1_deviation: f64 = 0.0;
    let mut min_ic = f64::INFINITY;
    let signs: Vec<f64> = base.report.det_dpi.iter().map(|d| d.sign).collect();
    for s in &samples {
        recursion_max = recursion_max.max(s.tau.residuals().recursion);
        newton_residual_max = newton_residual_max.max(s.sol.final_residual());
        for &chi in &s.tau.chi {
            nu0 = nu0.min(chi);
            nu1 = nu1.max(chi);
        }
        pi1_deviation = pi1_deviation.max((&s.tau.pi[0] - &s.rho).norm());
        for (i, m) in s.maps.iter().enumerate() {
            let d = det_report(&m.dpi);
            if d.sign != signs[i] {
                return Err(format!("det D pi_{} changes sign on the ball", i + 1));
            }
            min_ic = min_ic.min(d.inverse_condition);
        }
    }
    if recursion_max >= t.recursion {
        return Err(format!("recursion residual {recursion_max:e}"));
    }
    if newton_residual_max >= t.newton {
        return Err(format!("Newton residual {newton_residual_max:e}"));
    }
    if !(nu0 > 0.0 && nu1 < 1.0) {
        return Err(format!("chi range [{nu0}, {nu1}] not inside (0, 1)"));
    }
    if pi1_deviation != 0.0 {
        return Err(format!("pi_1 differs from rho by {pi1_deviation:e}"));
    }
    if min_ic < t.det_dpi {
        return Err(format!("D pi inverse condition {min_ic:e} on the ball"));
    }
    let images = |f: &dyn Fn(&LocalMaps) -> DVector<f64>| -> Vec<Vec<DVector<f64>>> {
        (0..big_n).map(|i| samples.iter().map(|s| first_part(&f(&s.maps[i]), n)).collect()).collect()
    };
    let xi_sets = images(&|m| m.xi.clone());
    let pi_sets = images(&|m| m.pi.clone());
    let at_zero = |sets: &[Vec<DVector<f64>>]| min_pair_distance(&sets.iter().map(|s| vec![s[0].clone()]).collect::<Vec<_>>());
    let base_xi = at_zero(&xi_sets);
    let base_pi = at_zero(&pi_sets);
    let sep_xi = min_pair_distance(&xi_sets) / base_xi;
    let sep_pi = min_pair_distance(&pi_sets) / base_pi;
    if sep_xi <= t.separation || sep_pi <= t.separation {
        return Err(format!("image separation {sep_xi:.3} / {sep_pi:.3}"));
    }
    // derivative and two-path cross-checks
    let fd_points: Vec<&BallSample> = samples.iter().skip(1 + 8 * n).take(5).collect();
    let h = 0.25 * r;
    let errs: Vec<f64> = fd_points
        .par_iter()
        .map(|s| du_fd_error(c, s, h, t))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()
        .map_err(|e| format!("DU difference check: {e}"))?;
    let du_fd = errs.iter().copied().fold(0.0, f64::max);
    if du_fd >= t.du_fd {
        return Err(format!("DU differs from differences by {du_fd:e}"));
    }
    let half = dirs.last().map_or_else(|| DVector::zeros(4 * n), |d| d * (0.5 * r));
    let half = PhasePoint::devectorize(half.as_slice(), n).map_err(|e| e.to_string())?;
    let cfg = newton_config(t);
    let cont = solve_u_of_rho(&half, &c.u0, c.graph.map(), &cfg).map_err(|e| e.to_string())?;
    let direct = solve_u_direct(&half, &c.u0, c.graph.map(), &cfg).map_err(|e| format!("direct Newton: {e}"))?;
    let two_path = (cont.u.to_vec() - direct.u.to_vec()).amax();
    if two_path >= t.two_path {
        return Err(format!("continuation and direct Newton differ by {two_path:e}"));
    }
    Ok((
        BallReport {
            radius: r,
            samples: samples.len(),
            sampling: SAMPLING.into(),
            attempts: Vec::new(),
            recursion_max,
            newton_residual_max,
            nu0,
            nu1,
            pi1_deviation,
            det_dpi_min_inverse_condition: min_ic,
            det_dpi_signs: signs,
            base_distance_xi: base_xi,
            base_distance_pi: base_pi,
            separation_xi: sep_xi,
            separation_pi: sep_pi,
            du_fd_error: du_fd,
            du_fd_points: errs.len(),
            two_path,
        },
        samples,
    ))
}

/// Bisect from r₀/8, halving on any failure.
pub fn find_radius(
    c: &Candidate,
    base: &BaseOutcome,
    dirs: &[DVector<f64>],
    t: &Thresholds,
) -> std::result::Result<(BallReport, Vec<BallSample>), (Vec<BallAttempt>, OcnError)> {
    let mut r = c.record.r0 / 8.0;
    let mut attempts = Vec::new();
    for _ in 0..=t.max_halvings {
        match check_ball(c, base, r, dirs, t) {
            Ok((mut rep, samples)) => {
                attempts.push(BallAttempt { radius: r, failure: None });
                rep.attempts = attempts;
                return Ok((rep, samples));
            }
            Err(msg) => attempts.push(BallAttempt { radius: r, failure: Some(msg) }),
        }
        r *= 0.5;
    }
    let last = attempts.last().and_then(|a| a.failure.clone()).unwrap_or_default();
    Err((attempts, OcnError::Inadmissible(format!("no admissible rho-ball after shrinking: {last}"))))
}
