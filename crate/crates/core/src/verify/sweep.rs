//! The λ-sweep: S_i(λ) = (π_i + λ z_i)(B_r) over a grid in (0, 1).

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ball::BallSample;
use super::eigen::{eigen_report, EigenReport};
use super::thresholds::Thresholds;
use crate::error::Result;
use crate::linalg::dense::adjugate_svd;

/// Surrogates used in place of literal openness, recorded in the certificate.
pub const SURROGATES: [&str; 3] = [
    "S_i(lambda) open where det[D pi_i + lambda D z_i] != 0 at sampled rho (inverse function theorem witness)",
    "Sigma(lambda) open at singular lambda = -1/x, x in E_i(rho), via adj[D pi_i + lambda D z_i] z_i != 0 (implicit function witness)",
    "S_i(lambda), S_j(lambda) disjoint when the centre distance exceeds the disjoint factor times the summed sample spreads",
];

/// Per-sample spectral data for every piece.
#[derive(Clone, Debug)]
struct SampleSpectra {
    reports: Vec<EigenReport>,
    ms: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularLambda {
    /// 1-based piece index.
    pub i: usize,
    pub sample: usize,
    pub x: f64,
    pub lambda: f64,
    /// |adj[Dπ + λDz] z| / (‖adj‖ |z|).
    pub margin: f64,
    /// |adj[Dπ + λDz] z − (−λ)^{4n−1} adj(xI − M) adj(Dπ) z| / (‖adj‖ |z|).
    pub relation_error: f64,
    /// The same gap over the larger of the two vectors.
    pub relation_pointwise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub lambdas: Vec<f64>,
    pub samples: usize,
    /// Smallest multiplicities and largest deflation remainder over all samples and pieces.
    pub min_count_zero: usize,
    pub min_count_minus_one: usize,
    pub flagged: usize,
    pub remainder_max: f64,
    /// Worst error of det[Dπ + λDz] = det Dπ det[I + λM] over the grid, relative to |det Dπ| Π(1 + |λμ|).
    pub factorization_max: f64,
    /// The same error relative to the larger of the two sides.
    pub factorization_pointwise: f64,
    pub singular_count: usize,
    /// The singular λ with the smallest adjugate margin, if any.
    pub worst_singular: Option<SingularLambda>,
    pub adjugate_relation_max: f64,
    pub adjugate_relation_pointwise: f64,
    /// Largest root below −1 over all sampled E_i(ρ).
    pub x0: Option<f64>,
    /// Midpoint of (−1/x₀, 1), or 1/2.
    pub delta1_spectral: f64,
    /// δ₁ after moving past grid points where disjointness fails.
    pub delta1: f64,
    /// min |1 + λμ| over eigenvalues μ, sampled ρ and grid λ ≥ δ₁.
    pub det_margin: f64,
    /// Smallest centre distance over summed spreads, grid λ ≥ δ₁.
    pub disjoint_ratio: f64,
    pub surrogates: Vec<String>,
}

impl SweepReport {
    pub fn adjugate_margin(&self) -> Option<f64> {
        self.worst_singular.as_ref().map(|s| s.margin)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn spectra(n: usize, s: &BallSample) -> Result<SampleSpectra> {
    let mut reports = Vec::with_capacity(s.maps.len());
    let mut ms = Vec::with_capacity(s.maps.len());
    for lm in &s.maps {
        let m = lm.m()?;
        reports.push(eigen_report(n, lm.i, s.rho.norm(), &m)?.0);
        ms.push(m);
    }
    Ok(SampleSpectra { reports, ms })
}

fn singular_at(n: usize, idx: usize, s: &BallSample, sp: &SampleSpectra) -> Vec<SingularLambda> {
    let dim = 4 * n;
    let mut out = Vec::new();
    for (lm, (r, m)) in s.maps.iter().zip(sp.reports.iter().zip(&sp.ms)) {
        if r.e.is_empty() {
            continue;
        }
        let adj_pi = adjugate_svd(&lm.dpi);
        for &x in &r.e {
            let lambda = -1.0 / x;
            let a = adjugate_svd(&(&lm.dpi + &lm.dz * lambda));
            let b = &a * &lm.z;
            let sm = DMatrix::<f64>::identity(dim, dim) * x - m;
            let rhs = adjugate_svd(&sm) * (&adj_pi * &lm.z) * (-lambda).powi(dim as i32 - 1);
            out.push(SingularLambda {
                i: r.i,
                sample: idx,
                x,
                lambda,
                margin: b.norm() / (a.norm() * lm.z.norm()),
                relation_error: (&b - &rhs).norm() / (a.norm() * lm.z.norm()),
                relation_pointwise: (&b - &rhs).norm() / b.norm().max(rhs.norm()),
            });
        }
    }
    out
}

/// Largest factorization error over pieces and grid, as (scaled, pointwise).
/// The scaled form divides by |det Dπ| Π(1 + |λμ|), the size bound of the product.
fn factorization_error(s: &BallSample, sp: &SampleSpectra, lambdas: &[f64]) -> (f64, f64) {
    let (mut scaled, mut pointwise) = (0.0f64, 0.0f64);
    for ((lm, m), r) in s.maps.iter().zip(&sp.ms).zip(&sp.reports) {
        let d_pi = lm.dpi.clone().lu().determinant();
        let dim = m.nrows();
        for &l in lambdas {
            let lhs = (&lm.dpi + &lm.dz * l).lu().determinant();
            let rhs = d_pi * (DMatrix::<f64>::identity(dim, dim) + m * l).lu().determinant();
            let size: f64 = r.eigenvalues.iter().map(|&[re, im]| 1.0 + l * re.hypot(im)).product();
            scaled = scaled.max((lhs - rhs).abs() / (d_pi.abs() * size));
            pointwise = pointwise.max(rel(lhs, rhs));
        }
    }
    (scaled, pointwise)
}

fn min_shift(r: &EigenReport, l: f64) -> f64 {
    r.eigenvalues
        .iter()
        .map(|&[re, im]| (Complex::new(1.0, 0.0) + Complex::new(re, im) * l).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Centre distance over summed spreads for the sets S_i(λ), worst pair.
fn disjoint_ratio(samples: &[BallSample], l: f64) -> f64 {
    let big_n = samples[0].maps.len();
    let point = |s: &BallSample, i: usize| -> DVector<f64> { &s.maps[i].pi + &s.maps[i].z * l };
    let centres: Vec<DVector<f64>> = (0..big_n).map(|i| point(&samples[0], i)).collect();
    let spreads: Vec<f64> = (0..big_n)
        .map(|i| samples.iter().map(|s| (point(s, i) - &centres[i]).norm()).fold(0.0, f64::max))
        .collect();
    let mut worst = f64::INFINITY;
    for i in 0..big_n {
        for j in i + 1..big_n {
            worst = worst.min((&centres[i] - &centres[j]).norm() / (spreads[i] + spreads[j]));
        }
    }
    worst
}

/// Sweep over the grid k/(G+1), k = 1..G. `samples[0]` must be ρ = 0.
pub fn lambda_sweep(n: usize, samples: &[BallSample], t: &Thresholds) -> std::result::Result<SweepReport, String> {
    if samples.is_empty() || samples[0].rho.norm() != 0.0 {
        return Err("the first sample must be rho = 0".into());
    }
    let g = t.grid.max(1);
    let lambdas: Vec<f64> = (1..=g).map(|k| k as f64 / (g + 1) as f64).collect();
    let spectra: Vec<SampleSpectra> = samples
        .par_iter()
        .map(|s| spectra(n, s))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()
        .map_err(|e| format!("eigenstructure on the ball: {e}"))?;
    let all = || spectra.iter().flat_map(|s| s.reports.iter());
    let min_count_zero = all().map(|r| r.count_zero).min().unwrap_or(0);
    let min_count_minus_one = all().map(|r| r.count_minus_one).min().unwrap_or(0);
    let flagged = all().map(|r| r.flagged).sum();
    let remainder_max = all().map(|r| r.remainder).fold(0.0, f64::max);
    if min_count_zero < n + 1 || min_count_minus_one < 2 * n || flagged > 0 {
        return Err(format!(
            "multiplicities on the ball: {min_count_zero} at 0, {min_count_minus_one} at -1, {flagged} flagged"
        ));
    }
    if remainder_max >= t.deflation {
        return Err(format!("deflation remainder {remainder_max:e} on the ball"));
    }
    let (factorization_max, factorization_pointwise) = samples
        .par_iter()
        .zip(&spectra)
        .map(|(s, sp)| factorization_error(s, sp, &lambdas))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    if factorization_max >= t.factorization {
        return Err(format!("determinant factorization error {factorization_max:e}"));
    }
    let singular: Vec<SingularLambda> = samples
        .par_iter()
        .zip(&spectra)
        .enumerate()
        .flat_map_iter(|(k, (s, sp))| singular_at(n, k, s, sp))
        .collect();
    let worst_singular = singular.iter().min_by(|a, b| a.margin.total_cmp(&b.margin)).cloned();
    let adjugate_relation_max = singular.iter().map(|s| s.relation_error).fold(0.0, f64::max);
    let adjugate_relation_pointwise = singular.iter().map(|s| s.relation_pointwise).fold(0.0, f64::max);
    if let Some(w) = &worst_singular {
        if w.margin < t.adjugate_margin {
            return Err(format!("adjugate margin {:e} at lambda = {} (piece {})", w.margin, w.lambda, w.i));
        }
    }
    if adjugate_relation_max >= t.adjugate_relation {
        return Err(format!("adjugate relation error {adjugate_relation_max:e}"));
    }
    let x0 = all().flat_map(|r| r.e.iter().copied()).reduce(f64::max);
    let delta1_spectral = x0.map_or(0.5, |x| 0.5 * (-1.0 / x + 1.0));
    // δ₁ itself, then the grid points above it
    let upper: Vec<f64> =
        std::iter::once(delta1_spectral).chain(lambdas.iter().copied().filter(|&l| l > delta1_spectral)).collect();
    let ratios: Vec<f64> = upper.par_iter().map(|&l| disjoint_ratio(samples, l)).collect();
    // move δ₁ past the last grid point where the sets are not separated
    let mut delta1 = delta1_spectral;
    if let Some(k) = ratios.iter().rposition(|&q| q <= t.disjoint) {
        if k + 1 == upper.len() {
            return Err(format!("S_i(lambda) not separated up to lambda = {}", upper[k]));
        }
        delta1 = upper[k + 1];
    }
    let kept: Vec<(f64, f64)> = upper.iter().copied().zip(ratios).filter(|&(l, _)| l >= delta1).collect();
    let disjoint_ratio = kept.iter().map(|&(_, q)| q).fold(f64::INFINITY, f64::min);
    let det_margin = kept
        .iter()
        .flat_map(|&(l, _)| all().map(move |r| min_shift(r, l)))
        .fold(f64::INFINITY, f64::min);
    if det_margin <= t.sweep_det {
        return Err(format!("det[I + lambda M] margin {det_margin:e} above delta1 = {delta1}"));
    }
    Ok(SweepReport {
        lambdas,
        samples: samples.len(),
        min_count_zero,
        min_count_minus_one,
        flagged,
        remainder_max,
        factorization_max,
        factorization_pointwise,
        singular_count: singular.len(),
        worst_singular,
        adjugate_relation_max,
        adjugate_relation_pointwise,
        x0,
        delta1_spectral,
        delta1,
        det_margin,
        disjoint_ratio,
        surrogates: SURROGATES.iter().map(|s| s.to_string()).collect(),
    })
}
