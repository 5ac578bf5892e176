//! Sampled convexity checks.
//!
//! F itself is polyconvex, not convex: F(A) = ε/4 |A|² + G̃(A, J(A)) with G̃
//! convex. Two probes follow from that form. Midpoint convexity of G̃ on
//! segments in (A, J), and along rank-one segments A ± t p⊗a (where J is affine
//! in t) second differences of F of at least ε/2 |h|² (ε |h|² for F₀).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::energy::SigmaModel;
use crate::linalg::minors::minor_vector;
use crate::linalg::phase::SpaceMatrix;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub segments: usize,
    /// Smallest midpoint gap (f(a) + f(b))/2 − f((a + b)/2) seen.
    pub min_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneReport {
    pub segments: usize,
    /// Smallest second difference divided by |h|².
    pub min_ratio: f64,
    /// Required lower bound for that ratio.
    pub floor: f64,
}

impl RankOneReport {
    pub fn passed(&self) -> bool {
        self.min_ratio >= self.floor * (1.0 - 1e-6)
    }
}

fn ball_point<R: Rng>(rng: &mut R, center: &SpaceMatrix, radius: f64) -> SpaceMatrix {
    let dir = DMatrix::from_fn(2, center.ncols(), |_, _| rng.random_range(-1.0..1.0));
    center + dir.normalize() * (radius * rng.random_range(0.0..1.0f64))
}

/// Midpoint convexity of G̃ on `count` segments: half local (both ends within
/// r₀ of one base point, J perturbed off the surface), half joining two base
/// point neighbourhoods.
pub fn lifted_midpoint_probe<R: Rng>(model: &SigmaModel, count: usize, rng: &mut R) -> ProbeReport {
    let big_n = model.centers.len();
    let r0 = model.pert.r0;
    let mut min_gap = f64::INFINITY;
    for t in 0..count {
        let i = rng.random_range(0..big_n);
        let k = if t % 2 == 0 { i } else { rng.random_range(0..big_n) };
        let a = ball_point(rng, &model.centers[i], r0);
        let b = ball_point(rng, &model.centers[k], r0);
        let mut ja = minor_vector(&a);
        let mut jb = minor_vector(&b);
        let js = 0.1 * (1.0 + ja.amax());
        ja += DVector::from_fn(ja.len(), |_, _| rng.random_range(-js..js));
        jb += DVector::from_fn(jb.len(), |_, _| rng.random_range(-js..js));
        let mid = (&a + &b) * 0.5;
        let jm = (&ja + &jb) * 0.5;
        let gap = 0.5 * (model.lifted_value(&a, &ja) + model.lifted_value(&b, &jb)) - model.lifted_value(&mid, &jm);
        min_gap = min_gap.min(gap);
    }
    ProbeReport { segments: count, min_gap }
}

/// Second differences f(A + h) + f(A − h) − 2f(A) along rank-one h = p⊗a
/// with |h| ≤ r₀/2, A within r₀ of a base point.
pub fn rank_one_probe<R: Rng>(
    f: impl Fn(&SpaceMatrix) -> f64,
    centers: &[SpaceMatrix],
    r0: f64,
    floor: f64,
    count: usize,
    rng: &mut R,
) -> RankOneReport {
    let n = centers[0].ncols();
    let mut min_ratio = f64::INFINITY;
    for _ in 0..count {
        let c = &centers[rng.random_range(0..centers.len())];
        let a = ball_point(rng, c, r0);
        let p = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
        let q = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let h = (&p * q.transpose()).normalize() * (0.5 * r0 * rng.random_range(0.05..1.0));
        let second = f(&(&a + &h)) + f(&(&a - &h)) - 2.0 * f(&a);
        min_ratio = min_ratio.min(second / h.norm_squared());
    }
    RankOneReport { segments: count, min_ratio, floor }
}
