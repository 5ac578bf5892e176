//! A smooth convex G on ℝ^{2×n} × ℝ^d with prescribed jets at N points.
//!
//! G is the nested smooth max S_1 of the affine pieces ℓ_i, with
//! S_k = smax_μ(ℓ_k, S_{k+1}) and S_N = ℓ_N. Each smax_μ is convex and
//! nondecreasing in both arguments, so G is convex. Where ℓ_i exceeds every
//! other piece by at least (N + 2)μ, G = ℓ_i exactly.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::smooth::{hump_excess, smax};
use crate::embed::margins::q_from_emb1;
use crate::error::{OcnError, Result};
use crate::linalg::minors::minor_vector;
use crate::linalg::phase::flatten_rows;
use crate::tau::config::TauConfig;

#[derive(Clone, Debug, Serialize)]
pub struct AffinePiece {
    pub base: DVector<f64>,
    pub value: f64,
    pub grad: DVector<f64>,
}

impl AffinePiece {
    pub fn eval(&self, w: &DVector<f64>) -> f64 {
        self.value + self.grad.dot(&(w - &self.base))
    }
}

/// Pieces with base (η_i¹, J(η_i¹)), value c_i and gradient (Q_i, d_i).
pub fn pieces_from_embedding(tau: &TauConfig, c: &[f64], d: &[DVector<f64>], eps: f64) -> Vec<AffinePiece> {
    let q = q_from_emb1(tau, d, eps);
    tau.eta
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let a = flatten_rows(&e.first);
            let j = minor_vector(&e.first);
            let base = DVector::from_iterator(a.len() + j.len(), a.iter().chain(j.iter()).copied());
            let qa = flatten_rows(&q[i]);
            let grad = DVector::from_iterator(qa.len() + d[i].len(), qa.iter().chain(d[i].iter()).copied());
            AffinePiece { base, value: c[i], grad }
        })
        .collect()
}

/// Value, gradient and Hessian of G at a point.
#[derive(Clone, Debug)]
pub struct GJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    /// Piece whose exact-affine zone contains the point, if any.
    pub zone: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexG {
    pub pieces: Vec<AffinePiece>,
    pub mu: f64,
    /// min_i radius[i].
    pub delta_dom: f64,
    /// Around w_i piece i beats every other piece by at least half its margin.
    pub radius: Vec<f64>,
    /// margin[i][j] = c_j − ℓ_i(w_j), zero on the diagonal.
    pub margin: Vec<Vec<f64>>,
    pub min_margin: f64,
}

fn dominance(pieces: &[AffinePiece]) -> Result<(Vec<Vec<f64>>, f64, Vec<f64>)> {
    let big_n = pieces.len();
    let mut margin = vec![vec![0.0; big_n]; big_n];
    let mut min_margin = f64::INFINITY;
    for i in 0..big_n {
        for j in 0..big_n {
            if i == j {
                continue;
            }
            let m = pieces[j].value - pieces[i].eval(&pieces[j].base);
            if !(m > 0.0) {
                return Err(OcnError::NonPositiveMargin { i: i + 1, j: j + 1, margin: m });
            }
            margin[i][j] = m;
            min_margin = min_margin.min(m);
        }
    }
    let radius = (0..big_n)
        .map(|i| {
            (0..big_n)
                .filter(|&k| k != i)
                .map(|k| {
                    let slope = (&pieces[i].grad - &pieces[k].grad).norm();
                    if slope == 0.0 {
                        f64::INFINITY
                    } else {
                        margin[k][i] / (2.0 * slope)
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok((margin, min_margin, radius))
}

/// Largest admissible smoothing width: μ must stay below both δ_dom/4 and
/// min margin / (2(N + 2)).
pub fn smoothing_bound(pieces: &[AffinePiece]) -> Result<f64> {
    let (_, min_margin, radius) = dominance(pieces)?;
    let delta = radius.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((delta / 4.0).min(min_margin / (2.0 * (pieces.len() + 2) as f64)))
}

pub fn build_g(pieces: Vec<AffinePiece>, mu: f64) -> Result<ConvexG> {
    if pieces.is_empty() {
        return Err(OcnError::Shape("G needs at least one affine piece".into()));
    }
    let dim = pieces[0].base.len();
    if pieces.iter().any(|p| p.base.len() != dim || p.grad.len() != dim) {
        return Err(OcnError::Shape("affine pieces of different dimension".into()));
    }
    let bound = smoothing_bound(&pieces)?;
    if !(mu > 0.0 && mu < bound) {
        return Err(OcnError::SmoothingTooWide { mu, bound });
    }
    let (margin, min_margin, radius) = dominance(&pieces)?;
    let delta_dom = radius.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConvexG { pieces, mu, delta_dom, radius, margin, min_margin })
}

/// build_g with μ at half the admissible bound (capped at 1 for a lone piece).
pub fn build_g_default(pieces: Vec<AffinePiece>) -> Result<ConvexG> {
    let bound = smoothing_bound(&pieces)?;
    build_g(pieces, (0.5 * bound).min(1.0))
}

impl ConvexG {
    pub fn dim(&self) -> usize {
        self.pieces[0].base.len()
    }

    /// Gap ℓ_i(w) − max_{k≠i} ℓ_k(w) for the leading piece i.
    pub fn leader(&self, w: &DVector<f64>) -> (usize, f64) {
        let vals: Vec<f64> = self.pieces.iter().map(|p| p.eval(w)).collect();
        let mut best = 0;
        for k in 1..vals.len() {
            if vals[k] > vals[best] {
                best = k;
            }
        }
        let second = (0..vals.len())
            .filter(|&k| k != best)
            .map(|k| vals[k])
            .fold(f64::NEG_INFINITY, f64::max);
        (best, vals[best] - second)
    }

    /// Gap required for G to coincide with the leading piece.
    pub fn zone_gap(&self) -> f64 {
        (self.pieces.len() + 2) as f64 * self.mu
    }

    pub fn zone_of(&self, w: &DVector<f64>) -> Option<usize> {
        let (i, gap) = self.leader(w);
        (gap >= self.zone_gap()).then_some(i)
    }

    pub fn value(&self, w: &DVector<f64>) -> f64 {
        if let Some(i) = self.zone_of(w) {
            return self.pieces[i].eval(w);
        }
        let last = self.pieces.len() - 1;
        let mut s = self.pieces[last].eval(w);
        for k in (0..last).rev() {
            s = smax(self.pieces[k].eval(w), s, self.mu).value;
        }
        s
    }

    pub fn jet(&self, w: &DVector<f64>) -> GJet {
        let m = self.dim();
        if let Some(i) = self.zone_of(w) {
            let p = &self.pieces[i];
            return GJet { value: p.eval(w), grad: p.grad.clone(), hess: DMatrix::zeros(m, m), zone: Some(i) };
        }
        let last = self.pieces.len() - 1;
        let mut value = self.pieces[last].eval(w);
        let mut grad = self.pieces[last].grad.clone();
        let mut hess = DMatrix::zeros(m, m);
        for k in (0..last).rev() {
            let p = &self.pieces[k];
            let s = smax(p.eval(w), value, self.mu);
            if s.curv > 0.0 {
                let diff = &p.grad - &grad;
                hess *= s.wb;
                hess.ger(s.curv, &diff, &diff, 1.0);
            } else if s.wb == 0.0 {
                hess.fill(0.0);
            }
            grad = &p.grad * s.wa + grad * s.wb;
            value = s.value;
        }
        GJet { value, grad, hess, zone: None }
    }

    /// Upper bound on G − max_i ℓ_i.
    pub fn excess_bound(&self) -> f64 {
        (self.pieces.len() - 1) as f64 * hump_excess(self.mu)
    }
}
