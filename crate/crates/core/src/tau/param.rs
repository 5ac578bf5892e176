//! The parameter chart U = (P, X, Y, Z, b, κ_1, …, κ_N).
//!
//! Flat layout (all blocks consecutive, each vector contiguous):
//! P = p_{n+1..N} ∈ (ℝ²)^{N−n}, X = x_{1..N} ∈ (ℝ^{n−1})^N,
//! Y = y_{n+2..N}, Z = z_{n+2..N} ∈ (ℝ^{n−1})^{N−n−1}, b ∈ ℝ^{n−2}, κ ∈ ℝ^N.

use std::ops::Range;

use nalgebra::{DVector, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{OcnError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub big_n: usize,
    pub p: Range<usize>,
    pub x: Range<usize>,
    pub y: Range<usize>,
    pub z: Range<usize>,
    pub b: Range<usize>,
    pub kappa: Range<usize>,
}

impl Layout {
    pub fn new(n: usize) -> Self {
        let big_n = 2 * n + 1;
        let np = 2 * (big_n - n);
        let nx = big_n * (n - 1);
        let ny = (big_n - n - 1) * (n - 1);
        let p = 0..np;
        let x = p.end..p.end + nx;
        let y = x.end..x.end + ny;
        let z = y.end..y.end + ny;
        let b = z.end..z.end + (n - 2);
        let kappa = b.end..b.end + big_n;
        Self { n, big_n, p, x, y, z, b, kappa }
    }

    pub fn len(&self) -> usize {
        self.kappa.end
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of component m of x_k (k 0-based over 1..N).
    pub fn x_index(&self, k: usize, m: usize) -> usize {
        self.x.start + k * (self.n - 1) + m
    }

    pub fn kappa_index(&self, k: usize) -> usize {
        self.kappa.start + k
    }

    /// The (Y, Z) block is contiguous: Y then Z.
    pub fn yz(&self) -> Range<usize> {
        self.y.start..self.z.end
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamU {
    pub n: usize,
    /// p_{n+1}, …, p_N.
    pub p: Vec<Vector2<f64>>,
    /// x_1, …, x_N.
    pub x: Vec<DVector<f64>>,
    /// y_{n+2}, …, y_N.
    pub y: Vec<DVector<f64>>,
    /// z_{n+2}, …, z_N.
    pub z: Vec<DVector<f64>>,
    pub b: DVector<f64>,
    pub kappa: Vec<f64>,
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

impl ParamU {
    pub fn big_n(&self) -> usize {
        2 * self.n + 1
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.n)
    }

    pub fn to_vec(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.layout().len());
        for p in &self.p {
            out.extend_from_slice(p.as_slice());
        }
        for v in self.x.iter().chain(&self.y).chain(&self.z) {
            out.extend_from_slice(v.as_slice());
        }
        out.extend_from_slice(self.b.as_slice());
        out.extend_from_slice(&self.kappa);
        DVector::from_vec(out)
    }

    pub fn from_vec(n: usize, v: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(OcnError::InvalidDimension(n));
        }
        let l = Layout::new(n);
        if v.len() != l.len() {
            return Err(OcnError::Shape(format!(
                "parameter vector has length {}, expected {}",
                v.len(),
                l.len()
            )));
        }
        let chunks = |r: &Range<usize>, w: usize| -> Vec<DVector<f64>> {
            v[r.clone()]
                .chunks(w)
                .map(DVector::from_column_slice)
                .collect()
        };
        Ok(Self {
            n,
            p: v[l.p.clone()]
                .chunks(2)
                .map(|c| Vector2::new(c[0], c[1]))
                .collect(),
            x: chunks(&l.x, n - 1),
            y: chunks(&l.y, n - 1),
            z: chunks(&l.z, n - 1),
            b: DVector::from_column_slice(&v[l.b.clone()]),
            kappa: v[l.kappa.clone()].to_vec(),
        })
    }

    /// Standard Gaussian coordinates, κ_i = 1.5 + |g_i|.
    pub fn sample<R: Rng>(n: usize, rng: &mut R) -> Result<Self> {
        let l = Layout::new(n);
        let mut v: Vec<f64> = (0..l.len()).map(|_| gaussian(rng)).collect();
        for k in l.kappa.clone() {
            v[k] = 1.5 + v[k].abs();
        }
        Self::from_vec(n, &v)
    }

    pub fn check_kappa(&self) -> Result<()> {
        match self.kappa.iter().position(|&k| !(k > 1.0)) {
            Some(i) => Err(OcnError::Inadmissible(format!(
                "kappa_{} = {} must exceed 1",
                i + 1,
                self.kappa[i]
            ))),
            None => Ok(()),
        }
    }

    /// Copy with the (Y, Z) block replaced by a flat vector (Y then Z).
    pub fn with_yz(&self, yz: &[f64]) -> Self {
        let w = self.n - 1;
        let half = yz.len() / 2;
        let mut out = self.clone();
        out.y = yz[..half].chunks(w).map(DVector::from_column_slice).collect();
        out.z = yz[half..].chunks(w).map(DVector::from_column_slice).collect();
        out
    }

    pub fn yz_vec(&self) -> DVector<f64> {
        let v = self.to_vec();
        DVector::from_column_slice(&v.as_slice()[self.layout().yz()])
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tau::dims::dims;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_length_matches_chart_dimension() {
        for n in 2..=8 {
            assert_eq!(Layout::new(n).len(), dims(n).unwrap().dim_u);
        }
    }

    #[test]
    fn flat_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..6 {
            let u = ParamU::sample(n, &mut rng).unwrap();
            let back = ParamU::from_vec(n, u.to_vec().as_slice()).unwrap();
            assert_eq!(back, u);
            assert!(u.kappa.iter().all(|&k| k >= 1.5));
            u.check_kappa().unwrap();
        }
    }

    #[test]
    fn yz_replacement_touches_only_yz() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = ParamU::sample(4, &mut rng).unwrap();
        let l = u.layout();
        let new = vec![0.5; l.yz().len()];
        let v = u.with_yz(&new).to_vec();
        let old = u.to_vec();
        for k in 0..l.len() {
            if l.yz().contains(&k) {
                assert_eq!(v[k], 0.5);
            } else {
                assert_eq!(v[k], old[k]);
            }
        }
    }

    #[test]
    fn kappa_must_exceed_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut u = ParamU::sample(3, &mut rng).unwrap();
        u.kappa[2] = 1.0;
        assert!(u.check_kappa().is_err());
    }
}
