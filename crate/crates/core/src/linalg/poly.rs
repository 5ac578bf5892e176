//! Dense real polynomials with coefficients stored in descending degree.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{OcnError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Leading exact zeros are stripped; an empty list is the zero polynomial.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0);
        match first {
            Some(k) => Self {
                coeffs: coeffs[k..].to_vec(),
            },
            None => Self::zero(),
        }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    /// (x − root)^power.
    pub fn root_power(root: f64, power: usize) -> Self {
        let linear = Self::new(vec![1.0, -root]);
        (0..power).fold(Self::new(vec![1.0]), |acc, _| acc.mul(&linear))
    }

    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::new(vec![1.0]), |acc, &r| acc.mul(&Self::new(vec![1.0, -r])))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let k = self.degree();
        if k == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs[..k]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (k - i) as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let pad = |p: &Self| {
            let mut v = vec![0.0; len - p.coeffs.len()];
            v.extend_from_slice(&p.coeffs);
            v
        };
        let (a, b) = (pad(self), pad(other));
        Self::new(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Long division: `self = divisor · quotient + remainder`, deg(remainder) < deg(divisor).
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        if divisor.is_zero() {
            return Err(OcnError::ZeroDivisor);
        }
        let dq = divisor.degree();
        if self.degree() < dq {
            return Ok((Self::zero(), self.clone()));
        }
        let mut work = self.coeffs.clone();
        let qlen = self.degree() - dq + 1;
        let mut quotient = vec![0.0; qlen];
        let lead = divisor.leading();
        for i in 0..qlen {
            let factor = work[i] / lead;
            quotient[i] = factor;
            for (k, &dc) in divisor.coeffs.iter().enumerate() {
                work[i + k] -= factor * dc;
            }
            work[i] = 0.0;
        }
        let remainder = if dq == 0 {
            Self::zero()
        } else {
            Self::new(work[qlen..].to_vec())
        };
        Ok((Self::new(quotient), remainder))
    }

    /// Sylvester matrix of (self, other).
    pub fn sylvester(&self, other: &Self) -> DMatrix<f64> {
        let m = self.degree();
        let k = other.degree();
        let size = m + k;
        let mut s = DMatrix::zeros(size, size);
        for row in 0..k {
            for (j, &c) in self.coeffs.iter().enumerate() {
                s[(row, row + j)] = c;
            }
        }
        for row in 0..m {
            for (j, &c) in other.coeffs.iter().enumerate() {
                s[(k + row, row + j)] = c;
            }
        }
        s
    }

    /// Resultant as the determinant of the Sylvester matrix.
    pub fn resultant(&self, other: &Self) -> f64 {
        let s = self.sylvester(other);
        if s.nrows() == 0 {
            return 1.0;
        }
        s.determinant()
    }

    /// disc(Q) = (−1)^{k(k−1)/2} Res(Q, Q′) / lead(Q), k = deg Q.
    ///
    /// With this normalization disc(a x² + b x + c) = b² − 4ac and
    /// disc = a^{2k−2} Π_{i<j} (r_i − r_j)².
    pub fn discriminant(&self) -> Result<f64> {
        let k = self.degree();
        if k == 0 {
            return Err(OcnError::DegreeTooSmall(0));
        }
        let res = self.resultant(&self.derivative());
        let sign = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * res / self.leading())
    }

    /// All complex roots, from the eigenvalues of the companion matrix, sorted by (re, im).
    pub fn roots(&self) -> Vec<Complex<f64>> {
        let k = self.degree();
        if k == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut companion = DMatrix::zeros(k, k);
        for j in 0..k {
            companion[(0, j)] = -self.coeffs[j + 1] / lead;
        }
        for i in 1..k {
            companion[(i, i - 1)] = 1.0;
        }
        // a stalled eigen-solve yields NaN roots, which fail every downstream margin
        super::dense::eigenvalues(&companion).unwrap_or_else(|_| vec![Complex::new(f64::NAN, f64::NAN); k])
    }

    /// Real roots (imaginary part below `imag_tol` relative to the root scale), ascending.
    pub fn real_roots(&self, imag_tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
            .map(|z| z.re)
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn leading_zeros_are_stripped() {
        let p = Poly::new(vec![0.0, 0.0, 1.0, 2.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeffs(), &[1.0, 2.0]);
        assert!(Poly::new(vec![]).is_zero());
    }

    #[test]
    fn divides_difference_of_squares() {
        let (q, r) = Poly::new(vec![1.0, 0.0, -1.0])
            .div_rem(&Poly::new(vec![1.0, -1.0]))
            .unwrap();
        assert_eq!(q.coeffs(), &[1.0, 1.0]);
        assert!(r.is_zero());
    }

    #[test]
    fn divides_cube_by_square() {
        let (q, r) = Poly::monomial(3).div_rem(&Poly::monomial(2)).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 0.0]);
        assert!(r.is_zero());
    }

    #[test]
    fn zero_divisor_is_an_error() {
        assert_eq!(
            Poly::monomial(2).div_rem(&Poly::zero()),
            Err(OcnError::ZeroDivisor)
        );
    }

    #[test]
    fn division_round_trips_constructed_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let dq = rng.random_range(1..6);
            let dg = rng.random_range(0..6);
            let mut rand_poly = |deg: usize| {
                let mut c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-3.0..3.0)).collect();
                c[0] = if c[0].abs() < 0.1 { 1.0 } else { c[0] };
                Poly::new(c)
            };
            let q = rand_poly(dq);
            let g = rand_poly(dg);
            let r = if dq > 0 { rand_poly(dq - 1) } else { Poly::zero() };
            let p = q.mul(&g).add(&r);
            let (g2, r2) = p.div_rem(&q).unwrap();
            assert!(g2.sub(&g).norm() < 1e-10 * g.norm().max(1.0), "{g:?} vs {g2:?}");
            assert!(r2.sub(&r).norm() < 1e-10 * p.norm().max(1.0));
        }
    }

    #[test]
    fn quadratic_discriminants() {
        assert_eq!(Poly::new(vec![1.0, 0.0, -1.0]).discriminant().unwrap(), 4.0);
        assert_eq!(Poly::monomial(2).discriminant().unwrap(), 0.0);
        let p = Poly::new(vec![2.0, 3.0, -5.0]);
        assert!((p.discriminant().unwrap() - (9.0 + 40.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_has_no_discriminant() {
        assert_eq!(
            Poly::new(vec![3.0]).discriminant(),
            Err(OcnError::DegreeTooSmall(0))
        );
    }

    #[test]
    fn cubic_discriminant_matches_root_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let roots: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            let lead: f64 = rng.random_range(0.5..2.0);
            let p = Poly::from_roots(&roots).scale(lead);
            let mut prod = 1.0;
            for i in 0..3 {
                for j in i + 1..3 {
                    prod *= (roots[i] - roots[j]).powi(2);
                }
            }
            let expected = lead.powi(4) * prod;
            let got = p.discriminant().unwrap();
            assert!(
                (got - expected).abs() <= 1e-8 * expected.abs().max(1e-300),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn roots_of_known_polynomial() {
        let p = Poly::from_roots(&[-3.0, 0.5, 2.0]);
        let r = p.real_roots(1e-9);
        for (a, b) in r.iter().zip([-3.0, 0.5, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_and_eval() {
        let p = Poly::new(vec![1.0, -2.0, 3.0, 4.0]);
        assert_eq!(p.derivative().coeffs(), &[3.0, -4.0, 3.0]);
        assert_eq!(p.eval(2.0), 8.0 - 8.0 + 6.0 + 4.0);
    }
}
