//! The linear forms S_ji and quadratic forms J_ji of the embedding step.
//!
//! ⟨η_i², η_j¹ − η_i¹⟩ = (Y, Z)·S_ji and J(η_j¹ − η_i¹) = J_ji, where η¹ is
//! independent of (Y, Z) and η² is linear in (Y, Z).

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::minors::minor_vector;
use crate::linalg::phase::frob_dot;
use crate::tau::config::eta_of;
use crate::tau::param::ParamU;

#[derive(Clone, Debug)]
pub struct PairingForms {
    pub big_n: usize,
    /// η_i¹ at the evaluation point.
    pub eta1: Vec<DMatrix<f64>>,
    /// s[j][i] ∈ ℝ^{2(N−n−1)(n−1)}, empty on the diagonal.
    pub s: Vec<Vec<DVector<f64>>>,
    /// jf[j][i] = J(η_j¹ − η_i¹) ∈ ℝ^d.
    pub jf: Vec<Vec<DVector<f64>>>,
}

impl PairingForms {
    /// ⟨η_i², η_j¹ − η_i¹⟩ at the given (Y, Z).
    pub fn pairing(&self, j: usize, i: usize, yz: &DVector<f64>) -> f64 {
        self.s[j][i].dot(yz)
    }
}

pub fn pairing_forms(u: &ParamU) -> Result<PairingForms> {
    let big_n = u.big_n();
    let m = u.layout().yz().len();
    let eta1: Vec<_> = eta_of(u)?.into_iter().map(|e| e.first).collect();
    // η_i² at each unit (Y, Z) basis vector
    let mut basis_eta2 = Vec::with_capacity(m);
    let mut e = vec![0.0; m];
    for k in 0..m {
        e[k] = 1.0;
        let eta = eta_of(&u.with_yz(&e))?;
        basis_eta2.push(eta.into_iter().map(|p| p.second).collect::<Vec<_>>());
        e[k] = 0.0;
    }
    let mut s = vec![vec![DVector::zeros(0); big_n]; big_n];
    let mut jf = vec![vec![DVector::zeros(0); big_n]; big_n];
    for j in 0..big_n {
        for i in 0..big_n {
            if i == j {
                continue;
            }
            let diff = &eta1[j] - &eta1[i];
            s[j][i] = DVector::from_fn(m, |k, _| frob_dot(&basis_eta2[k][i], &diff));
            jf[j][i] = minor_vector(&diff);
        }
    }
    Ok(PairingForms { big_n, eta1, s, jf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tau::frames::check_set_v;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn admissible<R: Rng>(n: usize, rng: &mut R) -> ParamU {
        loop {
            let u = ParamU::sample(n, rng).unwrap();
            if check_set_v(&u.p, &u.x).ok {
                return u;
            }
        }
    }

    #[test]
    fn forms_reproduce_direct_pairings() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in 2..=4 {
            let u = admissible(n, &mut rng);
            let f = pairing_forms(&u).unwrap();
            let eta = eta_of(&u).unwrap();
            let yz = u.yz_vec();
            for j in 0..f.big_n {
                for i in 0..f.big_n {
                    if i == j {
                        continue;
                    }
                    let diff = &eta[j].first - &eta[i].first;
                    let direct = frob_dot(&eta[i].second, &diff);
                    assert!((f.pairing(j, i, &yz) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
                    assert!((&f.jf[j][i] - minor_vector(&diff)).amax() < 1e-12 * (1.0 + diff.norm_squared()));
                }
            }
        }
    }

    #[test]
    fn zero_yz_gives_zero_pairing() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let u = admissible(4, &mut rng);
        let zero = vec![0.0; u.layout().yz().len()];
        let eta = eta_of(&u.with_yz(&zero)).unwrap();
        for i in 0..eta.len() {
            assert!(eta[i].second.amax() == 0.0);
        }
    }

    #[test]
    fn pairing_superposes_in_yz() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let u = admissible(4, &mut rng);
        let f = pairing_forms(&u).unwrap();
        let m = u.layout().yz().len();
        let a = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        let direct = |yz: &DVector<f64>, j: usize, i: usize| {
            let eta = eta_of(&u.with_yz(yz.as_slice())).unwrap();
            frob_dot(&eta[i].second, &(&eta[j].first - &eta[i].first))
        };
        for (j, i) in [(0, 1), (3, 7), (8, 2)] {
            let lhs = direct(&(&a + &b), j, i);
            let rhs = direct(&a, j, i) + direct(&b, j, i);
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            assert!((f.pairing(j, i, &a) - direct(&a, j, i)).abs() < 1e-10 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn j_forms_are_quadratic_in_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let u = admissible(4, &mut rng);
        let base = pairing_forms(&u).unwrap();
        let mut doubled = u.clone();
        let mut zeroed = u.clone();
        for p in &mut doubled.p {
            *p *= 2.0;
        }
        for p in &mut zeroed.p {
            *p *= 0.0;
        }
        let two = pairing_forms(&doubled).unwrap();
        let zero_eta = eta_of(&zeroed).unwrap();
        for j in 0..base.big_n {
            for i in 0..base.big_n {
                if i != j {
                    let scale = 1.0 + base.jf[j][i].amax();
                    assert!((&two.jf[j][i] - &base.jf[j][i] * 4.0).amax() < 1e-10 * scale);
                    let diff = &zero_eta[j].first - &zero_eta[i].first;
                    assert_eq!(minor_vector(&diff).amax(), 0.0);
                }
            }
        }
    }
}
