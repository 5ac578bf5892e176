//! The linear system (Y, Z)·S_ji + d_i·J_ji = −1 − c_i + c_j, i ≠ j.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::forms::{pairing_forms, PairingForms};
use crate::error::{OcnError, Result};
use crate::linalg::dense::min_norm_solve;
use crate::linalg::rank::{numeric_rank, RankReport, DEFAULT_RANK_TOL};
use crate::tau::dims::dims;
use crate::tau::param::ParamU;

#[derive(Clone, Debug)]
pub struct EmbedSystem {
    /// Columns [d_1, …, d_N, Y, Z].
    pub m: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Row k corresponds to the ordered pair pairs[k] = (j, i), 0-based.
    pub pairs: Vec<(usize, usize)>,
    pub forms: PairingForms,
}

/// Ordered pairs (j, i), i ≠ j, in lexicographic order.
pub fn ordered_pairs(big_n: usize) -> Vec<(usize, usize)> {
    (0..big_n)
        .flat_map(|j| (0..big_n).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect()
}

pub fn assemble_system(u: &ParamU, c: &[f64]) -> Result<EmbedSystem> {
    let big_n = u.big_n();
    if c.len() != big_n {
        return Err(OcnError::Shape(format!("expected {big_n} values of c, got {}", c.len())));
    }
    let dd = dims(u.n)?;
    let d = dd.d;
    let myz = u.layout().yz().len();
    let forms = pairing_forms(u)?;
    let pairs = ordered_pairs(big_n);
    let mut m = DMatrix::zeros(pairs.len(), big_n * d + myz);
    let mut rhs = DVector::zeros(pairs.len());
    for (row, &(j, i)) in pairs.iter().enumerate() {
        m.view_mut((row, i * d), (1, d)).copy_from(&forms.jf[j][i].transpose());
        m.view_mut((row, big_n * d), (1, myz)).copy_from(&forms.s[j][i].transpose());
        rhs[row] = -1.0 - c[i] + c[j];
    }
    Ok(EmbedSystem { m, rhs, pairs, forms })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedData {
    pub c: Vec<f64>,
    pub d: Vec<Vec<f64>>,
    /// Solved (Y, Z), flat, Y then Z.
    pub yz: Vec<f64>,
    /// Max-abs residual of the linear solve.
    pub residual: f64,
    pub rank: RankReport,
}

impl EmbedData {
    pub fn d_vec(&self, i: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.d[i])
    }
}

#[derive(Clone, Debug)]
pub struct EmbedSolution {
    pub data: EmbedData,
    /// The input point with its (Y, Z) block replaced by the solution.
    pub u0: ParamU,
}

/// Orthonormal basis of the left null space of M (vectors λ with λᵀM = 0).
pub fn left_null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    // pad with zero columns so the thin SVD of Mᵀ returns a full row basis
    let padded = if m.nrows() > m.ncols() {
        let mut p = DMatrix::zeros(m.nrows(), m.nrows());
        p.columns_mut(0, m.ncols()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.transpose().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.max();
    (0..sv.len())
        .filter(|&k| sv[k] <= tol * smax)
        .map(|k| vt.row(k).transpose())
        .collect()
}

/// The c closest to `c0` for which the right-hand side lies in the range of M:
/// λ·(−1 − c_i + c_j) = 0 for every left null vector λ.
pub fn compatible_c(sys: &EmbedSystem, c0: &[f64]) -> Result<Vec<f64>> {
    let nulls = left_null_space(&sys.m, DEFAULT_RANK_TOL);
    let big_n = c0.len();
    if nulls.is_empty() {
        return Ok(c0.to_vec());
    }
    let c0v = DVector::from_column_slice(c0);
    let mut a = DMatrix::zeros(nulls.len(), big_n);
    let mut b = DVector::zeros(nulls.len());
    for (k, lam) in nulls.iter().enumerate() {
        for (row, &(j, i)) in sys.pairs.iter().enumerate() {
            a[(k, j)] += lam[row];
            a[(k, i)] -= lam[row];
        }
        b[k] = lam.sum();
    }
    let rhs = &b - &a * &c0v;
    let (delta, residual) = min_norm_solve(&a, &rhs, DEFAULT_RANK_TOL)?;
    if residual > 1e-9 * (1.0 + b.amax()) {
        return Err(OcnError::RankDeficient { observed: sys.m.nrows() - nulls.len(), expected: sys.m.nrows() });
    }
    Ok((c0v + delta).iter().copied().collect())
}

/// Minimum-norm solve of the embedding system. Only n ≥ 4 is accepted.
///
/// A rank-deficient system is accepted when the right-hand side is consistent
/// (residual below 1e−9); the rank report records the deficiency.
pub fn solve_embedding(c: &[f64], u: &ParamU) -> Result<EmbedSolution> {
    let dd = dims(u.n)?;
    if !dd.underdetermined {
        return Err(OcnError::InfeasibleShape {
            n: u.n,
            equations: dd.embed_equations,
            unknowns: dd.embed_unknowns,
        });
    }
    let sys = assemble_system(u, c)?;
    let rank = numeric_rank(&sys.m, DEFAULT_RANK_TOL)?;
    let (sol, residual) = min_norm_solve(&sys.m, &sys.rhs, DEFAULT_RANK_TOL)?;
    if rank.rank < sys.m.nrows() && residual > 1e-9 {
        return Err(OcnError::RankDeficient { observed: rank.rank, expected: sys.m.nrows() });
    }
    let big_n = u.big_n();
    let d = dd.d;
    let dvecs = (0..big_n).map(|i| sol.as_slice()[i * d..(i + 1) * d].to_vec()).collect();
    let yz = sol.as_slice()[big_n * d..].to_vec();
    let u0 = u.with_yz(&yz);
    Ok(EmbedSolution {
        data: EmbedData { c: c.to_vec(), d: dvecs, yz, residual, rank },
        u0,
    })
}

/// Move `c0` to the nearest compatible c, then solve.
pub fn solve_embedding_compatible(c0: &[f64], u: &ParamU) -> Result<EmbedSolution> {
    let dd = dims(u.n)?;
    if !dd.underdetermined {
        return Err(OcnError::InfeasibleShape {
            n: u.n,
            equations: dd.embed_equations,
            unknowns: dd.embed_unknowns,
        });
    }
    let sys = assemble_system(u, c0)?;
    let c = compatible_c(&sys, c0)?;
    solve_embedding(&c, u)
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
    fn pair_order_is_lexicographic() {
        assert_eq!(ordered_pairs(3), vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
    }

    #[test]
    fn small_n_is_refused_with_system_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let u2 = admissible(2, &mut rng);
        let err = solve_embedding(&[0.0; 5], &u2).unwrap_err();
        assert_eq!(err, OcnError::InfeasibleShape { n: 2, equations: 20, unknowns: 14 });
        assert!(err.to_string().contains("20x14 system"));
        let u3 = admissible(3, &mut rng);
        let err = solve_embedding(&[0.0; 7], &u3).unwrap_err();
        assert!(err.to_string().contains("42x40 system"));
    }

    #[test]
    fn n4_system_is_72_by_78_with_two_left_null_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..5 {
            let u = admissible(4, &mut rng);
            let sys = assemble_system(&u, &[0.0; 9]).unwrap();
            assert_eq!(sys.m.shape(), (72, 78));
            assert!(sys.rhs.iter().all(|&v| v == -1.0));
            let rank = numeric_rank(&sys.m, DEFAULT_RANK_TOL).unwrap();
            assert_eq!(rank.rank, 70);
            assert!(rank.gap > 1e6);
            let nulls = left_null_space(&sys.m, DEFAULT_RANK_TOL);
            assert_eq!(nulls.len(), 2);
            for lam in &nulls {
                assert!((sys.m.transpose() * lam).amax() < 1e-10 * sys.m.amax());
                // supported on the rows (j, 1) and (j, N)
                for (row, &(_, i)) in sys.pairs.iter().enumerate() {
                    if i != 0 && i != 8 {
                        assert!(lam[row].abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn equal_c_is_inconsistent_but_compatible_c_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let u = admissible(4, &mut rng);
        assert!(matches!(
            solve_embedding(&[0.0; 9], &u),
            Err(OcnError::RankDeficient { observed: 70, expected: 72 })
        ));
        let sol = solve_embedding_compatible(&[0.0; 9], &u).unwrap();
        assert!(sol.data.residual < 1e-9);
        assert_eq!(sol.data.rank.rank, 70);
    }

    #[test]
    fn solution_reproduces_right_hand_side_for_random_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let u = admissible(4, &mut rng);
        let c0: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sol = solve_embedding_compatible(&c0, &u).unwrap();
        let c = &sol.data.c;
        let sys = assemble_system(&sol.u0, c).unwrap();
        let mut x = Vec::new();
        for d in &sol.data.d {
            x.extend_from_slice(d);
        }
        x.extend_from_slice(&sol.data.yz);
        let r = &sys.m * DVector::from_vec(x) - &sys.rhs;
        assert!(r.amax() < 1e-9);
    }
}
