//! Frame vectors α_r, b_r, β_r and the linear solves that enforce
//! Σ p_i⊗a_i = 0 and Σ B_i⊗a_i = 0.

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::param::ParamU;
use crate::error::{OcnError, Result};
use crate::linalg::dense::dot2;
use crate::linalg::phase::PhasePoint;

/// Relative determinant size below which a square solve is treated as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

/// Admissibility margin factor, multiplied by max(1, largest input magnitude).
pub const SETV_TOL: f64 = 1e-10;

/// Slot r_i ∈ {1, …, n} for the 0-based index k (1-based index k + 1).
pub fn slot(k: usize, n: usize) -> usize {
    k % n + 1
}

fn insert(v: &DVector<f64>, r: usize, value: f64) -> DVector<f64> {
    let n = v.len() + 1;
    DVector::from_fn(n, |k, _| match k.cmp(&(r - 1)) {
        std::cmp::Ordering::Less => v[k],
        std::cmp::Ordering::Equal => value,
        std::cmp::Ordering::Greater => v[k - 1],
    })
}

fn check_slot(r: usize, n: usize) -> Result<()> {
    if r == 0 || r > n {
        return Err(OcnError::IndexOutOfRange { index: r, max: n });
    }
    Ok(())
}

pub fn alpha(r: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
    check_slot(r, x.len() + 1)?;
    Ok(insert(x, r, 1.0))
}

pub fn b_row(r: usize, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    check_slot(r, x.len() + 1)?;
    if y.len() != x.len() {
        return Err(OcnError::Shape(format!(
            "b_r needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(insert(y, r, -dot2(x.as_slice(), y.as_slice())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameVectors {
    pub alpha: DVector<f64>,
    pub b_row: DVector<f64>,
    /// 2×n, rows b_r(x, y) and b_r(x, z).
    pub beta: DMatrix<f64>,
}

pub fn frame_vectors(
    r: usize,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<FrameVectors> {
    let a = alpha(r, x)?;
    let by = b_row(r, x, y)?;
    let bz = b_row(r, x, z)?;
    let mut beta = DMatrix::zeros(2, a.len());
    beta.set_row(0, &by.transpose());
    beta.set_row(1, &bz.transpose());
    Ok(FrameVectors { alpha: a, b_row: by, beta })
}

fn hadamard_bound(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).product()
}

/// Determinant divided by the product of column norms, in [−1, 1].
fn relative_det(m: &DMatrix<f64>) -> (f64, f64) {
    let det = m.determinant();
    let h = hadamard_bound(m);
    (det, if h > 0.0 { det / h } else { 0.0 })
}

fn alpha_matrix(xs: &[DVector<f64>], n: usize) -> Result<DMatrix<f64>> {
    if xs.len() < n {
        return Err(OcnError::Shape(format!("need {n} x-vectors, got {}", xs.len())));
    }
    let mut m = DMatrix::zeros(n, n);
    for (k, x) in xs.iter().take(n).enumerate() {
        if x.len() != n - 1 {
            return Err(OcnError::Shape(format!("x_{} has length {}, expected {}", k + 1, x.len(), n - 1)));
        }
        m.set_column(k, &alpha(slot(k, n), x)?);
    }
    Ok(m)
}

/// Δ = det[α_1(x_1) … α_n(x_n)], with n = len(x_1) + 1.
pub fn delta_det(xs: &[DVector<f64>]) -> Result<f64> {
    let n = xs.first().map(|x| x.len() + 1).ok_or(OcnError::EmptyMatrix)?;
    Ok(alpha_matrix(xs, n)?.determinant())
}

/// p_1, …, p_n from the tail p_{n+1..N} and all x-vectors.
pub fn solve_p(p_tail: &[Vector2<f64>], xs: &[DVector<f64>]) -> Result<Vec<Vector2<f64>>> {
    let n = xs.first().map(|x| x.len() + 1).ok_or(OcnError::EmptyMatrix)?;
    let big_n = xs.len();
    if p_tail.len() + n != big_n {
        return Err(OcnError::Shape(format!(
            "expected {} tail p-vectors, got {}",
            big_n - n,
            p_tail.len()
        )));
    }
    let m = alpha_matrix(xs, n)?;
    let (det, rel) = relative_det(&m);
    if rel.abs() < SINGULAR_REL_TOL {
        return Err(OcnError::SingularConfiguration { what: "Delta", value: det });
    }
    // columns of the right-hand side are the two rows of −Σ_{j>n} p_j a_jᵀ
    let mut rhs = DMatrix::zeros(n, 2);
    for (j, p) in p_tail.iter().enumerate() {
        let k = n + j;
        let a = alpha(slot(k, n), &xs[k])?;
        for c in 0..2 {
            for r in 0..n {
                rhs[(r, c)] -= p[c] * a[r];
            }
        }
    }
    let lu = m.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or(OcnError::SingularConfiguration { what: "Delta", value: det })?;
    Ok((0..n).map(|i| Vector2::new(sol[(i, 0)], sol[(i, 1)])).collect())
}

/// Entries (k, l) ≠ (1, 1) of the n×n matrix b⊗α with (b⊗α)_{kl} = b_k α_l,
/// in row-major order.
fn reduced_outer(b: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let n = a.len();
    DVector::from_fn(n * n - 1, |e, _| {
        let idx = e + 1;
        b[idx / n] * a[idx % n]
    })
}

fn unit(len: usize, m: usize) -> DVector<f64> {
    DVector::from_fn(len, |k, _| if k == m { 1.0 } else { 0.0 })
}

/// Coefficient matrix of the (y_1, …, y_{n+1}) system and its determinant T.
pub fn assemble_t(xs: &[DVector<f64>]) -> Result<(DMatrix<f64>, f64)> {
    let n = xs.first().map(|x| x.len() + 1).ok_or(OcnError::EmptyMatrix)?;
    if xs.len() < n + 1 {
        return Err(OcnError::Shape(format!("need {} x-vectors, got {}", n + 1, xs.len())));
    }
    let s = n * n - 1;
    let mut a = DMatrix::zeros(s, s);
    for (i, x) in xs.iter().take(n + 1).enumerate() {
        let r = slot(i, n);
        let al = alpha(r, x)?;
        for m in 0..n - 1 {
            let col = reduced_outer(&b_row(r, x, &unit(n - 1, m))?, &al);
            a.set_column(i * (n - 1) + m, &col);
        }
    }
    let t = a.determinant();
    Ok((a, t))
}

fn tail_rhs(xs: &[DVector<f64>], tail: &[DVector<f64>], n: usize) -> Result<DVector<f64>> {
    let mut rhs = DVector::zeros(n * n - 1);
    for (j, v) in tail.iter().enumerate() {
        let k = n + 1 + j;
        let r = slot(k, n);
        rhs -= reduced_outer(&b_row(r, &xs[k], v)?, &alpha(r, &xs[k])?);
    }
    Ok(rhs)
}

fn split_solution(v: &DVector<f64>, n: usize) -> Vec<DVector<f64>> {
    v.as_slice()
        .chunks(n - 1)
        .map(DVector::from_column_slice)
        .collect()
}

/// y_1..y_{n+1} and z_1..z_{n+1} from the tails y_{n+2..N}, z_{n+2..N}.
#[allow(clippy::type_complexity)]
pub fn solve_yz(
    xs: &[DVector<f64>],
    y_tail: &[DVector<f64>],
    z_tail: &[DVector<f64>],
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let n = xs.first().map(|x| x.len() + 1).ok_or(OcnError::EmptyMatrix)?;
    let big_n = xs.len();
    if y_tail.len() + n + 1 != big_n || z_tail.len() != y_tail.len() {
        return Err(OcnError::Shape(format!(
            "expected {} tail y/z vectors, got {} and {}",
            big_n - n - 1,
            y_tail.len(),
            z_tail.len()
        )));
    }
    let (a, t) = assemble_t(xs)?;
    let (_, rel) = relative_det(&a);
    if rel.abs() < SINGULAR_REL_TOL {
        return Err(OcnError::SingularConfiguration { what: "T", value: t });
    }
    let lu = a.lu();
    let mut rhs = DMatrix::zeros(n * n - 1, 2);
    rhs.set_column(0, &tail_rhs(xs, y_tail, n)?);
    rhs.set_column(1, &tail_rhs(xs, z_tail, n)?);
    let sol = lu
        .solve(&rhs)
        .ok_or(OcnError::SingularConfiguration { what: "T", value: t })?;
    Ok((
        split_solution(&sol.column(0).into_owned(), n),
        split_solution(&sol.column(1).into_owned(), n),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetVReport {
    pub ok: bool,
    /// Δ and T as determinants relative to their Hadamard bounds, min |p_j|,
    /// and min_i |Δ p_i| (relative), each taken as a minimum absolute value.
    pub margins: [f64; 4],
    pub threshold: f64,
}

pub fn check_set_v(p_tail: &[Vector2<f64>], xs: &[DVector<f64>]) -> SetVReport {
    let scale = p_tail
        .iter()
        .flat_map(|p| p.iter())
        .chain(xs.iter().flat_map(|x| x.iter()))
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let threshold = SETV_TOL * scale;
    let fail = |margins: [f64; 4]| SetVReport { ok: false, margins, threshold };
    let n = match xs.first() {
        Some(x) => x.len() + 1,
        None => return fail([0.0; 4]),
    };
    let delta_rel = match alpha_matrix(xs, n) {
        Ok(m) => relative_det(&m).1.abs(),
        Err(_) => return fail([0.0; 4]),
    };
    let t_rel = match assemble_t(xs) {
        Ok((a, _)) => relative_det(&a).1.abs(),
        Err(_) => 0.0,
    };
    let p_min = p_tail.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    let s_min = match solve_p(p_tail, xs) {
        Ok(ps) => ps.iter().map(|p| delta_rel * p.norm()).fold(f64::INFINITY, f64::min),
        Err(_) => 0.0,
    };
    let margins = [delta_rel, t_rel, p_min, s_min];
    SetVReport {
        ok: margins.iter().all(|&m| m > threshold),
        margins,
        threshold,
    }
}

/// Everything the parametrization produces from U, indexed 0..N.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub n: usize,
    pub p: Vec<Vector2<f64>>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub z: Vec<DVector<f64>>,
    pub a: Vec<DVector<f64>>,
    pub bmat: Vec<DMatrix<f64>>,
    pub s: Vec<f64>,
    pub q: DVector<f64>,
    pub gamma: Vec<PhasePoint>,
}

pub fn q_vector(b: &DVector<f64>) -> DVector<f64> {
    let mut q = DVector::from_element(b.len() + 2, 1.0);
    q.rows_mut(2, b.len()).copy_from(b);
    q
}

pub fn build_frames(u: &ParamU) -> Result<FrameData> {
    let n = u.n;
    let head_p = solve_p(&u.p, &u.x)?;
    let (head_y, head_z) = solve_yz(&u.x, &u.y, &u.z)?;
    let p: Vec<_> = head_p.into_iter().chain(u.p.iter().copied()).collect();
    let y: Vec<_> = head_y.into_iter().chain(u.y.iter().cloned()).collect();
    let z: Vec<_> = head_z.into_iter().chain(u.z.iter().cloned()).collect();
    let q = q_vector(&u.b);
    let big_n = u.big_n();
    let mut a = Vec::with_capacity(big_n);
    let mut bmat = Vec::with_capacity(big_n);
    let mut s = Vec::with_capacity(big_n);
    let mut gamma = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let fv = frame_vectors(slot(k, n), &u.x[k], &y[k], &z[k])?;
        let sk = fv.alpha.dot(&q);
        let first = DMatrix::from_fn(2, n, |r, c| p[k][r] * fv.alpha[c]);
        gamma.push(PhasePoint {
            first,
            second: &fv.beta * sk,
        });
        a.push(fv.alpha);
        bmat.push(fv.beta);
        s.push(sk);
    }
    Ok(FrameData { n, p, x: u.x.clone(), y, z, a, bmat, s, q, gamma })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumResiduals {
    /// Σ p⊗a, Σ B⊗a, Σ s p, Σ s B, each relative to the sum of term norms.
    pub relative: [f64; 4],
    /// max_i |B_i a_i|.
    pub b_a: f64,
}

impl FrameData {
    pub fn big_n(&self) -> usize {
        self.a.len()
    }

    pub fn sum_residuals(&self) -> SumResiduals {
        let n = self.n;
        let mut pa = DMatrix::zeros(2, n);
        let mut pa_scale = 0.0;
        // B⊗a stacked as a 2n×n matrix of the two b-rows tensored with a
        let mut ba = DMatrix::zeros(2 * n, n);
        let mut ba_scale = 0.0;
        let mut sp = Vector2::zeros();
        let mut sp_scale = 0.0;
        let mut sb = DMatrix::zeros(2, n);
        let mut sb_scale = 0.0;
        let mut b_a = 0.0f64;
        for k in 0..self.big_n() {
            let t = &self.gamma[k].first;
            pa += t;
            pa_scale += t.norm();
            let mut outer = DMatrix::zeros(2 * n, n);
            for row in 0..2 {
                for i in 0..n {
                    for j in 0..n {
                        outer[(row * n + i, j)] = self.bmat[k][(row, i)] * self.a[k][j];
                    }
                }
            }
            ba_scale += outer.norm();
            ba += outer;
            sp += self.p[k] * self.s[k];
            sp_scale += (self.p[k] * self.s[k]).norm();
            sb += &self.bmat[k] * self.s[k];
            sb_scale += self.bmat[k].norm() * self.s[k].abs();
            for row in self.bmat[k].row_iter() {
                let b: Vec<f64> = row.iter().copied().collect();
                b_a = b_a.max(dot2(&b, self.a[k].as_slice()).abs());
            }
        }
        let rel = |v: f64, s: f64| if s > 0.0 { v / s } else { v };
        SumResiduals {
            relative: [
                rel(pa.norm(), pa_scale),
                rel(ba.norm(), ba_scale),
                rel(sp.norm(), sp_scale),
                rel(sb.norm(), sb_scale),
            ],
            b_a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rvec<R: Rng>(rng: &mut R, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.random_range(-2.0..2.0))
    }

    fn admissible<R: Rng>(n: usize, rng: &mut R) -> ParamU {
        loop {
            let u = ParamU::sample(n, rng).unwrap();
            if check_set_v(&u.p, &u.x).ok {
                return u;
            }
        }
    }

    #[test]
    fn alpha_inserts_one() {
        let a = alpha(2, &DVector::from_vec(vec![5.0, 7.0])).unwrap();
        assert_eq!(a.as_slice(), &[5.0, 1.0, 7.0]);
    }

    #[test]
    fn b_row_inserts_negative_dot() {
        let b = b_row(1, &DVector::from_vec(vec![1.0, 2.0]), &DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_eq!(b.as_slice(), &[-11.0, 3.0, 4.0]);
    }

    #[test]
    fn slot_out_of_range_is_error() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        assert!(alpha(0, &x).is_err());
        assert!(alpha(4, &x).is_err());
        assert!(frame_vectors(4, &x, &x, &x).is_err());
    }

    #[test]
    fn slot_uses_n_for_multiples() {
        assert_eq!(slot(0, 3), 1);
        assert_eq!(slot(2, 3), 3);
        assert_eq!(slot(3, 3), 1);
        assert_eq!(slot(5, 3), 3);
    }

    #[test]
    fn beta_annihilates_alpha() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..7 {
            for r in 1..=n {
                let (x, y, z) = (rvec(&mut rng, n - 1), rvec(&mut rng, n - 1), rvec(&mut rng, n - 1));
                let fv = frame_vectors(r, &x, &y, &z).unwrap();
                assert!((&fv.beta * &fv.alpha).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn delta_at_origin_is_one() {
        for n in 2..6 {
            let xs = vec![DVector::zeros(n - 1); n];
            assert_eq!(delta_det(&xs).unwrap(), 1.0);
        }
    }

    #[test]
    fn delta_vanishes_for_constructed_dependence() {
        // α_3(x_3) = α_1(x_1) + α_2(x_2) forces x_3 components accordingly
        let x1 = DVector::from_vec(vec![0.5, 2.0]);
        let x2 = DVector::from_vec(vec![-1.5, 0.25]);
        let a1 = alpha(1, &x1).unwrap();
        let a2 = alpha(2, &x2).unwrap();
        let target = (&a1 + &a2) / (a1[2] + a2[2]);
        let x3 = DVector::from_vec(vec![target[0], target[1]]);
        let xs = vec![x1.clone(), x2.clone(), x3.clone()];
        assert!(delta_det(&xs).unwrap().abs() < 1e-12);
        let p_tail = vec![Vector2::new(1.0, 1.0); 4];
        let mut all = xs.clone();
        all.extend((0..4).map(|_| DVector::from_vec(vec![0.3, 0.7])));
        assert!(!check_set_v(&p_tail, &all).ok);
        assert!(matches!(
            solve_p(&p_tail, &all),
            Err(OcnError::SingularConfiguration { what: "Delta", .. })
        ));
    }

    #[test]
    fn delta_matches_cofactor_oracle() {
        fn cofactor_det(m: &DMatrix<f64>) -> f64 {
            let s = m.nrows();
            if s == 1 {
                return m[(0, 0)];
            }
            (0..s)
                .map(|j| {
                    let minor = m.clone().remove_row(0).remove_column(j);
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * m[(0, j)] * cofactor_det(&minor)
                })
                .sum()
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..6 {
            let xs: Vec<_> = (0..n).map(|_| rvec(&mut rng, n - 1)).collect();
            let mut m = DMatrix::zeros(n, n);
            for k in 0..n {
                m.set_column(k, &alpha(k + 1, &xs[k]).unwrap());
            }
            let oracle = cofactor_det(&m);
            let got = delta_det(&xs).unwrap();
            assert!((got - oracle).abs() < 1e-10 * oracle.abs().max(1.0));
        }
    }

    #[test]
    fn zero_tail_gives_zero_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 3;
        let xs: Vec<_> = (0..7).map(|_| rvec(&mut rng, n - 1)).collect();
        let ps = solve_p(&vec![Vector2::zeros(); 4], &xs).unwrap();
        assert!(ps.iter().all(|p| p.norm() == 0.0));
        let zero = vec![DVector::zeros(n - 1); 3];
        let (y, z) = solve_yz(&xs, &zero, &zero).unwrap();
        assert!(y.iter().chain(&z).all(|v| v.amax() == 0.0));
    }

    #[test]
    fn solve_p_is_linear_in_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = admissible(4, &mut rng);
        let base = solve_p(&u.p, &u.x).unwrap();
        let dir: Vec<_> = (0..u.p.len()).map(|_| Vector2::new(rng.random(), rng.random())).collect();
        for delta in [0.1, 1.0, -3.0] {
            let shifted: Vec<_> = u.p.iter().zip(&dir).map(|(p, d)| p + d * delta).collect();
            let unit_shift: Vec<_> = u.p.iter().zip(&dir).map(|(p, d)| p + d).collect();
            let got = solve_p(&shifted, &u.x).unwrap();
            let one = solve_p(&unit_shift, &u.x).unwrap();
            for i in 0..4 {
                let lin = base[i] + (one[i] - base[i]) * delta;
                assert!((got[i] - lin).norm() < 1e-12 * (1.0 + lin.norm()));
            }
        }
    }

    #[test]
    fn t_matrix_is_quadratic_in_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 3;
        let xs: Vec<_> = (0..n + 1).map(|_| rvec(&mut rng, n - 1)).collect();
        let dir: Vec<_> = (0..n + 1).map(|_| rvec(&mut rng, n - 1)).collect();
        let at = |t: f64| {
            let v: Vec<_> = xs.iter().zip(&dir).map(|(x, d)| x + d * t).collect();
            assemble_t(&v).unwrap().0
        };
        let h = 0.5;
        let (m0, m1, m2, m3) = (at(0.0), at(h), at(2.0 * h), at(3.0 * h));
        let second_a = (&m2 - &m1 * 2.0 + &m0) / (h * h);
        let second_b = (&m3 - &m2 * 2.0 + &m1) / (h * h);
        assert!((&second_a - &second_b).amax() < 1e-9);
        let third = (&m3 - &m2 * 3.0 + &m1 * 3.0 - &m0) / (h * h * h);
        assert!(third.amax() < 1e-9);
    }

    #[test]
    fn t_matches_lu_oracle_and_vanishes_at_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..6 {
            let xs: Vec<_> = (0..n + 1).map(|_| rvec(&mut rng, n - 1)).collect();
            let (a, t) = assemble_t(&xs).unwrap();
            let lu = a.clone().full_piv_lu().determinant();
            assert!((t - lu).abs() < 1e-10 * lu.abs().max(1.0));
            let origin = vec![DVector::zeros(n - 1); n + 1];
            let (a0, t0) = assemble_t(&origin).unwrap();
            assert!(a0.iter().all(|v| *v == v.round()));
            // indices 1 and n+1 share slot 1, so their columns coincide at X = 0
            assert_eq!(t0, 0.0);
        }
    }

    #[test]
    fn yz_solution_satisfies_system_and_superposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 2..6 {
            let big_n = 2 * n + 1;
            let xs: Vec<_> = (0..big_n).map(|_| rvec(&mut rng, n - 1)).collect();
            let y1: Vec<_> = (0..n).map(|_| rvec(&mut rng, n - 1)).collect();
            let y2: Vec<_> = (0..n).map(|_| rvec(&mut rng, n - 1)).collect();
            let sum: Vec<_> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
            let (s1, _) = solve_yz(&xs, &y1, &y2).unwrap();
            let (s2, _) = solve_yz(&xs, &y2, &y1).unwrap();
            let (s12, _) = solve_yz(&xs, &sum, &sum).unwrap();
            for k in 0..=n {
                assert!((&s12[k] - &s1[k] - &s2[k]).amax() < 1e-11 * (1.0 + s12[k].amax()));
            }
            let mut total = DMatrix::<f64>::zeros(n, n);
            let mut scale = 0.0;
            for k in 0..big_n {
                let yk = if k <= n { &s1[k] } else { &y1[k - n - 1] };
                let r = slot(k, n);
                let o = b_row(r, &xs[k], yk).unwrap() * alpha(r, &xs[k]).unwrap().transpose();
                scale += o.norm();
                total += o;
            }
            assert!(total.norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn zero_p_fails_set_v_third_margin() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut u = admissible(3, &mut rng);
        u.p[1] = Vector2::zeros();
        let rep = check_set_v(&u.p, &u.x);
        assert!(!rep.ok);
        assert_eq!(rep.margins[2], 0.0);
    }

    #[test]
    fn set_v_holds_for_almost_all_gaussian_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in [2, 3, 4] {
            let trials = 10_000;
            let ok = (0..trials)
                .filter(|_| {
                    let u = ParamU::sample(n, &mut rng).unwrap();
                    check_set_v(&u.p, &u.x).ok
                })
                .count();
            let rate = ok as f64 / trials as f64;
            assert!(rate > 0.99, "n={n}: admissible rate {rate}");
        }
    }

    #[test]
    fn frames_satisfy_all_sum_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=5 {
            for _ in 0..100 {
                let u = admissible(n, &mut rng);
                let f = build_frames(&u).unwrap();
                let res = f.sum_residuals();
                assert!(res.relative.iter().all(|&r| r < 1e-9), "n={n}: {res:?}");
                assert!(res.b_a < 1e-12 * (1.0 + u.max_abs().powi(2)));
                for k in 0..f.big_n() {
                    assert!((f.s[k] - f.a[k].dot(&f.q)).abs() < 1e-14 * (1.0 + f.s[k].abs()));
                    assert!(f.p[k].norm() * f.a[k].norm() > 0.0);
                }
            }
        }
    }

    #[test]
    fn s_p_sum_follows_from_p_a_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u = admissible(4, &mut rng);
        let f = build_frames(&u).unwrap();
        let mut total = DMatrix::<f64>::zeros(2, 4);
        let mut sp = Vector2::zeros();
        let mut scale = 0.0;
        for k in 0..f.big_n() {
            total += f.p[k] * f.a[k].transpose();
            sp += f.p[k] * f.s[k];
            scale += f.p[k].norm() * f.a[k].norm();
        }
        let predicted = &total * &f.q;
        assert!((sp - Vector2::new(predicted[0], predicted[1])).norm() < 1e-13 * scale * f.q.norm());
        assert!(sp.norm() < 1e-12 * scale * f.q.norm());
    }
}
