//! Jacobians of ζ_i, γ_i and η_i with respect to the chart coordinates.
//!
//! ζ_k factors as Z ∘ w_k where w_k = (κ_k p_k, κ_k s_k, x_k, y_k, z_k) ∈ ℝ^{3n}
//! and Z(f, g, h, x, y, z) = [f α(x); g α(x); h b(x, y); h b(x, z)]. DZ is
//! exact; Dw_k is exact in x and finite-differenced in the remaining rows.

use nalgebra::{DMatrix, DVector};

use super::frames::{alpha, b_row, build_frames, slot};
use super::param::ParamU;
use crate::error::Result;
use crate::linalg::fd::finite_jacobian;
use crate::linalg::rank::{numeric_rank, RankReport};

/// Default step for the chart finite differences.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Position in ℝⁿ of component m of x when slot r holds the inserted entry.
fn shifted(m: usize, r: usize) -> usize {
    if m + 1 < r {
        m
    } else {
        m + 1
    }
}

/// Closed-form 4n×3n Jacobian of Z at (f, g, h, x, y, z) for slot r.
pub fn outer_jacobian(
    r: usize,
    f: f64,
    g: f64,
    h: f64,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = x.len() + 1;
    let al = alpha(r, x)?;
    let by = b_row(r, x, y)?;
    let bz = b_row(r, x, z)?;
    let s = r - 1;
    let mut dz = DMatrix::zeros(4 * n, 3 * n);
    for c in 0..n {
        dz[(c, 0)] = al[c];
        dz[(n + c, 1)] = al[c];
        dz[(2 * n + c, 2)] = by[c];
        dz[(3 * n + c, 2)] = bz[c];
    }
    for m in 0..n - 1 {
        let pos = shifted(m, r);
        let cx = 3 + m;
        dz[(pos, cx)] = f;
        dz[(n + pos, cx)] = g;
        dz[(2 * n + s, cx)] = -h * y[m];
        dz[(3 * n + s, cx)] = -h * z[m];
        let cy = 3 + (n - 1) + m;
        dz[(2 * n + pos, cy)] = h;
        dz[(2 * n + s, cy)] = -h * x[m];
        let cz = 3 + 2 * (n - 1) + m;
        dz[(3 * n + pos, cz)] = h;
        dz[(3 * n + s, cz)] = -h * x[m];
    }
    Ok(dz)
}

/// Inner coordinates without x: (κ p_1, κ p_2, κ s, y, z) for each k, stacked.
fn inner_stack(u: &ParamU) -> Result<DVector<f64>> {
    let f = build_frames(u)?;
    let n = u.n;
    let w = 2 * n + 1;
    let mut out = DVector::zeros(u.big_n() * w);
    for k in 0..u.big_n() {
        let kap = u.kappa[k];
        let base = k * w;
        out[base] = kap * f.p[k][0];
        out[base + 1] = kap * f.p[k][1];
        out[base + 2] = kap * f.s[k];
        out.rows_mut(base + 3, n - 1).copy_from(&f.y[k]);
        out.rows_mut(base + 2 + n, n - 1).copy_from(&f.z[k]);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ConfigJacobians {
    pub n: usize,
    /// Dζ_k, each 4n×D.
    pub dzeta: Vec<DMatrix<f64>>,
    /// Dγ_k, each 4n×D.
    pub dgamma: Vec<DMatrix<f64>>,
    /// Richardson error estimate of the finite-differenced inner rows.
    pub error_estimate: f64,
}

impl ConfigJacobians {
    /// Dη_i = Σ_{k<i} Dγ_k + Dζ_i.
    pub fn deta(&self, i: usize) -> DMatrix<f64> {
        let mut acc = self.dzeta[i].clone();
        for g in &self.dgamma[..i] {
            acc += g;
        }
        acc
    }

    /// Dη_i for every i, sharing the prefix sums.
    pub fn deta_all(&self) -> Vec<DMatrix<f64>> {
        let mut prefix = DMatrix::zeros(self.dzeta[0].nrows(), self.dzeta[0].ncols());
        let mut out = Vec::with_capacity(self.dzeta.len());
        for (dz, dg) in self.dzeta.iter().zip(&self.dgamma) {
            out.push(&prefix + dz);
            prefix += dg;
        }
        out
    }
}

pub fn config_jacobians(u: &ParamU, h: f64) -> Result<ConfigJacobians> {
    let n = u.n;
    let l = u.layout();
    let dim = l.len();
    let x0 = u.to_vec();
    let fd = finite_jacobian(|v| inner_stack(&ParamU::from_vec(n, v.as_slice())?), &x0, h)?;
    let frames = build_frames(u)?;
    let w = 2 * n + 1;
    let mut dzeta = Vec::with_capacity(u.big_n());
    let mut dgamma = Vec::with_capacity(u.big_n());
    for k in 0..u.big_n() {
        let kap = u.kappa[k];
        let block = fd.jacobian.rows(k * w, w);
        // rows of Dw_k in the order (f, g, h, x, y, z)
        let mut dw = DMatrix::zeros(3 * n, dim);
        dw.rows_mut(0, 3).copy_from(&block.rows(0, 3));
        for m in 0..n - 1 {
            dw[(3 + m, l.x_index(k, m))] = 1.0;
        }
        dw.rows_mut(2 + n, 2 * (n - 1)).copy_from(&block.rows(3, 2 * (n - 1)));
        let dz = outer_jacobian(
            slot(k, n),
            kap * frames.p[k][0],
            kap * frames.p[k][1],
            kap * frames.s[k],
            &frames.x[k],
            &frames.y[k],
            &frames.z[k],
        )?;
        let dzk = dz * dw;
        let mut dgk = &dzk / kap;
        let gamma = frames.gamma[k].vectorize();
        // Dγ_k = Dζ_k/κ_k − ζ_k ⊗ e_{κ_k}/κ_k², and ζ_k/κ_k² = γ_k/κ_k
        let kc = l.kappa_index(k);
        for row in 0..4 * n {
            dgk[(row, kc)] -= gamma[row] / kap;
        }
        dzeta.push(dzk);
        dgamma.push(dgk);
    }
    Ok(ConfigJacobians { n, dzeta, dgamma, error_estimate: fd.error_estimate })
}

/// ζ_i(U) as a flat 4n vector.
pub fn zeta_vec(u: &ParamU, i: usize) -> Result<DVector<f64>> {
    let f = build_frames(u)?;
    Ok(f.gamma[i].vectorize() * u.kappa[i])
}

/// Numeric rank of the finite-difference Jacobian of each ζ_i.
pub fn rank_zeta(u: &ParamU, h: f64, tol: f64) -> Result<Vec<RankReport>> {
    let n = u.n;
    let x0 = u.to_vec();
    let fd = finite_jacobian(
        |v| {
            let w = ParamU::from_vec(n, v.as_slice())?;
            let f = build_frames(&w)?;
            let mut out = DVector::zeros(4 * n * w.big_n());
            for (k, g) in f.gamma.iter().enumerate() {
                out.rows_mut(4 * n * k, 4 * n).copy_from(&(g.vectorize() * w.kappa[k]));
            }
            Ok(out)
        },
        &x0,
        h,
    )?;
    (0..u.big_n())
        .map(|k| numeric_rank(&fd.jacobian.rows(4 * n * k, 4 * n).into_owned(), tol))
        .collect()
}
