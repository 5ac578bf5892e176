//! Local maps π_i, z_i at a solved ρ, the matrices M_i = Dπ_i⁻¹ Dz_i and their
//! eigenstructure.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::newton::USolution;
use crate::error::{OcnError, Result};
use crate::linalg::dense::{adjugate_svd, balance, eigenvalues};
use crate::linalg::faddeev::{faddeev_leverrier_balanced, CharpolyAdj};
use crate::linalg::poly::Poly;
use crate::tau::config::build_tau;

/// Absolute tolerance for counting eigenvalues at 0 and −1.
pub const MULT_TOL: f64 = 1e-6;
/// Eigenvalues between MULT_TOL and this distance are flagged as near-tolerance.
pub const FLAG_TOL: f64 = 1e-4;
/// Imaginary-part tolerance for a root of Q to count as real.
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LocalMaps {
    pub i: usize,
    pub pi: DVector<f64>,
    pub xi: DVector<f64>,
    pub z: DVector<f64>,
    pub dpi: DMatrix<f64>,
    pub dz: DMatrix<f64>,
}

impl LocalMaps {
    /// M_i = Dπ_i⁻¹ Dz_i.
    pub fn m(&self) -> Result<DMatrix<f64>> {
        self.dpi
            .clone()
            .lu()
            .solve(&self.dz)
            .ok_or_else(|| OcnError::JacobianSingular(format!("D pi_{} is singular", self.i + 1)))
    }

    /// Dξ_i = Dπ_i + Dz_i.
    pub fn dxi(&self) -> DMatrix<f64> {
        &self.dpi + &self.dz
    }
}

/// π_i, z_i and their derivatives in ρ for every i, at the solution `sol`.
pub fn local_maps(sol: &USolution) -> Result<Vec<LocalMaps>> {
    let tau = build_tau(&sol.u, &sol.rho)?;
    let cfg = &sol.jac.config;
    let dim = 4 * sol.u.n;
    let mut prefix = DMatrix::<f64>::zeros(dim, cfg.dgamma[0].ncols());
    let mut out = Vec::with_capacity(tau.big_n());
    for i in 0..tau.big_n() {
        let mut dpi = &prefix * &sol.du;
        for k in 0..dim {
            dpi[(k, k)] += 1.0;
        }
        out.push(LocalMaps {
            i,
            pi: tau.pi[i].vectorize(),
            xi: tau.xi[i].vectorize(),
            z: tau.zeta[i].vectorize(),
            dpi,
            dz: &cfg.dzeta[i] * &sol.du,
        });
        prefix += &cfg.dgamma[i];
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    /// 1-based piece index.
    pub i: usize,
    pub rho_norm: f64,
    /// Eigenvalues of the balanced M_i as (re, im), sorted by real part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub count_zero: usize,
    pub count_minus_one: usize,
    /// Eigenvalues within FLAG_TOL but not MULT_TOL of 0 or −1.
    pub flagged: usize,
    /// Q from deflating the Faddeev–LeVerrier charpoly, descending, monic.
    pub q: Vec<f64>,
    /// Q rebuilt from the eigenvalues outside the 0 and −1 clusters.
    pub q_from_eigenvalues: Vec<f64>,
    pub q_mismatch: f64,
    /// Deflation remainder relative to the charpoly norm, both in y = x/σ.
    pub remainder: f64,
    pub discriminant: f64,
    pub q_at_minus_one: f64,
    /// Real roots of Q below −1, ascending.
    pub e: Vec<f64>,
    pub fl_identity_residual: f64,
    /// Scale σ of the normalized variable y = x/σ.
    pub sigma: f64,
}

impl EigenReport {
    pub fn multiplicities_ok(&self, n: usize) -> bool {
        self.count_zero >= n + 1 && self.count_minus_one >= 2 * n
    }

    pub fn passed(&self, n: usize) -> bool {
        self.multiplicities_ok(n) && self.remainder < 1e-7
    }

    pub fn q_poly(&self) -> Poly {
        Poly::new(self.q.clone())
    }
}

/// Faddeev–LeVerrier of M/σ, σ a power of two at least the spectral radius.
/// Working in y = x/σ keeps the recurrence's traces at unit scale.
#[derive(Clone, Debug)]
pub struct ScaledCharpoly {
    pub sigma: f64,
    pub fl: CharpolyAdj,
}

impl ScaledCharpoly {
    pub fn new(m: &DMatrix<f64>, spectral_radius: f64) -> Result<Self> {
        let sigma = 2f64.powi(spectral_radius.max(1.0).log2().ceil() as i32);
        Ok(Self { sigma, fl: faddeev_leverrier_balanced(&(m / sigma))? })
    }

    /// adj(xI − M) = σ^{s−1} adj((x/σ)I − M/σ).
    pub fn adj_at(&self, x: f64) -> DMatrix<f64> {
        let s = self.fl.adj_coeffs.len();
        self.fl.adj_at(x / self.sigma) * self.sigma.powi(s as i32 - 1)
    }

    /// Deflate by y^{n+1}(y + 1/σ)^{2n}; returns Q in x and the remainder relative to the charpoly in y.
    pub fn deflate(&self, n: usize) -> Result<(Poly, f64)> {
        let deflator = Poly::monomial(n + 1).mul(&Poly::root_power(-1.0 / self.sigma, 2 * n));
        let (qy, rem) = self.fl.charpoly.div_rem(&deflator)?;
        let c: Vec<f64> = qy.coeffs().iter().enumerate().map(|(k, c)| c * self.sigma.powi(k as i32)).collect();
        Ok((Poly::new(c), rem.norm() / self.fl.charpoly.norm()))
    }
}

fn eigenvalues_balanced(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    eigenvalues(&balance(m).0)
}

/// Real monic polynomial with the given roots (conjugate pairs combine exactly).
fn poly_from_complex(roots: &[Complex<f64>]) -> Poly {
    let mut acc = vec![Complex::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); acc.len() + 1];
        for (k, c) in acc.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * r;
        }
        acc = next;
    }
    Poly::new(acc.into_iter().map(|c| c.re).collect())
}

/// Split off the n+1 eigenvalues nearest 0, then the 2n nearest −1.
fn residual_eigenvalues(ev: &[Complex<f64>], n: usize) -> Vec<Complex<f64>> {
    let mut rest = ev.to_vec();
    rest.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let mut rest: Vec<_> = rest.into_iter().skip(n + 1).collect();
    let minus_one = Complex::new(-1.0, 0.0);
    rest.sort_by(|a, b| (a - minus_one).norm().total_cmp(&(b - minus_one).norm()));
    rest.into_iter().skip(2 * n).collect()
}

pub fn eigen_report(n: usize, i: usize, rho_norm: f64, m: &DMatrix<f64>) -> Result<(EigenReport, ScaledCharpoly)> {
    let ev = eigenvalues_balanced(m)?;
    let fl = ScaledCharpoly::new(m, ev.iter().map(|z| z.norm()).fold(0.0, f64::max))?;
    let near = |z: &Complex<f64>, c: f64| (z - Complex::new(c, 0.0)).norm();
    let count_zero = ev.iter().filter(|z| near(z, 0.0) < MULT_TOL).count();
    let count_minus_one = ev.iter().filter(|z| near(z, -1.0) < MULT_TOL).count();
    let flagged = ev
        .iter()
        .filter(|z| {
            let d = near(z, 0.0).min(near(z, -1.0));
            (MULT_TOL..FLAG_TOL).contains(&d)
        })
        .count();
    let (q, remainder) = fl.deflate(n)?;
    let q_eig = poly_from_complex(&residual_eigenvalues(&ev, n));
    let q_mismatch = q
        .coeffs()
        .iter()
        .zip(q_eig.coeffs())
        .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
        .fold(if q.degree() == q_eig.degree() { 0.0 } else { f64::INFINITY }, f64::max);
    let discriminant = if q.degree() >= 1 { q.discriminant()? } else { 1.0 };
    let e = q.real_roots(IMAG_TOL).into_iter().filter(|&x| x < -1.0).collect();
    let report = EigenReport {
        i: i + 1,
        rho_norm,
        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
        count_zero,
        count_minus_one,
        flagged,
        q_at_minus_one: q.eval(-1.0),
        q: q.coeffs().to_vec(),
        q_from_eigenvalues: q_eig.coeffs().to_vec(),
        q_mismatch,
        remainder,
        discriminant,
        e,
        fl_identity_residual: fl.fl.identity_residual,
        sigma: fl.sigma,
    };
    Ok((report, fl))
}

/// Scale-free simplicity margins at ρ = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Need1 {
    pub i: usize,
    pub discriminant: f64,
    /// Smallest distance between two roots of Q over 1 + largest root modulus.
    pub root_separation: f64,
    pub q_at_minus_one: f64,
    /// |Q(−1)| / Σ|c_k|.
    pub q_at_minus_one_rel: f64,
}

impl Need1 {
    pub fn margin(&self) -> f64 {
        self.root_separation.min(self.q_at_minus_one_rel)
    }
}

pub fn need1(report: &EigenReport) -> Need1 {
    let q = report.q_poly();
    let roots = q.roots();
    let scale = 1.0 + roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let mut sep = f64::INFINITY;
    for a in 0..roots.len() {
        for b in a + 1..roots.len() {
            sep = sep.min((roots[a] - roots[b]).norm());
        }
    }
    let csum: f64 = q.coeffs().iter().map(|c| c.abs()).sum();
    Need1 {
        i: report.i,
        discriminant: report.discriminant,
        root_separation: if roots.len() < 2 { 1.0 } else { sep / scale },
        q_at_minus_one: report.q_at_minus_one,
        q_at_minus_one_rel: report.q_at_minus_one.abs() / csum,
    }
}

/// One rank-drop evaluation at a root x of Q below −1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Need2Root {
    pub x: f64,
    /// adj(xI − M) adj(Dπ) z.
    pub vector: Vec<f64>,
    /// |vector| / (‖adj(xI − M)‖ ‖adj Dπ‖ |z|).
    pub margin: f64,
    /// adj(xI − M) Dπ z, the product as displayed in the lemma statement.
    pub literal_vector: Vec<f64>,
    pub literal_margin: f64,
    /// ‖adj(S) S‖ / (‖adj S‖ ‖S‖) at S = xI − M.
    pub singularity_residual: f64,
    /// ‖adj_FL − adj_SVD‖ / ‖adj_SVD‖ for the Faddeev–LeVerrier adjugate coefficients at x.
    pub fl_adj_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Need2 {
    pub i: usize,
    /// "empty" when E_i(0) is empty, else "checked".
    pub status: String,
    pub roots: Vec<Need2Root>,
    /// For n = 2: |(4 + tr M) − root of Q| when E_i(0) is non-empty.
    pub trace_formula_error: Option<f64>,
}

impl Need2 {
    pub fn margin(&self) -> Option<f64> {
        self.roots.iter().map(|r| r.margin).reduce(f64::min)
    }
}

pub fn need2(n: usize, lm: &LocalMaps, m: &DMatrix<f64>, fl: &ScaledCharpoly, report: &EigenReport) -> Result<Need2> {
    if report.e.is_empty() {
        return Ok(Need2 { i: report.i, status: "empty".into(), roots: Vec::new(), trace_formula_error: None });
    }
    if need1(report).root_separation < 1e-8 {
        return Err(OcnError::RepeatedRoot(report.discriminant));
    }
    let s = m.nrows();
    let adj_pi = adjugate_svd(&lm.dpi);
    let mut roots = Vec::new();
    for &x in &report.e {
        let sm = DMatrix::<f64>::identity(s, s) * x - m;
        // the SVD adjugate stays accurate at |x| ≪ ‖M‖, where the polynomial form cancels
        let a = adjugate_svd(&sm);
        let v = &a * (&adj_pi * &lm.z);
        let lit = &a * (&lm.dpi * &lm.z);
        roots.push(Need2Root {
            x,
            margin: v.norm() / (a.norm() * adj_pi.norm() * lm.z.norm()),
            literal_margin: lit.norm() / (a.norm() * lm.dpi.norm() * lm.z.norm()),
            vector: v.iter().copied().collect(),
            literal_vector: lit.iter().copied().collect(),
            singularity_residual: (&a * &sm).norm() / (a.norm() * sm.norm()),
            fl_adj_deviation: (fl.adj_at(x) - &a).norm() / a.norm(),
        });
    }
    let trace_formula_error = (n == 2).then(|| ((4.0 + m.trace()) - report.e[0]).abs());
    Ok(Need2 { i: report.i, status: "checked".into(), roots, trace_formula_error })
}

/// Eigen report for every piece at one solution.
pub fn eigen_all(sol: &USolution) -> Result<Vec<(LocalMaps, DMatrix<f64>, ScaledCharpoly, EigenReport)>> {
    let n = sol.u.n;
    let rho_norm = sol.rho.norm();
    local_maps(sol)?
        .into_iter()
        .map(|lm| {
            let m = lm.m()?;
            let (r, fl) = eigen_report(n, lm.i, rho_norm, &m)?;
            Ok((lm, m, fl, r))
        })
        .collect()
}
