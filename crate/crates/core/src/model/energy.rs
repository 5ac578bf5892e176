//! The base energy F₀(A) = ε/2 |A|² + G(A, J(A)) and its perturbation
//! F = F₀ + Σ_j V_{H̃_j, r}(· − η_j¹).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::convex_g::{build_g_default, pieces_from_embedding, ConvexG};
use super::cutoff::{certified_c0, cutoff_v};
use crate::error::{OcnError, Result};
use crate::linalg::minors::{contract_hessian, minor_jacobian, minor_vector};
use crate::linalg::phase::{flatten_rows, unflatten_rows, PhasePoint, SpaceMatrix};
use crate::tau::config::TauConfig;

/// A map σ = DF restricted to neighbourhoods of N base points.
///
/// `i` names the base point whose neighbourhood the evaluation belongs to;
/// implementations refuse points outside that neighbourhood.
pub trait GraphMap: Send + Sync {
    fn n(&self) -> usize;
    fn centers(&self) -> &[SpaceMatrix];
    /// Radius around each base point inside which evaluations are exact.
    fn working_radius(&self) -> f64;
    fn gradient(&self, i: usize, a: &SpaceMatrix) -> Result<SpaceMatrix>;
    /// D²F(A) on row-major flattened directions.
    fn hessian(&self, i: usize, a: &SpaceMatrix) -> Result<DMatrix<f64>>;

    /// Φ(ξ) = DF(A) − B.
    fn phi(&self, i: usize, xi: &PhasePoint) -> Result<SpaceMatrix> {
        Ok(self.gradient(i, &xi.first)? - &xi.second)
    }

    fn zone_check(&self, i: usize, a: &SpaceMatrix) -> Result<()> {
        let distance = (a - &self.centers()[i]).norm();
        let radius = self.working_radius();
        if distance > radius {
            return Err(OcnError::ZoneViolation { index: i + 1, distance, radius });
        }
        Ok(())
    }
}

/// Full jet of a scalar function of a 2×n matrix, flattened row-major.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseEnergy {
    pub n: usize,
    pub epsilon: f64,
    pub g: ConvexG,
}

/// w(A) = (A, J(A)).
pub fn lift(a: &SpaceMatrix) -> DVector<f64> {
    let x = flatten_rows(a);
    let j = minor_vector(a);
    DVector::from_iterator(x.len() + j.len(), x.iter().chain(j.iter()).copied())
}

impl BaseEnergy {
    pub fn new(n: usize, epsilon: f64, g: ConvexG) -> Result<Self> {
        let dim = 2 * n + n * (n - 1) / 2;
        if g.dim() != dim {
            return Err(OcnError::Shape(format!("G acts on dimension {}, expected {dim}", g.dim())));
        }
        if !(epsilon > 0.0) {
            return Err(OcnError::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { n, epsilon, g })
    }

    pub fn f0(&self, a: &SpaceMatrix) -> f64 {
        0.5 * self.epsilon * a.norm_squared() + self.g.value(&lift(a))
    }

    pub fn jet0(&self, a: &SpaceMatrix) -> Jet {
        let m = 2 * self.n;
        let x = flatten_rows(a);
        let gj = self.g.jet(&lift(a));
        let dj = minor_jacobian(a);
        let ga = gj.grad.rows(0, m);
        let gjv = gj.grad.rows(m, gj.grad.len() - m).into_owned();
        let grad = &x * self.epsilon + ga + dj.transpose() * &gjv;
        let mut hess = contract_hessian(self.n, &gjv);
        for k in 0..m {
            hess[(k, k)] += self.epsilon;
        }
        if gj.zone.is_none() {
            // Dwᵀ ∇²G Dw with Dw = [I; DJ]
            let mut dw = DMatrix::zeros(gj.hess.nrows(), m);
            dw.view_mut((0, 0), (m, m)).fill_with_identity();
            dw.view_mut((m, 0), (dj.nrows(), m)).copy_from(&dj);
            hess += dw.transpose() * &gj.hess * dw;
        }
        Jet { value: 0.5 * self.epsilon * x.norm_squared() + gj.value, grad, hess }
    }

    pub fn df0(&self, a: &SpaceMatrix) -> SpaceMatrix {
        unflatten_rows(self.jet0(a).grad.as_slice(), self.n)
    }

    pub fn d2f0(&self, a: &SpaceMatrix) -> DMatrix<f64> {
        self.jet0(a).hess
    }

    /// Piece whose exact-affine zone contains w(A).
    pub fn zone_of(&self, a: &SpaceMatrix) -> Option<usize> {
        self.g.zone_of(&lift(a))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Perturbation {
    pub h_tilde: Vec<DMatrix<f64>>,
    /// min_{i≠j} |η_i¹ − η_j¹|.
    pub r0: f64,
    /// Cutoff radius; r0/2 keeps the supports pairwise disjoint.
    pub radius: f64,
    pub c0: f64,
    /// Σ_j |H̃_j|_F.
    pub used: f64,
    /// ε/(2C₀).
    pub allowed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SigmaModel {
    pub base: BaseEnergy,
    pub centers: Vec<SpaceMatrix>,
    pub pert: Perturbation,
    /// Exactness radius in A around each centre (see `GraphMap`).
    pub radius: f64,
}

pub fn min_separation(centers: &[SpaceMatrix]) -> f64 {
    let mut r0 = f64::INFINITY;
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            r0 = r0.min((&centers[i] - &centers[j]).norm());
        }
    }
    r0
}

fn symmetric(h: &DMatrix<f64>, m: usize) -> Result<()> {
    if h.shape() != (m, m) {
        return Err(OcnError::Shape(format!("expected a {m}x{m} form, got {:?}", h.shape())));
    }
    if (h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
        return Err(OcnError::Shape("form is not symmetric".into()));
    }
    Ok(())
}

/// Radius in A around η_i¹ on which piece i leads every other piece by at
/// least half its margin. With h = A − η_i¹ and Δ = g_i − g_k = (Δ_A, Δ_J),
/// ℓ_i − ℓ_k at w(A) is m_ki + (Δ_A + DJᵀΔ_J)·h + Δ_J·J(h), and |J(h)| ≤ |h|²/2.
pub fn exact_radius(g: &ConvexG, i: usize, center: &SpaceMatrix) -> f64 {
    let m = 2 * center.ncols();
    let dj = minor_jacobian(center);
    let mut r = f64::INFINITY;
    for k in 0..g.pieces.len() {
        if k == i {
            continue;
        }
        let delta = &g.pieces[i].grad - &g.pieces[k].grad;
        let da = delta.rows(0, m);
        let dj_part = delta.rows(m, delta.len() - m).into_owned();
        let slope = (da + dj.transpose() * &dj_part).norm();
        let quad = 0.5 * dj_part.norm();
        let target = 0.5 * g.margin[k][i];
        // largest r with slope·r + quad·r² ≤ target
        let rk = if quad == 0.0 {
            if slope == 0.0 {
                f64::INFINITY
            } else {
                target / slope
            }
        } else {
            2.0 * target / (slope + (slope * slope + 4.0 * quad * target).sqrt())
        };
        r = r.min(rk);
    }
    r
}

/// F with H̃_j given directly.
pub fn build_f_tilde(base: BaseEnergy, centers: Vec<SpaceMatrix>, h_tilde: Vec<DMatrix<f64>>) -> Result<SigmaModel> {
    let big_n = centers.len();
    let m = 2 * base.n;
    if h_tilde.len() != big_n || base.g.pieces.len() != big_n {
        return Err(OcnError::Shape(format!(
            "{} centres, {} forms, {} pieces",
            big_n,
            h_tilde.len(),
            base.g.pieces.len()
        )));
    }
    for h in &h_tilde {
        symmetric(h, m)?;
    }
    let r0 = min_separation(&centers);
    if !(r0 > 0.0) {
        return Err(OcnError::OverlappingSupports(format!("coincident base points, r0 = {r0:e}")));
    }
    let radius = 0.5 * r0;
    assert!(2.0 * radius <= r0, "cutoff supports must be disjoint");
    let c0 = certified_c0();
    let used: f64 = h_tilde.iter().map(|h| h.norm()).sum();
    let allowed = base.epsilon / (2.0 * c0);
    if used >= allowed {
        return Err(OcnError::ConvexityBudgetExceeded { used, allowed });
    }
    let mut exact = 0.25 * r0;
    for (i, c) in centers.iter().enumerate() {
        exact = exact.min(exact_radius(&base.g, i, c));
    }
    Ok(SigmaModel {
        base,
        centers,
        pert: Perturbation { h_tilde, r0, radius, c0, used, allowed },
        radius: exact,
    })
}

/// F with prescribed Hessians H⁰_j at the base points: H̃_j = H⁰_j − D²F₀(η_j¹).
pub fn build_f(base: BaseEnergy, centers: Vec<SpaceMatrix>, h0: &[DMatrix<f64>]) -> Result<SigmaModel> {
    if h0.len() != centers.len() {
        return Err(OcnError::Shape(format!("{} centres but {} Hessians", centers.len(), h0.len())));
    }
    let mut h_tilde = Vec::with_capacity(h0.len());
    for (h, c) in h0.iter().zip(&centers) {
        symmetric(h, 2 * base.n)?;
        let t = h - base.d2f0(c);
        h_tilde.push((&t + t.transpose()) * 0.5);
    }
    build_f_tilde(base, centers, h_tilde)
}

impl SigmaModel {
    /// Assemble F from solved embedding data at U₀.
    pub fn from_embedding(
        tau: &TauConfig,
        c: &[f64],
        d: &[DVector<f64>],
        epsilon: f64,
        h_tilde: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let g = build_g_default(pieces_from_embedding(tau, c, d, epsilon))?;
        let base = BaseEnergy::new(tau.frames.n, epsilon, g)?;
        build_f_tilde(base, tau.eta_first(), h_tilde)
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn epsilon(&self) -> f64 {
        self.base.epsilon
    }

    /// ΣV_{H̃_j, r}(A − η_j¹) and its derivatives.
    pub fn perturbation_jet(&self, a: &SpaceMatrix) -> Jet {
        let m = 2 * self.base.n;
        let mut jet = Jet { value: 0.0, grad: DVector::zeros(m), hess: DMatrix::zeros(m, m) };
        for (c, h) in self.centers.iter().zip(&self.pert.h_tilde) {
            let x = flatten_rows(&(a - c));
            if x.norm() >= self.pert.radius {
                continue;
            }
            let v = cutoff_v(h, self.pert.radius, &x);
            jet.value += v.value;
            jet.grad += v.grad;
            jet.hess += v.hess;
        }
        jet
    }

    pub fn jet(&self, a: &SpaceMatrix) -> Jet {
        let mut j = self.base.jet0(a);
        let p = self.perturbation_jet(a);
        j.value += p.value;
        j.grad += p.grad;
        j.hess += p.hess;
        j
    }

    pub fn f(&self, a: &SpaceMatrix) -> f64 {
        self.base.f0(a) + self.perturbation_jet(a).value
    }

    pub fn df(&self, a: &SpaceMatrix) -> SpaceMatrix {
        unflatten_rows(self.jet(a).grad.as_slice(), self.base.n)
    }

    pub fn d2f(&self, a: &SpaceMatrix) -> DMatrix<f64> {
        self.jet(a).hess
    }

    /// G̃(A, J) = ε/4 |A|² + ΣV(A) + G(A, J), so that F(A) = ε/4 |A|² + G̃(A, J(A)).
    pub fn lifted_value(&self, a: &SpaceMatrix, j: &DVector<f64>) -> f64 {
        let x = flatten_rows(a);
        let w = DVector::from_iterator(x.len() + j.len(), x.iter().chain(j.iter()).copied());
        0.25 * self.base.epsilon * x.norm_squared() + self.perturbation_jet(a).value + self.base.g.value(&w)
    }

    /// D²F(η_j¹) for every j.
    pub fn base_hessians(&self) -> Vec<DMatrix<f64>> {
        self.centers.iter().map(|c| self.d2f(c)).collect()
    }
}

impl GraphMap for SigmaModel {
    fn n(&self) -> usize {
        self.base.n
    }

    fn centers(&self) -> &[SpaceMatrix] {
        &self.centers
    }

    fn working_radius(&self) -> f64 {
        self.radius
    }

    fn gradient(&self, i: usize, a: &SpaceMatrix) -> Result<SpaceMatrix> {
        self.zone_check(i, a)?;
        Ok(self.df(a))
    }

    fn hessian(&self, i: usize, a: &SpaceMatrix) -> Result<DMatrix<f64>> {
        self.zone_check(i, a)?;
        Ok(self.d2f(a))
    }
}
