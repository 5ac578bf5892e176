//! Sampling one candidate (U₀, σ) and rebuilding it from its record.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embed::margins::{check_emb2, cx0_margins, q_from_emb1, select_epsilon};
use crate::embed::system::solve_embedding_compatible;
use crate::error::{OcnError, Result};
use crate::linalg::phase::PhasePoint;
use crate::model::cutoff::certified_c0;
use crate::model::energy::{GraphMap, SigmaModel};
use crate::model::interp::LocalInterpolant;
use crate::tau::config::build_tau;
use crate::tau::dims::dims;
use crate::tau::frames::{check_set_v, SetVReport};
use crate::tau::param::ParamU;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    /// Starting ε for the halving search.
    pub eps0: f64,
    /// Candidates whose ε falls below this are rejected.
    pub min_epsilon: f64,
    /// Fraction of the convexity budget spent on H̃.
    pub budget_share: f64,
    /// Entry scale of the random Hessians of the local interpolant.
    pub interp_scale: f64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { eps0: 1e-3, min_epsilon: 1e-6, budget_share: 0.5, interp_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    /// "SOLVED" or "SKIPPED".
    pub status: String,
    pub reason: Option<String>,
    pub rank: Option<usize>,
    pub rows: Option<usize>,
    pub residual: Option<f64>,
    pub emb2_min: Option<f64>,
    pub cx0_min: Option<f64>,
}

/// Everything needed to rebuild σ from U₀.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    /// "polyconvex" or "local-interpolant".
    pub kind: String,
    pub embedding: EmbeddingRecord,
    pub epsilon: Option<f64>,
    pub c: Option<Vec<f64>>,
    pub d: Option<Vec<Vec<f64>>>,
    pub mu: Option<f64>,
    pub delta_dom: Option<f64>,
    /// H̃_j (polyconvex) or H_i (interpolant), row-major rows.
    pub forms: Vec<Vec<Vec<f64>>>,
    /// H⁰_j = D²F(η_j¹) (polyconvex only; equals `forms` for the interpolant).
    pub h0: Vec<Vec<Vec<f64>>>,
    pub r0: f64,
    pub cutoff_radius: Option<f64>,
    pub c0: Option<f64>,
    pub budget_used: Option<f64>,
    pub budget_allowed: Option<f64>,
    pub working_radius: f64,
}

#[derive(Clone, Debug)]
pub enum Graph {
    Polyconvex(SigmaModel),
    Interpolant(LocalInterpolant),
}

impl Graph {
    pub fn map(&self) -> &dyn GraphMap {
        match self {
            Graph::Polyconvex(m) => m,
            Graph::Interpolant(m) => m,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub u0: ParamU,
    pub graph: Graph,
    pub set_v: SetVReport,
    pub record: ModelRecord,
}

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|x| x.len() != c) {
        return Err(OcnError::Shape("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn random_symmetric<R: Rng>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
    (&a + a.transpose()) * std::f64::consts::FRAC_1_SQRT_2
}

/// A failed candidate: the predicate that rejected it and the error.
#[derive(Clone, Debug)]
pub struct Rejection {
    pub predicate: &'static str,
    pub error: OcnError,
}

fn reject(predicate: &'static str) -> impl FnOnce(OcnError) -> Rejection {
    move |error| Rejection { predicate, error }
}

pub fn sample_candidate<R: Rng>(n: usize, rng: &mut R, cfg: &BuildConfig) -> std::result::Result<Candidate, Rejection> {
    let dd = dims(n).map_err(reject("dims"))?;
    let u = ParamU::sample(n, rng).map_err(reject("sample"))?;
    let set_v = check_set_v(&u.p, &u.x);
    if !set_v.ok {
        return Err(Rejection {
            predicate: "set_v",
            error: OcnError::Inadmissible(format!("set-V margins {:?}", set_v.margins)),
        });
    }
    if !dd.underdetermined {
        let hs: Vec<_> = (0..u.big_n()).map(|_| random_symmetric(rng, 2 * n) * cfg.interp_scale).collect();
        let tau = build_tau(&u, &PhasePoint::zeros(n)).map_err(reject("tau"))?;
        let interp = LocalInterpolant::new(&tau.eta, hs).map_err(reject("separation"))?;
        let reason = format!("{}×{} system", dd.embed_equations, dd.embed_unknowns);
        let record = ModelRecord {
            kind: "local-interpolant".into(),
            embedding: EmbeddingRecord {
                status: "SKIPPED".into(),
                reason: Some(reason),
                rank: None,
                rows: None,
                residual: None,
                emb2_min: None,
                cx0_min: None,
            },
            epsilon: None,
            c: None,
            d: None,
            mu: None,
            delta_dom: None,
            forms: interp.hessians.iter().map(rows_of).collect(),
            h0: interp.hessians.iter().map(rows_of).collect(),
            r0: 4.0 * interp.radius,
            cutoff_radius: None,
            c0: None,
            budget_used: None,
            budget_allowed: None,
            working_radius: interp.radius,
        };
        return Ok(Candidate { u0: u, graph: Graph::Interpolant(interp), set_v, record });
    }
    let sol = solve_embedding_compatible(&vec![0.0; u.big_n()], &u).map_err(reject("embedding"))?;
    let u0 = sol.u0.clone();
    let tau = build_tau(&u0, &PhasePoint::zeros(n)).map_err(reject("tau"))?;
    let d: Vec<DVector<f64>> = (0..u0.big_n()).map(|i| sol.data.d_vec(i)).collect();
    let choice = select_epsilon(&tau, &sol.data.c, &d, cfg.eps0).map_err(reject("epsilon"))?;
    if choice.epsilon < cfg.min_epsilon {
        return Err(Rejection {
            predicate: "epsilon",
            error: OcnError::NonPositiveMargin { i: 0, j: 0, margin: choice.epsilon },
        });
    }
    let allowed = choice.epsilon / (2.0 * certified_c0());
    let each = cfg.budget_share * allowed / u0.big_n() as f64;
    let h_tilde: Vec<_> = (0..u0.big_n())
        .map(|_| {
            let s = random_symmetric(rng, 2 * n);
            let k = each / s.norm();
            s * k
        })
        .collect();
    let model = SigmaModel::from_embedding(&tau, &sol.data.c, &d, choice.epsilon, h_tilde).map_err(reject("model"))?;
    let emb2 = check_emb2(&tau, &sol.data.c, &d);
    let cx0 = cx0_margins(&tau, &sol.data.c, &d, &q_from_emb1(&tau, &d, choice.epsilon));
    let record = ModelRecord {
        kind: "polyconvex".into(),
        embedding: EmbeddingRecord {
            status: "SOLVED".into(),
            reason: None,
            rank: Some(sol.data.rank.rank),
            rows: Some(dd.embed_equations),
            residual: Some(sol.data.residual),
            emb2_min: Some(emb2.min),
            cx0_min: Some(cx0.min),
        },
        epsilon: Some(choice.epsilon),
        c: Some(sol.data.c.clone()),
        d: Some(sol.data.d.clone()),
        mu: Some(model.base.g.mu),
        delta_dom: Some(model.base.g.delta_dom),
        forms: model.pert.h_tilde.iter().map(rows_of).collect(),
        h0: model.base_hessians().iter().map(rows_of).collect(),
        r0: model.pert.r0,
        cutoff_radius: Some(model.pert.radius),
        c0: Some(model.pert.c0),
        budget_used: Some(model.pert.used),
        budget_allowed: Some(model.pert.allowed),
        working_radius: model.radius,
    };
    Ok(Candidate { u0, graph: Graph::Polyconvex(model), set_v, record })
}

/// Rebuild the candidate stored in a certificate.
pub fn rebuild(n: usize, u0: &[f64], record: &ModelRecord) -> Result<Candidate> {
    let u0 = ParamU::from_vec(n, u0)?;
    let set_v = check_set_v(&u0.p, &u0.x);
    let tau = build_tau(&u0, &PhasePoint::zeros(n))?;
    let forms = record.forms.iter().map(|f| from_rows(f)).collect::<Result<Vec<_>>>()?;
    let graph = match record.kind.as_str() {
        "polyconvex" => {
            let missing = || OcnError::Config("polyconvex record lacks c, d or epsilon".into());
            let c = record.c.clone().ok_or_else(missing)?;
            let d: Vec<_> = record.d.as_ref().ok_or_else(missing)?.iter().map(|v| DVector::from_column_slice(v)).collect();
            let eps = record.epsilon.ok_or_else(missing)?;
            Graph::Polyconvex(SigmaModel::from_embedding(&tau, &c, &d, eps, forms)?)
        }
        "local-interpolant" => Graph::Interpolant(LocalInterpolant::new(&tau.eta, forms)?),
        other => return Err(OcnError::Config(format!("unknown model kind {other:?}"))),
    };
    Ok(Candidate { u0, graph, set_v, record: record.clone() })
}
