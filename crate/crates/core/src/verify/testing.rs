//! Shared fixtures for the verifier's unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::base::{base_checks, BaseOutcome};
use super::build::{sample_candidate, BuildConfig, Candidate, Graph};
use super::thresholds::Thresholds;
use crate::model::energy::SigmaModel;
use crate::model::interp::LocalInterpolant;
use crate::tau::param::ParamU;

pub struct Fixture<M> {
    pub u0: ParamU,
    pub model: M,
}

pub fn candidate(n: usize, seed: u64) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Ok(c) = sample_candidate(n, &mut rng, &BuildConfig::default()) {
            return c;
        }
    }
}

pub fn polyconvex_fixture(n: usize, seed: u64) -> Fixture<SigmaModel> {
    let c = candidate(n, seed);
    match &c.graph {
        Graph::Polyconvex(m) => Fixture { u0: c.u0.clone(), model: m.clone() },
        Graph::Interpolant(_) => panic!("n = {n} has no polyconvex model"),
    }
}

pub fn interpolant_fixture(n: usize, seed: u64) -> Fixture<LocalInterpolant> {
    let c = candidate(n, seed);
    match &c.graph {
        Graph::Interpolant(m) => Fixture { u0: c.u0.clone(), model: m.clone() },
        Graph::Polyconvex(_) => panic!("n = {n} uses the polyconvex model"),
    }
}

/// First candidate from `seed` onward whose checks at ρ = 0 all pass.
pub fn accepted(n: usize, seed: u64) -> (Candidate, BaseOutcome) {
    let t = Thresholds::default();
    (seed..seed + 1000)
        .find_map(|s| {
            let c = candidate(n, s);
            base_checks(&c, &t).ok().map(|b| (c, b))
        })
        .expect("no accepted candidate in 1000 seeds")
}
