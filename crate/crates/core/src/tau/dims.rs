use serde::{Deserialize, Serialize};

use crate::error::{OcnError, Result};

/// Dimension bookkeeping for a given n with N = 2n + 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimSummary {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub d: usize,
    /// Dimension of the parameter chart, 3nN − 2n² − n.
    #[serde(rename = "D")]
    pub dim_u: usize,
    pub embed_equations: usize,
    /// Unknowns of the inequality system in (c_i, d_i, Y, Z): N(1 + d) + 2(N−n−1)(n−1).
    pub embed_unknowns: usize,
    /// Unknowns of the linear solve with c fixed, (d_i, Y, Z): Nd + 2(N−n−1)(n−1).
    pub solve_unknowns: usize,
    pub underdetermined: bool,
}

pub fn dims(n: usize) -> Result<DimSummary> {
    if n < 2 {
        return Err(OcnError::InvalidDimension(n));
    }
    let big_n = 2 * n + 1;
    let d = n * (n - 1) / 2;
    let dim_u = 3 * n * big_n - 2 * n * n - n;
    let embed_equations = big_n * (big_n - 1);
    let yz = 2 * (big_n - n - 1) * (n - 1);
    let embed_unknowns = big_n * (1 + d) + yz;
    let solve_unknowns = big_n * d + yz;
    Ok(DimSummary {
        n,
        big_n,
        d,
        dim_u,
        embed_equations,
        embed_unknowns,
        solve_unknowns,
        underdetermined: solve_unknowns > embed_equations,
    })
}
