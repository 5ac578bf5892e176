//! The minor map J: ℝ^{2×n} → ℝ^d, d = n(n−1)/2.
//!
//! Components are ordered lexicographically by column pair (j, q), j < q, with
//! J_{(j,q)}(A) = a_{1j} a_{2q} − a_{1q} a_{2j}. Since J is quadratic, its
//! Hessians are constant and J(A) − J(B) − DJ(B)(A − B) = J(A − B).

use nalgebra::{DMatrix, DVector};

use super::phase::SpaceMatrix;

pub fn minor_count(n: usize) -> usize {
    n * (n - 1) / 2
}

pub fn minor_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(minor_count(n));
    for j in 0..n {
        for q in j + 1..n {
            pairs.push((j, q));
        }
    }
    pairs
}

pub fn minor_vector(a: &SpaceMatrix) -> DVector<f64> {
    let pairs = minor_pairs(a.ncols());
    DVector::from_iterator(
        pairs.len(),
        pairs
            .iter()
            .map(|&(j, q)| a[(0, j)] * a[(1, q)] - a[(0, q)] * a[(1, j)]),
    )
}

/// DJ(A) as a d × 2n matrix acting on row-major flattened directions.
pub fn minor_jacobian(a: &SpaceMatrix) -> DMatrix<f64> {
    let n = a.ncols();
    let pairs = minor_pairs(n);
    let mut jac = DMatrix::zeros(pairs.len(), 2 * n);
    for (k, &(j, q)) in pairs.iter().enumerate() {
        jac[(k, j)] += a[(1, q)];
        jac[(k, n + q)] += a[(0, j)];
        jac[(k, q)] -= a[(1, j)];
        jac[(k, n + j)] -= a[(0, q)];
    }
    jac
}

/// The constant Hessians D²J_k, each 2n × 2n.
pub fn minor_hessians(n: usize) -> Vec<DMatrix<f64>> {
    minor_pairs(n)
        .into_iter()
        .map(|(j, q)| {
            let mut h = DMatrix::zeros(2 * n, 2 * n);
            h[(j, n + q)] = 1.0;
            h[(n + q, j)] = 1.0;
            h[(q, n + j)] = -1.0;
            h[(n + j, q)] = -1.0;
            h
        })
        .collect()
}

/// Σ_k w_k ∇J_k(A) as a 2×n matrix.
pub fn contract_jacobian(a: &SpaceMatrix, weights: &DVector<f64>) -> SpaceMatrix {
    let n = a.ncols();
    let g = minor_jacobian(a).transpose() * weights;
    DMatrix::from_row_slice(2, n, g.as_slice())
}

/// Σ_k w_k D²J_k.
pub fn contract_hessian(n: usize, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for ((j, q), w) in minor_pairs(n).into_iter().zip(weights.iter()) {
        h[(j, n + q)] += w;
        h[(n + q, j)] += w;
        h[(q, n + j)] -= w;
        h[(n + j, q)] -= w;
    }
    h
}
