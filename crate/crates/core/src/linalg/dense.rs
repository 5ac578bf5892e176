//! Small dense helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{OcnError, Result};

pub fn solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| OcnError::JacobianSingular(format!("LU solve failed for {}x{}", m.nrows(), m.ncols())))
}

pub fn solve_vec(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| OcnError::JacobianSingular(format!("LU solve failed for {}x{}", m.nrows(), m.ncols())))
}

/// Minimum-norm solution of an underdetermined (or square) system via SVD.
/// Returns the solution and the max-abs residual.
pub fn min_norm_solve(m: &DMatrix<f64>, rhs: &DVector<f64>, rcond: f64) -> Result<(DVector<f64>, f64)> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = svd
        .solve(rhs, rcond * smax)
        .map_err(|e| OcnError::JacobianSingular(e.to_string()))?;
    let residual = (m * &x - rhs).amax();
    Ok((x, residual))
}

/// Dot product in twice the working precision (TwoProduct via fma, TwoSum),
/// rounded once at the end.
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let t = s + p;
        let z = t - s;
        c += (s - (t - z)) + (p - z) + pe;
        s = t;
    }
    s + c
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm.
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Ratio σ_min / σ_max, zero for singular input.
pub fn inverse_condition(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Adjugate through the SVD: for M = U Σ Vᵀ, adj(M) = det(U) det(V) · V adj(Σ) Uᵀ.
/// Well defined (and accurate) for singular M.
pub fn adjugate_svd(m: &DMatrix<f64>) -> DMatrix<f64> {
    let s = m.nrows();
    assert_eq!(s, m.ncols(), "adjugate needs a square matrix");
    if s == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let sigma = &svd.singular_values;
    let mut prefix = vec![1.0; s + 1];
    for k in 0..s {
        prefix[k + 1] = prefix[k] * sigma[k];
    }
    let mut suffix = vec![1.0; s + 1];
    for k in (0..s).rev() {
        suffix[k] = suffix[k + 1] * sigma[k];
    }
    let cof = DVector::from_fn(s, |k, _| prefix[k] * suffix[k + 1]);
    let sign = u.determinant().signum() * vt.determinant().signum();
    let v = vt.transpose();
    let scaled = DMatrix::from_fn(s, s, |i, k| v[(i, k)] * cof[k]);
    scaled * u.transpose() * sign
}

/// Complex eigenvalues, sorted by (re, im).
///
/// Uses faer's Hessenberg QR, which copes with the exactly repeated eigenvalues
/// that stall nalgebra's Schur iteration.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let s = m.nrows();
    if s == 0 || m.ncols() != s {
        return Err(OcnError::Shape(format!("eigenvalues need a square matrix, got {:?}", m.shape())));
    }
    let a = faer::Mat::<f64>::from_fn(s, s, |i, j| m[(i, j)]);
    let ev = a.eigenvalues().map_err(|_| OcnError::NonConvergence { trace: Vec::new() })?;
    let mut ev: Vec<_> = ev.into_iter().map(|z| Complex::new(z.re, z.im)).collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// Diagonal similarity balancing (Parlett–Reinsch, powers of two).
/// Returns (D⁻¹ M D, diag(D)).
pub fn balance(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let s = m.nrows();
    let mut a = m.clone();
    let mut d = DVector::from_element(s, 1.0);
    let radix = 2.0f64;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..s {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..s {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) < 0.95 * total {
                converged = false;
                d[i] *= f;
                for j in 0..s {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    (a, d)
}
