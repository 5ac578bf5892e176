//! Central-difference Jacobians with one Richardson step.

use nalgebra::{DMatrix, DVector};

use crate::error::{OcnError, Result};

#[derive(Clone, Debug)]
pub struct FiniteJacobian {
    /// (4 D_{h/2} − D_h) / 3.
    pub jacobian: DMatrix<f64>,
    /// Max-abs size of the Richardson correction (D_{h/2} − D_h) / 3.
    pub error_estimate: f64,
}

fn check_finite(v: &DVector<f64>, coordinate: usize) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(output) => Err(OcnError::NonFinite { coordinate, output }),
        None => Ok(()),
    }
}

pub fn finite_jacobian<F>(mut f: F, x: &DVector<f64>, h: f64) -> Result<FiniteJacobian>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    if h <= 0.0 {
        return Err(OcnError::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let cols = x.len();
    let mut jac: Option<DMatrix<f64>> = None;
    let mut err = 0.0f64;
    let mut eval = |xp: &DVector<f64>, j: usize| -> Result<DVector<f64>> {
        let v = f(xp)?;
        check_finite(&v, j)?;
        Ok(v)
    };
    for j in 0..cols {
        let mut diffs = [DVector::zeros(0), DVector::zeros(0)];
        for (level, step) in [h, 0.5 * h].into_iter().enumerate() {
            // use the representable spread so the quotient sees the true step
            let mut xp = x.clone();
            xp[j] = x[j] + step;
            let hi = xp[j];
            let fp = eval(&xp, j)?;
            xp[j] = x[j] - step;
            let lo = xp[j];
            let fm = eval(&xp, j)?;
            diffs[level] = (fp - fm) / (hi - lo);
        }
        let correction = (&diffs[1] - &diffs[0]) / 3.0;
        err = err.max(correction.amax());
        let col = &diffs[1] + correction;
        let jm = jac.get_or_insert_with(|| DMatrix::zeros(col.len(), cols));
        jm.set_column(j, &col);
    }
    Ok(FiniteJacobian {
        jacobian: jac.unwrap_or_else(|| DMatrix::zeros(0, 0)),
        error_estimate: err,
    })
}
