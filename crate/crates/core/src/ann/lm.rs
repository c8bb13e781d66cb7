use nalgebra::{DMatrix, DVector};

use super::AnnError;

/// Solves the damped normal equations `(JᵀJ + μI)·δ = Jᵀr`.
///
/// With `J = ∂r/∂w` the Gauss-Newton update is `w ← w − δ`.
pub fn lm_step(jacobian: &DMatrix<f64>, residuals: &DVector<f64>, mu: f64) -> Result<DVector<f64>, AnnError> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(AnnError::Numeric(format!("damping must be finite and > 0, got {mu}")));
    }
    if jacobian.nrows() != residuals.len() {
        return Err(AnnError::Numeric(format!(
            "jacobian has {} rows but there are {} residuals",
            jacobian.nrows(),
            residuals.len()
        )));
    }
    if jacobian.iter().chain(residuals.iter()).any(|v| !v.is_finite()) {
        return Err(AnnError::Numeric("non-finite jacobian or residual".into()));
    }
    let n = jacobian.ncols();
    let mut lhs = jacobian.tr_mul(jacobian);
    for i in 0..n {
        lhs[(i, i)] += mu;
    }
    let rhs = jacobian.tr_mul(residuals);
    let chol = lhs
        .cholesky()
        .ok_or_else(|| AnnError::Numeric(format!("damped normal matrix not positive definite at mu = {mu}")))?;
    let delta = chol.solve(&rhs);
    if delta.iter().any(|v| !v.is_finite()) {
        return Err(AnnError::Numeric("non-finite LM step".into()));
    }
    Ok(delta)
}
