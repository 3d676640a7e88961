//! Exact gradients of the sampled MMD² estimator and a finite-difference verifier.
//!
//! The computation graph is static: parameters → elements (or Gram-Schmidt) →
//! U → Q_s = U_cᴴ W U_c → y = Q_s z → ∏y → estimator sums. The estimator
//! returns ∂L/∂U in one extra sweep over the batches; the reverse passes in
//! [`reverse`] carry it back to the parameters.

mod reverse;

use crate::circuits::mesh::{mesh_program, run_program};
use crate::circuits::qr::{gram_schmidt, params_to_matrix};
use crate::circuits::{CircuitSpec, MeshKind};
use crate::error::{Error, Result};
use crate::mmd::estimator::{estimate, Problem};
use crate::mmd::{mmd_hat_figure1, EstimatorBatches};
use crate::numeric::ComplexMatrix;

/// ∂L/∂θ, one entry per circuit parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientVector {
    pub values: Vec<f64>,
}

impl GradientVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

/// Sampled loss and its exact gradient on frozen batches.
pub fn mmd_gradient(spec: &CircuitSpec, batches: &EstimatorBatches) -> Result<(f64, GradientVector)> {
    spec.validate()?;
    let m = spec.modes;
    let loss_and_ubar = |u: &ComplexMatrix| -> Result<(f64, ComplexMatrix)> {
        let problem = Problem::new(u, &spec.input_state, &batches.data, &batches.masks, &batches.signs)?;
        let (loss, ubar) = estimate(&problem, true);
        Ok((loss, ubar.expect("adjoint requested")))
    };
    let (loss, values) = match spec.mesh {
        MeshKind::QrHaar => {
            let (q, record) = gram_schmidt(&params_to_matrix(&spec.params, m))?;
            let (loss, qbar) = loss_and_ubar(&q)?;
            (loss, reverse::gram_schmidt_backward(&q, &record, &qbar))
        }
        kind => {
            let program = mesh_program(kind, m)?;
            let mut u = ComplexMatrix::identity(m);
            run_program(&program, &spec.params, &mut u);
            let (loss, ubar) = loss_and_ubar(&u)?;
            (loss, reverse::mesh_backward(&program, &spec.params, &u, &ubar))
        }
    };
    if let Some(index) = values.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    Ok((loss, GradientVector { values }))
}

/// Worst relative deviation between `grad` and central differences of `f` at `x`.
///
/// Each entry is compared as |g − d| / max(|g|, |d|, 10⁻³·maxᵢ|dᵢ|), so entries
/// that are zero up to rounding do not dominate the report.
pub fn finite_difference_error(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    grad: &[f64],
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    if grad.len() != x.len() {
        return Err(Error::Shape(format!("{} gradient entries for {} parameters", grad.len(), x.len())));
    }
    let mut fd = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        fd.push((up - down) / (2.0 * h));
    }
    let floor = 1e-3 * fd.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    Ok(grad
        .iter()
        .zip(&fd)
        .map(|(g, d)| {
            let scale = g.abs().max(d.abs()).max(floor);
            if scale == 0.0 { 0.0 } else { (g - d).abs() / scale }
        })
        .fold(0.0, f64::max))
}

/// Compares [`mmd_gradient`] with central differences of the sampled loss,
/// re-evaluated on the same frozen batches for every probe.
pub fn finite_difference_check(spec: &CircuitSpec, batches: &EstimatorBatches, h: f64) -> Result<f64> {
    let (_, grad) = mmd_gradient(spec, batches)?;
    let loss = |params: &[f64]| {
        let mut probe = spec.clone();
        probe.params = params.to_vec();
        mmd_hat_figure1(&batches.data, &batches.masks, &batches.signs, &probe)
    };
    finite_difference_error(loss, &spec.params, &grad.values, h)
}
