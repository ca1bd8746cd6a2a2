//! Comparison sliding mode controller.
//!
//! Reconstructed MRP form: `s_b = ω_e − λσ_e` and
//! `u = ω_e^×Jω_e + λ·J·M(σ_e)ω_e − k·J·sat(s_b/ε)`, which gives
//! `ṡ_b = −k·sat(s_b/ε) + J⁻¹d`. This is a reconstruction of the classic MRP
//! sliding law: a negative `λ` gives a stable surface.

use crate::attitude_math::{mrp_kinematics_matrix, Vec3};
use crate::dynamics::{BodyErrorState, InertiaMatrix};
use crate::ufsmc::{ControlDiagnostics, ControlError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcParams {
    pub k: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

impl SmcParams {
    pub fn new(k: f64, lambda: f64, epsilon: f64) -> Result<Self, ControlError> {
        let p = Self { k, lambda, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(ControlError::InvalidParameter(format!(
                "k = {} must be positive",
                self.k
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(ControlError::InvalidParameter(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !(self.lambda < 0.0 && self.lambda.is_finite()) {
            return Err(ControlError::InvalidParameter(format!(
                "lambda = {} must be negative for a stable surface",
                self.lambda
            )));
        }
        Ok(())
    }
}

impl Default for SmcParams {
    fn default() -> Self {
        Self {
            k: 1.5,
            lambda: -0.5,
            epsilon: 0.5,
        }
    }
}

/// Returns the torque and diagnostics. Only `s`, `u_eq` and `u_n` are
/// populated; the shaping quantities of the unwinding-free law stay zero.
pub fn smc_control(
    state: &BodyErrorState,
    params: &SmcParams,
    inertia: &InertiaMatrix,
) -> Result<(Vec3, ControlDiagnostics), ControlError> {
    let j = inertia.matrix();
    let w = &state.omega_e;
    let sigma = state.sigma_e.vector();
    let s = w - sigma * params.lambda;
    let sigma_dot = mrp_kinematics_matrix(&state.sigma_e) * w;

    let u_eq = w.cross(&(j * w)) + j * sigma_dot * params.lambda;
    let sat = (s / params.epsilon).map(|c| c.clamp(-1.0, 1.0));
    let u_n = -(j * sat) * params.k;
    let u = u_eq + u_n;
    if !u.iter().all(|c| c.is_finite()) {
        return Err(ControlError::NonFiniteControl([u.x, u.y, u.z]));
    }
    Ok((
        u,
        ControlDiagnostics {
            s,
            u_eq,
            u_n,
            ..ControlDiagnostics::default()
        },
    ))
}
