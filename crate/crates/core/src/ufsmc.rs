//! Unwinding-free sliding mode control over MRPs.
//!
//! The switching function `s = ω_e − α·ρ(σ_e)·σ_e` uses the hyperbolic-sine
//! shaping `ρ = sinh(g)/(1 + σ_eᵀσ_e)` with `g = arctan(eᵀσ_e) − π/4`. On the
//! surface `s = 0` the rotation angle moves monotonically toward whichever of
//! `0` or `2π` is nearer. The switching gain `γ₁ + γ₂(t)` carries the dynamic
//! term `γ₂ = α|ḣ|/λ_min(J⁻¹)` with `h = ρ‖σ_e‖`, which keeps the angle
//! monotone during the reaching phase as well.

use crate::attitude_math::{
    euler_axis_from_initial, mrp_kinematics_matrix, rotation_angle, AttitudeError, Mrp, Vec3,
};
use crate::dynamics::{BodyErrorState, DisturbanceModel, InertiaMatrix};
use std::f64::consts::FRAC_PI_4;
use thiserror::Error;

/// Margin required between `γ₁` and the declared disturbance bound.
pub const GAMMA1_MARGIN: f64 = 1.2;

/// Below this `‖σ_e‖` the `σ_eᵀσ̇_e/‖σ_e‖` term of `ḣ` is dropped.
pub const H_DOT_NORM_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid controller parameter: {0}")]
    InvalidParameter(String),
    #[error("control torque is not finite: {0:?}")]
    NonFiniteControl([f64; 3]),
    #[error(transparent)]
    Attitude(#[from] AttitudeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UfsmcParams {
    pub alpha: f64,
    pub gamma1: f64,
    /// Boundary-layer half-width on each component of `s`.
    pub epsilon1: f64,
    /// Singularity guard: components of `σ_e` are capped at `1/ε₂`.
    pub epsilon2: f64,
}

impl UfsmcParams {
    /// Validates the gains against the disturbance that the controller has to reject.
    pub fn new(
        alpha: f64,
        gamma1: f64,
        epsilon1: f64,
        epsilon2: f64,
        disturbance: &DisturbanceModel,
    ) -> Result<Self, ControlError> {
        let params = Self {
            alpha,
            gamma1,
            epsilon1,
            epsilon2,
        };
        params.validate(disturbance)?;
        Ok(params)
    }

    pub fn validate(&self, disturbance: &DisturbanceModel) -> Result<(), ControlError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ControlError::InvalidParameter(format!(
                    "{name} = {v} must be positive"
                )))
            }
        };
        positive("alpha", self.alpha)?;
        positive("gamma1", self.gamma1)?;
        positive("epsilon1", self.epsilon1)?;
        positive("epsilon2", self.epsilon2)?;
        let required = GAMMA1_MARGIN * disturbance.bound();
        if self.gamma1 < required {
            return Err(ControlError::InvalidParameter(format!(
                "gamma1 = {} is below {GAMMA1_MARGIN} x disturbance bound ({required})",
                self.gamma1
            )));
        }
        Ok(())
    }
}

impl Default for UfsmcParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            gamma1: 30.0,
            epsilon1: 0.5,
            epsilon2: 1e-4,
        }
    }
}

/// Euler axis frozen from the initial error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UfsmcMemory {
    axis: Vec3,
}

impl UfsmcMemory {
    pub fn from_initial(sigma_e0: &Mrp) -> Result<Self, ControlError> {
        Ok(Self {
            axis: euler_axis_from_initial(sigma_e0)?,
        })
    }

    pub fn axis(&self) -> &Vec3 {
        &self.axis
    }
}

/// Controller internals for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlDiagnostics {
    pub s: Vec3,
    pub g: f64,
    pub rho: f64,
    pub rho_dot: f64,
    pub h: f64,
    pub h_dot: f64,
    pub gamma2: f64,
    pub u_eq: Vec3,
    pub u_n: Vec3,
    pub theta: f64,
}

/// `g(σ_e) = arctan(eᵀσ_e) − π/4`.
pub fn g_of(sigma_e: &Mrp, e: &Vec3) -> f64 {
    e.dot(sigma_e.vector()).atan() - FRAC_PI_4
}

/// `ρ(σ_e) = sinh(g)/(1 + σ_eᵀσ_e)`.
pub fn rho_of(sigma_e: &Mrp, e: &Vec3) -> f64 {
    g_of(sigma_e, e).sinh() / (1.0 + sigma_e.norm_squared())
}

/// `h = ρ(σ_e)·‖σ_e‖`.
pub fn h_of(sigma_e: &Mrp, e: &Vec3) -> f64 {
    rho_of(sigma_e, e) * sigma_e.norm()
}

pub fn switching_function(state: &BodyErrorState, e: &Vec3, alpha: f64) -> Vec3 {
    state.omega_e - state.sigma_e.vector() * (alpha * rho_of(&state.sigma_e, e))
}

/// Time derivative of `ρ` along `σ̇_e`:
/// `ρ̇ = [cosh(g)·ġ·(1+σᵀσ) − 2 sinh(g)·σᵀσ̇] / (1+σᵀσ)²` with `ġ = eᵀσ̇/(1+(eᵀσ)²)`.
pub fn rho_dot_analytic(state: &BodyErrorState, e: &Vec3, sigma_e_dot: &Vec3) -> f64 {
    let sigma = state.sigma_e.vector();
    let es = e.dot(sigma);
    let g = es.atan() - FRAC_PI_4;
    let g_dot = e.dot(sigma_e_dot) / (1.0 + es * es);
    let q = 1.0 + sigma.norm_squared();
    (g.cosh() * g_dot * q - 2.0 * g.sinh() * sigma.dot(sigma_e_dot)) / (q * q)
}

/// `ḣ = ρ̇‖σ_e‖ + ρ·σ_eᵀσ̇_e/‖σ_e‖`, second term dropped near `σ_e = 0`.
pub fn h_dot_analytic(state: &BodyErrorState, e: &Vec3, sigma_e_dot: &Vec3) -> f64 {
    let sigma = state.sigma_e.vector();
    let norm = sigma.norm();
    let rho_dot = rho_dot_analytic(state, e, sigma_e_dot);
    let radial = if norm < H_DOT_NORM_FLOOR {
        0.0
    } else {
        rho_of(&state.sigma_e, e) * sigma.dot(sigma_e_dot) / norm
    };
    rho_dot * norm + radial
}

/// Dynamic switching gain `γ₂ = α|ḣ|/λ_min(J⁻¹)`, with `σ̇_e = M(σ_e)ω_e`.
pub fn gamma2_of(state: &BodyErrorState, e: &Vec3, alpha: f64, inertia: &InertiaMatrix) -> f64 {
    let sigma_dot = mrp_kinematics_matrix(&state.sigma_e) * state.omega_e;
    alpha * h_dot_analytic(state, e, &sigma_dot).abs() / inertia.lambda_min_inverse()
}

fn smooth_sign_scalar(s: f64, epsilon1: f64) -> f64 {
    if s.abs() >= epsilon1 {
        s.signum()
    } else {
        // arctan(tan(1)) = 1 at the layer edge
        (s * 1f64.tan() / epsilon1).atan()
    }
}

/// Boundary-layer replacement for `sgn(s)`, applied componentwise.
pub fn smooth_sign(s: &Vec3, epsilon1: f64) -> Vec3 {
    s.map(|c| smooth_sign_scalar(c, epsilon1))
}

/// Caps each component of `σ_e` at `±1/ε₂`.
pub fn clamp_sigma(sigma_e: &Mrp, epsilon2: f64) -> Mrp {
    let limit = 1.0 / epsilon2;
    Mrp(sigma_e.vector().map(|c| {
        if c.abs() >= limit {
            limit.copysign(c)
        } else {
            c
        }
    }))
}

/// Evaluates `u = u_eq + u_n`:
///
/// * `u_eq = ω_e^×Jω_e + αJ·ρ̇·σ_e + αJ·ρ·σ̇_e`
/// * `u_n = −(γ₁ + γ₂)·l(s)`
///
/// The caller is expected to have applied [`clamp_sigma`] to the state.
pub fn ufsmc_control(
    state: &BodyErrorState,
    params: &UfsmcParams,
    mem: &UfsmcMemory,
    inertia: &InertiaMatrix,
) -> Result<(Vec3, ControlDiagnostics), ControlError> {
    let e = mem.axis();
    let alpha = params.alpha;
    let sigma = state.sigma_e.vector();
    let omega = &state.omega_e;
    let j = inertia.matrix();

    let sigma_dot = mrp_kinematics_matrix(&state.sigma_e) * omega;
    let g = g_of(&state.sigma_e, e);
    let rho = rho_of(&state.sigma_e, e);
    let rho_dot = rho_dot_analytic(state, e, &sigma_dot);
    let h = rho * sigma.norm();
    let h_dot = h_dot_analytic(state, e, &sigma_dot);
    let gamma2 = alpha * h_dot.abs() / inertia.lambda_min_inverse();

    let s = omega - sigma * (alpha * rho);
    let u_eq =
        omega.cross(&(j * omega)) + j * (sigma * (alpha * rho_dot) + sigma_dot * (alpha * rho));
    let u_n = -smooth_sign(&s, params.epsilon1) * (params.gamma1 + gamma2);
    let u = u_eq + u_n;
    if !u.iter().all(|c| c.is_finite()) {
        return Err(ControlError::NonFiniteControl([u.x, u.y, u.z]));
    }

    let diag = ControlDiagnostics {
        s,
        g,
        rho,
        rho_dot,
        h,
        h_dot,
        gamma2,
        u_eq,
        u_n,
        theta: rotation_angle(&state.sigma_e, e),
    };
    Ok((u, diag))
}
