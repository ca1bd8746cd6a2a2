//! Rest-to-rest attitude error dynamics and a fixed-step RK4 integrator.

use crate::attitude_math::{mrp_kinematics_matrix, Mat3, Mrp, Vec3};
use nalgebra::SymmetricEigen;
use thiserror::Error;

/// Largest step accepted by [`StepConfig`].
pub const MAX_DT: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("inertia matrix is not symmetric (asymmetry {0:e})")]
    AsymmetricInertia(f64),
    #[error("inertia matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("invalid step configuration: {0}")]
    InvalidStep(String),
    #[error("state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },
}

/// Constant, symmetric positive-definite inertia with a cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct InertiaMatrix {
    j: Mat3,
    j_inv: Mat3,
    lambda_min_inv: f64,
}

impl InertiaMatrix {
    pub fn new(j: Mat3) -> Result<Self, DynamicsError> {
        if !j.iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::NotPositiveDefinite(f64::NAN));
        }
        let asym = (j - j.transpose()).abs().max();
        if asym > 1e-9 * j.abs().max().max(1.0) {
            return Err(DynamicsError::AsymmetricInertia(asym));
        }
        let eig = SymmetricEigen::new(j);
        let min = eig.eigenvalues.min();
        if min.is_nan() || min <= 0.0 {
            return Err(DynamicsError::NotPositiveDefinite(min));
        }
        let j_inv = j
            .try_inverse()
            .ok_or(DynamicsError::NotPositiveDefinite(min))?;
        // eigenvalues of J⁻¹ are reciprocals of those of J
        let lambda_min_inv = 1.0 / eig.eigenvalues.max();
        Ok(Self {
            j,
            j_inv,
            lambda_min_inv,
        })
    }

    pub fn diagonal(j11: f64, j22: f64, j33: f64) -> Result<Self, DynamicsError> {
        Self::new(Mat3::from_diagonal(&Vec3::new(j11, j22, j33)))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.j
    }

    pub fn inverse(&self) -> &Mat3 {
        &self.j_inv
    }

    /// `λ_min(J⁻¹)`.
    pub fn lambda_min_inverse(&self) -> f64 {
        self.lambda_min_inv
    }
}

/// The `(σ_e, ω_e)` pair evolved by the error dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyErrorState {
    pub sigma_e: Mrp,
    pub omega_e: Vec3,
}

impl BodyErrorState {
    pub fn new(sigma_e: Mrp, omega_e: Vec3) -> Self {
        Self { sigma_e, omega_e }
    }

    pub fn at_rest(sigma_e: Mrp) -> Self {
        Self::new(sigma_e, Vec3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.sigma_e.is_finite() && self.omega_e.iter().all(|c| c.is_finite())
    }
}

/// One axis of a sinusoidal disturbance: `coef·sin(ωt)` or `coef·cos(ωt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisShape {
    Sin(f64),
    Cos(f64),
}

impl AxisShape {
    fn coefficient(&self) -> f64 {
        match *self {
            AxisShape::Sin(c) | AxisShape::Cos(c) => c,
        }
    }

    fn eval(&self, phase: f64) -> f64 {
        match *self {
            AxisShape::Sin(c) => c * phase.sin(),
            AxisShape::Cos(c) => c * phase.cos(),
        }
    }
}

/// `d(t) = scale·[shape₁(ft), shape₂(ft), shape₃(ft)]` in N·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceModel {
    pub scale: f64,
    pub frequency: f64,
    pub shape: [AxisShape; 3],
}

impl DisturbanceModel {
    /// `10⁻²·[sin(0.05t), 0.5 sin(0.05t), −cos(0.05t)]`.
    pub fn reference() -> Self {
        Self::with_scale(1e-2, 0.05)
    }

    /// Reference axis shapes with a custom amplitude and frequency.
    pub fn with_scale(scale: f64, frequency: f64) -> Self {
        Self {
            scale,
            frequency,
            shape: [
                AxisShape::Sin(1.0),
                AxisShape::Sin(0.5),
                AxisShape::Cos(-1.0),
            ],
        }
    }

    pub fn none() -> Self {
        Self::with_scale(0.0, 0.0)
    }

    pub fn at(&self, t: f64) -> Vec3 {
        let phase = self.frequency * t;
        Vec3::new(
            self.shape[0].eval(phase),
            self.shape[1].eval(phase),
            self.shape[2].eval(phase),
        ) * self.scale
    }

    /// Declared bound `|scale|·√(Σ coefᵢ²)`; `‖d(t)‖` never exceeds it.
    pub fn bound(&self) -> f64 {
        self.scale.abs()
            * self
                .shape
                .iter()
                .map(|s| s.coefficient().powi(2))
                .sum::<f64>()
                .sqrt()
    }
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        Self::reference()
    }
}

/// Reference disturbance evaluated at `t`.
pub fn disturbance_at(t: f64) -> Vec3 {
    DisturbanceModel::reference().at(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    dt: f64,
    duration: f64,
    steps: usize,
}

impl StepConfig {
    pub fn new(dt: f64, duration: f64) -> Result<Self, DynamicsError> {
        if !(dt > 0.0 && dt <= MAX_DT) {
            return Err(DynamicsError::InvalidStep(format!(
                "dt = {dt} must satisfy 0 < dt <= {MAX_DT}"
            )));
        }
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(DynamicsError::InvalidStep(format!(
                "duration = {duration} must be finite and non-negative"
            )));
        }
        let n = duration / dt;
        let steps = n.round();
        if (n - steps).abs() > 1e-6 * n.max(1.0) {
            return Err(DynamicsError::InvalidStep(format!(
                "duration {duration} is not an integral multiple of dt {dt}"
            )));
        }
        Ok(Self {
            dt,
            duration,
            steps: steps as usize,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Number of integration steps, `duration / dt`.
    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            duration: 20.0,
            steps: 20_000,
        }
    }
}

/// `(σ̇_e, ω̇_e) = (M(σ_e)ω_e, J⁻¹(−ω_e^×Jω_e + u + d))`.
pub fn error_dynamics_rhs(
    state: &BodyErrorState,
    u: &Vec3,
    d: &Vec3,
    inertia: &InertiaMatrix,
) -> (Vec3, Vec3) {
    let w = &state.omega_e;
    let sigma_dot = mrp_kinematics_matrix(&state.sigma_e) * w;
    let h = inertia.matrix() * w;
    let omega_dot = inertia.inverse() * (-w.cross(&h) + u + d);
    (sigma_dot, omega_dot)
}

/// Classical RK4 step with `u` held over the step and the disturbance sampled
/// at the stage times.
pub fn rk4_step(
    state: &BodyErrorState,
    u: &Vec3,
    t: f64,
    dt: f64,
    inertia: &InertiaMatrix,
    disturbance: &DisturbanceModel,
) -> Result<BodyErrorState, DynamicsError> {
    let f = |s: &BodyErrorState, tau: f64| error_dynamics_rhs(s, u, &disturbance.at(tau), inertia);
    let offset = |(ds, dw): &(Vec3, Vec3), h: f64| {
        BodyErrorState::new(Mrp(state.sigma_e.vector() + ds * h), state.omega_e + dw * h)
    };

    let half = 0.5 * dt;
    let k1 = f(state, t);
    let k2 = f(&offset(&k1, half), t + half);
    let k3 = f(&offset(&k2, half), t + half);
    let k4 = f(&offset(&k3, dt), t + dt);

    let sixth = dt / 6.0;
    let next = BodyErrorState::new(
        Mrp(state.sigma_e.vector() + (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * sixth),
        state.omega_e + (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * sixth,
    );
    if !next.is_finite() {
        return Err(DynamicsError::NonFiniteState { t: t + dt });
    }
    Ok(next)
}
