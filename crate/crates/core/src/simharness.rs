//! Closed-loop scenarios, the simulation driver, maneuver metrics and the
//! invariant monitors evaluated on recorded trajectories.

use crate::attitude_math::{
    euler_angles_from_matrix, mrp_error_literal, rotation_angle, rotation_matrix, AttitudeError,
    EulerAngles, Mrp, Vec3, ZERO_ERROR_NORM,
};
use crate::baseline_smc::{smc_control, SmcParams};
use crate::dynamics::{
    rk4_step, BodyErrorState, DisturbanceModel, DynamicsError, InertiaMatrix, StepConfig,
};
use crate::ufsmc::{
    clamp_sigma, g_of, ufsmc_control, ControlDiagnostics, ControlError, UfsmcMemory, UfsmcParams,
};
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use thiserror::Error;

/// `|θ − θ_target|` below which a sample counts as converged.
pub const CONVERGENCE_ANGLE_TOL: f64 = 0.05;
/// `‖ω_e‖` below which a sample counts as converged.
pub const CONVERGENCE_RATE_TOL: f64 = 1e-3;
/// Allowed per-step growth of `V₂ = ½sᵀs` during the reaching phase.
pub const V2_STEP_TOL: f64 = 1e-9;
/// Allowed per-step growth of `V₁` once on the surface.
pub const V1_STEP_TOL: f64 = 1e-6;
/// Chattering band for the monotone-angle check.
pub const THETA_MONOTONE_TOL: f64 = 1e-3;
/// Bound on `|Δθ/Δt − eᵀω̄_e|` between consecutive samples.
pub const LEMMA1_RESIDUAL_TOL: f64 = 1e-4;
/// Extra rotation beyond π that marks a run as unwound.
pub const UNWINDING_MARGIN: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid controller: {0}")]
    InvalidController(String),
    #[error("state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },
    #[error("control torque became non-finite at t = {t} s")]
    NonFiniteControl { t: f64 },
    #[error(transparent)]
    Attitude(#[from] AttitudeError),
    #[error("no records to analyse")]
    EmptyRecords,
    #[error("runs come from different scenarios ({0} vs {1})")]
    ScenarioMismatch(String, String),
}

impl SimError {
    /// True for blow-ups during integration as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SimError::NonFiniteState { .. } | SimError::NonFiniteControl { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub sigma0: Mrp,
    pub omega0: Vec3,
    pub sigma_d: Mrp,
    pub omega_d: Vec3,
    pub inertia: InertiaMatrix,
    pub disturbance: DisturbanceModel,
    pub step: StepConfig,
}

fn reference_inertia() -> InertiaMatrix {
    InertiaMatrix::diagonal(114.0, 86.0, 87.0).expect("reference inertia is positive definite")
}

impl Scenario {
    /// Rest-to-rest from the identity attitude to `σ_d` with the reference
    /// spacecraft and disturbance.
    pub fn rest_to_rest(name: &str, sigma_d: Mrp) -> Self {
        Self {
            name: name.to_owned(),
            sigma0: Mrp::zero(),
            omega0: Vec3::zeros(),
            sigma_d,
            omega_d: Vec3::zeros(),
            inertia: reference_inertia(),
            disturbance: DisturbanceModel::reference(),
            step: StepConfig::default(),
        }
    }

    /// Short maneuver, `θ(0) < π`.
    pub fn scenario_a() -> Self {
        Self::rest_to_rest("A", Mrp::new(0.1, 0.2, -0.3))
    }

    /// Long way round, `θ(0) > π`.
    pub fn scenario_b() -> Self {
        Self::rest_to_rest("B", Mrp::new(0.7809, 0.4685, -0.7809))
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "A" | "a" => Some(Self::scenario_a()),
            "B" | "b" => Some(Self::scenario_b()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.omega_d != Vec3::zeros() || self.omega0 != Vec3::zeros() {
            return Err(SimError::InvalidScenario(
                "only rest-to-rest maneuvers are supported (omega0 = omega_d = 0)".into(),
            ));
        }
        if !(self.sigma0.is_finite() && self.sigma_d.is_finite()) {
            return Err(SimError::InvalidScenario("attitudes must be finite".into()));
        }
        Ok(())
    }

    pub fn initial_error(&self) -> Result<Mrp, SimError> {
        Ok(mrp_error_literal(&self.sigma0, &self.sigma_d)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    Ufsmc(UfsmcParams),
    Smc(SmcParams),
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Ufsmc(_) => "ufsmc",
            Controller::Smc(_) => "smc",
        }
    }
}

/// One telemetry sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRecord {
    pub t: f64,
    pub sigma_e: Mrp,
    pub omega_e: Vec3,
    pub theta: f64,
    pub u: Vec3,
    pub diag: ControlDiagnostics,
    pub euler: EulerAngles,
    pub v1: f64,
    pub v2: f64,
    /// `v = eᵀs`
    pub v: f64,
}

fn lift(err: ControlError, t: f64) -> SimError {
    match err {
        ControlError::NonFiniteControl(_) => SimError::NonFiniteControl { t },
        ControlError::Attitude(a) => SimError::Attitude(a),
        ControlError::InvalidParameter(m) => SimError::InvalidController(m),
    }
}

/// Integrates the closed loop at fixed step. Each step guards `σ_e`
/// (unwinding-free law only), samples the controller once, records, then
/// advances with the torque held.
pub fn run_simulation(
    scenario: &Scenario,
    controller: &Controller,
) -> Result<Vec<SimRecord>, SimError> {
    scenario.validate()?;
    match controller {
        Controller::Ufsmc(p) => p
            .validate(&scenario.disturbance)
            .map_err(|e| lift(e, 0.0))?,
        Controller::Smc(p) => p.validate().map_err(|e| lift(e, 0.0))?,
    }

    let sigma_e0 = scenario.initial_error()?;
    let kappa = FRAC_PI_4.cosh();
    let frame_d = rotation_matrix(&scenario.sigma_d);

    if sigma_e0.norm() <= ZERO_ERROR_NORM {
        return Ok(vec![SimRecord {
            t: 0.0,
            sigma_e: sigma_e0,
            omega_e: Vec3::zeros(),
            theta: 0.0,
            u: Vec3::zeros(),
            diag: ControlDiagnostics::default(),
            euler: euler_angles_from_matrix(&(frame_d * rotation_matrix(&sigma_e0).transpose())),
            v1: 0.0,
            v2: 0.0,
            v: 0.0,
        }]);
    }

    let memory = UfsmcMemory::from_initial(&sigma_e0).map_err(|e| lift(e, 0.0))?;
    let axis = *memory.axis();
    let dt = scenario.step.dt();
    let steps = scenario.step.steps();

    let mut records = Vec::with_capacity(steps + 1);
    let mut state = BodyErrorState::new(sigma_e0, scenario.omega0);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let (u, mut diag) = match controller {
            Controller::Ufsmc(p) => {
                state.sigma_e = clamp_sigma(&state.sigma_e, p.epsilon2);
                ufsmc_control(&state, p, &memory, &scenario.inertia)
            }
            Controller::Smc(p) => smc_control(&state, p, &scenario.inertia),
        }
        .map_err(|e| lift(e, t))?;

        let theta = rotation_angle(&state.sigma_e, &axis);
        diag.theta = theta;
        let g = g_of(&state.sigma_e, &axis);
        records.push(SimRecord {
            t,
            sigma_e: state.sigma_e,
            omega_e: state.omega_e,
            theta,
            u,
            diag,
            euler: euler_angles_from_matrix(
                &(frame_d * rotation_matrix(&state.sigma_e).transpose()),
            ),
            v1: kappa - g.cosh(),
            v2: 0.5 * diag.s.norm_squared(),
            v: axis.dot(&diag.s),
        });
        if k == steps {
            break;
        }
        state =
            rk4_step(&state, &u, t, dt, &scenario.inertia, &scenario.disturbance).map_err(|e| {
                match e {
                    DynamicsError::NonFiniteState { t } => SimError::NonFiniteState { t },
                    other => SimError::InvalidScenario(other.to_string()),
                }
            })?;
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Start of the trailing window in which the convergence predicate holds;
    /// `None` when the final sample is not converged.
    pub convergence_time: Option<f64>,
    /// `∫|θ̇|dt`
    pub total_rotation: f64,
    /// `∫‖u‖dt`
    pub effort: f64,
    pub max_torque: f64,
    pub theta_target: f64,
    pub unwound: bool,
    pub theta_initial: f64,
    pub theta_final: f64,
}

impl Metrics {
    pub fn converged(&self) -> bool {
        self.convergence_time.is_some()
    }
}

/// The equilibrium (0 or 2π) closest to `theta`.
pub fn nearest_equilibrium(theta: f64) -> f64 {
    if theta > PI {
        TAU
    } else {
        0.0
    }
}

/// `θ` at the first sample with `t ≥ time` (last sample if past the end).
pub fn theta_at(records: &[SimRecord], time: f64) -> Option<f64> {
    records
        .iter()
        .find(|r| r.t >= time - 1e-9)
        .or(records.last())
        .map(|r| r.theta)
}

/// Central differences in the interior, one-sided at the ends.
fn derivative(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ys.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (ys[b] - ys[a]) / (ts[b] - ts[a])
        })
        .collect()
}

pub fn compute_metrics(records: &[SimRecord], theta_target: f64) -> Result<Metrics, SimError> {
    let first = records.first().ok_or(SimError::EmptyRecords)?;
    let last = records.last().ok_or(SimError::EmptyRecords)?;

    let converged = |r: &SimRecord| {
        (r.theta - theta_target).abs() < CONVERGENCE_ANGLE_TOL
            && r.omega_e.norm() < CONVERGENCE_RATE_TOL
    };
    let convergence_time = match records.iter().rposition(|r| !converged(r)) {
        None => Some(first.t),
        Some(i) if i + 1 < records.len() => Some(records[i + 1].t),
        Some(_) => None,
    };

    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let thetas: Vec<f64> = records.iter().map(|r| r.theta).collect();
    let rate = derivative(&ts, &thetas);
    let total_rotation = records
        .windows(2)
        .zip(rate.windows(2))
        .map(|(r, d)| 0.5 * (d[0].abs() + d[1].abs()) * (r[1].t - r[0].t))
        .sum::<f64>();

    // torque is held over each step
    let effort = records
        .windows(2)
        .map(|r| r[0].u.norm() * (r[1].t - r[0].t))
        .sum::<f64>();
    let max_torque = records.iter().map(|r| r.u.amax()).fold(0.0, f64::max);

    let theta0 = first.theta;
    let shortest = theta0.min(TAU - theta0);
    let unwound = total_rotation > PI + UNWINDING_MARGIN && shortest < PI;

    Ok(Metrics {
        convergence_time,
        total_rotation,
        effort,
        max_torque,
        theta_target,
        unwound,
        theta_initial: theta0,
        theta_final: last.theta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorReport {
    pub lemma1_max_residual: f64,
    pub v2_violations: usize,
    pub v1_violations_after_reaching: usize,
    pub theta_monotonicity_violations: usize,
    /// `f64::INFINITY` when `‖s‖_∞` never settles inside the boundary layer.
    pub reaching_time: f64,
}

impl MonitorReport {
    pub fn lemma1_ok(&self) -> bool {
        self.lemma1_max_residual < LEMMA1_RESIDUAL_TOL
    }

    pub fn reached(&self) -> bool {
        self.reaching_time.is_finite()
    }

    pub fn total_violations(&self) -> usize {
        self.v2_violations
            + self.v1_violations_after_reaching
            + self.theta_monotonicity_violations
            + usize::from(!self.lemma1_ok())
            + usize::from(!self.reached())
    }
}

/// Checks the reaching, sliding and rotation-direction properties of an
/// unwinding-free run against the tolerances declared in this module.
pub fn monitor_invariants(records: &[SimRecord], params: &UfsmcParams) -> MonitorReport {
    let Some(first) = records.first() else {
        return MonitorReport {
            lemma1_max_residual: 0.0,
            v2_violations: 0,
            v1_violations_after_reaching: 0,
            theta_monotonicity_violations: 0,
            reaching_time: 0.0,
        };
    };

    let outside = |r: &SimRecord| r.diag.s.amax() >= params.epsilon1;
    let reaching_time = match records.iter().rposition(outside) {
        None => first.t,
        Some(i) if i + 1 < records.len() => records[i + 1].t,
        Some(_) => f64::INFINITY,
    };

    let lemma1_max_residual = if first.sigma_e.norm() > ZERO_ERROR_NORM {
        let e = first.sigma_e.vector().normalize();
        records
            .windows(2)
            .map(|w| {
                let dt = w[1].t - w[0].t;
                let mid_rate = 0.5 * e.dot(&(w[0].omega_e + w[1].omega_e));
                ((w[1].theta - w[0].theta) / dt - mid_rate).abs()
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    let v2_violations = records
        .windows(2)
        .filter(|w| w[0].t < reaching_time && w[1].v2 > w[0].v2 + V2_STEP_TOL)
        .count();
    let v1_violations_after_reaching = records
        .windows(2)
        .filter(|w| w[0].t >= reaching_time && w[1].v1 > w[0].v1 + V1_STEP_TOL)
        .count();

    let theta_monotonicity_violations = if first.theta < PI {
        let mut lowest = first.theta;
        records
            .iter()
            .filter(|r| {
                lowest = lowest.min(r.theta);
                r.theta > lowest + THETA_MONOTONE_TOL
            })
            .count()
    } else if first.theta > PI {
        let mut highest = first.theta;
        records
            .iter()
            .filter(|r| {
                highest = highest.max(r.theta);
                r.theta < highest - THETA_MONOTONE_TOL
            })
            .count()
    } else {
        0
    };

    MonitorReport {
        lemma1_max_residual,
        v2_violations,
        v1_violations_after_reaching,
        theta_monotonicity_violations,
        reaching_time,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenario: String,
    pub controller: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: &'static str,
    pub a: f64,
    pub b: f64,
    /// `a − b`
    pub delta: f64,
    /// `a / b`, absent when `b = 0`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scenario: String,
    pub controller_a: String,
    pub controller_b: String,
    pub rows: Vec<ComparisonRow>,
    pub unwound_a: bool,
    pub unwound_b: bool,
}

pub fn compare_runs(a: &RunSummary, b: &RunSummary) -> Result<Comparison, SimError> {
    if a.scenario != b.scenario {
        return Err(SimError::ScenarioMismatch(
            a.scenario.clone(),
            b.scenario.clone(),
        ));
    }
    let row = |metric, x: f64, y: f64| ComparisonRow {
        metric,
        a: x,
        b: y,
        delta: if x == y { 0.0 } else { x - y },
        ratio: (y != 0.0).then(|| x / y),
    };
    let (ma, mb) = (&a.metrics, &b.metrics);
    let conv = |m: &Metrics| m.convergence_time.unwrap_or(f64::INFINITY);
    Ok(Comparison {
        scenario: a.scenario.clone(),
        controller_a: a.controller.clone(),
        controller_b: b.controller.clone(),
        rows: vec![
            row("convergence_time", conv(ma), conv(mb)),
            row("total_rotation", ma.total_rotation, mb.total_rotation),
            row("effort", ma.effort, mb.effort),
            row("max_torque", ma.max_torque, mb.max_torque),
            row("theta_final", ma.theta_final, mb.theta_final),
        ],
        unwound_a: ma.unwound,
        unwound_b: mb.unwound,
    })
}
