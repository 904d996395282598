//! Optimal time-dependent interventions via the forward-backward sweep.
//!
//! The objective is
//!
//! ```text
//! J = integral over [0, T] of B1 U_f + B2 I_f
//!       + 1/2 [A1 (w1^2 + w2^2) + A2 (u1^2 + u2^2) + A3 alpha^2]
//! ```
//!
//! subject to the five-state control model. The Hamiltonian is the running
//! cost plus `psi . f(x, c)`; costates solve `psi' = -dH/dx` backward from
//! `psi(T) = 0`, and the optimal controls are the clamped stationary points
//! of `H`, which is separable and quadratic in each control.

use serde::{Deserialize, Serialize};

use crate::cea::CostWeights;
use crate::error::{CeaError, ControlError, IntegrationError};
use crate::integrator::{
    integrate_backward, integrate_forward_reduced, trapezoid, ControlSchedule, ControlSource, SimulationConfig, TimeGrid, Trajectory,
    ADJOINT_DIVERGENCE_LIMIT,
};
use crate::model::{rhs_control_unchecked, Control, ControlVector, ModelParameters, ReducedState, StrategyMask};

/// Costates paired with `(U_f, I_f, V_f, I_m, V_m)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AdjointState(pub [f64; 5]);

#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory {
    pub grid: TimeGrid,
    pub values: Vec<AdjointState>,
}

/// Upper limits of the admissible control box; lower limits are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlBounds {
    pub w1_max: f64,
    pub w2_max: f64,
    pub u1_max: f64,
    pub u2_max: f64,
    pub alpha_max: f64,
}

impl Default for ControlBounds {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl ControlBounds {
    pub fn uniform(max: f64) -> Self {
        Self::from_upper(ControlVector::from_array([max; 5]))
    }

    pub fn from_upper(c: ControlVector) -> Self {
        Self { w1_max: c.w1, w2_max: c.w2, u1_max: c.u1, u2_max: c.u2, alpha_max: c.alpha }
    }

    /// Per-control upper bounds, indexed like [`Control::ALL`].
    pub fn upper(&self) -> [f64; 5] {
        [self.w1_max, self.w2_max, self.u1_max, self.u2_max, self.alpha_max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FbsmConfig {
    pub max_iterations: usize,
    /// Relative sup-norm tolerance on controls, states and the fixed-point residual.
    pub tolerance: f64,
    /// Weight of the freshly characterized controls in each update.
    pub relaxation: f64,
    /// Halve the relaxation weight whenever the fixed-point residual grows,
    /// down to `min_relaxation`.
    pub adaptive_relaxation: bool,
    pub min_relaxation: f64,
    pub bounds: ControlBounds,
    /// Constant initial guess; zero when absent.
    pub warm_start: Option<ControlVector>,
}

impl Default for FbsmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-3,
            relaxation: 0.5,
            adaptive_relaxation: true,
            min_relaxation: 1e-3,
            bounds: ControlBounds::default(),
            warm_start: None,
        }
    }
}

impl FbsmConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: String| Err(ControlError::InvalidConfig(m));
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return bad(format!("relaxation must lie in (0, 1], got {}", self.relaxation));
        }
        if self.adaptive_relaxation && !(self.min_relaxation > 0.0 && self.min_relaxation <= self.relaxation) {
            return bad(format!("min_relaxation must lie in (0, relaxation], got {}", self.min_relaxation));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        for (c, v) in Control::ALL.iter().zip(self.bounds.upper()) {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("upper bound of {c} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub schedule: ControlSchedule,
    pub state: Trajectory,
    pub adjoint: AdjointTrajectory,
    pub j_value: f64,
    /// Number of control updates performed.
    pub iterations: usize,
    pub converged: bool,
    /// `|characterized - schedule|_inf / |characterized|_inf` at the returned iterate.
    pub residual: f64,
    /// Objective at every iterate, starting from the initial guess.
    pub objective_history: Vec<f64>,
    /// Relaxation weight in use when the sweep stopped.
    pub final_relaxation: f64,
}

/// Machine-readable summary of a sweep run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub strategy: String,
    pub j_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub final_relaxation: f64,
    pub fbsm: FbsmConfig,
    pub simulation: SimulationConfig,
}

impl OptimalSolution {
    pub fn summary(&self, fbsm: &FbsmConfig, simulation: &SimulationConfig) -> RunSummary {
        RunSummary {
            strategy: format!("{}*", self.schedule.mask.id),
            j_value: self.j_value,
            iterations: self.iterations,
            converged: self.converged,
            residual: self.residual,
            final_relaxation: self.final_relaxation,
            fbsm: *fbsm,
            simulation: *simulation,
        }
    }
}

pub fn running_cost(x: &ReducedState, c: &ControlVector, w: &CostWeights) -> f64 {
    w.b1 * x.u_f + w.b2 * x.i_f + 0.5 * (w.a1 * (c.w1 * c.w1 + c.w2 * c.w2) + w.a2 * (c.u1 * c.u1 + c.u2 * c.u2) + w.a3 * c.alpha * c.alpha)
}

/// Objective functional along a trajectory.
pub fn objective_j(trajectory: &Trajectory, controls: &dyn ControlSource, weights: &CostWeights) -> Result<f64, CeaError> {
    if controls.grid().is_some_and(|g| *g != trajectory.grid) {
        return Err(CeaError::GridMismatch);
    }
    let integrand: Vec<f64> = trajectory
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| running_cost(&s.reduced(), &controls.sample(&trajectory.grid, i), weights))
        .collect();
    Ok(trapezoid(&integrand, trajectory.grid.dt()))
}

pub fn hamiltonian(x: &ReducedState, psi: &AdjointState, c: &ControlVector, params: &ModelParameters, weights: &CostWeights) -> f64 {
    let f = rhs_control_unchecked(x, c, params);
    running_cost(x, c, weights) + psi.0.iter().zip(f).map(|(a, b)| a * b).sum::<f64>()
}

/// `psi' = -dH/dx` for the five-state model.
pub fn adjoint_rhs(
    x: &ReducedState,
    psi: &AdjointState,
    c: &ControlVector,
    params: &ModelParameters,
    weights: &CostWeights,
) -> AdjointState {
    let p = params;
    let [p1, p2, p3, p4, p5] = psi.0;
    let female_force = p.beta_m * x.i_m;
    let male_force = p.beta_f * x.u_f + p.beta_f_tilde * x.i_f;
    let female_exposed = x.s_f() + p.epsilon * x.v_f;
    let male_exposed = x.s_m() + p.epsilon * x.v_m;
    // Costate of a new female infection, split by awareness.
    let infection_value = (1.0 - p.p) * p1 + p.p * p2;

    AdjointState([
        -weights.b1 + ((1.0 - p.p) * female_force + p.gamma_f + c.alpha + p.mu_f) * p1 + (p.p * female_force - c.alpha) * p2 + c.u1 * p3
            - p.beta_f * male_exposed * p4
            + p.beta_f * p.epsilon * x.v_m * p5,
        -weights.b2 + (1.0 - p.p) * female_force * p1 + (p.p * female_force + p.gamma_f + p.mu_f) * p2 + c.u1 * p3
            - p.beta_f_tilde * male_exposed * p4
            + p.beta_f_tilde * p.epsilon * x.v_m * p5,
        infection_value * (1.0 - p.epsilon) * female_force + (p.epsilon * female_force + c.u1 + p.mu_f + p.theta) * p3,
        -p.beta_m * female_exposed * infection_value
            + p.epsilon * p.beta_m * x.v_f * p3
            + (male_force + p.gamma_m + p.mu_m) * p4
            + c.u2 * p5,
        male_force * ((1.0 - p.epsilon) * p4 + p.epsilon * p5) + (c.u2 + p.theta + p.mu_m) * p5,
    ])
}

/// Pointwise minimizer of the Hamiltonian over the admissible box.
pub fn characterize_controls(
    x: &ReducedState,
    psi: &AdjointState,
    mask: &StrategyMask,
    bounds: &ControlBounds,
    params: &ModelParameters,
    weights: &CostWeights,
) -> ControlVector {
    let [p1, p2, p3, _, p5] = psi.0;
    let stationary = [
        -params.mu_f * p3 / weights.a1,
        -params.mu_m * p5 / weights.a1,
        -x.s_f() * p3 / weights.a2,
        -x.s_m() * p5 / weights.a2,
        (p1 - p2) * x.u_f / weights.a3,
    ];
    let upper = bounds.upper();
    let mut out = ControlVector::ZERO;
    for c in mask.active_controls() {
        let k = c.index();
        out.set(c, stationary[k].clamp(0.0, upper[k]));
    }
    out
}

/// Integrates the costates backward along a frozen state trajectory.
pub fn solve_adjoint(
    params: &ModelParameters,
    weights: &CostWeights,
    frozen: &Trajectory,
    schedule: &ControlSchedule,
) -> Result<AdjointTrajectory, IntegrationError> {
    if frozen.grid != schedule.grid {
        return Err(IntegrationError::GridMismatch);
    }
    let raw = integrate_backward(
        |t, psi: &[f64; 5]| {
            let x = frozen.reduced_at(t);
            let c = schedule.controls_at(t);
            Ok::<_, IntegrationError>(adjoint_rhs(&x, &AdjointState(*psi), &c, params, weights).0)
        },
        [0.0; 5],
        &frozen.grid,
        ADJOINT_DIVERGENCE_LIMIT,
    )?;
    Ok(AdjointTrajectory { grid: frozen.grid, values: raw.into_iter().map(AdjointState).collect() })
}

fn sup_norm<'a>(v: impl Iterator<Item = &'a [f64; 5]>) -> f64 {
    v.flat_map(|a| a.iter()).fold(0.0f64, |m, x| m.max(x.abs()))
}

fn relative_change(new: &[[f64; 5]], old: &[[f64; 5]]) -> f64 {
    let diff: Vec<[f64; 5]> = new.iter().zip(old).map(|(a, b)| std::array::from_fn(|k| a[k] - b[k])).collect();
    sup_norm(diff.iter()) / sup_norm(new.iter()).max(1e-12)
}

fn characterize_on_grid(
    state: &Trajectory,
    adjoint: &AdjointTrajectory,
    mask: &StrategyMask,
    config: &FbsmConfig,
    params: &ModelParameters,
    weights: &CostWeights,
) -> Vec<[f64; 5]> {
    state
        .states
        .iter()
        .zip(&adjoint.values)
        .map(|(s, psi)| characterize_controls(&s.reduced(), psi, mask, &config.bounds, params, weights).to_array())
        .collect()
}

/// Sweeps after which the objective may no longer grow persistently.
const OBJECTIVE_GRACE: usize = 10;
const OBJECTIVE_SLACK: f64 = 1e-6;
const MAX_GROWTH_STREAK: usize = 50;

/// Solves the optimal control problem restricted to the controls in `mask`.
///
/// Each sweep integrates the state forward under the current schedule, the
/// costates backward along it, characterizes the optimal controls pointwise
/// and relaxes the schedule toward them. The run stops when the relative
/// change in controls and states and the fixed-point residual all fall below
/// the tolerance. Hitting `max_iterations` returns the last iterate with
/// `converged == false`.
pub fn fbsm_solve(
    mask: StrategyMask,
    params: &ModelParameters,
    weights: &CostWeights,
    sim: &SimulationConfig,
    config: &FbsmConfig,
) -> Result<OptimalSolution, ControlError> {
    config.validate()?;
    params.validate()?;
    weights.validate()?;
    for c in mask.active_controls() {
        let a = match c {
            Control::W1 | Control::W2 => weights.a1,
            Control::U1 | Control::U2 => weights.a2,
            Control::Alpha => weights.a3,
        };
        if a <= 0.0 {
            return Err(ControlError::InvalidConfig(format!("control {c} is active but its cost weight is {a}")));
        }
    }
    let grid = sim.validate()?;

    let upper = config.bounds.upper();
    let start = config.warm_start.unwrap_or(ControlVector::ZERO).masked(&mask).to_array();
    let start = ControlVector::from_array(std::array::from_fn(|k| start[k].clamp(0.0, upper[k])));
    let mut schedule = ControlSchedule::constant(mask, start, grid);
    let mut state = integrate_forward_reduced(params, &schedule, sim)?;
    let mut history = vec![objective_j(&state, &schedule, weights)?];

    let mut control_change = f64::INFINITY;
    let mut state_change = f64::INFINITY;
    let mut growth_streak = 0;
    let mut iterations = 0;
    let mut rho = config.relaxation;
    let mut previous_residual = f64::INFINITY;
    loop {
        let adjoint = solve_adjoint(params, weights, &state, &schedule)?;
        let characterized = characterize_on_grid(&state, &adjoint, &mask, config, params, weights);
        let current: Vec<[f64; 5]> = schedule.values.iter().map(|c| c.to_array()).collect();
        let residual = relative_change(&characterized, &current);

        let converged = residual < config.tolerance && control_change < config.tolerance && state_change < config.tolerance;
        if converged || iterations == config.max_iterations {
            if !converged {
                log::warn!(
                    "{}*: no convergence after {iterations} sweeps (residual {residual:e}, control change {control_change:e}, state change {state_change:e})",
                    mask.id
                );
            }
            let j_value = *history.last().unwrap();
            return Ok(OptimalSolution {
                schedule,
                state,
                adjoint,
                j_value,
                iterations,
                converged,
                residual,
                objective_history: history,
                final_relaxation: rho,
            });
        }

        if config.adaptive_relaxation && residual > previous_residual && rho > config.min_relaxation {
            rho = (0.5 * rho).max(config.min_relaxation);
            log::debug!("{}*: residual grew to {residual:e}, relaxation now {rho}", mask.id);
        }
        previous_residual = residual;
        let updated: Vec<[f64; 5]> =
            characterized.iter().zip(&current).map(|(new, old)| std::array::from_fn(|k| rho * new[k] + (1.0 - rho) * old[k])).collect();
        control_change = relative_change(&updated, &current);
        schedule.values = updated.into_iter().map(ControlVector::from_array).collect();

        let next_state = integrate_forward_reduced(params, &schedule, sim)?;
        let old_x: Vec<[f64; 5]> = state.states.iter().map(|s| s.reduced().to_array()).collect();
        let new_x: Vec<[f64; 5]> = next_state.states.iter().map(|s| s.reduced().to_array()).collect();
        state_change = relative_change(&new_x, &old_x);
        state = next_state;
        iterations += 1;

        let j = objective_j(&state, &schedule, weights)?;
        let previous = *history.last().unwrap();
        history.push(j);
        if iterations > OBJECTIVE_GRACE && j > previous + OBJECTIVE_SLACK {
            growth_streak += 1;
            log::debug!("{}*: objective rose from {previous} to {j} at sweep {iterations}", mask.id);
            if growth_streak >= MAX_GROWTH_STREAK {
                return Err(ControlError::ObjectiveDiverging(growth_streak));
            }
        } else {
            growth_streak = 0;
        }
    }
}
