//! Fixed-step RK4 on a uniform grid, forward for the model and backward for
//! adjoints, plus trapezoid quadrature on the same grid.
//!
//! State, control, adjoint and quadrature samples all live on one
//! [`TimeGrid`]. Controls and frozen trajectories are linearly interpolated at
//! the RK4 half-steps.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{IntegrationError, ModelError};
use crate::model::{self, ControlVector, ModelParameters, ReducedState, State, StrategyMask};

/// Any component beyond this magnitude aborts the integration.
pub const DIVERGENCE_LIMIT: f64 = 10.0;

/// Divergence limit for costates, which are measured in cost units rather
/// than population fractions.
pub const ADJOINT_DIVERGENCE_LIMIT: f64 = 1e8;

/// Simplex drift above this triggers renormalization of a simulated state.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

/// Uniform grid `0, dt, 2 dt, ..., t_final`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64) -> Result<Self, IntegrationError> {
        if !(dt > 0.0 && dt.is_finite()) || !(t_final > 0.0 && t_final.is_finite()) {
            return Err(IntegrationError::InvalidConfig(format!("need dt > 0 and t_final > 0, got dt = {dt}, t_final = {t_final}")));
        }
        let steps = (t_final / dt).round();
        if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(IntegrationError::InvalidConfig(format!("t_final = {t_final} is not a whole number of steps of {dt}")));
        }
        Ok(Self { t_final, steps: steps as usize })
    }

    pub fn with_steps(t_final: f64, steps: usize) -> Self {
        assert!(steps > 0 && t_final > 0.0);
        Self { t_final, steps }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t_final
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Index of the interval containing `t` and the fractional position in it.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let s = (t / self.dt()).clamp(0.0, self.steps as f64);
        let i = (s.floor() as usize).min(self.steps - 1);
        (i, s - i as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// Horizon in years.
    pub t_final: f64,
    /// Step in years.
    pub dt: f64,
    pub initial_state: State,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self { t_final: 100.0, dt: 0.02, initial_state: State::from_array([0.95, 0.03, 0.02, 0.0, 0.95, 0.05, 0.0]) }
    }
}

impl SimulationConfig {
    pub fn grid(&self) -> Result<TimeGrid, IntegrationError> {
        TimeGrid::new(self.t_final, self.dt)
    }

    pub fn validate(&self) -> Result<TimeGrid, IntegrationError> {
        self.initial_state.validate(DRIFT_TOLERANCE)?;
        self.grid()
    }
}

/// Something that yields a control vector at any time in the horizon.
pub trait ControlSource {
    fn controls_at(&self, t: f64) -> ControlVector;

    /// Grid the controls were sampled on, if any.
    fn grid(&self) -> Option<&TimeGrid> {
        None
    }

    /// Control value at grid point `i` of `grid`.
    fn sample(&self, grid: &TimeGrid, i: usize) -> ControlVector {
        self.controls_at(grid.time(i))
    }
}

impl ControlSource for ControlVector {
    fn controls_at(&self, _t: f64) -> ControlVector {
        *self
    }
}

/// Time-dependent controls sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pub grid: TimeGrid,
    pub values: Vec<ControlVector>,
    pub mask: StrategyMask,
}

impl ControlSchedule {
    pub fn constant(mask: StrategyMask, c: ControlVector, grid: TimeGrid) -> Self {
        Self { grid, values: vec![c.masked(&mask); grid.len()], mask }
    }

    /// Every sample respects the mask and its upper bounds exactly.
    pub fn check_feasible(&self, upper: &[f64; 5]) -> Result<(), ModelError> {
        for v in &self.values {
            for c in model::Control::ALL {
                let x = v.get(c);
                let hi = if self.mask.is_active(c) { upper[c.index()] } else { 0.0 };
                if !(0.0..=hi).contains(&x) {
                    return Err(ModelError::ControlOutOfBox { control: c, value: x });
                }
            }
        }
        Ok(())
    }
}

impl ControlSource for ControlSchedule {
    fn controls_at(&self, t: f64) -> ControlVector {
        let (i, frac) = self.grid.locate(t);
        if frac == 0.0 {
            return self.values[i];
        }
        let a = self.values[i].to_array();
        let b = self.values[i + 1].to_array();
        ControlVector::from_array(std::array::from_fn(|k| a[k] + frac * (b[k] - a[k])))
    }

    fn grid(&self) -> Option<&TimeGrid> {
        Some(&self.grid)
    }

    fn sample(&self, grid: &TimeGrid, i: usize) -> ControlVector {
        if grid == &self.grid {
            self.values[i]
        } else {
            self.controls_at(grid.time(i))
        }
    }
}

/// Model states on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<State>,
    /// Number of steps after which the state had to be renormalized.
    pub renormalizations: usize,
}

const STATE_HEADER: [&str; 8] = ["t", "S_f", "U_f", "I_f", "V_f", "S_m", "I_m", "V_m"];
const CONTROL_HEADER: [&str; 5] = ["w1", "w2", "u1", "u2", "alpha"];

impl Trajectory {
    pub fn series(&self, f: impl Fn(&State) -> f64) -> Vec<f64> {
        self.states.iter().map(f).collect()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least two points")
    }

    /// Largest simplex drift over the trajectory.
    pub fn max_drift(&self) -> f64 {
        self.states.iter().map(State::simplex_drift).fold(0.0, f64::max)
    }

    /// Linear interpolation of the reduced state at `t`.
    pub fn reduced_at(&self, t: f64) -> ReducedState {
        let (i, frac) = self.grid.locate(t);
        let a = self.states[i].reduced().to_array();
        if frac == 0.0 {
            return ReducedState::from_array(a);
        }
        let b = self.states[i + 1].reduced().to_array();
        ReducedState::from_array(std::array::from_fn(|k| a[k] + frac * (b[k] - a[k])))
    }

    /// Writes `t,S_f,U_f,I_f,V_f,S_m,I_m,V_m` rows, with control columns
    /// appended when `controls` is given. Values use shortest round-trip
    /// formatting, so nothing is lost.
    pub fn write_csv<W: Write>(&self, out: W, controls: Option<&dyn ControlSource>) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = STATE_HEADER.to_vec();
        if controls.is_some() {
            header.extend(CONTROL_HEADER);
        }
        w.write_record(&header)?;
        let mut row: Vec<String> = Vec::with_capacity(13);
        for (i, s) in self.states.iter().enumerate() {
            row.clear();
            row.push(self.grid.time(i).to_string());
            row.extend(s.to_array().iter().map(f64::to_string));
            if let Some(c) = controls {
                row.extend(c.sample(&self.grid, i).to_array().iter().map(f64::to_string));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a trajectory CSV. Control columns, if present, are returned too.
    pub fn read_csv<R: Read>(input: R) -> Result<(Self, Option<Vec<ControlVector>>), IntegrationError> {
        let bad = |e: String| IntegrationError::InvalidConfig(format!("trajectory csv: {e}"));
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
        let with_controls = match header.len() {
            8 => false,
            13 => true,
            n => return Err(bad(format!("expected 8 or 13 columns, found {n}"))),
        };
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut controls = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let v: Vec<f64> = rec.iter().map(|f| f.parse::<f64>().map_err(|e| bad(e.to_string()))).collect::<Result<_, _>>()?;
            times.push(v[0]);
            states.push(State::from_array(std::array::from_fn(|k| v[k + 1])));
            if with_controls {
                controls.push(ControlVector::from_array(std::array::from_fn(|k| v[k + 8])));
            }
        }
        if times.len() < 2 {
            return Err(bad("need at least two rows".into()));
        }
        let grid = TimeGrid::with_steps(*times.last().unwrap(), times.len() - 1);
        let traj = Trajectory { grid, states, renormalizations: 0 };
        Ok((traj, with_controls.then_some(controls)))
    }
}

fn guard<const N: usize>(t: f64, y: &[f64; N], limit: f64) -> Result<(), IntegrationError> {
    for (index, &value) in y.iter().enumerate() {
        if !value.is_finite() || value.abs() > limit {
            return Err(IntegrationError::Diverged { t, index, value });
        }
    }
    Ok(())
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * k[i])
}

/// One classical RK4 step of size `h` (negative `h` steps backward).
pub fn rk4_step<const N: usize, E>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    Ok(std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// Integrates `y' = f(t, y)` from `y(0) = initial` over `grid`.
///
/// `after_step` may adjust each new value in place (used for
/// renormalization) and is called before the divergence guard.
pub fn rk4_forward<const N: usize, E: From<IntegrationError>>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    initial: [f64; N],
    grid: &TimeGrid,
    mut after_step: impl FnMut(usize, &mut [f64; N]),
) -> Result<Vec<[f64; N]>, E> {
    let h = grid.dt();
    let mut out = Vec::with_capacity(grid.len());
    out.push(initial);
    for i in 0..grid.steps() {
        let t = grid.time(i);
        let mut next = rk4_step(&mut f, t, &out[i], h)?;
        after_step(i + 1, &mut next);
        guard(grid.time(i + 1), &next, DIVERGENCE_LIMIT)?;
        out.push(next);
    }
    Ok(out)
}

/// Integrates `y' = f(t, y)` backward from `y(T) = terminal` over `grid`.
/// Index `i` of the result is the value at `grid.time(i)`; the last entry is
/// `terminal` exactly. Any component beyond `limit` in magnitude aborts.
pub fn integrate_backward<const N: usize, E: From<IntegrationError>>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    terminal: [f64; N],
    grid: &TimeGrid,
    limit: f64,
) -> Result<Vec<[f64; N]>, E> {
    let h = grid.dt();
    let n = grid.steps();
    let mut out = vec![[0.0; N]; grid.len()];
    out[n] = terminal;
    for i in (1..=n).rev() {
        let prev = rk4_step(&mut f, grid.time(i), &out[i], -h)?;
        guard(grid.time(i - 1), &prev, limit)?;
        out[i - 1] = prev;
    }
    Ok(out)
}

fn check_control_grid(controls: &dyn ControlSource, grid: &TimeGrid) -> Result<(), IntegrationError> {
    match controls.grid() {
        Some(g) if g != grid => Err(IntegrationError::GridMismatch),
        _ => Ok(()),
    }
}

/// Simulates the seven-compartment model.
///
/// After each step the state is rescaled back onto the simplex if its drift
/// exceeds [`DRIFT_TOLERANCE`]; each such event is logged and counted.
pub fn integrate_forward(
    params: &ModelParameters,
    controls: &dyn ControlSource,
    config: &SimulationConfig,
) -> Result<Trajectory, IntegrationError> {
    let grid = config.validate()?;
    check_control_grid(controls, &grid)?;
    let mut renormalizations = 0;
    let raw = rk4_forward(
        |t, y: &[f64; 7]| {
            let d = model::rhs_full(&State::from_array(*y), &controls.controls_at(t), params)?;
            Ok::<_, IntegrationError>(d.to_array())
        },
        config.initial_state.to_array(),
        &grid,
        |i, y| {
            let s = State::from_array(*y);
            let drift = s.simplex_drift();
            if drift > DRIFT_TOLERANCE {
                log::warn!("renormalizing state at t = {} (drift {drift:e})", grid.time(i));
                renormalizations += 1;
                *y = s.renormalized().to_array();
            }
        },
    )?;
    Ok(Trajectory { grid, states: raw.into_iter().map(State::from_array).collect(), renormalizations })
}

/// Simulates the five-state control model and lifts the result back to
/// seven compartments.
pub fn integrate_forward_reduced(
    params: &ModelParameters,
    controls: &dyn ControlSource,
    config: &SimulationConfig,
) -> Result<Trajectory, IntegrationError> {
    let grid = config.validate()?;
    check_control_grid(controls, &grid)?;
    let raw = rk4_forward(
        |t, y: &[f64; 5]| Ok::<_, IntegrationError>(model::rhs_control(&ReducedState::from_array(*y), &controls.controls_at(t), params)?),
        config.initial_state.reduced().to_array(),
        &grid,
        |_, _| {},
    )?;
    let states = raw.into_iter().map(|y| ReducedState::from_array(y).lift()).collect();
    Ok(Trajectory { grid, states, renormalizations: 0 })
}

/// Composite trapezoid rule over uniformly spaced samples.
///
/// # Panics
/// If fewer than two samples are given.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    assert!(samples.len() >= 2, "trapezoid rule needs at least two samples");
    let interior: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (interior + 0.5 * (samples[0] + samples[samples.len() - 1]))
}
