//! Two-sex SIVS transmission model.
//!
//! Females move between susceptible, unaware-infected, aware-infected and
//! vaccinated compartments; males between susceptible, infected and
//! vaccinated. Every compartment is a fraction of its sex, so each sex sums
//! to one. Two equivalent right-hand sides are provided: the seven-state form
//! used for simulation and reporting, and the five-state form (susceptibles
//! eliminated) used by the optimal control solver.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// States farther than this outside `[0, 1]` are treated as solver blow-up.
pub const STATE_TOLERANCE: f64 = 1e-6;

/// Epidemiological constants of the normalized model. Rates are per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParameters {
    /// Vaccine leakage; efficacy is `1 - epsilon`.
    pub epsilon: f64,
    /// Waning rate of vaccine protection.
    pub theta: f64,
    /// Male-to-female transmission rate.
    pub beta_m: f64,
    /// Transmission rate from unaware infected females.
    pub beta_f: f64,
    /// Transmission rate from aware infected females.
    pub beta_f_tilde: f64,
    /// Female clearance rate.
    pub gamma_f: f64,
    /// Male clearance rate.
    pub gamma_m: f64,
    /// Fraction of infected females who become aware of the infection.
    pub p: f64,
    /// Female rate of ceasing sexual activity.
    pub mu_f: f64,
    /// Male rate of ceasing sexual activity.
    pub mu_m: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            theta: 1.0 / 20.0,
            beta_m: 2.0,
            beta_f: 2.0,
            beta_f_tilde: 0.5,
            gamma_f: 1.0 / 1.3,
            gamma_m: 1.0 / 0.6,
            p: 0.4,
            mu_f: 1.0 / 20.0,
            mu_m: 1.0 / 25.0,
        }
    }
}

/// A parameter outside its plausibility range. Not an error.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeWarning {
    pub name: &'static str,
    pub value: f64,
    pub range: (f64, f64),
}

impl fmt::Display for RangeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} outside plausible range [{}, {}]", self.name, self.value, self.range.0, self.range.1)
    }
}

impl ModelParameters {
    fn named(&self) -> [(&'static str, f64); 10] {
        [
            ("epsilon", self.epsilon),
            ("theta", self.theta),
            ("beta_m", self.beta_m),
            ("beta_f", self.beta_f),
            ("beta_f_tilde", self.beta_f_tilde),
            ("gamma_f", self.gamma_f),
            ("gamma_m", self.gamma_m),
            ("p", self.p),
            ("mu_f", self.mu_f),
            ("mu_m", self.mu_m),
        ]
    }

    // Plausibility ranges. Durations (1/theta, 1/gamma) and efficacy (1 - epsilon)
    // are converted to rate form.
    fn plausible_ranges() -> [(f64, f64); 10] {
        [
            (0.0, 0.1),
            (1.0 / 50.0, 1.0 / 5.0),
            (0.05, 5.0),
            (0.05, 5.0),
            (0.025, 2.5),
            (1.0 / 2.0, 1.0 / 0.83),
            (1.0 / 1.2, 1.0 / 0.33),
            (0.0, 1.0),
            (0.02, 1.0),
            (0.02, 1.0),
        ]
    }

    /// Checks sign and box constraints, returning plausibility warnings for
    /// values that are admissible but outside the usual range.
    ///
    /// Exit rates `mu_f`, `mu_m` must be strictly positive: they keep the
    /// disease-free equilibrium well defined.
    pub fn validate(&self) -> Result<Vec<RangeWarning>, ModelError> {
        for (name, value) in self.named() {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::InvalidParameter { name, value, reason: "must be a finite non-negative number" });
            }
        }
        for (name, value) in [("epsilon", self.epsilon), ("p", self.p)] {
            if value > 1.0 {
                return Err(ModelError::InvalidParameter { name, value, reason: "must lie in [0, 1]" });
            }
        }
        for (name, value) in [("mu_f", self.mu_f), ("mu_m", self.mu_m)] {
            if value <= 0.0 {
                return Err(ModelError::InvalidParameter { name, value, reason: "must be strictly positive" });
            }
        }

        let mut warnings: Vec<RangeWarning> = self
            .named()
            .iter()
            .zip(Self::plausible_ranges())
            .filter(|((_, v), (lo, hi))| *v < lo - 1e-12 || *v > hi + 1e-12)
            .map(|(&(name, value), range)| RangeWarning { name, value, range })
            .collect();
        if self.beta_f_tilde >= self.beta_f {
            warnings.push(RangeWarning { name: "beta_f_tilde", value: self.beta_f_tilde, range: (0.0, self.beta_f) });
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(warnings)
    }
}

/// One of the five intervention rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Control {
    /// Fraction of girls vaccinated before sexual initiation.
    W1,
    /// Fraction of boys vaccinated before sexual initiation.
    W2,
    /// Vaccination rate of sexually active susceptible females.
    U1,
    /// Vaccination rate of sexually active susceptible males.
    U2,
    /// Screening rate of unaware infected females.
    Alpha,
}

impl Control {
    pub const ALL: [Control; 5] = [Control::W1, Control::W2, Control::U1, Control::U2, Control::Alpha];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Control::W1 => "w1",
            Control::W2 => "w2",
            Control::U1 => "u1",
            Control::U2 => "u2",
            Control::Alpha => "alpha",
        }
    }
}

impl fmt::Display for Control {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Control {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "w1" => Ok(Control::W1),
            "w2" => Ok(Control::W2),
            "u1" => Ok(Control::U1),
            "u2" => Ok(Control::U2),
            "alpha" | "a" => Ok(Control::Alpha),
            other => Err(ModelError::UnknownControl(other.to_string())),
        }
    }
}

/// Values of the five controls at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlVector {
    pub w1: f64,
    pub w2: f64,
    pub u1: f64,
    pub u2: f64,
    pub alpha: f64,
}

impl ControlVector {
    pub const ZERO: ControlVector = ControlVector { w1: 0.0, w2: 0.0, u1: 0.0, u2: 0.0, alpha: 0.0 };

    pub fn new(w1: f64, w2: f64, u1: f64, u2: f64, alpha: f64) -> Self {
        Self { w1, w2, u1, u2, alpha }
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.w1, self.w2, self.u1, self.u2, self.alpha]
    }

    pub fn get(&self, c: Control) -> f64 {
        self.to_array()[c.index()]
    }

    pub fn set(&mut self, c: Control, value: f64) {
        match c {
            Control::W1 => self.w1 = value,
            Control::W2 => self.w2 = value,
            Control::U1 => self.u1 = value,
            Control::U2 => self.u2 = value,
            Control::Alpha => self.alpha = value,
        }
    }

    /// Every component must lie in `[0, 1]`.
    pub fn validate(&self) -> Result<(), ModelError> {
        for c in Control::ALL {
            let v = self.get(c);
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::ControlOutOfBox { control: c, value: v });
            }
        }
        Ok(())
    }

    /// Zeroes the controls that are inactive under `mask`.
    pub fn masked(self, mask: &StrategyMask) -> Self {
        let mut a = self.to_array();
        for (v, on) in a.iter_mut().zip(mask.active) {
            if !on {
                *v = 0.0;
            }
        }
        Self::from_array(a)
    }
}

impl FromStr for ControlVector {
    type Err = ModelError;

    /// Parses `w1,w2,u1,u2,alpha`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(ModelError::Parse(format!("expected five comma-separated controls, got {s:?}")));
        }
        let mut a = [0.0; 5];
        for (slot, p) in a.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| ModelError::Parse(format!("invalid control value {p:?}")))?;
        }
        Ok(Self::from_array(a))
    }
}

/// The eight intervention strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
}

impl StrategyId {
    pub const ALL: [StrategyId; 8] =
        [StrategyId::S1, StrategyId::S2, StrategyId::S3, StrategyId::S4, StrategyId::S5, StrategyId::S6, StrategyId::S7, StrategyId::S8];

    pub fn mask(self) -> StrategyMask {
        StrategyMask::of(self)
    }

    pub fn description(self) -> &'static str {
        match self {
            StrategyId::S1 => "all controls",
            StrategyId::S2 => "vaccination prior to sexual initiation",
            StrategyId::S3 => "vaccination of sexually active individuals",
            StrategyId::S4 => "females' vaccination",
            StrategyId::S5 => "males' vaccination",
            StrategyId::S6 => "vaccination prior to sexual initiation and screening",
            StrategyId::S7 => "vaccination of sexually active individuals and screening",
            StrategyId::S8 => "females' vaccination and screening",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", *self as usize + 1)
    }
}

impl FromStr for StrategyId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let n: usize = t
            .strip_prefix(['S', 's'])
            .and_then(|d| d.trim_end_matches('*').parse().ok())
            .ok_or_else(|| ModelError::UnknownStrategy(t.to_string()))?;
        StrategyId::ALL.get(n.wrapping_sub(1)).copied().ok_or_else(|| ModelError::UnknownStrategy(t.to_string()))
    }
}

/// Which controls a strategy is allowed to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyMask {
    pub id: StrategyId,
    /// Indexed like [`Control::ALL`].
    pub active: [bool; 5],
}

impl StrategyMask {
    pub fn of(id: StrategyId) -> Self {
        const T: bool = true;
        const F: bool = false;
        let active = match id {
            StrategyId::S1 => [T, T, T, T, T],
            StrategyId::S2 => [T, T, F, F, F],
            StrategyId::S3 => [F, F, T, T, F],
            StrategyId::S4 => [T, F, T, F, F],
            StrategyId::S5 => [F, T, F, T, F],
            StrategyId::S6 => [T, T, F, F, T],
            StrategyId::S7 => [F, F, T, T, T],
            StrategyId::S8 => [T, F, T, F, T],
        };
        Self { id, active }
    }

    pub fn is_active(&self, c: Control) -> bool {
        self.active[c.index()]
    }

    pub fn active_controls(&self) -> impl Iterator<Item = Control> + '_ {
        Control::ALL.into_iter().filter(|c| self.is_active(*c))
    }
}

/// Population fractions of the seven compartments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct State {
    pub s_f: f64,
    pub u_f: f64,
    pub i_f: f64,
    pub v_f: f64,
    pub s_m: f64,
    pub i_m: f64,
    pub v_m: f64,
}

impl State {
    pub fn from_array(a: [f64; 7]) -> Self {
        Self { s_f: a[0], u_f: a[1], i_f: a[2], v_f: a[3], s_m: a[4], i_m: a[5], v_m: a[6] }
    }

    pub fn to_array(self) -> [f64; 7] {
        [self.s_f, self.u_f, self.i_f, self.v_f, self.s_m, self.i_m, self.v_m]
    }

    pub fn female_total(&self) -> f64 {
        self.s_f + self.u_f + self.i_f + self.v_f
    }

    pub fn male_total(&self) -> f64 {
        self.s_m + self.i_m + self.v_m
    }

    /// Largest deviation of either sex total from one.
    pub fn simplex_drift(&self) -> f64 {
        (self.female_total() - 1.0).abs().max((self.male_total() - 1.0).abs())
    }

    pub fn infected(&self) -> f64 {
        self.u_f + self.i_f + self.i_m
    }

    /// Checks that the state lies in the feasible region up to `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), ModelError> {
        check_components(&self.to_array(), tol)?;
        if self.simplex_drift() > tol {
            return Err(ModelError::NotOnSimplex { drift: self.simplex_drift() });
        }
        Ok(())
    }

    /// Rescales each sex so that it sums to one.
    pub fn renormalized(&self) -> Self {
        let f = self.female_total();
        let m = self.male_total();
        Self {
            s_f: self.s_f / f,
            u_f: self.u_f / f,
            i_f: self.i_f / f,
            v_f: self.v_f / f,
            s_m: self.s_m / m,
            i_m: self.i_m / m,
            v_m: self.v_m / m,
        }
    }

    pub fn reduced(&self) -> ReducedState {
        ReducedState { u_f: self.u_f, i_f: self.i_f, v_f: self.v_f, i_m: self.i_m, v_m: self.v_m }
    }
}

/// Time derivative of a [`State`], per year.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateDerivative {
    pub s_f: f64,
    pub u_f: f64,
    pub i_f: f64,
    pub v_f: f64,
    pub s_m: f64,
    pub i_m: f64,
    pub v_m: f64,
}

impl StateDerivative {
    pub fn to_array(self) -> [f64; 7] {
        [self.s_f, self.u_f, self.i_f, self.v_f, self.s_m, self.i_m, self.v_m]
    }
}

/// State with the susceptible compartments eliminated.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReducedState {
    pub u_f: f64,
    pub i_f: f64,
    pub v_f: f64,
    pub i_m: f64,
    pub v_m: f64,
}

impl ReducedState {
    pub fn from_array(a: [f64; 5]) -> Self {
        Self { u_f: a[0], i_f: a[1], v_f: a[2], i_m: a[3], v_m: a[4] }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.u_f, self.i_f, self.v_f, self.i_m, self.v_m]
    }

    pub fn s_f(&self) -> f64 {
        1.0 - self.u_f - self.i_f - self.v_f
    }

    pub fn s_m(&self) -> f64 {
        1.0 - self.i_m - self.v_m
    }

    pub fn lift(&self) -> State {
        State { s_f: self.s_f(), u_f: self.u_f, i_f: self.i_f, v_f: self.v_f, s_m: self.s_m(), i_m: self.i_m, v_m: self.v_m }
    }
}

fn check_components(values: &[f64], tol: f64) -> Result<(), ModelError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < -tol || value > 1.0 + tol {
            return Err(ModelError::StateOutOfRange { index, value });
        }
    }
    Ok(())
}

/// Right-hand side of the seven-compartment model.
pub fn rhs_full(x: &State, c: &ControlVector, p: &ModelParameters) -> Result<StateDerivative, ModelError> {
    check_components(&x.to_array(), STATE_TOLERANCE)?;

    let female_force = p.beta_m * x.i_m;
    let male_force = p.beta_f * x.u_f + p.beta_f_tilde * x.i_f;
    let female_exposed = x.s_f + p.epsilon * x.v_f;
    let male_exposed = x.s_m + p.epsilon * x.v_m;

    Ok(StateDerivative {
        s_f: (1.0 - c.w1) * p.mu_f - female_force * x.s_f - (c.u1 + p.mu_f) * x.s_f + p.gamma_f * (x.u_f + x.i_f) + p.theta * x.v_f,
        u_f: female_exposed * (1.0 - p.p) * female_force - (p.gamma_f + c.alpha + p.mu_f) * x.u_f,
        i_f: female_exposed * p.p * female_force + c.alpha * x.u_f - (p.gamma_f + p.mu_f) * x.i_f,
        v_f: c.w1 * p.mu_f + c.u1 * x.s_f - p.epsilon * female_force * x.v_f - (p.mu_f + p.theta) * x.v_f,
        s_m: (1.0 - c.w2) * p.mu_m - male_force * x.s_m - (c.u2 + p.mu_m) * x.s_m + p.gamma_m * x.i_m + p.theta * x.v_m,
        i_m: male_force * male_exposed - (p.gamma_m + p.mu_m) * x.i_m,
        v_m: c.w2 * p.mu_m - male_force * p.epsilon * x.v_m + c.u2 * x.s_m - (p.mu_m + p.theta) * x.v_m,
    })
}

/// Right-hand side of the five-state control model, in
/// `(U_f, I_f, V_f, I_m, V_m)` order.
pub fn rhs_control(x: &ReducedState, c: &ControlVector, p: &ModelParameters) -> Result<[f64; 5], ModelError> {
    let s_f = x.s_f();
    let s_m = x.s_m();
    check_components(&[x.u_f, x.i_f, x.v_f, x.i_m, x.v_m, s_f, s_m], STATE_TOLERANCE)?;
    Ok(rhs_control_unchecked(x, c, p))
}

#[inline]
pub(crate) fn rhs_control_unchecked(x: &ReducedState, c: &ControlVector, p: &ModelParameters) -> [f64; 5] {
    let s_f = x.s_f();
    let s_m = x.s_m();
    let female_force = p.beta_m * x.i_m;
    let male_force = p.beta_f * x.u_f + p.beta_f_tilde * x.i_f;
    let female_exposed = s_f + p.epsilon * x.v_f;
    let male_exposed = s_m + p.epsilon * x.v_m;
    [
        female_exposed * (1.0 - p.p) * female_force - (p.gamma_f + c.alpha + p.mu_f) * x.u_f,
        female_exposed * p.p * female_force + c.alpha * x.u_f - (p.gamma_f + p.mu_f) * x.i_f,
        c.w1 * p.mu_f + c.u1 * s_f - p.epsilon * female_force * x.v_f - (p.mu_f + p.theta) * x.v_f,
        male_force * male_exposed - (p.gamma_m + p.mu_m) * x.i_m,
        c.w2 * p.mu_m - male_force * p.epsilon * x.v_m + c.u2 * s_m - (p.mu_m + p.theta) * x.v_m,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fig2_state() -> State {
        State::from_array([0.95, 0.03, 0.02, 0.0, 0.95, 0.05, 0.0])
    }

    #[test]
    fn defaults_match_table_means() {
        let p = ModelParameters::default();
        assert_eq!(p.epsilon, 0.05);
        assert_eq!(p.theta, 0.05);
        assert_eq!(p.beta_m, 2.0);
        assert_eq!(p.beta_f, 2.0);
        assert_eq!(p.beta_f_tilde, 0.5);
        assert_eq!(p.gamma_f, 1.0 / 1.3);
        assert_eq!(p.gamma_m, 1.0 / 0.6);
        assert_eq!(p.p, 0.4);
        assert_eq!(p.mu_f, 0.05);
        assert_eq!(p.mu_m, 0.04);
        assert!(p.validate().unwrap().is_empty());
    }

    #[test]
    fn validation_errors_and_warnings() {
        let bad = ModelParameters { p: 1.5, ..Default::default() };
        assert!(matches!(bad.validate(), Err(ModelError::InvalidParameter { name: "p", .. })));
        let bad = ModelParameters { theta: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ModelParameters { mu_m: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());

        let odd = ModelParameters { beta_m: 7.0, beta_f_tilde: 3.0, ..Default::default() };
        let names: Vec<_> = odd.validate().unwrap().into_iter().map(|w| w.name).collect();
        assert!(names.contains(&"beta_m"));
        assert!(names.contains(&"beta_f_tilde"));
    }

    #[test]
    fn masks_match_strategy_table() {
        let on = |id: StrategyId| -> Vec<&str> { id.mask().active_controls().map(Control::name).collect() };
        assert_eq!(on(StrategyId::S1), ["w1", "w2", "u1", "u2", "alpha"]);
        assert_eq!(on(StrategyId::S2), ["w1", "w2"]);
        assert_eq!(on(StrategyId::S3), ["u1", "u2"]);
        assert_eq!(on(StrategyId::S4), ["w1", "u1"]);
        assert_eq!(on(StrategyId::S5), ["w2", "u2"]);
        assert_eq!(on(StrategyId::S6), ["w1", "w2", "alpha"]);
        assert_eq!(on(StrategyId::S7), ["u1", "u2", "alpha"]);
        assert_eq!(on(StrategyId::S8), ["w1", "u1", "alpha"]);
    }

    #[test]
    fn strategy_ids_parse() {
        assert_eq!("S4".parse::<StrategyId>().unwrap(), StrategyId::S4);
        assert_eq!("s8*".parse::<StrategyId>().unwrap(), StrategyId::S8);
        assert!("S9".parse::<StrategyId>().is_err());
        assert!("S0".parse::<StrategyId>().is_err());
        assert_eq!(StrategyId::S3.to_string(), "S3");
    }

    #[test]
    fn control_vector_parse_and_box() {
        let c: ControlVector = "0.1, 0.07,0.05,0.03,0.1".parse().unwrap();
        assert_eq!(c, ControlVector::new(0.1, 0.07, 0.05, 0.03, 0.1));
        assert!(c.validate().is_ok());
        assert!("0.1,0.2".parse::<ControlVector>().is_err());
        assert!(ControlVector::new(0.0, 1.2, 0.0, 0.0, 0.0).validate().is_err());
        let m = ControlVector::new(0.1, 0.2, 0.3, 0.4, 0.5).masked(&StrategyId::S4.mask());
        assert_eq!(m, ControlVector::new(0.1, 0.0, 0.3, 0.0, 0.0));
    }

    #[test]
    fn uncontrolled_disease_free_point_is_stationary() {
        let x = State::from_array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let d = rhs_full(&x, &ControlVector::ZERO, &ModelParameters::default()).unwrap();
        assert!(d.to_array().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn full_rhs_matches_hand_evaluation() {
        // Each line evaluated by hand at the default initial state with
        // c = (0.1, 0.07, 0.05, 0.03, 0.1) and the default parameters.
        let p = ModelParameters::default();
        let c = ControlVector::new(0.1, 0.07, 0.05, 0.03, 0.1);
        let d = rhs_full(&fig2_state(), &c, &p).unwrap();
        let gf = 1.0 / 1.3;
        let gm = 1.0 / 0.6;
        // S_f: 0.9*0.05 - 2*0.95*0.05 - 0.1*0.95 + gf*0.05 + 0
        let s_f = 0.045 - 0.095 - 0.095 + gf * 0.05;
        // U_f: 0.95*0.6*2*0.05 - (gf+0.15)*0.03
        let u_f = 0.057 - (gf + 0.15) * 0.03;
        // I_f: 0.95*0.4*0.1 + 0.1*0.03 - (gf+0.05)*0.02
        let i_f = 0.038 + 0.003 - (gf + 0.05) * 0.02;
        // V_f: 0.1*0.05 + 0.05*0.95
        let v_f = 0.005 + 0.0475;
        // male force: 2*0.03 + 0.5*0.02 = 0.07
        let s_m = 0.93 * 0.04 - 0.07 * 0.95 - 0.07 * 0.95 + gm * 0.05;
        let i_m = 0.07 * 0.95 - (gm + 0.04) * 0.05;
        let v_m = 0.07 * 0.04 + 0.03 * 0.95;
        let expected = [s_f, u_f, i_f, v_f, s_m, i_m, v_m];
        for (got, want) in d.to_array().iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-15, max_relative = 1e-13);
        }
    }

    #[test]
    fn reduced_rhs_at_zero_state() {
        let c = ControlVector::new(0.0, 0.0, 0.3, 0.2, 0.4);
        let d = rhs_control(&ReducedState::default(), &c, &ModelParameters::default()).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[3], 0.0);
        assert_eq!(d[2], 0.3);
        assert_eq!(d[4], 0.2);
    }

    #[test]
    fn reduced_rhs_at_fig2_initial_condition() {
        let p = ModelParameters::default();
        let full = rhs_full(&fig2_state(), &ControlVector::ZERO, &p).unwrap();
        let red = rhs_control(&fig2_state().reduced(), &ControlVector::ZERO, &p).unwrap();
        assert_eq!(red, [full.u_f, full.i_f, full.v_f, full.i_m, full.v_m]);
    }

    #[test]
    fn out_of_range_state_is_rejected() {
        let x = State::from_array([1.2, -0.2, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            rhs_full(&x, &ControlVector::ZERO, &ModelParameters::default()),
            Err(ModelError::StateOutOfRange { index: 0, .. })
        ));
        let r = ReducedState { u_f: 0.6, i_f: 0.6, ..Default::default() };
        assert!(rhs_control(&r, &ControlVector::ZERO, &ModelParameters::default()).is_err());
    }

    fn simplex_point() -> impl Strategy<Value = State> {
        (proptest::array::uniform4(0.0..1.0f64), proptest::array::uniform3(0.0..1.0f64)).prop_map(|(f, m)| {
            let fs: f64 = f.iter().sum::<f64>().max(1e-9);
            let ms: f64 = m.iter().sum::<f64>().max(1e-9);
            State::from_array([f[0] / fs, f[1] / fs, f[2] / fs, f[3] / fs, m[0] / ms, m[1] / ms, m[2] / ms])
        })
    }

    fn controls() -> impl Strategy<Value = ControlVector> {
        proptest::array::uniform5(0.0..=1.0f64).prop_map(ControlVector::from_array)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn each_sex_is_conserved(x in simplex_point(), c in controls()) {
            let d = rhs_full(&x, &c, &ModelParameters::default()).unwrap();
            prop_assert!((d.s_f + d.u_f + d.i_f + d.v_f).abs() < 1e-14);
            prop_assert!((d.s_m + d.i_m + d.v_m).abs() < 1e-14);
        }

        #[test]
        fn reduced_rhs_is_projection_of_full(x in simplex_point(), c in controls()) {
            let p = ModelParameters::default();
            let full = rhs_full(&x, &c, &p).unwrap();
            let red = rhs_control(&x.reduced(), &c, &p).unwrap();
            let want = [full.u_f, full.i_f, full.v_f, full.i_m, full.v_m];
            for (a, b) in red.iter().zip(want) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }

        #[test]
        fn empty_compartments_do_not_go_negative(x in simplex_point(), c in controls(), k in 0usize..7) {
            // Move compartment k's mass onto a sibling of the same sex.
            let mut a = x.to_array();
            let sibling = if k < 4 { (k + 1) % 4 } else { 4 + (k - 4 + 1) % 3 };
            a[sibling] += a[k];
            a[k] = 0.0;
            let d = rhs_full(&State::from_array(a), &c, &ModelParameters::default()).unwrap();
            prop_assert!(d.to_array()[k] >= 0.0);
        }
    }
}
