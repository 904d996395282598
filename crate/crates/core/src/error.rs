use thiserror::Error;

use crate::model::Control;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("control {control} = {value} outside [0, 1]")]
    ControlOutOfBox { control: Control, value: f64 },
    #[error("state component {index} = {value} outside [0, 1]")]
    StateOutOfRange { index: usize, value: f64 },
    #[error("state off the population simplex (drift {drift:e})")]
    NotOnSimplex { drift: f64 },
    #[error("unknown control {0:?}")]
    UnknownControl(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("{0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("integration diverged at t = {t}: component {index} = {value}")]
    Diverged { t: f64, index: usize, value: f64 },
    #[error("invalid integration setup: {0}")]
    InvalidConfig(String),
    #[error("time grids do not match")]
    GridMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CeaError {
    #[error("{what} is undefined: {detail}")]
    UndefinedRatio { what: &'static str, detail: String },
    #[error("trajectories or schedules are on different time grids")]
    GridMismatch,
    #[error("cost weight {name} = {value} is negative")]
    NegativeWeight { name: &'static str, value: f64 },
    #[error("nothing to rank")]
    Empty,
    #[error("elimination log does not replay: {0}")]
    Replay(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("objective grew for {0} consecutive sweeps")]
    ObjectiveDiverging(usize),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Cea(#[from] CeaError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("calibration has no bracket: R_e = {re_low} at {low}, {re_high} at {high}, target {target}")]
    NoBracket { low: f64, high: f64, re_low: f64, re_high: f64, target: f64 },
    #[error("strategy {label}: {source}")]
    Strategy {
        label: String,
        #[source]
        source: Box<ScenarioError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Cea(#[from] CeaError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    pub fn in_strategy(self, label: impl Into<String>) -> Self {
        ScenarioError::Strategy { label: label.into(), source: Box::new(self) }
    }
}
