//! Two-sex HPV transmission model with cost-effectiveness ranking of
//! vaccination and screening strategies, constant or optimal in time.

pub mod cea;
pub mod control;
pub mod error;
pub mod integrator;
pub mod model;
pub mod reproduction;
pub mod scenario;

pub use cea::{CostWeights, OutcomeRecord, RankingReport};
pub use control::{fbsm_solve, ControlBounds, FbsmConfig, OptimalSolution};
pub use error::{CeaError, ControlError, IntegrationError, ModelError, ScenarioError};
pub use integrator::{ControlSchedule, ControlSource, SimulationConfig, TimeGrid, Trajectory};
pub use model::{Control, ControlVector, ModelParameters, State, StrategyId, StrategyMask};
pub use reproduction::{effective_r, ReproductionBreakdown};
pub use scenario::{calibrate_rate, run_scenario, FreeRate, ScenarioConfig, ScenarioReport};
