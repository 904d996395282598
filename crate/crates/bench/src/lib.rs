//! Shared inputs for the benchmarks.

use hpv_core::{ControlBounds, ControlVector, StrategyId};

/// Reference constant rates, one per strategy.
pub fn constant_rates() -> [(StrategyId, ControlVector); 8] {
    [
        (StrategyId::S1, ControlVector::new(0.03, 0.03, 0.05, 0.05, 0.1)),
        (StrategyId::S2, ControlVector::new(0.81, 0.81, 0.0, 0.0, 0.0)),
        (StrategyId::S3, ControlVector::new(0.0, 0.0, 0.068, 0.05, 0.0)),
        (StrategyId::S4, ControlVector::new(0.3, 0.0, 0.127, 0.0, 0.0)),
        (StrategyId::S5, ControlVector::new(0.0, 0.3, 0.0, 0.119, 0.0)),
        (StrategyId::S6, ControlVector::new(0.66, 0.6, 0.0, 0.0, 0.4)),
        (StrategyId::S7, ControlVector::new(0.0, 0.0, 0.046, 0.05, 0.2)),
        (StrategyId::S8, ControlVector::new(0.15, 0.0, 0.1, 0.0, 0.3)),
    ]
}

/// Control box capped at the constant rates of `id`.
pub fn capped_bounds(id: StrategyId) -> ControlBounds {
    let (_, c) = constant_rates()[id as usize];
    ControlBounds::from_upper(c)
}
