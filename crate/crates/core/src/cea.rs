//! Cost and effectiveness functionals, ICER/ACER and the elimination ranking.
//!
//! Effectiveness is the infection burden averted in females relative to the
//! uncontrolled run:
//!
//! ```text
//! E = integral over [0, T] of (U_f0 - U_f) + (I_f0 - I_f)
//! ```
//!
//! Cost adds intervention spending to the illness burden:
//!
//! ```text
//! C = integral of A1 (w1 mu_f + w2 mu_m) + A2 (u1 S_f + u2 S_m)
//!                 + A3 alpha (U_f + S_f) + B1 U_f + B2 I_f
//! ```
//!
//! Screening is billed on susceptible and unaware females even though only
//! the unaware move to the aware class.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::CeaError;
use crate::integrator::{trapezoid, ControlSource, Trajectory};
use crate::model::ModelParameters;

/// Unit costs. `a*` price a single vaccination or screening, `b*` price one
/// person-year of unaware (`b1`) or aware (`b2`) infection.
///
/// Typical orderings: school vaccination is cheaper than adult vaccination
/// (`a1 < a2`), screening costs about as much as school vaccination
/// (`a3 ~ a1`), and unaware infection is at least as costly as aware
/// infection (`b1 >= b2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostWeights {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self { a1: 1.0, a2: 5.0, a3: 1.0, b1: 15.0, b2: 10.0 }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<(), CeaError> {
        for (name, value) in [("a1", self.a1), ("a2", self.a2), ("a3", self.a3), ("b1", self.b1), ("b2", self.b2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(CeaError::NegativeWeight { name, value });
            }
        }
        Ok(())
    }
}

/// Cumulative female infection averted relative to `baseline`.
pub fn effectiveness(intervention: &Trajectory, baseline: &Trajectory) -> Result<f64, CeaError> {
    if intervention.grid != baseline.grid {
        return Err(CeaError::GridMismatch);
    }
    let averted: Vec<f64> = baseline.states.iter().zip(&intervention.states).map(|(b, x)| (b.u_f - x.u_f) + (b.i_f - x.i_f)).collect();
    Ok(trapezoid(&averted, intervention.grid.dt()))
}

/// Total intervention plus illness cost along `intervention`.
pub fn cost(
    intervention: &Trajectory,
    controls: &dyn ControlSource,
    weights: &CostWeights,
    params: &ModelParameters,
) -> Result<f64, CeaError> {
    weights.validate()?;
    if controls.grid().is_some_and(|g| *g != intervention.grid) {
        return Err(CeaError::GridMismatch);
    }
    let w = weights;
    let integrand: Vec<f64> = intervention
        .states
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let c = controls.sample(&intervention.grid, i);
            w.a1 * (c.w1 * params.mu_f + c.w2 * params.mu_m)
                + w.a2 * (c.u1 * x.s_f + c.u2 * x.s_m)
                + w.a3 * c.alpha * (x.u_f + x.s_f)
                + w.b1 * x.u_f
                + w.b2 * x.i_f
        })
        .collect();
    Ok(trapezoid(&integrand, intervention.grid.dt()))
}

/// Cost and effectiveness of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub strategy: String,
    pub cost: f64,
    pub effectiveness: f64,
}

impl OutcomeRecord {
    pub fn new(strategy: impl Into<String>, cost: f64, effectiveness: f64) -> Self {
        Self { strategy: strategy.into(), cost, effectiveness }
    }

    pub fn acer(&self) -> Result<f64, CeaError> {
        acer(self)
    }
}

/// Average cost-effectiveness ratio `C / E`.
pub fn acer(r: &OutcomeRecord) -> Result<f64, CeaError> {
    if r.effectiveness == 0.0 {
        return Err(CeaError::UndefinedRatio { what: "ACER", detail: format!("{} has zero effectiveness", r.strategy) });
    }
    Ok(r.cost / r.effectiveness)
}

/// Incremental cost-effectiveness ratio `(C2 - C1) / (E2 - E1)`.
pub fn icer(s1: &OutcomeRecord, s2: &OutcomeRecord) -> Result<f64, CeaError> {
    let de = s2.effectiveness - s1.effectiveness;
    if de == 0.0 {
        return Err(CeaError::UndefinedRatio {
            what: "ICER",
            detail: format!("{} and {} have equal effectiveness", s1.strategy, s2.strategy),
        });
    }
    Ok((s2.cost - s1.cost) / de)
}

/// Why one strategy of the head pair was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// ICER <= 0: the cheaper strategy is also at least as effective.
    IcerNonPositive,
    /// ICER >= ACER of the cheaper strategy: extra benefit is too expensive.
    IcerAtLeastAcer,
    /// 0 < ICER < ACER: the costlier strategy is proportionally better.
    IcerBelowAcer,
    /// Equal effectiveness; the costlier one is weakly dominated.
    EqualEffectiveness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EliminationStep {
    /// Rank being decided.
    pub round: usize,
    pub kept: String,
    pub removed: String,
    pub icer: Option<f64>,
    pub acer: f64,
    pub decision: Decision,
}

impl fmt::Display for EliminationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let icer = self.icer.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        write!(
            f,
            "round {}: keep {}, remove {} (ICER = {icer}, ACER = {:.4}, {:?})",
            self.round, self.kept, self.removed, self.acer, self.decision
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedOutcome {
    pub rank: usize,
    pub record: OutcomeRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    /// Ordered by rank.
    pub entries: Vec<RankedOutcome>,
    pub log: Vec<EliminationStep>,
}

impl RankingReport {
    pub fn rank_of(&self, strategy: &str) -> Option<usize> {
        self.entries.iter().find(|e| e.record.strategy == strategy).map(|e| e.rank)
    }

    pub fn winner(&self) -> &OutcomeRecord {
        &self.entries[0].record
    }

    /// Re-applies the logged decisions to `records`, checking each against a
    /// fresh evaluation, and rebuilds the report.
    pub fn replay(records: &[OutcomeRecord], log: &[EliminationStep]) -> Result<RankingReport, CeaError> {
        let mut remaining: Vec<OutcomeRecord> = records.to_vec();
        let mut entries = Vec::with_capacity(records.len());
        let mut steps = log.iter().peekable();
        let mut replayed = Vec::with_capacity(log.len());
        let mut round = 1;
        while !remaining.is_empty() {
            let mut list = sorted_by_cost(&remaining);
            while list.len() > 1 {
                let logged = steps.next().ok_or_else(|| CeaError::Replay(format!("log ends during round {round}")))?;
                let fresh = decide(&list[0], &list[1], round)?;
                if fresh.0 != *logged {
                    return Err(CeaError::Replay(format!("expected {logged}, evaluated {}", fresh.0)));
                }
                list.remove(fresh.1);
                replayed.push(fresh.0);
            }
            let winner = list.pop().expect("one survivor");
            remaining.retain(|r| r.strategy != winner.strategy);
            entries.push(RankedOutcome { rank: round, record: winner });
            round += 1;
        }
        if let Some(extra) = steps.next() {
            return Err(CeaError::Replay(format!("unused log entry {extra}")));
        }
        Ok(RankingReport { entries, log: replayed })
    }

    /// `strategy,cost,effectiveness,acer,rank`, one row per strategy by rank.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["strategy", "cost", "effectiveness", "acer", "rank"])?;
        for e in &self.entries {
            let acer = e.record.acer().map_or_else(|_| "NaN".to_string(), |v| v.to_string());
            w.write_record([
                e.record.strategy.clone(),
                e.record.cost.to_string(),
                e.record.effectiveness.to_string(),
                acer,
                e.rank.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_log<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for step in &self.log {
            writeln!(out, "{step}")?;
        }
        for e in &self.entries {
            writeln!(out, "rank {}: {}", e.rank, e.record.strategy)?;
        }
        Ok(())
    }
}

fn sorted_by_cost(records: &[OutcomeRecord]) -> Vec<OutcomeRecord> {
    let mut list = records.to_vec();
    list.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.strategy.cmp(&b.strategy)));
    list
}

/// Compares the head pair and returns the log entry plus the index (0 or 1)
/// of the strategy to remove.
fn decide(a: &OutcomeRecord, b: &OutcomeRecord, round: usize) -> Result<(EliminationStep, usize), CeaError> {
    let acer_a = acer(a)?;
    let step = |kept: &OutcomeRecord, removed: &OutcomeRecord, icer, decision| EliminationStep {
        round,
        kept: kept.strategy.clone(),
        removed: removed.strategy.clone(),
        icer,
        acer: acer_a,
        decision,
    };
    if a.effectiveness == b.effectiveness {
        return Ok((step(a, b, None, Decision::EqualEffectiveness), 1));
    }
    let icer_ab = icer(a, b)?;
    Ok(if icer_ab <= 0.0 {
        (step(a, b, Some(icer_ab), Decision::IcerNonPositive), 1)
    } else if icer_ab >= acer_a {
        (step(a, b, Some(icer_ab), Decision::IcerAtLeastAcer), 1)
    } else {
        (step(b, a, Some(icer_ab), Decision::IcerBelowAcer), 0)
    })
}

/// Ranks strategies by repeated elimination.
///
/// One elimination pass sorts the candidates by cost and repeatedly compares
/// the two cheapest, dropping one per the ICER/ACER rules until a single
/// strategy remains; that strategy takes the next rank and the pass is
/// repeated on the rest.
pub fn rank(records: &[OutcomeRecord]) -> Result<RankingReport, CeaError> {
    if records.is_empty() {
        return Err(CeaError::Empty);
    }
    let mut remaining = records.to_vec();
    let mut entries = Vec::with_capacity(records.len());
    let mut log = Vec::new();
    let mut round = 1;
    while !remaining.is_empty() {
        let mut list = sorted_by_cost(&remaining);
        while list.len() > 1 {
            let (step, drop) = decide(&list[0], &list[1], round)?;
            log.push(step);
            list.remove(drop);
        }
        let winner = list.pop().expect("one survivor");
        remaining.retain(|r| r.strategy != winner.strategy);
        entries.push(RankedOutcome { rank: round, record: winner });
        round += 1;
    }
    Ok(RankingReport { entries, log })
}

/// Head-to-head comparison of two strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub first: OutcomeRecord,
    pub second: OutcomeRecord,
    /// `ICER(first, second)`.
    pub icer: f64,
    pub acer_first: f64,
    pub acer_second: f64,
    /// Label of the strategy ranked first of the two.
    pub preferred: String,
}

pub fn compare(first: &OutcomeRecord, second: &OutcomeRecord) -> Result<Comparison, CeaError> {
    let report = rank(&[first.clone(), second.clone()])?;
    Ok(Comparison {
        first: first.clone(),
        second: second.clone(),
        icer: icer(first, second)?,
        acer_first: acer(first)?,
        acer_second: acer(second)?,
        preferred: report.winner().strategy.clone(),
    })
}
