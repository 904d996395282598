//! Scenario files, calibration to a target R_e, and batch runs that produce
//! trajectories, rankings and head-to-head comparisons.
//!
//! A scenario is a TOML document. Every section is optional and falls back to
//! the default parameter set; unknown keys are rejected. See
//! `docs/scenario-format.md` for the schema.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cea::{self, compare, rank, Comparison, CostWeights, OutcomeRecord, RankingReport};
use crate::control::{fbsm_solve, ControlBounds, FbsmConfig, OptimalSolution, RunSummary};
use crate::error::ScenarioError;
use crate::integrator::{integrate_forward, ControlSchedule, SimulationConfig, Trajectory};
use crate::model::{Control, ControlVector, ModelParameters, StrategyId, StrategyMask};
use crate::reproduction::{effective_r, ReproductionBreakdown};

/// Calibrated R_e must match its target to within this distance.
pub const CALIBRATION_TOLERANCE: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

/// Scenarios shipped with the crate, addressable by name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("fig2a", include_str!("../configs/fig2a.toml")),
    ("fig2b", include_str!("../configs/fig2b.toml")),
    ("table3", include_str!("../configs/table3.toml")),
    ("table4", include_str!("../configs/table4.toml")),
    ("section42-comparisons", include_str!("../configs/section42-comparisons.toml")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// The control solved for during calibration. A tied pair shares one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Control>", into = "Vec<Control>")]
pub enum FreeRate {
    Single(Control),
    Tied(Control, Control),
}

impl FreeRate {
    pub fn controls(&self) -> Vec<Control> {
        match *self {
            FreeRate::Single(c) => vec![c],
            FreeRate::Tied(a, b) => vec![a, b],
        }
    }

    fn apply(&self, base: &ControlVector, value: f64) -> ControlVector {
        let mut c = *base;
        for k in self.controls() {
            c.set(k, value);
        }
        c
    }
}

impl TryFrom<Vec<Control>> for FreeRate {
    type Error = String;

    fn try_from(v: Vec<Control>) -> Result<Self, String> {
        match v.as_slice() {
            [c] => Ok(FreeRate::Single(*c)),
            [a, b] if a != b => Ok(FreeRate::Tied(*a, *b)),
            _ => Err(format!("free must name one control or two distinct controls, got {v:?}")),
        }
    }
}

impl From<FreeRate> for Vec<Control> {
    fn from(f: FreeRate) -> Self {
        f.controls()
    }
}

impl std::fmt::Display for FreeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FreeRate::Single(c) => write!(f, "{c}"),
            FreeRate::Tied(a, b) => write!(f, "{a}={b}"),
        }
    }
}

impl std::str::FromStr for FreeRate {
    type Err = ScenarioError;

    /// `u1`, or `w1=w2` for a tied pair.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let controls = s.split(['=', ',']).map(|t| t.trim().parse::<Control>()).collect::<Result<Vec<_>, _>>()?;
        FreeRate::try_from(controls).map_err(ScenarioError::Config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTarget {
    pub free: FreeRate,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRequest {
    pub id: StrategyId,
    /// Values of the non-free controls; the free ones are overwritten.
    #[serde(default)]
    pub fixed: ControlVector,
    pub free: FreeRate,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub id: StrategyId,
    /// Report label; `S4` for constant and `S4*` for optimized strategies by default.
    #[serde(default)]
    pub label: Option<String>,
    /// Constant rates. Must be zero for optimized strategies.
    #[serde(default)]
    pub rates: ControlVector,
    #[serde(default)]
    pub optimize: bool,
    /// Control box for an optimized strategy; the scenario-wide box when absent.
    #[serde(default)]
    pub bounds: Option<ControlBounds>,
    /// Re-solve one rate before simulating so that R_e hits a target.
    #[serde(default)]
    pub calibrate: Option<CalibrationTarget>,
}

impl StrategySpec {
    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None if self.optimize => format!("{}*", self.id),
            None => self.id.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub parameters: ModelParameters,
    pub simulation: SimulationConfig,
    pub costs: CostWeights,
    pub fbsm: FbsmConfig,
    #[serde(rename = "strategy")]
    pub strategies: Vec<StrategySpec>,
    #[serde(rename = "calibration")]
    pub calibrations: Vec<CalibrationRequest>,
    #[serde(rename = "comparison")]
    pub comparisons: Vec<ComparisonSpec>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let config: ScenarioConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a bundled scenario by name, or a file otherwise.
    pub fn load(name_or_path: &str) -> Result<Self, ScenarioError> {
        let mut config = match bundled(name_or_path) {
            Some(text) => Self::from_toml_str(text)?,
            None => Self::from_toml_str(&fs::read_to_string(name_or_path)?)?,
        };
        if config.name.is_empty() {
            config.name = Path::new(name_or_path).file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned());
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.parameters.validate()?;
        self.simulation.validate()?;
        self.costs.validate()?;
        self.fbsm.validate()?;

        let mut labels = BTreeMap::new();
        for s in &self.strategies {
            let label = s.label();
            let mask = s.id.mask();
            check_rates(&s.rates, &mask).map_err(|e| e.in_strategy(&label))?;
            if s.optimize {
                if s.rates != ControlVector::ZERO {
                    return Err(ScenarioError::Config("rates are not used by an optimized strategy".into()).in_strategy(label));
                }
                if s.calibrate.is_some() {
                    return Err(ScenarioError::Config("an optimized strategy cannot be calibrated".into()).in_strategy(label));
                }
                if let Some(bounds) = s.bounds {
                    FbsmConfig { bounds, ..self.fbsm }.validate().map_err(|e| ScenarioError::from(e).in_strategy(&label))?;
                }
            } else if s.bounds.is_some() {
                return Err(ScenarioError::Config("bounds apply only to optimized strategies".into()).in_strategy(label));
            }
            if let Some(cal) = &s.calibrate {
                check_free(&cal.free, &mask).map_err(|e| e.in_strategy(&label))?;
            }
            if labels.insert(label.clone(), ()).is_some() {
                return Err(ScenarioError::Config(format!("duplicate strategy label {label}")));
            }
        }
        for r in &self.calibrations {
            let mask = r.id.mask();
            check_rates(&r.fixed, &mask).map_err(|e| e.in_strategy(r.id.to_string()))?;
            check_free(&r.free, &mask).map_err(|e| e.in_strategy(r.id.to_string()))?;
        }
        for c in &self.comparisons {
            for l in [&c.first, &c.second] {
                if !labels.contains_key(l) {
                    return Err(ScenarioError::Config(format!("comparison refers to unknown strategy {l}")));
                }
            }
            if c.first == c.second {
                return Err(ScenarioError::Config(format!("comparison of {} with itself", c.first)));
            }
        }
        Ok(())
    }

    pub fn strategy(&self, label: &str) -> Option<&StrategySpec> {
        self.strategies.iter().find(|s| s.label() == label)
    }
}

fn check_rates(c: &ControlVector, mask: &StrategyMask) -> Result<(), ScenarioError> {
    c.validate()?;
    if c.masked(mask) != *c {
        return Err(ScenarioError::Config(format!("rates use controls outside strategy {}", mask.id)));
    }
    Ok(())
}

fn check_free(free: &FreeRate, mask: &StrategyMask) -> Result<(), ScenarioError> {
    for c in free.controls() {
        if !mask.is_active(c) {
            return Err(ScenarioError::Config(format!("free control {c} is not used by strategy {}", mask.id)));
        }
    }
    Ok(())
}

/// Finds the value of the free control(s) at which `R_e` equals `target`,
/// holding the others at `fixed`.
///
/// Bisects on `[0, 1]`. `R_e` must be above the target with the free rate at
/// 0 and below it at 1, unless an endpoint already hits the target.
pub fn calibrate_rate(
    mask: StrategyMask,
    fixed: &ControlVector,
    free: FreeRate,
    target: f64,
    params: &ModelParameters,
) -> Result<ControlVector, ScenarioError> {
    check_rates(&fixed.masked(&mask), &mask)?;
    check_free(&free, &mask)?;
    if !target.is_finite() || target <= 0.0 {
        return Err(ScenarioError::Config(format!("target R_e must be positive, got {target}")));
    }
    let base = fixed.masked(&mask);
    let r_at = |v: f64| effective_r(&free.apply(&base, v), params).r_e;

    let (mut low, mut high) = (0.0, 1.0);
    let (re_low, re_high) = (r_at(low), r_at(high));
    if (re_low - target).abs() < CALIBRATION_TOLERANCE {
        return Ok(free.apply(&base, low));
    }
    if (re_high - target).abs() < CALIBRATION_TOLERANCE {
        return Ok(free.apply(&base, high));
    }
    if !(re_low > target && target > re_high) {
        return Err(ScenarioError::NoBracket { low, high, re_low, re_high, target });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (low + high);
        let r = r_at(mid);
        if (r - target).abs() < CALIBRATION_TOLERANCE {
            return Ok(free.apply(&base, mid));
        }
        if r > target {
            low = mid;
        } else {
            high = mid;
        }
    }
    unreachable!("bisection on a continuous bracket reaches the tolerance")
}

#[derive(Debug, Clone)]
pub struct CalibrationOutcome {
    pub id: StrategyId,
    pub free: FreeRate,
    pub target: f64,
    pub controls: ControlVector,
    pub reproduction: ReproductionBreakdown,
}

#[derive(Debug, Clone)]
pub struct ConstantOutcome {
    pub label: String,
    pub id: StrategyId,
    pub controls: ControlVector,
    pub reproduction: ReproductionBreakdown,
    pub trajectory: Trajectory,
    pub record: OutcomeRecord,
}

#[derive(Debug, Clone)]
pub struct OptimalOutcome {
    pub label: String,
    pub id: StrategyId,
    pub fbsm: FbsmConfig,
    pub solution: OptimalSolution,
    pub record: OutcomeRecord,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub name: String,
    pub simulation: SimulationConfig,
    pub baseline: Trajectory,
    pub calibrations: Vec<CalibrationOutcome>,
    /// Ordered by strategy id, then label.
    pub constant: Vec<ConstantOutcome>,
    pub optimal: Vec<OptimalOutcome>,
    pub constant_ranking: Option<RankingReport>,
    pub optimal_ranking: Option<RankingReport>,
    pub comparisons: Vec<Comparison>,
}

impl ScenarioReport {
    pub fn record(&self, label: &str) -> Option<&OutcomeRecord> {
        self.constant.iter().map(|o| &o.record).chain(self.optimal.iter().map(|o| &o.record)).find(|r| r.strategy == label)
    }
}

/// Which strategy families of a scenario to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub constant: bool,
    pub optimal: bool,
}

impl Selection {
    pub const ALL: Selection = Selection { constant: true, optimal: true };
}

/// Runs the uncontrolled baseline alone.
pub fn baseline(config: &ScenarioConfig) -> Result<Trajectory, ScenarioError> {
    Ok(integrate_forward(&config.parameters, &ControlVector::ZERO, &config.simulation)?)
}

pub fn evaluate_constant(config: &ScenarioConfig, spec: &StrategySpec, baseline: &Trajectory) -> Result<ConstantOutcome, ScenarioError> {
    let label = spec.label();
    let run = || -> Result<ConstantOutcome, ScenarioError> {
        let mask = spec.id.mask();
        let controls = match &spec.calibrate {
            Some(cal) => calibrate_rate(mask, &spec.rates, cal.free, cal.target, &config.parameters)?,
            None => spec.rates.masked(&mask),
        };
        let reproduction = effective_r(&controls, &config.parameters);
        let trajectory = integrate_forward(&config.parameters, &controls, &config.simulation)?;
        let cost = cea::cost(&trajectory, &controls, &config.costs, &config.parameters)?;
        let effectiveness = cea::effectiveness(&trajectory, baseline)?;
        Ok(ConstantOutcome {
            label: label.clone(),
            id: spec.id,
            controls,
            reproduction,
            trajectory,
            record: OutcomeRecord::new(label.clone(), cost, effectiveness),
        })
    };
    run().map_err(|e| e.in_strategy(&label))
}

pub fn evaluate_optimal(config: &ScenarioConfig, spec: &StrategySpec, baseline: &Trajectory) -> Result<OptimalOutcome, ScenarioError> {
    let label = spec.label();
    let run = || -> Result<OptimalOutcome, ScenarioError> {
        let fbsm = FbsmConfig { bounds: spec.bounds.unwrap_or(config.fbsm.bounds), ..config.fbsm };
        let solution = fbsm_solve(spec.id.mask(), &config.parameters, &config.costs, &config.simulation, &fbsm)?;
        if !solution.converged {
            log::warn!("{label}: returning an unconverged schedule (residual {:e})", solution.residual);
        }
        let cost = cea::cost(&solution.state, &solution.schedule, &config.costs, &config.parameters)?;
        let effectiveness = cea::effectiveness(&solution.state, baseline)?;
        Ok(OptimalOutcome {
            label: label.clone(),
            id: spec.id,
            fbsm,
            solution,
            record: OutcomeRecord::new(label.clone(), cost, effectiveness),
        })
    };
    run().map_err(|e| e.in_strategy(&label))
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioReport, ScenarioError> {
    run_selected(config, Selection::ALL)
}

/// Evaluates the selected families. Comparisons are only computed when both
/// of their strategies were evaluated.
pub fn run_selected(config: &ScenarioConfig, selection: Selection) -> Result<ScenarioReport, ScenarioError> {
    config.validate()?;
    let baseline = baseline(config)?;

    let calibrations = config
        .calibrations
        .iter()
        .map(|r| {
            let controls =
                calibrate_rate(r.id.mask(), &r.fixed, r.free, r.target, &config.parameters).map_err(|e| e.in_strategy(r.id.to_string()))?;
            let reproduction = effective_r(&controls, &config.parameters);
            Ok(CalibrationOutcome { id: r.id, free: r.free, target: r.target, controls, reproduction })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    let mut specs: Vec<&StrategySpec> = config.strategies.iter().collect();
    specs.sort_by_key(|s| (s.id, s.label()));
    let constant_specs: Vec<_> = specs.iter().filter(|s| selection.constant && !s.optimize).collect();
    let optimal_specs: Vec<_> = specs.iter().filter(|s| selection.optimal && s.optimize).collect();

    let constant = constant_specs.par_iter().map(|s| evaluate_constant(config, s, &baseline)).collect::<Result<Vec<_>, _>>()?;
    let optimal = optimal_specs.par_iter().map(|s| evaluate_optimal(config, s, &baseline)).collect::<Result<Vec<_>, _>>()?;

    let ranking = |records: Vec<OutcomeRecord>| if records.is_empty() { Ok(None) } else { rank(&records).map(Some) };
    let constant_ranking = ranking(constant.iter().map(|o| o.record.clone()).collect())?;
    let optimal_ranking = ranking(optimal.iter().map(|o| o.record.clone()).collect())?;

    let mut report = ScenarioReport {
        name: config.name.clone(),
        simulation: config.simulation,
        baseline,
        calibrations,
        constant,
        optimal,
        constant_ranking,
        optimal_ranking,
        comparisons: Vec::new(),
    };
    for c in &config.comparisons {
        if let (Some(a), Some(b)) = (report.record(&c.first), report.record(&c.second)) {
            report.comparisons.push(compare(a, b)?);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibrationSummary {
    pub strategy: String,
    pub free: String,
    pub target: f64,
    pub controls: ControlVector,
    pub r_e: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub cost: f64,
    pub effectiveness: f64,
    pub acer: Option<f64>,
    pub rank: Option<usize>,
    /// Constant rates, absent for optimized strategies.
    pub controls: Option<ControlVector>,
    pub r_e: Option<f64>,
    pub run: Option<RunSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub baseline_final_infected: f64,
    pub calibrations: Vec<CalibrationSummary>,
    pub constant: Vec<StrategySummary>,
    pub optimal: Vec<StrategySummary>,
    pub comparisons: Vec<Comparison>,
}

impl ScenarioReport {
    pub fn summary(&self) -> ScenarioSummary {
        let rank_in = |r: &Option<RankingReport>, l: &str| r.as_ref().and_then(|r| r.rank_of(l));
        ScenarioSummary {
            name: self.name.clone(),
            baseline_final_infected: self.baseline.last().infected(),
            calibrations: self
                .calibrations
                .iter()
                .map(|c| CalibrationSummary {
                    strategy: c.id.to_string(),
                    free: c.free.to_string(),
                    target: c.target,
                    controls: c.controls,
                    r_e: c.reproduction.r_e,
                })
                .collect(),
            constant: self
                .constant
                .iter()
                .map(|o| StrategySummary {
                    strategy: o.label.clone(),
                    cost: o.record.cost,
                    effectiveness: o.record.effectiveness,
                    acer: o.record.acer().ok(),
                    rank: rank_in(&self.constant_ranking, &o.label),
                    controls: Some(o.controls),
                    r_e: Some(o.reproduction.r_e),
                    run: None,
                })
                .collect(),
            optimal: self
                .optimal
                .iter()
                .map(|o| StrategySummary {
                    strategy: o.label.clone(),
                    cost: o.record.cost,
                    effectiveness: o.record.effectiveness,
                    acer: o.record.acer().ok(),
                    rank: rank_in(&self.optimal_ranking, &o.label),
                    controls: None,
                    r_e: None,
                    run: Some(o.solution.summary(&o.fbsm, &self.simulation)),
                })
                .collect(),
            comparisons: self.comparisons.clone(),
        }
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}", self.name);
        let _ = writeln!(s, "baseline infected at t = {}: {:.6}", self.simulation.t_final, self.baseline.last().infected());
        for c in &self.calibrations {
            let _ =
                writeln!(s, "calibrated {} ({} free): {} -> R_e = {:.6}", c.id, c.free, format_controls(&c.controls), c.reproduction.r_e);
        }
        let table = |s: &mut String, title: &str, rows: Vec<(&OutcomeRecord, String)>, ranking: &Option<RankingReport>| {
            if rows.is_empty() {
                return;
            }
            let _ = writeln!(s, "\n{title}");
            let _ = writeln!(s, "{:<8} {:>10} {:>10} {:>8} {:>5}  detail", "strategy", "cost", "effect", "acer", "rank");
            for (r, detail) in rows {
                let rank = ranking.as_ref().and_then(|k| k.rank_of(&r.strategy)).map_or("-".into(), |k| k.to_string());
                let acer = r.acer().map_or("-".into(), |a| format!("{a:.4}"));
                let _ = writeln!(s, "{:<8} {:>10.3} {:>10.3} {:>8} {:>5}  {detail}", r.strategy, r.cost, r.effectiveness, acer, rank);
            }
        };
        table(
            &mut s,
            "constant strategies",
            self.constant.iter().map(|o| (&o.record, format!("{} R_e={:.4}", format_controls(&o.controls), o.reproduction.r_e))).collect(),
            &self.constant_ranking,
        );
        table(
            &mut s,
            "optimal strategies",
            self.optimal
                .iter()
                .map(|o| {
                    let sol = &o.solution;
                    let status = if sol.converged { "converged" } else { "NOT CONVERGED" };
                    (&o.record, format!("J={:.4} sweeps={} {status}", sol.j_value, sol.iterations))
                })
                .collect(),
            &self.optimal_ranking,
        );
        if !self.comparisons.is_empty() {
            let _ = writeln!(s, "\ncomparisons");
            for c in &self.comparisons {
                let _ = writeln!(
                    s,
                    "{} vs {}: ICER = {:.4}, ACER({}) = {:.4}, ACER({}) = {:.4}, preferred {}",
                    c.first.strategy,
                    c.second.strategy,
                    c.icer,
                    c.first.strategy,
                    c.acer_first,
                    c.second.strategy,
                    c.acer_second,
                    c.preferred
                );
            }
        }
        s
    }

    /// Writes every artifact into `dir` and returns the paths written.
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut create = |name: String| -> Result<BufWriter<File>, ScenarioError> {
            let path = dir.join(name);
            let f = File::create(&path)?;
            written.push(path);
            Ok(BufWriter::new(f))
        };

        self.baseline.write_csv(create("baseline.csv".into())?, Some(&ControlVector::ZERO))?;
        for o in &self.constant {
            o.trajectory.write_csv(create(format!("trajectory_{}.csv", file_stem(&o.label)))?, Some(&o.controls))?;
        }
        for o in &self.optimal {
            let sol = &o.solution;
            sol.state.write_csv(create(format!("trajectory_{}.csv", file_stem(&o.label)))?, Some(&sol.schedule as &ControlSchedule))?;
        }
        for (family, ranking) in [("constant", &self.constant_ranking), ("optimal", &self.optimal_ranking)] {
            if let Some(r) = ranking {
                r.write_csv(create(format!("ranking_{family}.csv"))?)?;
                r.write_log(create(format!("ranking_{family}.log"))?)?;
            }
        }
        if !self.comparisons.is_empty() {
            let mut w = csv::Writer::from_writer(create("comparisons.csv".into())?);
            w.write_record(["first", "second", "icer", "acer_first", "acer_second", "preferred"])?;
            for c in &self.comparisons {
                w.write_record([
                    c.first.strategy.clone(),
                    c.second.strategy.clone(),
                    c.icer.to_string(),
                    c.acer_first.to_string(),
                    c.acer_second.to_string(),
                    c.preferred.clone(),
                ])?;
            }
            w.flush()?;
        }
        serde_json::to_writer_pretty(create("summary.json".into())?, &self.summary())?;
        use std::io::Write;
        create("summary.txt".into())?.write_all(self.summary_text().as_bytes())?;
        Ok(written)
    }
}

/// `S4*` becomes `S4_opt`.
pub fn file_stem(label: &str) -> String {
    label.replace('*', "_opt").chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn format_controls(c: &ControlVector) -> String {
    Control::ALL.iter().map(|k| format!("{k}={:.4}", c.get(*k))).collect::<Vec<_>>().join(" ")
}
