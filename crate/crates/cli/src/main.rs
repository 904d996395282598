use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hpv_core::reproduction::{classify_dfe, compute_dfe};
use hpv_core::scenario::{self, evaluate_optimal, format_controls, run_selected, ComparisonSpec, Selection, StrategySpec};
use hpv_core::{
    calibrate_rate, effective_r, run_scenario, ControlSource, ControlVector, FreeRate, RankingReport, ScenarioConfig, StrategyId,
    Trajectory,
};

#[derive(Parser)]
#[command(name = "hpvcea", version, about = "HPV vaccination and screening: simulation, R_e, cost-effectiveness and optimal control")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArg {
    /// Scenario file, or a bundled scenario: fig2a, fig2b, table3, table4, section42-comparisons.
    #[arg(short, long, default_value = "table3")]
    config: String,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one strategy (or the uncontrolled baseline) and print its trajectory CSV.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Strategy label from the scenario, e.g. S4 or S4*. Baseline when absent.
        #[arg(short, long)]
        strategy: Option<String>,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Effective reproduction number and disease-free state for constant controls.
    Reproduction {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated w1,w2,u1,u2,alpha.
        #[arg(long, allow_hyphen_values = true)]
        controls: ControlVector,
    },
    /// Solve one rate of a strategy so that R_e equals the target.
    Calibrate {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long)]
        mask: StrategyId,
        #[arg(short, long)]
        target: f64,
        /// Control to solve for, e.g. u1, or w1=w2 for a tied pair. Taken from
        /// the scenario's calibration entry for the mask when absent.
        #[arg(long)]
        free: Option<FreeRate>,
        /// Values of the other controls as w1,w2,u1,u2,alpha.
        #[arg(long)]
        fixed: Option<ControlVector>,
    },
    /// Rank one family of strategies and print the ranking CSV.
    Rank {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long, value_enum)]
        family: Family,
        /// Also write the elimination log here.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Solve the optimal control problem for one strategy.
    Optimize {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long)]
        mask: StrategyId,
        /// Trajectory and control CSV; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Run summary JSON; stderr when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Compare pairs of strategies by ICER and ACER.
    Compare {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated FIRST:SECOND labels, e.g. S4*:S4,S2:S8*. The
        /// scenario's comparisons when absent.
        #[arg(short, long, value_delimiter = ',')]
        pairs: Vec<String>,
    },
    /// Run a whole scenario and write every report into a directory.
    Run {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Constant,
    Optimal,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn load(arg: &ConfigArg) -> Result<ScenarioConfig> {
    ScenarioConfig::load(&arg.config).with_context(|| format!("loading scenario {}", arg.config))
}

fn write_trajectory(t: &Trajectory, controls: &dyn ControlSource, out: &Option<PathBuf>) -> Result<()> {
    t.write_csv(output(out)?, Some(controls))?;
    Ok(())
}

fn simulate(config: &ScenarioConfig, strategy: Option<&str>, out: &Option<PathBuf>) -> Result<()> {
    let baseline = scenario::baseline(config)?;
    let Some(label) = strategy else {
        return write_trajectory(&baseline, &ControlVector::ZERO, out);
    };
    let spec = match config.strategy(label) {
        Some(s) => s.clone(),
        None => {
            let id: StrategyId = label.parse().with_context(|| format!("no strategy {label} in the scenario"))?;
            if label.ends_with('*') {
                StrategySpec { id, label: None, rates: ControlVector::ZERO, optimize: true, bounds: None, calibrate: None }
            } else {
                bail!("no strategy {label} in the scenario");
            }
        }
    };
    if spec.optimize {
        let o = evaluate_optimal(config, &spec, &baseline)?;
        write_trajectory(&o.solution.state, &o.solution.schedule, out)
    } else {
        let o = scenario::evaluate_constant(config, &spec, &baseline)?;
        log::info!("{}: {} R_e = {:.6}", o.label, format_controls(&o.controls), o.reproduction.r_e);
        write_trajectory(&o.trajectory, &o.controls, out)
    }
}

fn reproduction(config: &ScenarioConfig, controls: ControlVector) -> Result<()> {
    controls.validate()?;
    let p = &config.parameters;
    let r = effective_r(&controls, p);
    let dfe = compute_dfe(&controls, p);
    let s = dfe.state();
    println!("controls  {}", format_controls(&controls));
    println!("R_e       {:.6}", r.r_e);
    println!("T_m_f     {:.6}", r.t_m_f);
    println!("T_f_m     {:.6}", r.t_f_m);
    println!("DFE       S_f={:.6} V_f={:.6} S_m={:.6} V_m={:.6}", s.s_f, s.v_f, s.s_m, s.v_m);
    println!("stability {}", classify_dfe(&controls, p));
    Ok(())
}

fn calibrate(config: &ScenarioConfig, mask: StrategyId, target: f64, free: Option<FreeRate>, fixed: Option<ControlVector>) -> Result<()> {
    let request = config.calibrations.iter().find(|r| r.id == mask);
    let free = free.or(request.map(|r| r.free)).with_context(|| format!("no calibration entry for {mask} in the scenario; pass --free"))?;
    let fixed = fixed.or(request.map(|r| r.fixed)).unwrap_or_default();
    let c = calibrate_rate(mask.mask(), &fixed, free, target, &config.parameters)?;
    println!("strategy  {mask} ({free} free)");
    println!("controls  {}", format_controls(&c));
    println!("R_e       {:.9}", effective_r(&c, &config.parameters).r_e);
    Ok(())
}

fn rank(config: &ScenarioConfig, family: Family, log: &Option<PathBuf>) -> Result<()> {
    let selection = match family {
        Family::Constant => Selection { constant: true, optimal: false },
        Family::Optimal => Selection { constant: false, optimal: true },
    };
    let report = run_selected(config, selection)?;
    let ranking: &RankingReport = match family {
        Family::Constant => report.constant_ranking.as_ref(),
        Family::Optimal => report.optimal_ranking.as_ref(),
    }
    .context("the scenario has no strategies of this family")?;
    ranking.write_csv(io::stdout().lock())?;
    if let Some(path) = log {
        ranking.write_log(BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn optimize(config: &ScenarioConfig, mask: StrategyId, out: &Option<PathBuf>, summary: &Option<PathBuf>) -> Result<()> {
    let label = format!("{mask}*");
    let spec = config.strategy(&label).cloned().unwrap_or(StrategySpec {
        id: mask,
        label: None,
        rates: ControlVector::ZERO,
        optimize: true,
        bounds: None,
        calibrate: None,
    });
    let baseline = scenario::baseline(config)?;
    let o = evaluate_optimal(config, &spec, &baseline)?;
    write_trajectory(&o.solution.state, &o.solution.schedule, out)?;
    let mut run = serde_json::to_value(o.solution.summary(&o.fbsm, &config.simulation))?;
    run["cost"] = o.record.cost.into();
    run["effectiveness"] = o.record.effectiveness.into();
    let text = serde_json::to_string_pretty(&run)?;
    match summary {
        Some(p) => fs::write(p, text + "\n")?,
        None => eprintln!("{text}"),
    }
    if !o.solution.converged {
        log::warn!("{label} did not converge; the schedule is the last iterate");
    }
    Ok(())
}

fn compare(config: &mut ScenarioConfig, pairs: &[String]) -> Result<()> {
    if !pairs.is_empty() {
        config.comparisons = pairs
            .iter()
            .map(|p| {
                let (a, b) = p.split_once(':').with_context(|| format!("pair {p:?} is not FIRST:SECOND"))?;
                Ok(ComparisonSpec { first: a.trim().into(), second: b.trim().into() })
            })
            .collect::<Result<_>>()?;
    }
    if config.comparisons.is_empty() {
        bail!("nothing to compare; pass --pairs");
    }
    let report = run_scenario(config)?;
    for c in &report.comparisons {
        println!(
            "{} vs {}: ICER = {:.4}, ACER({}) = {:.4}, ACER({}) = {:.4}, preferred {}",
            c.first.strategy, c.second.strategy, c.icer, c.first.strategy, c.acer_first, c.second.strategy, c.acer_second, c.preferred
        );
    }
    Ok(())
}

fn run(config: &ScenarioConfig, out: &std::path::Path) -> Result<()> {
    let report = run_scenario(config)?;
    let files = report.write_outputs(out)?;
    print!("{}", report.summary_text());
    log::info!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Simulate { config, strategy, out } => simulate(&load(&config)?, strategy.as_deref(), &out),
        Command::Reproduction { config, controls } => reproduction(&load(&config)?, controls),
        Command::Calibrate { config, mask, target, free, fixed } => calibrate(&load(&config)?, mask, target, free, fixed),
        Command::Rank { config, family, log } => rank(&load(&config)?, family, &log),
        Command::Optimize { config, mask, out, summary } => optimize(&load(&config)?, mask, &out, &summary),
        Command::Compare { config, pairs } => compare(&mut load(&config)?, &pairs),
        Command::Run { config, out } => run(&load(&config)?, &out),
    }
}
