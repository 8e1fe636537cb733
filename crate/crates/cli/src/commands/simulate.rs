//! `ambiswitch simulate`: Monte Carlo estimate of a strategy's objective.

use std::path::PathBuf;

use ambiswitch_core::pde::ValueSurface;
use ambiswitch_core::sim::{
    estimate_objective, record_paths, write_paths_csv, PriorPolicy, SimConfig, SimulationReport, Strategy,
    SurfaceStrategy, SwitchRule, Terminal, ThresholdStrategy,
};
use ambiswitch_core::{Horizon, SwitchingProblem};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::grid_args::{reference_x0, GridArgs};
use crate::io::{json_with_provenance, load_problem, parse_json, read_bytes, write_file, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThetaChoice {
    Zero,
    Worst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TerminalChoice {
    /// The problem's terminal payoff, or nothing after truncation.
    Problem,
    /// The solved value at the end of the window.
    Continuation,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    /// Strategy file (JSON), or `from-solve` to follow the PDE switching regions.
    #[arg(long, default_value = "from-solve")]
    pub strategy: String,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ThetaChoice::Zero)]
    pub theta: ThetaChoice,
    /// Initial state; defaults to the grid reference state.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    /// Initial regime (from 1); overrides the strategy file.
    #[arg(long)]
    pub regime: Option<usize>,
    /// Simulation window for infinite horizons; defaults to ln(10^8)/rho.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = TerminalChoice::Problem)]
    pub terminal: TerminalChoice,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Report file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump the first `--path-count` paths as CSV (`path,t,x,regime`).
    #[arg(long)]
    pub path_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub path_count: usize,
}

/// Strategy file layout; regimes are numbered from 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub initial_regime: usize,
    pub rules: Vec<Vec<SwitchRule>>,
}

impl StrategyFile {
    pub fn into_strategy(self) -> Result<ThresholdStrategy, CliError> {
        let bad = |what: &str| CliError::Schema(format!("strategy file: {what} must be numbered from 1"));
        let initial = self.initial_regime.checked_sub(1).ok_or_else(|| bad("/initial_regime"))?;
        let mut rules = Vec::with_capacity(self.rules.len());
        for list in self.rules {
            let mut out = Vec::with_capacity(list.len());
            for r in list {
                let target = r.target.checked_sub(1).ok_or_else(|| bad("/rules/*/target"))?;
                out.push(SwitchRule { trigger: r.trigger, target });
            }
            rules.push(out);
        }
        Ok(ThresholdStrategy::new(rules, initial)?)
    }
}

#[derive(Serialize)]
struct Output<'a> {
    strategy: &'a str,
    theta: &'static str,
    terminal: &'static str,
    x0: f64,
    regime: usize,
    t_max: Option<f64>,
    pde_value: Option<f64>,
    report: &'a SimulationReport,
}

fn initial_regime(args: &SimulateArgs, default: usize, n: usize) -> Result<usize, CliError> {
    match args.regime {
        Some(r) if r >= 1 && r <= n => Ok(r - 1),
        Some(r) => Err(CliError::Validation(format!("--regime {r} out of range 1..={n}"))),
        None => Ok(default),
    }
}

fn default_t_max(problem: &SwitchingProblem) -> Option<f64> {
    match problem.horizon() {
        Horizon::Finite { .. } => None,
        Horizon::Infinite => Some(1e8f64.ln() / problem.discount().max(1e-6)),
    }
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let loaded = load_problem(&args.config)?;
    let problem = &loaded.problem;
    let n = problem.regime_count();
    let x0 = reference_x0(problem, args.x0);
    let from_solve = args.strategy == "from-solve";
    let needs_surface = from_solve || args.theta == ThetaChoice::Worst || args.terminal == TerminalChoice::Continuation;
    let surface: Option<ValueSurface> = if needs_surface { Some(args.grid.solve(problem, x0)?) } else { None };

    let file_strategy = if from_solve {
        None
    } else {
        let path = PathBuf::from(&args.strategy);
        let file: StrategyFile = parse_json(&read_bytes(&path)?, &path)?;
        Some(file.into_strategy()?)
    };
    let regime = initial_regime(args, file_strategy.as_ref().map_or(0, |s| s.initial_regime), n)?;
    let surface_strategy = surface.as_ref().map(|s| SurfaceStrategy { surface: s, initial_regime: regime });
    let strategy: &dyn Strategy = match (&file_strategy, &surface_strategy) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => unreachable!("from-solve always has a surface"),
    };
    let strategy = Reinit { inner: strategy, regime };

    let prior = match (args.theta, &surface) {
        (ThetaChoice::Worst, Some(s)) => PriorPolicy::SignOfGradient { surface: s },
        _ => PriorPolicy::zero(n),
    };
    let terminal = match (args.terminal, &surface) {
        (TerminalChoice::Continuation, Some(s)) => Terminal::Continuation(s),
        _ => Terminal::Problem,
    };
    let t_max = args.t_max.or_else(|| default_t_max(problem));
    let config = SimConfig::new(args.paths, args.dt, t_max, args.seed, x0);
    let report = estimate_objective(problem, &strategy, &prior, terminal, &config)?;
    let pde_value = surface.as_ref().map(|s| s.value_at(0.0, x0, regime));

    println!("mean = {} ± {} (std. error, {} paths)", report.mean, report.std_error, report.n_paths);
    if let Some(v) = pde_value {
        let d = report.mean - v;
        if report.std_error > 1e-12 * v.abs().max(1.0) {
            println!("pde value = {v} (difference {:.3} std. errors)", d / report.std_error);
        } else {
            println!("pde value = {v} (difference {d:.3e})");
        }
    }
    println!("mean switches = {}", report.mean_switch_count);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    if let Some(out) = &args.out {
        let body = Output {
            strategy: &args.strategy,
            theta: match args.theta {
                ThetaChoice::Zero => "zero",
                ThetaChoice::Worst => "worst",
            },
            terminal: match terminal {
                Terminal::Problem => "problem",
                Terminal::Continuation(_) => "continuation",
            },
            x0,
            regime: regime + 1,
            t_max,
            pde_value,
            report: &report,
        };
        write_file(
            out,
            json_with_provenance(&Provenance::new(&loaded.hash, Some(args.seed)), Some(problem), &body)?.as_bytes(),
        )?;
        println!("wrote {}", out.display());
    }
    if let Some(path) = &args.path_csv {
        let paths = record_paths(problem, &strategy, &prior, terminal, &config, args.path_count)?;
        let mut buf = Vec::new();
        write_paths_csv(&paths, &mut buf)?;
        write_file(path, &buf)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Wraps a strategy with a different initial regime.
struct Reinit<'a> {
    inner: &'a dyn Strategy,
    regime: usize,
}

impl Strategy for Reinit<'_> {
    fn initial_regime(&self) -> usize {
        self.regime
    }

    fn decide(&self, t: f64, x: f64, regime: usize) -> Option<usize> {
        self.inner.decide(t, x, regime)
    }

    fn check(&self, problem: &SwitchingProblem) -> Result<(), ambiswitch_core::sim::SimError> {
        self.inner.check(problem)?;
        if self.regime >= problem.regime_count() {
            return Err(ambiswitch_core::sim::SimError::Strategy("initial regime out of range".into()));
        }
        Ok(())
    }
}
