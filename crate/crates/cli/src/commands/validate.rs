//! `ambiswitch validate`: the standing-assumption checks as a table.

use std::path::PathBuf;

use ambiswitch_core::sim::{cost_bound_diagnostic, CostDiagnostic, PriorPolicy, SimConfig, SurfaceStrategy};
use ambiswitch_core::validate::{
    validate_problem, CheckEntry, CheckStatus, MomentConstants, Witness, STRONG_TRIANGULAR,
};
use ambiswitch_core::{default_grid, Horizon, SwitchingProblem};
use clap::Args;
use serde::Serialize;

use crate::error::CliError;
use crate::grid_args::{reference_x0, GridArgs};
use crate::io::{json_with_provenance, load_problem, write_file, Provenance};

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Problem file (JSON).
    pub config: PathBuf,
    /// Number of sample points for the x-dependent checks.
    #[arg(long, default_value_t = 401)]
    pub samples: usize,
    /// Centre of the sample domain.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Skip the Monte Carlo cost probe run when strong triangularity fails.
    #[arg(long)]
    pub no_probe: bool,
    /// Seed for the cost probe.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    checks: &'a [CheckEntry],
    cost_probe: Option<ProbeOutcome>,
    hard_failure: bool,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum ProbeOutcome {
    Done { regime: usize, x0: f64, estimate: f64, std_error: f64, bound: f64, ratio: f64, mean_switch_count: f64 },
    Failed { reason: String },
}

fn status_text(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Skipped => "skipped",
    }
}

/// Advisory: simulates the PDE-optimal strategy under the worst prior and
/// compares the discounted switching benefit with the growth envelope.
fn cost_probe(
    problem: &SwitchingProblem,
    x0: f64,
    regime: usize,
    q: f64,
    seed: u64,
) -> Result<CostDiagnostic, CliError> {
    let grid = GridArgs {
        x_min: None,
        x_max: None,
        nx: 401,
        scale: None,
        nt: None,
        tol_picard: 1e-8,
        max_picard: 200,
        inner: crate::grid_args::InnerSolver::Policy,
    };
    let surface = grid.solve(problem, x0)?;
    let strategy = SurfaceStrategy { surface: &surface, initial_regime: regime };
    let prior = PriorPolicy::SignOfGradient { surface: &surface };
    let t_max = match problem.horizon() {
        Horizon::Finite { .. } => None,
        Horizon::Infinite => Some((20.0 / problem.discount()).min(200.0)),
    };
    let span = t_max.unwrap_or(match problem.horizon() {
        Horizon::Finite { t } => t,
        Horizon::Infinite => 1.0,
    });
    let config = SimConfig::new(2000, span / 2000.0, t_max, seed, x0);
    Ok(cost_bound_diagnostic(problem, &strategy, &prior, &config, q)?)
}

pub fn run(args: &ValidateArgs) -> Result<(), CliError> {
    let loaded = load_problem(&args.config)?;
    let problem = &loaded.problem;
    let x0 = reference_x0(problem, args.x0);
    let points = default_grid(problem, x0, 3)?.sample_points(args.samples);
    let constants = MomentConstants::defaults(problem);
    let report = validate_problem(problem, &points, &constants);

    println!("{:<20} {:<8} {:<9} {:>12}  detail", "check", "status", "severity", "margin");
    for e in &report.checks {
        let margin = e.margin.map(|m| format!("{m:.6e}")).unwrap_or_else(|| "-".into());
        let severity = format!("{:?}", e.severity).to_lowercase();
        println!("{:<20} {:<8} {:<9} {:>12}  {}", e.name, status_text(e.status), severity, margin, e.detail);
        if e.status == CheckStatus::Fail {
            if let Some(w) = &e.worst_witness {
                println!("{:<20} witness: {}", "", serde_json::to_string(w).unwrap_or_default());
            }
        }
    }

    let hard = report.has_hard_failure();
    let strong_failed = report.get(STRONG_TRIANGULAR).is_some_and(|e| e.status == CheckStatus::Fail);
    let probe = if strong_failed && !args.no_probe && !hard {
        let regime = match report.get(STRONG_TRIANGULAR).and_then(|e| e.worst_witness.as_ref()) {
            Some(Witness::Triple { i, .. }) => *i,
            _ => 0,
        };
        Some(match cost_probe(problem, x0, regime, constants.q, args.seed) {
            Ok(d) => {
                println!(
                    "note: strong triangular condition fails; cost probe from regime {} at x0 = {x0}: switching benefit {:.6e} ± {:.2e} vs growth bound {:.6e} (ratio {:.3})",
                    regime + 1,
                    d.estimate,
                    d.std_error,
                    d.bound,
                    d.ratio
                );
                ProbeOutcome::Done {
                    regime: regime + 1,
                    x0,
                    estimate: d.estimate,
                    std_error: d.std_error,
                    bound: d.bound,
                    ratio: d.ratio,
                    mean_switch_count: d.mean_switch_count,
                }
            }
            Err(e) => {
                println!("note: strong triangular condition fails; cost probe unavailable: {e}");
                ProbeOutcome::Failed { reason: e.to_string() }
            }
        })
    } else {
        if strong_failed {
            println!("note: strong triangular condition fails (advisory)");
        }
        None
    };

    if let Some(out) = &args.out {
        let prov = Provenance::new(&loaded.hash, probe.as_ref().map(|_| args.seed));
        let body = Report { checks: &report.checks, cost_probe: probe, hard_failure: hard };
        write_file(out, json_with_provenance(&prov, Some(problem), &body)?.as_bytes())?;
    }

    if hard {
        let names: Vec<&str> = report.hard_failures().map(|e| e.name.as_str()).collect();
        return Err(CliError::Validation(format!("hard check failed: {}", names.join(", "))));
    }
    println!("ok");
    Ok(())
}
