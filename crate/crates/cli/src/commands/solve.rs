//! `ambiswitch solve`: one solve by the chosen method.

use std::path::{Path, PathBuf};

use ambiswitch_core::closed_form::{
    classify_fund_strategy, fund_k, fund_thresholds, solve_smoothfit, value_buy_sell, FundGrid, FundThresholds,
    SmoothFitSolution, StrategyType,
};
use ambiswitch_core::pde::{extract_switching_regions, Direction, RegimeRegions, ValueSurface};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::CliError;
use crate::grid_args::{reference_x0, GridArgs};
use crate::io::{
    csv_with_provenance, json_with_provenance, load_problem, num, opt_num, write_file, Format, Provenance,
};
use crate::shapes::{buylow_params, fund_params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Pde,
    Smoothfit,
    Funds,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Pde)]
    pub method: Method,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Reference state for the printed value and the default grid.
    #[arg(long)]
    pub x0: Option<f64>,
    /// Output file; nothing is written without it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// With --method funds, skip the PDE threshold solve.
    #[arg(long)]
    pub no_thresholds: bool,
}

/// Up to 5 decimals, trailing zeros dropped.
pub fn short(v: f64) -> String {
    let s = format!("{v:.5}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn resolve_format(format: Option<Format>, out: &Path) -> Format {
    format.unwrap_or(match out.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    })
}

pub fn describe_regions(regions: &[RegimeRegions]) -> Vec<String> {
    regions
        .iter()
        .map(|r| {
            let i = r.regime + 1;
            if r.always {
                format!("regime {i}: switch everywhere")
            } else if let Some(t) = r.threshold {
                let dir = match t.direction {
                    Direction::Below => "<=",
                    Direction::Above => ">=",
                };
                format!("regime {i}: switch to {} when x {dir} {}", t.target + 1, t.level)
            } else if r.is_empty() {
                format!("regime {i}: never switch")
            } else {
                let parts: Vec<String> =
                    r.regions.iter().map(|g| format!("[{}, {}] -> {}", g.x_lo, g.x_hi, g.target + 1)).collect();
                format!("regime {i}: switch on {}", parts.join(", "))
            }
        })
        .collect()
}

#[derive(Serialize)]
struct PdeOutput<'a> {
    method: &'static str,
    x0: f64,
    value_at_x0: Vec<f64>,
    picard_iterations: usize,
    residual: f64,
    regions: &'a [RegimeRegions],
    surface: &'a ValueSurface,
}

#[derive(Serialize)]
struct SmoothFitOutput<'a> {
    method: &'static str,
    solution: &'a SmoothFitSolution,
}

#[derive(Serialize)]
struct FundOutput<'a> {
    method: &'static str,
    strategy: StrategyType,
    k1: f64,
    k2: f64,
    k1_no_ambiguity: f64,
    k2_no_ambiguity: f64,
    thresholds: Option<&'a FundThresholds>,
}

fn write_out(path: &Path, text: String) -> Result<(), CliError> {
    write_file(path, text.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_pde(args: &SolveArgs, prov: &Provenance, problem: &ambiswitch_core::SwitchingProblem) -> Result<(), CliError> {
    let x0 = reference_x0(problem, args.x0);
    let surface = args.grid.solve(problem, x0)?;
    let regions = extract_switching_regions(&surface);
    let values: Vec<f64> = (0..problem.regime_count()).map(|i| surface.value_at(0.0, x0, i)).collect();
    println!(
        "pde: {} nodes on [{}, {}], {} Picard iterations, residual {:.3e}",
        surface.grid.nx, surface.grid.x_min, surface.grid.x_max, surface.picard_iterations, surface.residual
    );
    for (i, v) in values.iter().enumerate() {
        println!("v(0, {x0}, {}) = {v}", i + 1);
    }
    for line in describe_regions(&regions) {
        println!("{line}");
    }
    if let Some(out) = &args.out {
        let text = match resolve_format(args.format, out) {
            Format::Json => json_with_provenance(
                prov,
                Some(problem),
                &PdeOutput {
                    method: "pde",
                    x0,
                    value_at_x0: values,
                    picard_iterations: surface.picard_iterations,
                    residual: surface.residual,
                    regions: &regions,
                    surface: &surface,
                },
            )?,
            Format::Csv => {
                let mut buf = Vec::new();
                surface.write_csv(&mut buf)?;
                let mut text = prov.csv_header();
                text.push_str(&String::from_utf8_lossy(&buf));
                text
            }
        };
        write_out(out, text)?;
    }
    Ok(())
}

fn run_smoothfit(
    args: &SolveArgs,
    prov: &Provenance,
    problem: &ambiswitch_core::SwitchingProblem,
) -> Result<(), CliError> {
    let params = buylow_params(problem)?;
    let sol = solve_smoothfit(&params)?;
    let c = &sol.conditions;
    println!("x1 = {}\nx2 = {}\nC1 = {}\nC2 = {}", sol.x1, sol.x2, sol.c1, sol.c2);
    println!("residual = {:.3e}", sol.residual);
    println!(
        "conditions: a02 {} a03 {} a04 {} a05 {} coefficients {} (all: {})",
        c.a02_ok,
        c.a03_ok,
        c.a04_ok,
        c.a05_ok,
        c.coefficients_ok,
        c.all_ok()
    );
    if sol.multiple_roots {
        println!(
            "note: {} distinct roots found; reporting the admissible one with the widest gap",
            sol.roots_found.len()
        );
    }
    if let Some(x0) = args.x0 {
        println!("v({x0}, 1) = {}\nv({x0}, 2) = {}", value_buy_sell(x0, 1, &sol), value_buy_sell(x0, 2, &sol));
    }
    if let Some(out) = &args.out {
        let text = match resolve_format(args.format, out) {
            Format::Json => {
                json_with_provenance(prov, Some(problem), &SmoothFitOutput { method: "smoothfit", solution: &sol })?
            }
            Format::Csv => csv_with_provenance(
                prov,
                &["kappa", "x1", "x2", "C1", "C2", "gap", "conditions_ok", "residual"],
                &[vec![
                    num(params.kappa),
                    num(sol.x1),
                    num(sol.x2),
                    num(sol.c1),
                    num(sol.c2),
                    num(sol.x2 - sol.x1),
                    c.all_ok().to_string(),
                    num(sol.residual),
                ]],
            )?,
        };
        write_out(out, text)?;
    }
    Ok(())
}

/// Fund grid from the shared flags: the fund default unless a domain is given.
pub fn fund_grid(grid: &GridArgs) -> FundGrid {
    let base = FundGrid::default();
    let solver = ambiswitch_core::pde::SolverConfig {
        tol_picard: grid.tol_picard,
        max_picard: grid.max_picard,
        solver: match grid.inner {
            crate::grid_args::InnerSolver::Policy => ambiswitch_core::pde::ObstacleSolver::Policy,
            crate::grid_args::InnerSolver::Psor => ambiswitch_core::pde::ObstacleSolver::Psor,
        },
        ..base.solver.clone()
    };
    FundGrid { x_min: grid.x_min.unwrap_or(base.x_min), x_max: grid.x_max.unwrap_or(base.x_max), nx: grid.nx, solver }
}

fn run_funds(args: &SolveArgs, prov: &Provenance, problem: &ambiswitch_core::SwitchingProblem) -> Result<(), CliError> {
    let params = fund_params(problem)?;
    let strategy = classify_fund_strategy(&params)?;
    let (k1, k2) = (fund_k(&params, 1, true)?, fund_k(&params, 2, true)?);
    println!("K1={} K2={} type={}", short(k1), short(k2), strategy.name());
    let thresholds = if args.no_thresholds {
        None
    } else {
        let t = fund_thresholds(&params, &fund_grid(&args.grid))?;
        println!("x_lower_1 = {}\nx_upper_2 = {}", opt_num(t.x_lower_1), opt_num(t.x_upper_2));
        if t.always_1 || t.always_2 {
            println!("always switch: fund 1 {}, fund 2 {}", t.always_1, t.always_2);
        }
        Some(t)
    };
    if let Some(out) = &args.out {
        let text = match resolve_format(args.format, out) {
            Format::Json => json_with_provenance(
                prov,
                Some(problem),
                &FundOutput {
                    method: "funds",
                    strategy,
                    k1,
                    k2,
                    k1_no_ambiguity: fund_k(&params, 1, false)?,
                    k2_no_ambiguity: fund_k(&params, 2, false)?,
                    thresholds: thresholds.as_ref(),
                },
            )?,
            Format::Csv => csv_with_provenance(
                prov,
                &["kappa1", "kappa2", "type", "K1", "K2", "x_lower_1", "x_upper_2"],
                &[vec![
                    num(params.kappa1),
                    num(params.kappa2),
                    strategy.name().into(),
                    num(k1),
                    num(k2),
                    thresholds.as_ref().map(|t| opt_num(t.x_lower_1)).unwrap_or_default(),
                    thresholds.as_ref().map(|t| opt_num(t.x_upper_2)).unwrap_or_default(),
                ]],
            )?,
        };
        write_out(out, text)?;
    }
    Ok(())
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let loaded = load_problem(&args.config)?;
    let prov = Provenance::new(&loaded.hash, None);
    match args.method {
        Method::Pde => run_pde(args, &prov, &loaded.problem),
        Method::Smoothfit => run_smoothfit(args, &prov, &loaded.problem),
        Method::Funds => run_funds(args, &prov, &loaded.problem),
    }
}
