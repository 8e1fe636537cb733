//! `ambiswitch sweep`: one solve per parameter value, one row per value.

use std::path::PathBuf;

use ambiswitch_core::closed_form::{classify_fund_strategy, fund_k, fund_thresholds, linspace, solve_smoothfit};
use ambiswitch_core::pde::{extract_switching_regions, Direction};
use ambiswitch_core::SwitchingProblem;
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::solve::{fund_grid, resolve_format};
use crate::error::CliError;
use crate::grid_args::{reference_x0, GridArgs};
use crate::io::{
    csv_with_provenance, json_with_provenance, load_problem, num, opt_num, write_file, Format, Provenance,
};
use crate::shapes::{buylow_params, fund_params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMethod {
    /// Smooth fit for buy-low problems, fund classification for fund problems, PDE otherwise.
    Auto,
    Pde,
    Smoothfit,
    Funds,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// `kappa` sets every regime; `kappaN` sets regime N (from 1).
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SweepMethod::Auto)]
    pub method: SweepMethod,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Reference state for PDE values and the default grid.
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Which `κ` entries a sweep sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    All,
    Regime(usize),
}

pub fn parse_param(name: &str, regimes: usize) -> Result<Target, CliError> {
    if name == "kappa" {
        return Ok(Target::All);
    }
    let n = name
        .strip_prefix("kappa")
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| CliError::Validation(format!("unknown sweep parameter '{name}' (use kappa or kappaN)")))?;
    if n == 0 || n > regimes {
        return Err(CliError::Validation(format!("'{name}': regime {n} out of range 1..={regimes}")));
    }
    Ok(Target::Regime(n - 1))
}

fn with_param(problem: &SwitchingProblem, target: Target, value: f64) -> Result<SwitchingProblem, CliError> {
    let mut kappa = problem.ambiguity().kappa.clone();
    match target {
        Target::All => kappa.fill(value),
        Target::Regime(i) => kappa[i] = value,
    }
    Ok(problem.with_kappa(kappa)?)
}

#[derive(Serialize)]
struct SweepResult<'a> {
    parameter: &'a str,
    method: &'static str,
    values: &'a [f64],
    columns: &'a [String],
    rows: &'a [Vec<String>],
}

type Row = Result<Vec<String>, String>;

fn smoothfit_row(p: &SwitchingProblem) -> Row {
    let params = buylow_params(p).map_err(|e| e.to_string())?;
    let s = solve_smoothfit(&params).map_err(|e| e.to_string())?;
    Ok(vec![
        num(s.x1),
        num(s.x2),
        num(s.c1),
        num(s.c2),
        num(s.x2 - s.x1),
        s.conditions.all_ok().to_string(),
        num(s.residual),
    ])
}

fn funds_row(p: &SwitchingProblem, grid: &GridArgs) -> Row {
    let params = fund_params(p).map_err(|e| e.to_string())?;
    let e = |e: ambiswitch_core::closed_form::FundError| e.to_string();
    let strategy = classify_fund_strategy(&params).map_err(e)?;
    let t = fund_thresholds(&params, &fund_grid(grid)).map_err(e)?;
    Ok(vec![
        strategy.name().into(),
        num(fund_k(&params, 1, true).map_err(e)?),
        num(fund_k(&params, 2, true).map_err(e)?),
        opt_num(t.x_lower_1),
        opt_num(t.x_upper_2),
        t.always_1.to_string(),
        t.always_2.to_string(),
    ])
}

fn pde_row(p: &SwitchingProblem, grid: &GridArgs, x0: f64) -> Row {
    let surface = grid.solve(p, x0).map_err(|e| e.to_string())?;
    let regions = extract_switching_regions(&surface);
    let mut row = Vec::new();
    for (i, r) in regions.iter().enumerate() {
        row.push(num(surface.value_at(0.0, x0, i)));
        match r.threshold {
            Some(t) => {
                row.push(num(t.level));
                row.push(match t.direction {
                    Direction::Below => "below".into(),
                    Direction::Above => "above".into(),
                });
                row.push((t.target + 1).to_string());
            }
            None => row.extend([String::new(), if r.always { "always".into() } else { String::new() }, String::new()]),
        }
    }
    row.push(surface.picard_iterations.to_string());
    Ok(row)
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    if args.steps < 2 {
        return Err(CliError::Validation("--steps must be at least 2".into()));
    }
    if !(args.from.is_finite() && args.to.is_finite()) || args.from > args.to {
        return Err(CliError::Validation("need finite --from <= --to".into()));
    }
    let loaded = load_problem(&args.config)?;
    let problem = &loaded.problem;
    let target = parse_param(&args.param, problem.regime_count())?;
    let method = match args.method {
        SweepMethod::Auto if buylow_params(problem).is_ok() => SweepMethod::Smoothfit,
        SweepMethod::Auto if fund_params(problem).is_ok() => SweepMethod::Funds,
        SweepMethod::Auto => SweepMethod::Pde,
        m => m,
    };
    let x0 = reference_x0(problem, args.x0);
    let values = linspace(args.from, args.to, args.steps);

    let (name, mut columns): (&'static str, Vec<String>) = match method {
        SweepMethod::Smoothfit => {
            ("smoothfit", ["x1", "x2", "C1", "C2", "gap", "conditions_ok", "residual"].map(String::from).to_vec())
        }
        SweepMethod::Funds => {
            ("funds", ["type", "K1", "K2", "x_lower_1", "x_upper_2", "always_1", "always_2"].map(String::from).to_vec())
        }
        _ => {
            let mut c = Vec::new();
            for i in 1..=problem.regime_count() {
                c.extend([
                    format!("value_{i}"),
                    format!("threshold_{i}"),
                    format!("direction_{i}"),
                    format!("target_{i}"),
                ]);
            }
            c.push("picard_iterations".into());
            ("pde", c)
        }
    };
    let width = columns.len();

    let results: Vec<Row> = values
        .par_iter()
        .map(|&v| {
            let p = with_param(problem, target, v).map_err(|e| e.to_string())?;
            match method {
                SweepMethod::Smoothfit => smoothfit_row(&p),
                SweepMethod::Funds => funds_row(&p, &args.grid),
                _ => pde_row(&p, &args.grid, x0),
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(values.len());
    let mut failures = 0;
    let mut previous_type: Option<String> = None;
    for (v, r) in values.iter().zip(results) {
        let mut row = vec![num(*v)];
        match r {
            Ok(cells) => {
                row.push("ok".into());
                if method == SweepMethod::Funds {
                    let changed = previous_type.as_ref().is_some_and(|p| *p != cells[0]);
                    previous_type = Some(cells[0].clone());
                    row.extend(cells);
                    row.push(changed.to_string());
                } else {
                    row.extend(cells);
                }
                row.push(String::new());
            }
            Err(e) => {
                failures += 1;
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), width + usize::from(method == SweepMethod::Funds)));
                row.push(e);
            }
        }
        rows.push(row);
    }
    if method == SweepMethod::Funds {
        columns.push("type_change".into());
    }
    let mut header = vec![args.param.clone(), "status".into()];
    header.extend(columns);
    header.push("error".into());

    let prov = Provenance::new(&loaded.hash, None);
    let text = match resolve_format(args.format, &args.out) {
        Format::Csv => {
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_with_provenance(&prov, &h, &rows)?
        }
        Format::Json => json_with_provenance(
            &prov,
            Some(problem),
            &SweepResult { parameter: &args.param, method: name, values: &values, columns: &header, rows: &rows },
        )?,
    };
    write_file(&args.out, text.as_bytes())?;
    println!("{} rows ({} failed) written to {}", rows.len(), failures, args.out.display());
    for row in rows.iter().filter(|r| r.last().is_some_and(|e| !e.is_empty())) {
        println!("  {} = {}: {}", args.param, row[0], row.last().unwrap());
    }
    Ok(())
}
