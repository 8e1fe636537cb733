//! `ambiswitch plot`: line charts from CSV columns as standalone SVG.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::error::CliError;
use crate::io::write_file;

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input CSV; lines starting with `#` are skipped.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Column for the horizontal axis.
    #[arg(long)]
    pub x: String,
    /// Columns to draw, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub y: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Logarithmic vertical axis.
    #[arg(long)]
    pub logy: bool,
    #[arg(long)]
    pub title: Option<String>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub fn read_columns(text: &str, x: &str, ys: &[String]) -> Result<Vec<Series>, CliError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Validation(format!(
                "column '{name}' not found (have: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let xi = find(x)?;
    let yi: Vec<usize> = ys.iter().map(|y| find(y)).collect::<Result<_, _>>()?;
    let mut series: Vec<Series> = ys.iter().map(|n| Series { name: n.clone(), points: Vec::new() }).collect();
    for record in reader.records() {
        let record = record?;
        let Some(xv) = record.get(xi).and_then(|s| s.trim().parse::<f64>().ok()) else {
            continue;
        };
        for (s, &c) in series.iter_mut().zip(&yi) {
            if let Some(yv) = record.get(c).and_then(|s| s.trim().parse::<f64>().ok()) {
                if xv.is_finite() && yv.is_finite() {
                    s.points.push((xv, yv));
                }
            }
        }
    }
    Ok(series)
}

/// Round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render(series: &[Series], x_name: &str, logy: bool, title: Option<&str>) -> Result<String, CliError> {
    let ty = |y: f64| if logy { y.log10() } else { y };
    let usable: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().copied().filter(|p| !logy || p.1 > 0.0).map(|(x, y)| (x, ty(y))).collect())
        .collect();
    let all: Vec<(f64, f64)> = usable.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(CliError::Validation("no plottable points".into()));
    }
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 - x0 <= 0.0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 <= 0.0 {
        let pad = if logy { 0.5 } else { 0.5 * y0.abs().max(1.0) };
        y0 -= pad;
        y1 += pad;
    } else if !logy {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if let Some(t) = title {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(t)
        );
    }
    let _ = writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##);
    for t in ticks(x0, x1) {
        let px = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444"/>"##,
            TOP + ph,
            TOP + ph + 4.0
        );
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, label(t));
    }
    let yticks: Vec<f64> = if logy {
        let (lo, hi) = (y0.floor() as i32, y1.ceil() as i32);
        (lo..=hi).map(f64::from).filter(|&e| e >= y0 - 1e-9 && e <= y1 + 1e-9).collect()
    } else {
        ticks(y0, y1)
    };
    for t in yticks {
        let py = sy(t);
        let text = if logy { label(10f64.powf(t)) } else { label(t) };
        let _ = writeln!(s, r##"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#444"/>"##, LEFT - 4.0);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#, LEFT - 6.0, py + 4.0);
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(x_name));
    for (k, (serie, pts)) in series.iter().zip(&usable).enumerate() {
        let color = COLORS[k % COLORS.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&serie.name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn run(args: &PlotArgs) -> Result<(), CliError> {
    let text =
        std::fs::read_to_string(&args.input).map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let series = read_columns(&text, &args.x, &args.y)?;
    let svg = render(&series, &args.x, args.logy, args.title.as_deref())?;
    write_file(&args.out, svg.as_bytes())?;
    println!("wrote {}", args.out.display());
    Ok(())
}
