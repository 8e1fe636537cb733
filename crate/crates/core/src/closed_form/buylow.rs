//! Buy-low sell-high trading of a mean-reverting log price under ambiguity.
//!
//! Regime 1 is flat, regime 2 is long one unit. With `m = √(2a)/σ` and
//! `λ = ρ/a`, the continuation values are `C_1 φ_1` (flat) and `C_2 φ_2`
//! (long), where
//!
//! ```text
//! φ_1(x)  = ∫ t^{λ-1} exp(-t²/2 + m(b + κσ/a - x) t) dt
//! φ_2(x)  = ∫ t^{λ-1} exp(-t²/2 - m(b - κσ/a - x) t) dt
//! ```
//!
//! and the starred versions carry `t^λ`. Smooth fit at the buy level `x_1`
//! and the sell level `x_2` requires
//!
//! ```text
//! (C_1, C_2) = e^{x_1}(1+K) M(x_1)^{-1} (1, 1/m) = e^{x_2}(1-K) M(x_2)^{-1} (1, 1/m),
//! M(x) = [[-φ_1, φ_2], [φ_1*, φ_2*]].
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::quadrature::moment_integral;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmoothFitError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("no smooth-fit root in the search box [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("ill-conditioned smooth-fit matrix at x = {0}")]
    Singular(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuyLowParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub rho: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub kappa: f64,
}

impl BuyLowParams {
    /// `a = 0.8, b = 2, σ = 0.5, ρ = 0.5, K = 0.01`.
    pub fn reference(kappa: f64) -> Self {
        BuyLowParams { a: 0.8, b: 2.0, sigma: 0.5, rho: 0.5, k: 0.01, kappa }
    }

    pub fn validate(&self) -> Result<(), SmoothFitError> {
        let ok = self.a > 0.0
            && self.sigma > 0.0
            && self.rho > 0.0
            && self.k > 0.0
            && self.k < 1.0
            && self.kappa >= 0.0
            && self.b.is_finite()
            && self.kappa.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SmoothFitError::Params(format!("{self:?}")))
        }
    }

    pub fn m(&self) -> f64 {
        (2.0 * self.a).sqrt() / self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.rho / self.a
    }

    /// Stationary standard deviation `σ/√(2a)`.
    pub fn stationary_std(&self) -> f64 {
        self.sigma / (2.0 * self.a).sqrt()
    }

    fn beta1(&self, x: f64) -> f64 {
        self.m() * (self.b + self.kappa * self.sigma / self.a - x)
    }

    fn beta2(&self, x: f64) -> f64 {
        -self.m() * (self.b - self.kappa * self.sigma / self.a - x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    Phi1,
    Phi2,
    Phi1Star,
    Phi2Star,
}

pub fn phi_integral(x: f64, params: &BuyLowParams, variant: PhiVariant) -> f64 {
    let lam = params.lambda();
    match variant {
        PhiVariant::Phi1 => moment_integral(lam, 0, params.beta1(x)),
        PhiVariant::Phi1Star => moment_integral(lam, 1, params.beta1(x)),
        PhiVariant::Phi2 => moment_integral(lam, 0, params.beta2(x)),
        PhiVariant::Phi2Star => moment_integral(lam, 1, params.beta2(x)),
    }
}

/// `(φ_1, φ_1*, φ_2, φ_2*)` at `x`.
fn phis(x: f64, p: &BuyLowParams) -> [f64; 4] {
    [
        phi_integral(x, p, PhiVariant::Phi1),
        phi_integral(x, p, PhiVariant::Phi1Star),
        phi_integral(x, p, PhiVariant::Phi2),
        phi_integral(x, p, PhiVariant::Phi2Star),
    ]
}

/// `M(x)^{-1} (1, 1/m)` by the explicit 2×2 inverse.
fn unit_coefficients(x: f64, p: &BuyLowParams) -> Result<[f64; 2], SmoothFitError> {
    let [f1, f1s, f2, f2s] = phis(x, p);
    let m = p.m();
    let det = -f1 * f2s - f2 * f1s;
    let size = (f1 * f2s).abs() + (f2 * f1s).abs();
    if !(det.abs() > 1e-12 * size) || !det.is_finite() {
        return Err(SmoothFitError::Singular(x));
    }
    Ok([(f2s - f2 / m) / det, (-f1s - f1 / m) / det])
}

fn coefficients_at(x: f64, scale: f64, p: &BuyLowParams) -> Result<[f64; 2], SmoothFitError> {
    let u = unit_coefficients(x, p)?;
    let e = x.exp() * scale;
    Ok([e * u[0], e * u[1]])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conditions {
    /// `min` over `(x_1, x_2)` of both value-dominance gaps.
    pub a02_margin: f64,
    pub a02_ok: bool,
    /// Bound minus `x_1`.
    pub a03_margin: f64,
    pub a03_ok: bool,
    /// `x_2` minus bound.
    pub a04_margin: f64,
    pub a04_ok: bool,
    /// `x_2 - x_1 - log((1+K)/(1-K))`.
    pub a05_margin: f64,
    pub a05_ok: bool,
    pub coefficients_ok: bool,
}

impl Conditions {
    pub fn all_ok(&self) -> bool {
        self.a02_ok && self.a03_ok && self.a04_ok && self.a05_ok && self.coefficients_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFitSolution {
    pub params: BuyLowParams,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub x1: f64,
    pub x2: f64,
    pub conditions: Conditions,
    /// Dimensionless norm of the two smooth-fit equations at the root.
    pub residual: f64,
    /// Distinct roots located by the pre-scan, `(x_1, x_2)`.
    pub roots_found: Vec<(f64, f64)>,
    pub multiple_roots: bool,
}

/// Dimensionless smooth-fit equations: first-coefficient mismatch relative to
/// `C_2`, and the log ratio of the second coefficients.
fn equations(z: [f64; 2], p: &BuyLowParams) -> Result<[f64; 2], SmoothFitError> {
    let ca = coefficients_at(z[0], 1.0 + p.k, p)?;
    let cb = coefficients_at(z[1], 1.0 - p.k, p)?;
    Ok([(ca[0] - cb[0]) / ca[1], (ca[1] / cb[1]).ln()])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Damped Newton with a central-difference Jacobian, confined to `[lo, hi]²`.
fn newton(mut z: [f64; 2], lo: f64, hi: f64, p: &BuyLowParams) -> Option<([f64; 2], f64)> {
    let mut f = equations(z, p).ok()?;
    for _ in 0..60 {
        if norm(f) < 1e-14 {
            return Some((z, norm(f)));
        }
        let h = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[c] += h;
            zm[c] -= h;
            let fp = equations(zp, p).ok()?;
            let fm = equations(zm, p).ok()?;
            jac[0][c] = (fp[0] - fm[0]) / (2.0 * h);
            jac[1][c] = (fp[1] - fm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let d = [-(jac[1][1] * f[0] - jac[0][1] * f[1]) / det, -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det];
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-6 {
            let zn = [z[0] + t * d[0], z[1] + t * d[1]];
            if zn[0] >= lo && zn[0] <= hi && zn[1] >= lo && zn[1] <= hi {
                if let Ok(fnew) = equations(zn, p) {
                    if norm(fnew) < norm(f) {
                        accepted = Some((zn, fnew));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let (zn, fnew) = accepted?;
        let step = (zn[0] - z[0]).abs().max((zn[1] - z[1]).abs());
        z = zn;
        f = fnew;
        if step < 1e-13 {
            break;
        }
    }
    let r = norm(f);
    (r < 1e-10).then_some((z, r))
}

/// Candidate roots from a scan of the box. With `r = g_1/g_2` and
/// `h = e^x g_2` built from `M(x)^{-1}(1, 1/m) = (g_1, g_2)`, a root solves
/// `r(x_1) = r(x_2)` and `ln h(x_2) - ln h(x_1) = ln((1+K)/(1-K))`.
fn prescan(lo: f64, hi: f64, n: usize, p: &BuyLowParams) -> Vec<[f64; 2]> {
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    let mut r = Vec::with_capacity(n);
    let mut lh = Vec::with_capacity(n);
    for &x in &xs {
        match unit_coefficients(x, p) {
            Ok(u) if u[1] > 0.0 => {
                r.push(u[0] / u[1]);
                lh.push(x + u[1].ln());
            }
            _ => {
                r.push(f64::NAN);
                lh.push(f64::NAN);
            }
        }
    }
    let target = ((1.0 + p.k) / (1.0 - p.k)).ln();
    // crossings[i] = list of (j, x2, D) for x1 = xs[i]
    let mut crossings: Vec<Vec<(usize, f64, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        for j in i + 1..n - 1 {
            let (a, b) = (r[j] - r[i], r[j + 1] - r[i]);
            if !(a.is_finite() && b.is_finite()) || a * b > 0.0 || a == b {
                continue;
            }
            let w = a / (a - b);
            let x2 = xs[j] + w * (xs[j + 1] - xs[j]);
            let l2 = lh[j] + w * (lh[j + 1] - lh[j]);
            row.push((j, x2, l2 - lh[i] - target));
        }
        crossings.push(row);
    }
    let mut out = Vec::new();
    for i in 0..n - 1 {
        for &(j, x2a, da) in &crossings[i] {
            for &(jb, x2b, db) in &crossings[i + 1] {
                if (jb as isize - j as isize).abs() <= 1 && da * db <= 0.0 && da != db {
                    let w = da / (da - db);
                    out.push([xs[i] + w * (xs[i + 1] - xs[i]), x2a + w * (x2b - x2a)]);
                }
            }
        }
    }
    out
}

/// Solves the smooth-fit system for `(x_1, x_2, C_1, C_2)` and evaluates the
/// verification conditions at the root.
pub fn solve_smoothfit(params: &BuyLowParams) -> Result<SmoothFitSolution, SmoothFitError> {
    params.validate()?;
    let m = params.m();
    let lo = params.b - 5.0 / m;
    let hi = params.b + 5.0 / m;

    let mut roots: Vec<([f64; 2], f64)> = Vec::new();
    let push = |z: [f64; 2], res: f64, roots: &mut Vec<([f64; 2], f64)>| {
        if z[1] - z[0] <= 0.0 {
            return;
        }
        if roots.iter().all(|(w, _)| (w[0] - z[0]).abs() + (w[1] - z[1]).abs() > 1e-7) {
            roots.push((z, res));
        }
    };
    if let Some((z, res)) = newton([params.b - 1.0 / m, params.b + 1.0 / m], lo, hi, params) {
        push(z, res, &mut roots);
    }
    for cand in prescan(lo, hi, 241, params) {
        if let Some((z, res)) = newton(cand, lo, hi, params) {
            push(z, res, &mut roots);
        }
    }
    if roots.is_empty() {
        return Err(SmoothFitError::NoRoot { lo, hi });
    }
    let mut candidates: Vec<SmoothFitSolution> =
        roots.iter().map(|&(z, res)| assemble(params, z, res)).collect::<Result<_, _>>()?;
    let roots_found: Vec<(f64, f64)> = roots.iter().map(|(z, _)| (z[0], z[1])).collect();
    // prefer roots passing every condition, then the widest gap
    candidates.sort_by(|a, b| {
        b.conditions.all_ok().cmp(&a.conditions.all_ok()).then((b.x2 - b.x1).total_cmp(&(a.x2 - a.x1)))
    });
    let mut best = candidates.swap_remove(0);
    best.multiple_roots = roots_found.len() > 1;
    best.roots_found = roots_found;
    Ok(best)
}

fn assemble(params: &BuyLowParams, z: [f64; 2], residual: f64) -> Result<SmoothFitSolution, SmoothFitError> {
    let c = coefficients_at(z[0], 1.0 + params.k, params)?;
    let mut sol = SmoothFitSolution {
        params: *params,
        c1: c[0],
        c2: c[1],
        x1: z[0],
        x2: z[1],
        conditions: Conditions {
            a02_margin: 0.0,
            a02_ok: false,
            a03_margin: 0.0,
            a03_ok: false,
            a04_margin: 0.0,
            a04_ok: false,
            a05_margin: 0.0,
            a05_ok: false,
            coefficients_ok: false,
        },
        residual,
        roots_found: vec![(z[0], z[1])],
        multiple_roots: false,
    };
    sol.conditions = conditions(&sol);
    Ok(sol)
}

fn conditions(sol: &SmoothFitSolution) -> Conditions {
    let p = &sol.params;
    let (a, b, s, rho, k, kappa) = (p.a, p.b, p.sigma, p.rho, p.k, p.kappa);
    let (x1, x2) = (sol.x1, sol.x2);
    let mut a02: f64 = f64::INFINITY;
    let n = 201;
    for q in 0..n {
        let x = x1 + (x2 - x1) * q as f64 / (n - 1) as f64;
        let v1 = sol.c1 * phi_integral(x, p, PhiVariant::Phi1);
        let v2 = sol.c2 * phi_integral(x, p, PhiVariant::Phi2);
        let g1 = v1 - (v2 - x.exp() * (1.0 + k));
        let g2 = v2 - (v1 + x.exp() * (1.0 - k));
        a02 = a02.min(g1.min(g2));
    }
    let a02_tol = 1e-9 * (1.0 + x2.exp());
    let a03 = (0.5 * s * s + a * b + kappa * s - rho) / a - x1;
    let a04 = x2 - (0.5 * s * s + a * b - kappa * s - rho) / a;
    let a05 = x2 - x1 - ((1.0 + k) / (1.0 - k)).ln();
    Conditions {
        a02_margin: a02,
        a02_ok: a02 >= -a02_tol,
        a03_margin: a03,
        a03_ok: a03 >= 0.0,
        a04_margin: a04,
        a04_ok: a04 >= 0.0,
        a05_margin: a05,
        a05_ok: a05 > 0.0,
        coefficients_ok: sol.c1 >= 0.0 && sol.c2 >= 0.0,
    }
}

/// Assembled value `v(x, regime)` with regimes numbered `1` (flat) and `2` (long).
pub fn value_buy_sell(x: f64, regime: usize, sol: &SmoothFitSolution) -> f64 {
    let p = &sol.params;
    let v1 = |x: f64| sol.c1 * phi_integral(x, p, PhiVariant::Phi1);
    let v2 = |x: f64| sol.c2 * phi_integral(x, p, PhiVariant::Phi2);
    match regime {
        1 => {
            if x > sol.x1 {
                v1(x)
            } else {
                v2(x) - x.exp() * (1.0 + p.k)
            }
        }
        2 => {
            if x < sol.x2 {
                v2(x)
            } else {
                v1(x) + x.exp() * (1.0 - p.k)
            }
        }
        _ => panic!("buy-low-sell-high has regimes 1 and 2"),
    }
}
