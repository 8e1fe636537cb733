//! Discrete obstacle problems `min{ max_θ (A_θ u - f_θ), u - g } = 0` with
//! tridiagonal M-matrices `A_θ`.
//!
//! Two solvers are provided: policy iteration (outer loop on the prior
//! branch, inner loop on the active set, each step an exact tridiagonal
//! solve) and projected SOR.

use super::stencil::RegimeOperator;
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Method {
    Policy,
    Psor,
}

pub(crate) struct Problem<'a> {
    pub op: &'a RegimeOperator,
    pub extra_diag: f64,
    pub extra_rhs: Option<&'a [f64]>,
    pub obstacle: Option<&'a [f64]>,
}

pub(crate) struct Settings {
    pub method: Method,
    pub omega: f64,
    pub tol_psor: f64,
    pub max_psor: usize,
}

/// Workspace reused across calls to avoid reallocation.
pub(crate) struct Workspace {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
    cp: Vec<f64>,
    dp: Vec<f64>,
    branch: Vec<usize>,
    pub active: Vec<bool>,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Workspace {
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
            d: vec![0.0; n],
            cp: vec![0.0; n],
            dp: vec![0.0; n],
            branch: vec![0; n],
            active: vec![false; n],
        }
    }
}

/// Solves `a_k u_{k-1} + b_k u_k + c_k u_{k+1} = d_k`.
pub(crate) fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &[f64], cp: &mut [f64], dp: &mut [f64], u: &mut [f64]) {
    let n = b.len();
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for k in 1..n {
        let m = b[k] - a[k] * cp[k - 1];
        cp[k] = c[k] / m;
        dp[k] = (d[k] - a[k] * dp[k - 1]) / m;
    }
    u[n - 1] = dp[n - 1];
    for k in (0..n - 1).rev() {
        u[k] = dp[k] - cp[k] * u[k + 1];
    }
}

pub(crate) fn solve(p: &Problem, s: &Settings, u: &mut [f64], ws: &mut Workspace) -> Result<usize, SolverError> {
    match s.method {
        Method::Policy => solve_policy(p, u, ws),
        Method::Psor => solve_psor(p, s, u, ws),
    }
}

#[inline]
fn slack(x: f64, scale: f64) -> f64 {
    1e-13 * (1.0 + x.abs() + scale)
}

fn solve_policy(p: &Problem, u: &mut [f64], ws: &mut Workspace) -> Result<usize, SolverError> {
    let n = u.len();
    let op = p.op;
    let nb = op.branches.len();
    // initial prior branch from the warm start
    for k in 0..n {
        ws.branch[k] = best_branch(p, k, u, 0);
    }
    for k in 0..n {
        ws.active[k] = match p.obstacle {
            Some(g) => u[k] <= g[k],
            None => false,
        };
    }
    let mut total = 0;
    let max_outer = 50 + 2 * n;
    for _outer in 0..max_outer {
        let max_inner = n + 5;
        let mut settled = false;
        for _inner in 0..max_inner {
            total += 1;
            for k in 0..n {
                let br = &op.branches[ws.branch[k]];
                if ws.active[k] {
                    ws.a[k] = 0.0;
                    ws.b[k] = 1.0;
                    ws.c[k] = 0.0;
                    ws.d[k] = p.obstacle.map_or(0.0, |g| g[k]);
                } else {
                    ws.a[k] = -br.lower[k];
                    ws.b[k] = br.diag[k] + p.extra_diag;
                    ws.c[k] = -br.upper[k];
                    ws.d[k] = br.rhs[k] + p.extra_rhs.map_or(0.0, |e| e[k]);
                }
            }
            thomas(&ws.a, &ws.b, &ws.c, &ws.d, &mut ws.cp, &mut ws.dp, u);
            let Some(g) = p.obstacle else {
                settled = true;
                break;
            };
            let mut changed = false;
            for k in 0..n {
                let br = &op.branches[ws.branch[k]];
                let scale = br.diag[k] + p.extra_diag;
                let r = br.residual(k, u, p.extra_diag, p.extra_rhs);
                let ob = scale * (u[k] - g[k]);
                let eps = slack(r, scale * u[k].abs());
                if ws.active[k] {
                    if r < ob - eps {
                        ws.active[k] = false;
                        changed = true;
                    }
                } else if ob < r - eps {
                    ws.active[k] = true;
                    changed = true;
                }
            }
            if !changed {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(SolverError::InnerNotConverged { iterations: total });
        }
        if nb == 1 {
            return Ok(total);
        }
        let mut changed = false;
        for k in 0..n {
            let cur = ws.branch[k];
            let best = best_branch(p, k, u, cur);
            if best != cur {
                ws.branch[k] = best;
                changed = true;
            }
        }
        if !changed {
            return Ok(total);
        }
    }
    Err(SolverError::InnerNotConverged { iterations: total })
}

/// Branch with the largest residual at node `k`; keeps `current` on ties.
fn best_branch(p: &Problem, k: usize, u: &[f64], current: usize) -> usize {
    let op = p.op;
    let mut best = current.min(op.branches.len() - 1);
    let mut best_r = op.branches[best].residual(k, u, p.extra_diag, p.extra_rhs);
    for (b, br) in op.branches.iter().enumerate() {
        if b == best {
            continue;
        }
        let r = br.residual(k, u, p.extra_diag, p.extra_rhs);
        let scale = (br.diag[k] + p.extra_diag) * u[k].abs();
        if r > best_r + slack(best_r, scale) {
            best = b;
            best_r = r;
        }
    }
    best
}

fn solve_psor(p: &Problem, s: &Settings, u: &mut [f64], ws: &mut Workspace) -> Result<usize, SolverError> {
    let n = u.len();
    let op = p.op;
    for it in 1..=s.max_psor {
        let mut change: f64 = 0.0;
        let mut size: f64 = 0.0;
        for k in 0..n {
            let mut target = f64::INFINITY;
            for br in &op.branches {
                let mut num = br.rhs[k] + p.extra_rhs.map_or(0.0, |e| e[k]);
                if k > 0 {
                    num += br.lower[k] * u[k - 1];
                }
                if k + 1 < n {
                    num += br.upper[k] * u[k + 1];
                }
                target = target.min(num / (br.diag[k] + p.extra_diag));
            }
            let mut next = u[k] + s.omega * (target - u[k]);
            if let Some(g) = p.obstacle {
                next = next.max(g[k]);
            }
            change = change.max((next - u[k]).abs());
            size = size.max(next.abs());
            u[k] = next;
        }
        if change <= s.tol_psor * (1.0 + size) {
            for k in 0..n {
                ws.active[k] = p.obstacle.is_some_and(|g| u[k] <= g[k]);
            }
            return Ok(it);
        }
    }
    Err(SolverError::InnerNotConverged { iterations: s.max_psor })
}
