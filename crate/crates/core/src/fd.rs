//! Crank–Nicolson reference solver for the normalized pricing PDE.
//!
//! Marches from expiry (`t = 0`) to the valuation date (`t = 1`) on a uniform
//! `(n_t + 1) × (n_s + 1)` lattice, solving
//! `(1/T) V_t = ½σ*²s²V_ss + ηsV_s − rV − β` with central differences in `s`.
//! Coefficients are frozen at the midpoint of each time step and the interior
//! tridiagonal systems are solved with the Thomas algorithm.

use crate::error::{Error, Result};
use crate::model::PdeProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FdGrid {
    pub n_s: usize,
    pub n_t: usize,
}

impl FdGrid {
    pub fn new(n_s: usize, n_t: usize) -> Result<Self> {
        if n_s < 3 {
            return Err(Error::invalid("n_s", "need at least 3 price intervals"));
        }
        if n_t < 1 {
            return Err(Error::invalid("n_t", "need at least 1 time step"));
        }
        Ok(FdGrid { n_s, n_t })
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.n_s as f64
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.n_t as f64
    }
}

/// Solver switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FdOptions {
    /// Replace the first two Crank–Nicolson steps by four implicit Euler
    /// half-steps to damp the payoff kink.
    pub rannacher: bool,
}

/// Normalized option values on the lattice, row `j` at `t_j = j / n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub grid: FdGrid,
    values: Vec<f64>,
}

impl FdSolution {
    pub fn value(&self, j: usize, i: usize) -> f64 {
        self.values[j * (self.grid.n_s + 1) + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.grid.n_s + 1;
        &self.values[j * w..(j + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 / self.grid.n_t as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 / self.grid.n_s as f64
    }

    /// Bilinear interpolation at `(t, s)` in the unit square.
    pub fn interpolate(&self, t: f64, s: f64) -> f64 {
        let (j0, j1, wt) = bracket(t, self.grid.n_t);
        let (i0, i1, ws) = bracket(s, self.grid.n_s);
        let lerp = |j: usize| self.value(j, i0) * (1.0 - ws) + self.value(j, i1) * ws;
        lerp(j0) * (1.0 - wt) + lerp(j1) * wt
    }
}

fn bracket(x: f64, n: usize) -> (usize, usize, f64) {
    let pos = x.clamp(0.0, 1.0) * n as f64;
    let lo = (pos.floor() as usize).min(n - 1);
    let w = pos - lo as f64;
    // Snap coordinates within rounding distance of a node.
    if w <= 1e-9 {
        (lo, lo, 0.0)
    } else if w >= 1.0 - 1e-9 {
        (lo + 1, lo + 1, 0.0)
    } else {
        (lo, lo + 1, w)
    }
}

/// Solves `a x_{i-1} + b x_i + c x_{i+1} = d` in place; `d` receives `x`.
/// `a[0]` and `c[n-1]` are ignored.
pub fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

struct Workspace {
    lo: Vec<f64>,
    di: Vec<f64>,
    up: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(m: usize) -> Self {
        let z = || vec![0.0; m];
        Workspace {
            lo: z(),
            di: z(),
            up: z(),
            a: z(),
            b: z(),
            c: z(),
            rhs: z(),
            scratch: z(),
        }
    }
}

/// One θ-scheme step of normalized length `dt` from `old` to `new`.
#[allow(clippy::too_many_arguments)]
fn theta_step(
    pde: &PdeProblem,
    n_s: usize,
    t_mid: f64,
    dt: f64,
    theta: f64,
    upper_new: f64,
    old: &[f64],
    new: &mut [f64],
    ws: &mut Workspace,
) {
    let t_cal = pde.calendar_time(t_mid);
    let sig2 = pde.sigma_star_sq(t_cal);
    let eta = pde.eta(t_cal);
    let slope = pde.beta_slope(t_cal);
    let scale = dt * pde.maturity;
    let h = 1.0 / n_s as f64;

    for k in 0..n_s - 1 {
        let i = (k + 1) as f64;
        let diff = 0.5 * sig2 * i * i;
        let conv = 0.5 * eta * i;
        ws.lo[k] = scale * (diff - conv);
        ws.di[k] = scale * (-2.0 * diff - pde.rate);
        ws.up[k] = scale * (diff + conv);
    }
    let last = n_s - 2;
    for k in 0..n_s - 1 {
        let i = k + 1;
        let explicit = ws.lo[k] * old[i - 1] + ws.di[k] * old[i] + ws.up[k] * old[i + 1];
        ws.rhs[k] = old[i] + (1.0 - theta) * explicit - scale * slope * (i as f64 * h);
        ws.a[k] = -theta * ws.lo[k];
        ws.b[k] = 1.0 - theta * ws.di[k];
        ws.c[k] = -theta * ws.up[k];
    }
    // Lower boundary value is zero; only the upper one feeds the system.
    ws.rhs[last] += theta * ws.up[last] * upper_new;

    thomas(&ws.a, &ws.b, &ws.c, &mut ws.rhs, &mut ws.scratch);
    new[0] = 0.0;
    new[1..n_s].copy_from_slice(&ws.rhs[..n_s - 1]);
    new[n_s] = upper_new;
}

/// Crank–Nicolson solve with default options.
pub fn solve_crank_nicolson(pde: &PdeProblem, grid: FdGrid) -> Result<FdSolution> {
    solve_with(pde, grid, FdOptions::default())
}

/// Crank–Nicolson solve.
pub fn solve_with(pde: &PdeProblem, grid: FdGrid, opts: FdOptions) -> Result<FdSolution> {
    let grid = FdGrid::new(grid.n_s, grid.n_t)?;
    let (n_s, n_t) = (grid.n_s, grid.n_t);
    let w = n_s + 1;
    let mut values = vec![0.0; (n_t + 1) * w];
    for (i, v) in values[..w].iter_mut().enumerate() {
        *v = pde.initial_condition(i as f64 / n_s as f64);
    }
    let mut ws = Workspace::new(n_s - 1);
    let mut tmp = vec![0.0; w];
    let dt = grid.dt();

    for j in 0..n_t {
        let t0 = j as f64 * dt;
        let (head, tail) = values.split_at_mut((j + 1) * w);
        let old = &head[j * w..];
        let new = &mut tail[..w];
        if opts.rannacher && j < 2 {
            let half = 0.5 * dt;
            let t_half = t0 + half;
            theta_step(
                pde,
                n_s,
                t0 + 0.5 * half,
                half,
                1.0,
                pde.upper_boundary(t_half),
                old,
                &mut tmp,
                &mut ws,
            );
            let mid = tmp.clone();
            theta_step(
                pde,
                n_s,
                t_half + 0.5 * half,
                half,
                1.0,
                pde.upper_boundary(t0 + dt),
                &mid,
                new,
                &mut ws,
            );
        } else {
            theta_step(
                pde,
                n_s,
                t0 + 0.5 * dt,
                dt,
                0.5,
                pde.upper_boundary(t0 + dt),
                old,
                new,
                &mut ws,
            );
        }
        if new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: j + 1 });
        }
    }
    Ok(FdSolution { grid, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::btc_model;
    use crate::model::{build_pde, SentimentPathPolicy};
    use crate::simulate::closed_form_bs;

    #[test]
    fn thomas_solves_small_system() {
        let a = [0.0, 1.0, 1.0];
        let b = [2.0, 3.0, 4.0];
        let c = [1.0, 1.0, 0.0];
        let x = [1.0, 2.0, 3.0];
        let mut d = [
            b[0] * x[0] + c[0] * x[1],
            a[1] * x[0] + b[1] * x[1] + c[1] * x[2],
            a[2] * x[1] + b[2] * x[2],
        ];
        let mut s = [0.0; 3];
        thomas(&a, &b, &c, &mut d, &mut s);
        for k in 0..3 {
            assert!((d[k] - x[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert!(FdGrid::new(2, 10).is_err());
        assert!(FdGrid::new(10, 0).is_err());
    }

    #[test]
    fn conditions_hold_on_btc_parameters() {
        let pde = build_pde(&btc_model(), SentimentPathPolicy::MeanPath).unwrap();
        let sol = solve_crank_nicolson(&pde, FdGrid::new(90, 30).unwrap()).unwrap();
        for i in 0..=90 {
            assert_eq!(sol.value(0, i), (sol.s(i) - pde.strike_ratio).max(0.0));
        }
        for j in 0..=30 {
            assert_eq!(sol.value(j, 0), 0.0);
            assert!((sol.value(j, 90) * 63577.0 / 33577.0 - 1.0).abs() < 1e-12);
        }
        assert!(sol.values().iter().all(|v| *v >= -1e-10));
    }

    #[test]
    fn coarse_grid_tracks_closed_form() {
        let pde = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        let sol = solve_crank_nicolson(&pde, FdGrid::new(100, 100).unwrap()).unwrap();
        let v = sol.interpolate(1.0, 0.5);
        let bs = closed_form_bs(0.5, 0.5, 0.05, 0.2, 1.0);
        assert!((v - bs).abs() < 5e-3, "{v} vs {bs}");
    }

    #[test]
    fn interpolation_is_exact_on_nodes() {
        let pde = PdeProblem::black_scholes(0.2, 0.05, 1.0, 0.5);
        let sol = solve_crank_nicolson(&pde, FdGrid::new(10, 4).unwrap()).unwrap();
        assert_eq!(sol.interpolate(0.5, 0.3), sol.value(2, 3));
        assert_eq!(sol.interpolate(1.0, 1.0), sol.value(4, 10));
    }
}
