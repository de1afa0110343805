//! Reaction-diffusion growth on the lower wall strip `[−5, 5] × [−2, −1]`.
//!
//! ```text
//! ∂ₜc = D Δc + s R c (1 − c)     in the strip
//! D ∂ₙc = γ̄                      on y = −1 (the fluid interface)
//! c = 0                           on x = ±5 and y = −2
//! ```
//!
//! Time stepping is the linearized IMEX scheme
//!
//! ```text
//! (c⁺ − c)/δt − D Δₕ c⁺ = s R [θ c⁺ (1 − c) + (1 − θ) c (1 − c⁺)]
//! ```
//!
//! which is linear in `c⁺`. Space is the 5-point finite difference stencil on
//! a uniform `nx × ny` grid. Unknowns are all nodes off the Dirichlet
//! boundary, including the interface row. The Neumann condition is imposed
//! with a ghost row, `c_{j+1} = c_{j−1} + 2 δy γ̄ / D`, and the interface
//! equations are halved so the system matrix is symmetric. It is solved with
//! Jacobi-preconditioned conjugate gradients.

use alloc::vec;
use alloc::vec::Vec;

use super::{delta_weight, gamma_pde, positive, GrowthModel, GrowthParams, InterfaceProfile};
use crate::error::{Error, Result};
use crate::math;
use crate::microflow::{Channel, WssSeries};

pub const X_MIN: f64 = -5.0;
pub const X_MAX: f64 = 5.0;
pub const Y_MIN: f64 = -2.0;
pub const Y_MAX: f64 = -1.0;

/// Uniform node grid on the strip. `j = 0` is the bottom row `y = −2`,
/// `j = ny − 1` the interface `y = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { nx: 101, ny: 11 }
    }
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < 3 {
            return Err(Error::Domain { what: "nx", value: nx as f64 });
        }
        if ny < 2 {
            return Err(Error::Domain { what: "ny", value: ny as f64 });
        }
        Ok(Grid { nx, ny })
    }

    pub fn dx(&self) -> f64 {
        (X_MAX - X_MIN) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (Y_MAX - Y_MIN) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        // Symmetric evaluation keeps x(i) = −x(nx−1−i) exactly.
        let half = 0.5 * (self.nx - 1) as f64;
        (i as f64 - half) * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        Y_MIN + j as f64 * self.dy()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn top(&self) -> usize {
        self.ny - 1
    }

    /// Column of the interface midpoint `x = 0`.
    pub fn midpoint_column(&self) -> Result<usize> {
        if self.nx % 2 == 1 {
            Ok((self.nx - 1) / 2)
        } else {
            Err(Error::GridMisaligned { what: "interface midpoint x = 0" })
        }
    }

    fn unknowns(&self) -> (usize, usize) {
        (self.nx - 2, self.ny - 1)
    }
}

/// Nodal values, row-major with `index = j·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(x, y)` at all nodes, then zeroes the Dirichlet boundary.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Field::zeros(grid);
        for j in 1..grid.ny {
            for i in 1..grid.nx - 1 {
                out.values[grid.index(i, j)] = f(grid.x(i), grid.y(j));
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn top_row(&self) -> &[f64] {
        let start = self.grid.index(0, self.grid.top());
        &self.values[start..start + self.grid.nx]
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest `|c(x, y) − c(−x, y)|`.
    pub fn asymmetry(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        for j in 0..g.ny {
            for i in 0..g.nx / 2 {
                worst = worst.max((self.get(i, j) - self.get(g.nx - 1 - i, j)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub field: Field,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(grid: Grid) -> Self {
        FieldState { field: Field::zeros(grid), t: 0.0 }
    }
}

/// Concentration at `(0, −1)`.
pub fn interface_midpoint(state: &FieldState) -> Result<f64> {
    let g = state.field.grid;
    Ok(state.field.get(g.midpoint_column()?, g.top()))
}

/// `∫_Γ c dx`, trapezoidal rule on the interface row.
pub fn interface_integral(state: &FieldState) -> f64 {
    let row = state.field.top_row();
    let inner: f64 = row[1..row.len() - 1].iter().sum();
    state.field.grid.dx() * (inner + 0.5 * (row[0] + row[row.len() - 1]))
}

/// Interface average `∫_Γ c dx / |Γ|`.
pub fn interface_mean(state: &FieldState) -> f64 {
    interface_integral(state) / (X_MAX - X_MIN)
}

/// Largest step for which the scheme keeps `c ≥ 0` given `c ≤ 1` and `γ̄ ≥ 0`:
/// production needs `δt < 1/(Rθ)`, consumption `δt ≤ 1/(R(1−θ))`.
pub fn positivity_dt_limit(p: &GrowthParams) -> f64 {
    let rate = match p.reaction_sign {
        super::ReactionSign::Production => p.r_s * p.theta,
        super::ReactionSign::Consumption => p.r_s * (1.0 - p.theta),
    };
    if rate > 0.0 {
        1.0 / rate
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual `‖b − Ax‖₂ / ‖b‖₂`.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tol: 1e-12, max_iter: 10_000 }
    }
}

/// The symmetric 5-point system of one IMEX step.
///
/// Unknown `u = (j−1)·(nx−2) + (i−1)` for `i = 1..nx−2`, `j = 1..ny−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexSystem {
    ni: usize,
    nj: usize,
    diag: Vec<f64>,
    /// East/west coupling per row `j`.
    cx: Vec<f64>,
    /// North/south coupling (the same in every row after halving the top row).
    cy: f64,
    rhs: Vec<f64>,
}

impl ImexSystem {
    pub fn dim(&self) -> usize {
        self.ni * self.nj
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let ni = self.ni;
        for jj in 0..self.nj {
            let cx = self.cx[jj];
            for ii in 0..ni {
                let u = jj * ni + ii;
                let mut s = self.diag[u] * x[u];
                if ii > 0 {
                    s += cx * x[u - 1];
                }
                if ii + 1 < ni {
                    s += cx * x[u + 1];
                }
                if jj > 0 {
                    s += self.cy * x[u - ni];
                }
                if jj + 1 < self.nj {
                    s += self.cy * x[u + ni];
                }
                y[u] = s;
            }
        }
    }

    /// Dense copy of the matrix, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for k in 0..n {
            e[k] = 1.0;
            self.apply(&e, &mut col);
            for (r, v) in col.iter().enumerate() {
                a[r][k] = *v;
            }
            e[k] = 0.0;
        }
        a
    }

    /// Jacobi-preconditioned CG from the initial guess `x`.
    pub fn solve(&self, x: &mut [f64], opts: &SolverOptions) -> Result<usize> {
        let n = self.dim();
        let b_norm = norm(&self.rhs);
        if b_norm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut ax = vec![0.0; n];
        self.apply(x, &mut ax);
        let mut r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let inv_diag: Vec<f64> = self.diag.iter().map(|d| 1.0 / d).collect();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, m)| r * m).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for it in 0..=opts.max_iter {
            let res = norm(&r) / b_norm;
            if res <= opts.rel_tol {
                return Ok(it);
            }
            if it == opts.max_iter || !res.is_finite() {
                return Err(Error::LinearSolver { iterations: it, residual: res });
            }
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::LinearSolver { iterations: it, residual: res });
            }
            let step = rz / pap;
            for k in 0..n {
                x[k] += step * p[k];
                r[k] -= step * ap[k];
                z[k] = r[k] * inv_diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        unreachable!()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Assembles the IMEX system for one step of size `dt` from `state`.
///
/// `source`, if given, is an extra volume forcing sampled at the new time on
/// the full grid (used by manufactured solutions).
pub fn assemble_imex(
    state: &FieldState,
    gamma_bar: &InterfaceProfile,
    dt: f64,
    p: &GrowthParams,
    source: Option<&[f64]>,
) -> Result<ImexSystem> {
    positive("dt", dt)?;
    let g = state.field.grid;
    if gamma_bar.len() != g.nx {
        return Err(Error::Config(alloc::format!(
            "interface profile has {} values, grid has {} columns",
            gamma_bar.len(),
            g.nx
        )));
    }
    if let Some(f) = source {
        if f.len() != g.len() {
            return Err(Error::Config(alloc::format!("source has {} values, grid has {}", f.len(), g.len())));
        }
    }
    let (ni, nj) = g.unknowns();
    let (dx, dy) = (g.dx(), g.dy());
    let kx = p.d_s / (dx * dx);
    let ky = p.d_s / (dy * dy);
    let s = p.reaction_sign.value();
    let inv_dt = 1.0 / dt;

    let mut diag = vec![0.0; ni * nj];
    let mut rhs = vec![0.0; ni * nj];
    let mut cx = vec![0.0; nj];
    for jj in 0..nj {
        let j = jj + 1;
        let top = j == g.top();
        let w = if top { 0.5 } else { 1.0 };
        cx[jj] = -w * kx;
        for ii in 0..ni {
            let i = ii + 1;
            let u = jj * ni + ii;
            let ck = state.field.get(i, j);
            let a = s * p.r_s * (p.theta - ck);
            let b = s * p.r_s * (1.0 - p.theta) * ck;
            // Interior: 2ky; interface: ½·2ky after the ghost elimination.
            let vertical = if top { ky } else { 2.0 * ky };
            diag[u] = w * (inv_dt - a) + w * 2.0 * kx + vertical;
            let mut r = w * (ck * inv_dt + b);
            if let Some(f) = source {
                r += w * f[g.index(i, j)];
            }
            if top {
                r += gamma_bar.values[i] / dy;
            }
            rhs[u] = r;
        }
    }
    Ok(ImexSystem { ni, nj, diag, cx, cy: -ky, rhs })
}

/// One IMEX step.
pub fn macro_step_pde(state: &FieldState, gamma_bar: &InterfaceProfile, dt: f64, p: &GrowthParams) -> Result<FieldState> {
    macro_step_pde_with(state, gamma_bar, dt, p, None, &SolverOptions::default())
}

pub fn macro_step_pde_with(
    state: &FieldState,
    gamma_bar: &InterfaceProfile,
    dt: f64,
    p: &GrowthParams,
    source: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<FieldState> {
    let sys = assemble_imex(state, gamma_bar, dt, p, source)?;
    let g = state.field.grid;
    let (ni, nj) = g.unknowns();
    let mut x = vec![0.0; ni * nj];
    for jj in 0..nj {
        for ii in 0..ni {
            x[jj * ni + ii] = state.field.get(ii + 1, jj + 1);
        }
    }
    sys.solve(&mut x, opts)?;
    let mut out = Field::zeros(g);
    for jj in 0..nj {
        for ii in 0..ni {
            out.values[g.index(ii + 1, jj + 1)] = x[jj * ni + ii];
        }
    }
    Ok(FieldState { field: out, t: state.t + dt })
}

/// The reaction-diffusion model. The lumen half-width above node `x_i` is
/// `1 − c(x_i, −1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeModel {
    pub params: GrowthParams,
    pub grid: Grid,
    pub solver: SolverOptions,
    /// `α δ(x_i)` per interface node.
    weights: Vec<f64>,
    xs: Vec<f64>,
}

impl PdeModel {
    pub fn new(params: GrowthParams, grid: Grid) -> Result<Self> {
        params.validate()?;
        let grid = Grid::new(grid.nx, grid.ny)?;
        grid.midpoint_column()?;
        let xs = grid.xs();
        let weights = xs.iter().map(|&x| params.alpha * delta_weight(x)).collect();
        Ok(PdeModel { params, grid, solver: SolverOptions::default(), weights, xs })
    }

    pub fn initial_state(&self) -> FieldState {
        FieldState::zeros(self.grid)
    }
}

impl GrowthModel for PdeModel {
    type State = FieldState;
    type Rate = InterfaceProfile;
    const REACTION_DIFFUSION: bool = true;

    fn params(&self) -> &GrowthParams {
        &self.params
    }

    fn time(&self, state: &FieldState) -> f64 {
        state.t
    }

    fn channel(&self, state: &FieldState) -> Channel {
        Channel::Profile(state.field.top_row().iter().map(|c| 1.0 - c).collect())
    }

    fn cycle_average(&self, wss: &WssSeries, _state: &FieldState) -> InterfaceProfile {
        let mut acc = vec![0.0; self.grid.nx];
        for sample in wss.iter() {
            for ((a, &s), &w) in acc.iter_mut().zip(sample).zip(&self.weights) {
                *a += w * self.params.shear_damping(s);
            }
        }
        let n = wss.samples() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        InterfaceProfile { values: acc }
    }

    fn rate_at(&self, wss: &[f64], _state: &FieldState) -> InterfaceProfile {
        gamma_pde(wss, &self.xs, &self.params)
    }

    fn rate_change(&self, a: &InterfaceProfile, b: &InterfaceProfile) -> f64 {
        super::relative_to_alpha(a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max), self.params.alpha)
    }

    fn advance(&self, state: &FieldState, rate: &InterfaceProfile, dt: f64) -> Result<FieldState> {
        macro_step_pde_with(state, rate, dt, &self.params, None, &self.solver)
    }

    fn functional(&self, state: &FieldState) -> f64 {
        // The midpoint column was checked in `new`.
        state.field.get((self.grid.nx - 1) / 2, self.grid.top())
    }

    fn interface_mean(&self, state: &FieldState) -> Option<f64> {
        Some(interface_mean(state))
    }

    fn rate_summary(&self, rate: &InterfaceProfile) -> f64 {
        rate.values[(self.grid.nx - 1) / 2]
    }

    fn correct(&self, predictor: &FieldState, fine: &FieldState, coarse_old: &FieldState) -> FieldState {
        let values = predictor
            .field
            .values
            .iter()
            .zip(&fine.field.values)
            .zip(&coarse_old.field.values)
            .map(|((p, f), c)| p + f - c)
            .collect();
        FieldState { field: Field { grid: predictor.field.grid, values }, t: predictor.t }
    }
}
