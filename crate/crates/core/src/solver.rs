//! First-order reduction of `u_tt = (a u_x)_x + lower-order terms` and its
//! Lax-Friedrichs discretization.
//!
//! The state is `U = (u, w, v) = (u, u_x, u_t)`. The pair `(v, w)` is advanced
//! in flux form, `v_t = (a w)_x + sources`, `w_t = v_x`, and `u` is advanced
//! by trapezoidal integration of `v`. Two dissipation variants are provided:
//!
//! * [`Dissipation::Local`] (default): a local Lax-Friedrichs (Rusanov) form
//!   whose numerical viscosity on each cell face is scaled by the local wave
//!   speed `sqrt(a)`. Its `w` viscosity acts on `z = sqrt(a) w`, which makes
//!   the discrete energy `||v||^2 + (a w, w)` non-increasing.
//! * [`Dissipation::Global`]: the classical stencil
//!   `q' = (q_{j+1} + q_{j-1}) / 2 + dt / (2 dx) (F_{j+1} - F_{j-1})`.
//!
//! Boundaries use one ghost node per side with constant extrapolation.

use std::io::Write;

use log::warn;

use crate::coefficients::{Forcing, LowerOrderTerms, RegularizedCoefficient};
use crate::error::{Error, Result};
use crate::exact::InitialData;
use crate::grid::Grid1D;

/// Largest tolerated negative undershoot of the principal coefficient.
const NEGATIVE_TOLERANCE: f64 = 1e-14;

/// Threshold for the finite-speed check on the outermost nodes.
const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Slack on the CFL guard absorbing round-off in `dt`.
const GUARD_SLACK: f64 = 1e-12;

/// How the principal part is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    /// `(a u_x)_x`, discretized directly in flux form.
    #[default]
    Divergence,
    /// `a u_xx`, rewritten as `(a u_x)_x - a' u_x`.
    NonDivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dissipation {
    #[default]
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    /// `dt` from [`cfl_dt`] with the configured CFL target.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub t_final: f64,
    pub dt: TimeStep,
    pub cfl_target: f64,
    pub dissipation: Dissipation,
    pub form: Form,
    /// Keep every `record_every`-th state as a snapshot (0 = none).
    pub record_every: usize,
    /// Record the physical energy after every step.
    pub track_energy: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            t_final: 2.0,
            dt: TimeStep::Auto,
            cfl_target: 0.9,
            dissipation: Dissipation::Local,
            form: Form::Divergence,
            record_every: 0,
            track_energy: false,
        }
    }
}

/// `(u, u_x, u_t)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl WaveState {
    pub fn zeros(nx: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; nx],
            w: vec![0.0; nx],
            v: vec![0.0; nx],
        }
    }

    /// `u = g0`, `w = g0'`, `v = g1` sampled on the grid.
    pub fn initial(data: &InitialData, grid: &Grid1D) -> Self {
        Self {
            t: 0.0,
            u: grid.sample(|x| data.g0(x)),
            w: grid.sample(|x| data.g0_prime(x)),
            v: grid.sample(|x| data.g1(x)),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.w)
            .chain(&self.v)
            .all(|x| x.is_finite())
    }

    /// Largest magnitude of any field on the two outermost nodes at each end.
    fn boundary_magnitude(&self) -> f64 {
        let n = self.len();
        [0, 1, n - 2, n - 1]
            .iter()
            .flat_map(|&i| [self.u[i], self.w[i], self.v[i]])
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// Writes `u` as a `# t=<time>` header followed by `x value` lines.
    pub fn write_snapshot<W: Write>(&self, grid: &Grid1D, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "# t={}", self.t)?;
        for (x, u) in grid.nodes().zip(&self.u) {
            writeln!(out, "{x} {u}")?;
        }
        Ok(())
    }
}

/// Per-node coefficients of `U_t = A U_x + B U + F`.
#[derive(Clone)]
pub struct SystemCoefficients {
    form: Form,
    /// `a` (negative round-off clamped to zero).
    a: Vec<f64>,
    speed: Vec<f64>,
    /// `b1` in the non-divergence convention `u_tt = a u_xx - b1 u_x - ...`.
    b1: Vec<f64>,
    b2: Vec<f64>,
    b3: Vec<f64>,
    /// Coefficient of `-w` in the `v` source once the principal part is in flux form.
    flux_b1: Vec<f64>,
    forcing: Option<Forcing>,
    /// Local scheme: viscosity of `v` on the face `j + 1/2`, and the `z`
    /// viscosity ratios on the right and left faces of node `j`.
    face_speed: Vec<f64>,
    ratio_right: Vec<f64>,
    ratio_left: Vec<f64>,
}

impl std::fmt::Debug for SystemCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemCoefficients")
            .field("form", &self.form)
            .field("nx", &self.a.len())
            .field("max_speed", &self.max_speed())
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl SystemCoefficients {
    pub fn form(&self) -> Form {
        self.form
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn max_speed(&self) -> f64 {
        self.speed.iter().copied().fold(0.0, f64::max)
    }

    pub fn nx(&self) -> usize {
        self.a.len()
    }

    /// `A(x_j)`, acting on `(u, w, v)`.
    pub fn a_matrix(&self, j: usize) -> [[f64; 3]; 3] {
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, self.a[j], 0.0]]
    }

    /// `B(x_j)`, acting on `(u, w, v)`.
    pub fn b_matrix(&self, j: usize) -> [[f64; 3]; 3] {
        [
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0],
            [-self.b3[j], -self.b1[j], -self.b2[j]],
        ]
    }

    /// Diagonal of the symmetriser `Q` with `Q A = A^T Q`.
    pub fn symmetriser(&self, j: usize) -> [f64; 3] {
        [1.0, self.a[j], 1.0]
    }

    fn has_sources(&self) -> bool {
        self.forcing.is_some()
            || self.flux_b1.iter().chain(&self.b2).chain(&self.b3).any(|&b| b != 0.0)
    }
}

fn same_grid(c: &RegularizedCoefficient, grid: &Grid1D, name: &str) -> Result<()> {
    if c.grid() != grid {
        return Err(Error::invalid(format!("{name} is sampled on a different grid")));
    }
    Ok(())
}

/// Assembles the system for `u_tt = P(a) u - b1 u_x - b2 u_t - b3 u + f`,
/// where `P(a) u` is `(a u_x)_x` or `a u_xx` according to `form`.
pub fn build_system(
    a: &RegularizedCoefficient,
    lot: &LowerOrderTerms,
    form: Form,
) -> Result<SystemCoefficients> {
    let grid = a.grid();
    let n = grid.nx();
    let mut clamped = Vec::with_capacity(n);
    for (index, &value) in a.samples().iter().enumerate() {
        if value < -NEGATIVE_TOLERANCE || !value.is_finite() {
            return Err(Error::InvalidCoefficient { index, value });
        }
        clamped.push(value.max(0.0));
    }

    let take = |c: &Option<RegularizedCoefficient>, name: &str| -> Result<Vec<f64>> {
        match c {
            Some(c) => {
                same_grid(c, grid, name)?;
                Ok(c.samples().to_vec())
            }
            None => Ok(vec![0.0; n]),
        }
    };
    let extra_b1 = take(&lot.b1, "b1")?;
    let b2 = take(&lot.b2, "b2")?;
    let b3 = take(&lot.b3, "b3")?;

    let a_prime = match a.d1_samples() {
        Some(d) => d.to_vec(),
        None => central_difference(&clamped, grid.dx()),
    };
    let (b1, flux_b1) = match form {
        // (a u_x)_x = a u_xx + a' u_x, so b1 = -a' in the non-divergence convention
        Form::Divergence => (
            extra_b1.iter().zip(&a_prime).map(|(b, d)| b - d).collect(),
            extra_b1,
        ),
        // a u_xx = (a u_x)_x - a' u_x
        Form::NonDivergence => {
            let flux = extra_b1.iter().zip(&a_prime).map(|(b, d)| b + d).collect();
            (extra_b1, flux)
        }
    };

    let speed: Vec<f64> = clamped.iter().map(|v| v.sqrt()).collect();
    let mut face_speed = Vec::with_capacity(n + 1);
    let mut face_min = Vec::with_capacity(n + 1);
    for f in 0..=n {
        let l = speed[f.saturating_sub(1)];
        let r = speed[f.min(n - 1)];
        face_speed.push(l.max(r));
        face_min.push(l.min(r));
    }
    let ratio = |j: usize, face: usize| {
        if speed[j] > 0.0 {
            face_min[face] / speed[j]
        } else {
            0.0
        }
    };
    let ratio_right = (0..n).map(|j| ratio(j, j + 1)).collect();
    let ratio_left = (0..n).map(|j| ratio(j, j)).collect();

    Ok(SystemCoefficients {
        form,
        a: clamped,
        speed,
        b1,
        b2,
        b3,
        flux_b1,
        forcing: lot.forcing.clone(),
        face_speed,
        ratio_right,
        ratio_left,
    })
}

fn central_difference(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|j| {
            let (l, r) = (j.saturating_sub(1), (j + 1).min(n - 1));
            (f[r] - f[l]) / ((r - l) as f64 * dx)
        })
        .collect()
}

/// `dt = cfl_target dx / max(1, max sqrt(a))`.
pub fn cfl_dt(grid: &Grid1D, a: &RegularizedCoefficient, cfl_target: f64) -> Result<f64> {
    if !(cfl_target > 0.0 && cfl_target <= 1.0) {
        return Err(Error::invalid(format!("CFL target must be in (0, 1], got {cfl_target}")));
    }
    let max_speed = a.samples().iter().fold(0.0f64, |m, &v| m.max(v.max(0.0).sqrt()));
    Ok(cfl_target * grid.dx() / max_speed.max(1.0))
}

fn check_guard(dt: f64, dx: f64, sys: &SystemCoefficients) -> Result<()> {
    let cfl = dt * sys.max_speed() / dx;
    if !(dt > 0.0 && dt.is_finite()) || cfl > 1.0 + GUARD_SLACK {
        return Err(Error::StabilityGuard { dt, cfl });
    }
    Ok(())
}

/// Adds `dt (B U + F)` restricted to the `v` row, evaluated at level `n`.
fn apply_sources(
    state: &WaveState,
    sys: &SystemCoefficients,
    grid: &Grid1D,
    dt: f64,
    v_new: &mut [f64],
) {
    for j in 0..v_new.len() {
        let mut s = -sys.flux_b1[j] * state.w[j] - sys.b2[j] * state.v[j] - sys.b3[j] * state.u[j];
        if let Some(f) = &sys.forcing {
            s += f(state.t, grid.node(j));
        }
        v_new[j] += dt * s;
    }
}

/// One step of the classical Lax-Friedrichs scheme.
pub fn lax_friedrichs_step(
    state: &WaveState,
    grid: &Grid1D,
    dt: f64,
    sys: &SystemCoefficients,
) -> Result<WaveState> {
    check_shapes(state, grid, sys)?;
    check_guard(dt, grid.dx(), sys)?;
    let n = state.len();
    let lambda = dt / (2.0 * grid.dx());
    let (u, w, v, a) = (&state.u, &state.w, &state.v, &sys.a);
    let mut v_new = vec![0.0; n];
    let mut w_new = vec![0.0; n];
    for j in 0..n {
        let (l, r) = (j.saturating_sub(1), (j + 1).min(n - 1));
        v_new[j] = 0.5 * (v[r] + v[l]) + lambda * (a[r] * w[r] - a[l] * w[l]);
        w_new[j] = 0.5 * (w[r] + w[l]) + lambda * (v[r] - v[l]);
    }
    if sys.has_sources() {
        apply_sources(state, sys, grid, dt, &mut v_new);
    }
    Ok(finish_step(state, dt, u, v_new, w_new))
}

/// One step of the local (speed-scaled) Lax-Friedrichs scheme.
pub fn local_lax_friedrichs_step(
    state: &WaveState,
    grid: &Grid1D,
    dt: f64,
    sys: &SystemCoefficients,
) -> Result<WaveState> {
    check_shapes(state, grid, sys)?;
    check_guard(dt, grid.dx(), sys)?;
    let n = state.len();
    let k = dt / (2.0 * grid.dx());
    let (u, w, v, a, s) = (&state.u, &state.w, &state.v, &sys.a, &sys.speed);
    let mut v_new = vec![0.0; n];
    let mut w_new = vec![0.0; n];
    for j in 0..n {
        let (l, r) = (j.saturating_sub(1), (j + 1).min(n - 1));
        let flux = a[r] * w[r] - a[l] * w[l];
        let visc_v = sys.face_speed[j + 1] * (v[r] - v[j]) - sys.face_speed[j] * (v[j] - v[l]);
        v_new[j] = v[j] + k * (flux + visc_v);

        let (zl, zj, zr) = (s[l] * w[l], s[j] * w[j], s[r] * w[r]);
        let visc_z = sys.ratio_right[j] * (zr - zj) - sys.ratio_left[j] * (zj - zl);
        w_new[j] = w[j] + k * (v[r] - v[l] + visc_z);
    }
    if sys.has_sources() {
        apply_sources(state, sys, grid, dt, &mut v_new);
    }
    Ok(finish_step(state, dt, u, v_new, w_new))
}

fn finish_step(state: &WaveState, dt: f64, u: &[f64], v_new: Vec<f64>, w_new: Vec<f64>) -> WaveState {
    let u_new = u
        .iter()
        .zip(&state.v)
        .zip(&v_new)
        .map(|((u, v0), v1)| u + 0.5 * dt * (v0 + v1))
        .collect();
    WaveState {
        t: state.t + dt,
        u: u_new,
        w: w_new,
        v: v_new,
    }
}

fn check_shapes(state: &WaveState, grid: &Grid1D, sys: &SystemCoefficients) -> Result<()> {
    let n = grid.nx();
    if state.u.len() != n || state.w.len() != n || state.v.len() != n || sys.nx() != n {
        return Err(Error::invalid(format!(
            "state/coefficient lengths ({}, {}, {}, {}) do not match the grid ({n})",
            state.u.len(),
            state.w.len(),
            state.v.len(),
            sys.nx()
        )));
    }
    Ok(())
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: WaveState,
    pub snapshots: Vec<WaveState>,
    /// `(t, physical energy)` after every step, starting at `t = 0`, when tracked.
    pub energy: Vec<(f64, f64)>,
    /// The regular (not shortened) time step.
    pub dt: f64,
    pub steps: usize,
    /// The solution reached the outermost nodes.
    pub boundary_contaminated: bool,
}

impl Evolution {
    /// Largest single-step increase of the tracked energy relative to `E(0)`.
    pub fn max_relative_energy_gain(&self) -> Option<f64> {
        let e0 = self.energy.first()?.1;
        let gain = self
            .energy
            .windows(2)
            .map(|p| p[1].1 - p[0].1)
            .fold(f64::NEG_INFINITY, f64::max);
        Some(if e0 > 0.0 { gain / e0 } else { gain })
    }
}

/// Evolves the data from `t = 0` to `cfg.t_final`, landing exactly on it.
pub fn evolve(
    ic: &InitialData,
    a: &RegularizedCoefficient,
    lot: &LowerOrderTerms,
    cfg: &SolveConfig,
) -> Result<Evolution> {
    let grid = a.grid();
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(Error::invalid(format!("t_final must be non-negative, got {}", cfg.t_final)));
    }
    let sys = build_system(a, lot, cfg.form)?;
    let dt = match cfg.dt {
        TimeStep::Auto => cfl_dt(grid, a, cfg.cfl_target)?,
        TimeStep::Fixed(dt) => dt,
    };
    check_guard(dt, grid.dx(), &sys)?;
    evolve_from(WaveState::initial(ic, grid), grid, &sys, dt, cfg)
}

/// Evolves `state` with a prepared system and step.
pub fn evolve_from(
    mut state: WaveState,
    grid: &Grid1D,
    sys: &SystemCoefficients,
    dt: f64,
    cfg: &SolveConfig,
) -> Result<Evolution> {
    let step_fn = match cfg.dissipation {
        Dissipation::Local => local_lax_friedrichs_step,
        Dissipation::Global => lax_friedrichs_step,
    };
    let mut snapshots = Vec::new();
    let mut energy = Vec::new();
    if cfg.record_every > 0 {
        snapshots.push(state.clone());
    }
    if cfg.track_energy {
        energy.push((state.t, discrete_energy(&state, sys, grid)));
    }
    let t_end = cfg.t_final;
    let mut steps = 0;
    let mut contaminated = false;
    while t_end - state.t > 1e-12 * t_end.max(1.0) {
        let h = dt.min(t_end - state.t);
        let mut next = step_fn(&state, grid, h, sys)?;
        steps += 1;
        if t_end - next.t <= 1e-12 * t_end.max(1.0) {
            next.t = t_end;
        }
        if !next.is_finite() {
            return Err(Error::Divergence { step: steps });
        }
        if !contaminated && next.boundary_magnitude() > BOUNDARY_TOLERANCE {
            contaminated = true;
            warn!(
                "solution reached the grid boundary at t = {} (magnitude {:e})",
                next.t,
                next.boundary_magnitude()
            );
        }
        if cfg.track_energy {
            energy.push((next.t, discrete_energy(&next, sys, grid)));
        }
        state = next;
        if cfg.record_every > 0 && steps % cfg.record_every == 0 {
            snapshots.push(state.clone());
        }
    }
    Ok(Evolution {
        state,
        snapshots,
        energy,
        dt,
        steps,
        boundary_contaminated: contaminated,
    })
}

/// `1/2 sum dx (v^2 + a w^2)` with trapezoid weights.
fn discrete_energy(state: &WaveState, sys: &SystemCoefficients, grid: &Grid1D) -> f64 {
    let n = state.len();
    let mut sum = 0.0;
    for j in 0..n {
        let wgt = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        sum += wgt * (state.v[j] * state.v[j] + sys.a[j] * state.w[j] * state.w[j]);
    }
    0.5 * grid.dx() * sum
}
