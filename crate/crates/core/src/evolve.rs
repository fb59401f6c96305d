//! Pseudospectral method of lines on the unit circle.
//!
//! The nonlocal form is advanced with classical RK4 at a fixed step:
//!
//! ```text
//! u_t = -k1 u^2 u_x - (1/2) k1 P^{-1} u_x^3 - k1 P^{-1} d_x (u^3 + (3/2) u u_x^2)
//!       - k2 u u_x - k2 d_x P^{-1} (u^2 + (1/2) u_x^2),         P = 1 - d_x^2.
//! ```
//!
//! Derivatives and `P^{-1}` act in Fourier space, products on the grid.
//! With dealiasing on, every binary product is projected to `|n| <= (N-1)/3`
//! and cubic terms are built from projected squares `w = Pi(u^2)` and
//! `v = Pi(u_x^2)`. With that grouping the semi-discrete H1 energy
//! `sum (1 + k^2) |u_hat|^2` is conserved exactly; the remaining drift
//! comes from the time integrator.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Branch, Domain, ModelParams, TravelingProfile};
use crate::spectral::{helmholtz_symbol, Fourier, Grid, GridState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    /// Order `p` of the initial-data filter `exp(-36 (|n| / (N/2))^p)`.
    pub filter_strength: f64,
    pub cfl_safety: f64,
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            dt: 1e-4,
            t_end: 0.5,
            dealias: true,
            filter_strength: 1.5,
            cfl_safety: 0.3,
            record_every: 50,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<Grid> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive and finite");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be non-negative and finite");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if !(self.filter_strength > 0.0 && self.filter_strength.is_finite()) {
            return bad("filter_strength must be positive and finite");
        }
        Grid::new(self.n)
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub h1_energy: f64,
    pub max_u: f64,
    pub peak_position: f64,
    pub shape_error: f64,
    pub mass_m: f64,
}

/// Spectral toolkit shared by the vector fields.
#[derive(Debug, Clone)]
struct Pseudo {
    ops: Fourier,
    cutoff: Option<usize>,
}

impl Pseudo {
    fn new(grid: Grid, dealias: bool) -> Self {
        Self {
            ops: Fourier::new(grid),
            cutoff: dealias.then(|| grid.dealias_cutoff()),
        }
    }

    fn n(&self) -> usize {
        self.ops.grid().len()
    }

    /// Spectrum, projected when dealiasing.
    fn hat(&self, f: &[f64]) -> Vec<Complex64> {
        let mut h = self.ops.forward(f);
        if let Some(k) = self.cutoff {
            self.ops.truncate(&mut h, k);
        }
        h
    }

    fn phys(&self, h: &[Complex64]) -> Vec<f64> {
        self.ops.inverse_real(h)
    }

    fn product(&self, a: &[f64], b: &[f64]) -> Vec<Complex64> {
        let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        self.hat(&p)
    }

    /// `i 2 pi n`, zero at the Nyquist mode.
    fn ik(&self, idx: usize) -> Complex64 {
        let n = self.ops.grid().mode(idx);
        if n == -(self.n() as i64 / 2) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * PI * n as f64)
        }
    }

    fn helm(&self, idx: usize) -> f64 {
        helmholtz_symbol(self.ops.grid().mode(idx))
    }

    /// `(u, u_x)` on the grid, both band-limited when dealiasing.
    fn fields(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let uh = self.hat(u);
        let ux = self.phys(&self.ops.derivative(&uh));
        let u = if self.cutoff.is_some() { self.phys(&uh) } else { u.to_vec() };
        (u, ux)
    }

    /// `(w, w_hat)` for `w = Pi(a b)`.
    fn square(&self, a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<Complex64>) {
        let h = self.product(a, b);
        (self.phys(&h), h)
    }
}

/// A semi-discrete right-hand side `du/dt = F(u)`.
pub trait VectorField {
    fn grid(&self) -> Grid;
    /// Leading-order advective speed for `|u| <= umax`.
    fn speed_bound(&self, umax: f64) -> f64;
    fn rhs(&self, u: &[f64]) -> Vec<f64>;
}

/// The full mixed cubic/quadratic field.
#[derive(Debug, Clone)]
pub struct GchField {
    params: ModelParams,
    sp: Pseudo,
}

impl GchField {
    pub fn new(params: ModelParams, grid: Grid, dealias: bool) -> Self {
        Self {
            params,
            sp: Pseudo::new(grid, dealias),
        }
    }
}

impl VectorField for GchField {
    fn grid(&self) -> Grid {
        *self.sp.ops.grid()
    }

    fn speed_bound(&self, umax: f64) -> f64 {
        self.params.k1.abs() * umax * umax + self.params.k2.abs() * umax
    }

    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let sp = &self.sp;
        let (k1, k2) = (self.params.k1, self.params.k2);
        let (u, ux) = sp.fields(u);
        let (w, wh) = sp.square(&u, &u);
        let (v, vh) = sp.square(&ux, &ux);
        let p1 = sp.product(&w, &ux);
        let p2 = sp.product(&v, &ux);
        let p3 = sp.product(&w, &u);
        let p4 = sp.product(&v, &u);
        let q1 = sp.product(&u, &ux);
        let out: Vec<Complex64> = (0..sp.n())
            .map(|i| {
                let (ik, h) = (sp.ik(i), sp.helm(i));
                let cubic = p1[i] + (0.5 * p2[i] + ik * (p3[i] + 1.5 * p4[i])) * h;
                let quad = q1[i] + ik * (wh[i] + 0.5 * vh[i]) * h;
                -k1 * cubic - k2 * quad
            })
            .collect();
        sp.phys(&out)
    }
}

/// `u_t + k2 (u u_x + d_x P^{-1}(u^2 + u_x^2 / 2)) = 0`, coded on its own.
#[derive(Debug, Clone)]
pub struct CamassaHolmField {
    k2: f64,
    sp: Pseudo,
}

impl CamassaHolmField {
    pub fn new(k2: f64, grid: Grid, dealias: bool) -> Self {
        Self {
            k2,
            sp: Pseudo::new(grid, dealias),
        }
    }
}

impl VectorField for CamassaHolmField {
    fn grid(&self) -> Grid {
        *self.sp.ops.grid()
    }

    fn speed_bound(&self, umax: f64) -> f64 {
        self.k2.abs() * umax
    }

    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let sp = &self.sp;
        let (u, ux) = sp.fields(u);
        let (_, wh) = sp.square(&u, &u);
        let (_, vh) = sp.square(&ux, &ux);
        let q1 = sp.product(&u, &ux);
        let out: Vec<Complex64> = (0..sp.n())
            .map(|i| -self.k2 * (q1[i] + sp.ik(i) * (wh[i] + 0.5 * vh[i]) * sp.helm(i)))
            .collect();
        sp.phys(&out)
    }
}

/// `u_t + k1 (u^2 u_x + P^{-1} u_x^3 / 2 + P^{-1} d_x (u^3 + (3/2) u u_x^2)) = 0`,
/// coded on its own.
#[derive(Debug, Clone)]
pub struct NovikovField {
    k1: f64,
    sp: Pseudo,
}

impl NovikovField {
    pub fn new(k1: f64, grid: Grid, dealias: bool) -> Self {
        Self {
            k1,
            sp: Pseudo::new(grid, dealias),
        }
    }
}

impl VectorField for NovikovField {
    fn grid(&self) -> Grid {
        *self.sp.ops.grid()
    }

    fn speed_bound(&self, umax: f64) -> f64 {
        self.k1.abs() * umax * umax
    }

    fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let sp = &self.sp;
        let (u, ux) = sp.fields(u);
        let (w, _) = sp.square(&u, &u);
        let (v, _) = sp.square(&ux, &ux);
        let p1 = sp.product(&w, &ux);
        let p2 = sp.product(&v, &ux);
        let p3 = sp.product(&w, &u);
        let p4 = sp.product(&v, &u);
        let out: Vec<Complex64> = (0..sp.n())
            .map(|i| -self.k1 * (p1[i] + (0.5 * p2[i] + sp.ik(i) * (p3[i] + 1.5 * p4[i])) * sp.helm(i)))
            .collect();
        sp.phys(&out)
    }
}

fn check_finite(u: &[f64], time: f64) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { time })
    }
}

/// Right-hand side of the full field with the 2/3 rule.
pub fn semidiscrete_rhs(state: &GridState, params: &ModelParams) -> Result<Vec<f64>> {
    let grid = state.grid()?;
    check_finite(&state.u, state.time)?;
    let out = GchField::new(*params, grid, true).rhs(&state.u);
    check_finite(&out, state.time)?;
    Ok(out)
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `cfl_safety (1/N) / max(advective speed, 1e-12)`.
pub fn cfl_limit<F: VectorField + ?Sized>(field: &F, u: &[f64], cfl_safety: f64) -> f64 {
    cfl_safety * field.grid().spacing() / field.speed_bound(max_abs(u)).max(1e-12)
}

/// One classical RK4 step.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, state: &GridState, dt: f64, cfl_safety: f64) -> Result<GridState> {
    check_finite(&state.u, state.time)?;
    let limit = cfl_limit(field, &state.u, cfl_safety);
    if dt > limit {
        return Err(Error::CflViolation { dt, limit });
    }
    let u = &state.u;
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };
    let k1 = field.rhs(u);
    let k2 = field.rhs(&axpy(0.5 * dt, &k1));
    let k3 = field.rhs(&axpy(0.5 * dt, &k2));
    let k4 = field.rhs(&axpy(dt, &k3));
    let next: Vec<f64> = (0..u.len())
        .map(|j| u[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
        .collect();
    let time = state.time + dt;
    check_finite(&next, time)?;
    Ok(GridState::new(time, next))
}

/// `sum (1 + (2 pi n)^2) |u_hat(n)|^2`, the Parseval form of `int u^2 + u_x^2`.
pub fn h1_energy(state: &GridState) -> Result<f64> {
    let grid = state.grid()?;
    let hat = state.spectrum()?;
    Ok(hat
        .iter()
        .enumerate()
        .map(|(i, h)| h.norm_sqr() / helmholtz_symbol(grid.mode(i)))
        .sum())
}

/// What a state is compared against when tracking shape and position.
#[derive(Debug, Clone)]
pub enum ShapeReference {
    /// An exact profile with its crest at `s = 0`.
    Profile(TravelingProfile),
    /// Grid samples; positions are reported relative to `origin`.
    Samples { u: Vec<f64>, origin: f64 },
}

impl ShapeReference {
    /// Samples, using the location of the maximum as origin.
    pub fn from_samples(u: Vec<f64>) -> Self {
        let n = u.len();
        let j = (0..n).fold(0, |b, j| if u[j] > u[b] { j } else { b });
        Self::Samples {
            u,
            origin: j as f64 / n as f64,
        }
    }

    fn origin(&self) -> f64 {
        match self {
            Self::Profile(_) => 0.0,
            Self::Samples { origin, .. } => *origin,
        }
    }

    fn sampled(&self, grid: &Grid) -> Vec<f64> {
        match self {
            Self::Profile(p) => grid.sample(|x| p.shape(x)),
            Self::Samples { u, .. } => u.clone(),
        }
    }

    /// The reference translated by `tau`.
    fn shifted(&self, ops: &Fourier, tau: f64) -> Vec<f64> {
        match self {
            Self::Profile(p) => ops.grid().sample(|x| p.shape(x - tau)),
            Self::Samples { u, .. } => {
                let mut h = ops.forward(u);
                ops.apply(&mut h, |n| Complex64::from_polar(1.0, -2.0 * PI * n as f64 * tau));
                ops.inverse_real(&h)
            }
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Best circular shift of `reference` onto `state` and the relative L2
/// error there. Returns `(error, shift)` with the shift wrapped to
/// `[-1/2, 1/2)`.
pub fn shape_error(state: &GridState, reference: &ShapeReference) -> Result<(f64, f64)> {
    let grid = state.grid()?;
    let ops = Fourier::new(grid);
    Ok(shape_error_with(&ops, &state.u, reference))
}

fn shape_error_with(ops: &Fourier, u: &[f64], reference: &ShapeReference) -> (f64, f64) {
    let grid = *ops.grid();
    let n = grid.len();
    let uh = ops.forward(u);
    let rh = ops.forward(&reference.sampled(&grid));
    let mut ch: Vec<Complex64> = uh.iter().zip(&rh).map(|(a, b)| a * b.conj()).collect();
    ch[0] = Complex64::new(0.0, 0.0);
    let corr = ops.inverse_real(&ch);
    let m = (0..n).fold(0, |b, j| if corr[j] > corr[b] { j } else { b });
    let (l, c, r) = (corr[(m + n - 1) % n], corr[m], corr[(m + 1) % n]);
    let curv = l - 2.0 * c + r;
    let delta = if curv < 0.0 { (0.5 * (l - r) / curv).clamp(-0.5, 0.5) } else { 0.0 };
    let mut tau = (m as f64 + delta) / n as f64;
    if tau >= 0.5 {
        tau -= 1.0;
    }
    let shifted = reference.shifted(ops, tau);
    let diff: f64 = u.iter().zip(&shifted).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = shifted.iter().map(|b| b * b).sum();
    let err = if norm > 0.0 { (diff / norm).sqrt() } else { diff.sqrt() };
    (err, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    /// The position sequence carried no signal; `speed` is 0.
    pub flat: bool,
}

/// Least-squares slope of the unwrapped peak positions. Consecutive records
/// must be less than half a period apart in position.
pub fn peak_speed_estimate(records: &[DiagnosticsRecord]) -> Result<SpeedEstimate> {
    if records.len() < 3 {
        return Err(Error::InsufficientRecords(records.len()));
    }
    let mut pos = Vec::with_capacity(records.len());
    let mut acc = records[0].peak_position;
    pos.push(acc);
    for w in records.windows(2) {
        let mut d = w[1].peak_position - w[0].peak_position;
        d -= d.round();
        acc += d;
        pos.push(acc);
    }
    if pos.iter().all(|p| (p - pos[0]).abs() < 1e-12) {
        return Ok(SpeedEstimate { speed: 0.0, flat: true });
    }
    let n = records.len() as f64;
    let tm = records.iter().map(|r| r.time).sum::<f64>() / n;
    let pm = pos.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (r, p) in records.iter().zip(&pos) {
        sxy += (r.time - tm) * (p - pm);
        sxx += (r.time - tm).powi(2);
    }
    if sxx == 0.0 {
        return Ok(SpeedEstimate { speed: 0.0, flat: true });
    }
    Ok(SpeedEstimate {
        speed: sxy / sxx,
        flat: false,
    })
}

/// The certified periodic peakon, truncated to `|n| <= (N-1)/3` and filtered
/// by `exp(-36 (|n| / (N/2))^p)`.
pub fn mollified_peakon_initial(params: &ModelParams, grid: Grid, branch: Branch, filter_strength: f64) -> Result<GridState> {
    let profile = crate::model::make_peakon(params, Domain::Circle, branch)?;
    Ok(mollify(&profile, grid, filter_strength))
}

pub fn mollify(profile: &TravelingProfile, grid: Grid, filter_strength: f64) -> GridState {
    let ops = Fourier::new(grid);
    let mut h = ops.forward(&grid.sample(|x| profile.shape(x)));
    ops.truncate(&mut h, grid.dealias_cutoff());
    let half = grid.len() as f64 / 2.0;
    ops.apply(&mut h, |n| {
        Complex64::new((-36.0 * (n.unsigned_abs() as f64 / half).powf(filter_strength)).exp(), 0.0)
    });
    GridState::new(0.0, ops.inverse_real(&h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<GridState>,
    pub records: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    /// `max |E(t) - E(0)| / E(0)` over the records.
    pub fn h1_relative_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let e0 = first.h1_energy;
        let worst = self.records.iter().fold(0.0f64, |m, r| m.max((r.h1_energy - e0).abs()));
        if e0 > 0.0 {
            worst / e0
        } else {
            worst
        }
    }

    pub fn final_state(&self) -> Option<&GridState> {
        self.snapshots.last()
    }
}

fn record(ops: &Fourier, state: &GridState, reference: &ShapeReference) -> Result<DiagnosticsRecord> {
    let (err, tau) = shape_error_with(ops, &state.u, reference);
    let hat = ops.forward(&state.u);
    Ok(DiagnosticsRecord {
        time: state.time,
        h1_energy: h1_energy(state)?,
        max_u: max_abs(&state.u),
        peak_position: wrap_unit(reference.origin() + tau),
        shape_error: err,
        mass_m: hat[0].re,
    })
}

/// Integrate the full field from `initial`, comparing against the initial
/// samples for shape and position.
pub fn run(config: &SolverConfig, params: &ModelParams, initial: &GridState) -> Result<Trajectory> {
    let grid = config.validate()?;
    let field = GchField::new(*params, grid, config.dealias);
    run_with(config, &field, initial, &ShapeReference::from_samples(initial.u.clone()))
}

/// Integrate any field to `config.t_end`, recording diagnostics and a
/// snapshot at the start, every `record_every` steps, and at the end.
pub fn run_with<F: VectorField + ?Sized>(
    config: &SolverConfig,
    field: &F,
    initial: &GridState,
    reference: &ShapeReference,
) -> Result<Trajectory> {
    let grid = config.validate()?;
    if initial.u.len() != grid.len() || field.grid() != grid {
        return Err(Error::BadGrid(format!(
            "state has {} points, config expects {}",
            initial.u.len(),
            grid.len()
        )));
    }
    check_finite(&initial.u, initial.time)?;
    let ops = Fourier::new(grid);
    let steps = config.steps();
    let t0 = initial.time;
    let mut state = initial.clone();
    let mut out = Trajectory {
        snapshots: vec![state.clone()],
        records: vec![record(&ops, &state, reference)?],
    };
    for i in 1..=steps {
        let target = if i == steps { t0 + config.t_end } else { t0 + i as f64 * config.dt };
        let dt = target - state.time;
        state = rk4_step(field, &state, dt, config.cfl_safety)?;
        state.time = target;
        if i % config.record_every == 0 || i == steps {
            out.records.push(record(&ops, &state, reference)?);
            out.snapshots.push(state.clone());
        }
    }
    Ok(out)
}
