//! Certification of traveling-wave candidates.
//!
//! Three independent checks are provided:
//!
//! * the strong residual of the nonlocal form
//!   `R = u_t + k1 u^2 u_x + (1/2) k1 G*u_x^3 + k1 G*d_x(u^3 + (3/2) u u_x^2)
//!        + k2 u u_x + k2 G*d_x(u^2 + (1/2) u_x^2)`,
//!   away from crests, either from closed forms or by kink-aware quadrature;
//! * the periodic weak identity integrated against smooth test functions;
//! * the amplitude defect polynomials whose roots make both vanish.
//!
//! For the periodic peakon `a cosh(zeta)` the strong residual collapses to
//! `-a D(a) sinh(zeta)` and the weak identity to
//! `int int phi a D(a) sinh(zeta)`, where `D` is the periodic defect.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{
    closedform_circle_cubic, closedform_circle_quadratic, closedform_line_cubic,
    closedform_line_quadratic, convolve_many, GreenKernel, KernelPart, KinkSet,
};
use crate::model::{ch_half, sh_half, zeta, Domain, ModelParams, TravelingProfile};
use crate::quadrature::{breakpoints, integrate_piecewise, Budget};

/// Minimum distance from a crest for strong-residual evaluation.
pub const KINK_EXCLUSION: f64 = 1e-6;

const CONV_TOL: f64 = 1e-13;
const TIME_TOL: f64 = 1e-13;
const SPACE_TOL: f64 = 1e-12;

/// A profile `u(t, x) = U(x - ct)`.
pub trait TravelingWave: Sync {
    fn domain(&self) -> Domain;
    fn speed(&self) -> f64;
    fn shape(&self, s: f64) -> f64;
    fn shape_dx(&self, s: f64) -> f64;
    /// Points of `s` where `U'` jumps (taken mod 1 on the circle).
    fn kinks(&self) -> KinkSet;
    /// Upper bound of `|U|`.
    fn max_abs(&self) -> f64;
}

impl TravelingWave for TravelingProfile {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn speed(&self) -> f64 {
        self.speed
    }
    fn shape(&self, s: f64) -> f64 {
        TravelingProfile::shape(self, s)
    }
    fn shape_dx(&self, s: f64) -> f64 {
        TravelingProfile::shape_dx(self, s)
    }
    fn kinks(&self) -> KinkSet {
        KinkSet::new([0.0])
    }
    fn max_abs(&self) -> f64 {
        self.crest_height().abs()
    }
}

/// Smooth periodic traveling wave
/// `U(s) = mean + sum_n (a_n cos(2 pi n s) + b_n sin(2 pi n s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierWave {
    pub mean: f64,
    /// `(n, a_n, b_n)`
    pub modes: Vec<(u32, f64, f64)>,
    pub speed: f64,
}

impl TravelingWave for FourierWave {
    fn domain(&self) -> Domain {
        Domain::Circle
    }
    fn speed(&self) -> f64 {
        self.speed
    }
    fn shape(&self, s: f64) -> f64 {
        self.modes.iter().fold(self.mean, |acc, &(n, a, b)| {
            let th = 2.0 * PI * n as f64 * s;
            acc + a * th.cos() + b * th.sin()
        })
    }
    fn shape_dx(&self, s: f64) -> f64 {
        self.modes.iter().fold(0.0, |acc, &(n, a, b)| {
            let k = 2.0 * PI * n as f64;
            acc + k * (b * (k * s).cos() - a * (k * s).sin())
        })
    }
    fn kinks(&self) -> KinkSet {
        KinkSet::empty()
    }
    fn max_abs(&self) -> f64 {
        self.modes
            .iter()
            .fold(self.mean.abs(), |acc, &(_, a, b)| acc + a.abs() + b.abs())
    }
}

/// `k1 A^2 + k2 A - c`.
pub fn line_amplitude_defect(amplitude: f64, params: &ModelParams) -> f64 {
    params.k1 * amplitude * amplitude + params.k2 * amplitude - params.c
}

/// `k1 (1 + sinh^2(1/2)) a^2 + k2 cosh(1/2) a - c`.
pub fn periodic_amplitude_defect(amplitude: f64, params: &ModelParams) -> f64 {
    let sh = sh_half();
    params.k1 * (1.0 + sh * sh) * amplitude * amplitude + params.k2 * ch_half() * amplitude - params.c
}

pub fn amplitude_defect(amplitude: f64, params: &ModelParams, domain: Domain) -> f64 {
    match domain {
        Domain::Line => line_amplitude_defect(amplitude, params),
        Domain::Circle => periodic_amplitude_defect(amplitude, params),
    }
}

/// The reduced weak-form integrand `a D(a) sinh(zeta(x - ct))`.
pub fn pointwise_periodic_defect(amplitude: f64, params: &ModelParams, t: f64, x: f64) -> Result<f64> {
    let s = x - params.c * t;
    if s == s.floor() {
        return Err(Error::AtKink(s));
    }
    Ok(amplitude * periodic_amplitude_defect(amplitude, params) * zeta(s).sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualMode {
    ClosedForm,
    Quadrature,
}

fn distance_to_kink(domain: Domain, s: f64) -> f64 {
    match domain {
        Domain::Line => s.abs(),
        Domain::Circle => (s - s.round()).abs(),
    }
}

/// Strong residual at each `(t, x)`.
pub fn strong_residual(
    profile: &TravelingProfile,
    params: &ModelParams,
    points: &[(f64, f64)],
    mode: ResidualMode,
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&(t, x)| {
            let s = x - profile.speed * t;
            if distance_to_kink(profile.domain, s) < KINK_EXCLUSION {
                return Err(Error::PointOnKink { t, x });
            }
            match mode {
                ResidualMode::ClosedForm => Ok(closed_form_residual(profile, params, s)),
                ResidualMode::Quadrature => strong_residual_at(profile, params, s),
            }
        })
        .collect()
}

fn local_terms(params: &ModelParams, speed: f64, u: f64, ux: f64) -> f64 {
    -speed * ux + params.k1 * u * u * ux + params.k2 * u * ux
}

fn closed_form_residual(profile: &TravelingProfile, params: &ModelParams, s: f64) -> f64 {
    let (u, ux) = (profile.shape(s), profile.shape_dx(s));
    let local = local_terms(params, profile.speed, u, ux);
    let a = profile.amplitude;
    match profile.domain {
        Domain::Line => {
            local + closedform_line_cubic(a, params.k1, s) + closedform_line_quadratic(a, params.k2, s)
        }
        Domain::Circle => {
            let quad = closedform_circle_quadratic(a, params.k2, s).expect("crest excluded by caller");
            local - closedform_circle_cubic(a, params.k1, s) - quad
        }
    }
}

/// Strong residual of any traveling wave at `s = x - ct`, with every
/// nonlocal term computed by quadrature. The `d_x` inside the convolutions
/// is moved onto the kernel.
pub fn strong_residual_at<W: TravelingWave + ?Sized>(wave: &W, params: &ModelParams, s: f64) -> Result<f64> {
    let kernel = GreenKernel { domain: wave.domain() };
    let kinks = wave.kinks();
    let tol = conv_tol(wave);
    let [cube] = convolve_many(kernel, KernelPart::Value, |y| [wave.shape_dx(y).powi(3)], &kinks, s, tol)?;
    let [cubic_flux, quad_flux] = convolve_many(
        kernel,
        KernelPart::Derivative,
        |y| {
            let (u, ux) = (wave.shape(y), wave.shape_dx(y));
            [u * u * u + 1.5 * u * ux * ux, u * u + 0.5 * ux * ux]
        },
        &kinks,
        s,
        tol,
    )?;
    let (u, ux) = (wave.shape(s), wave.shape_dx(s));
    Ok(local_terms(params, wave.speed(), u, ux)
        + params.k1 * (0.5 * cube + cubic_flux)
        + params.k2 * quad_flux)
}

fn conv_tol<W: TravelingWave + ?Sized>(wave: &W) -> f64 {
    (CONV_TOL * wave.max_abs().powi(3).max(1.0)).min(1e-6)
}

/// Temporal envelope of a test function on `[0, T)`, in `tau = t / T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Envelope {
    /// `(1 - tau)^3`, nonzero at `t = 0`.
    Decay,
    /// `16 tau^2 (1 - tau)^2`.
    Bump,
    /// `(1 + 3 tau)(1 - tau)^3`, nonzero at `t = 0` with zero slope.
    Ramp,
}

impl Envelope {
    pub const ALL: [Envelope; 3] = [Envelope::Decay, Envelope::Bump, Envelope::Ramp];

    /// Value and `d/dtau`.
    fn eval(&self, tau: f64) -> (f64, f64) {
        if !(0.0..1.0).contains(&tau) {
            return (0.0, 0.0);
        }
        let r = 1.0 - tau;
        match self {
            Envelope::Decay => (r * r * r, -3.0 * r * r),
            Envelope::Bump => (16.0 * tau * tau * r * r, 32.0 * tau * r * (r - tau)),
            Envelope::Ramp => ((1.0 + 3.0 * tau) * r * r * r, -12.0 * tau * r * r),
        }
    }
}

/// A space-time test function on `[0, T) x S`.
pub trait SpaceTimeTest: Sync {
    fn horizon(&self) -> f64;
    fn phi(&self, t: f64, x: f64) -> f64;
    fn phi_t(&self, t: f64, x: f64) -> f64;
    fn phi_x(&self, t: f64, x: f64) -> f64;
}

/// `weight * envelope(t / T) * exp(cos(2 pi (x - x0)) - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub envelope: Envelope,
    pub horizon: f64,
    pub weight: f64,
}

impl TestFunction {
    pub fn new(center: f64, envelope: Envelope, horizon: f64) -> Self {
        Self {
            center,
            envelope,
            horizon,
            weight: 1.0,
        }
    }

    pub fn spatial(&self, x: f64) -> f64 {
        ((2.0 * PI * (x - self.center)).cos() - 1.0).exp()
    }

    pub fn spatial_dx(&self, x: f64) -> f64 {
        let th = 2.0 * PI * (x - self.center);
        -2.0 * PI * th.sin() * (th.cos() - 1.0).exp()
    }

    pub fn temporal(&self, t: f64) -> f64 {
        self.weight * self.envelope.eval(t / self.horizon).0
    }

    pub fn temporal_dt(&self, t: f64) -> f64 {
        self.weight * self.envelope.eval(t / self.horizon).1 / self.horizon
    }

    /// `int int |phi| dx dt`.
    pub fn l1_norm(&self) -> Result<f64> {
        let t = crate::quadrature::integrate(|t| self.temporal(t).abs(), &[0.0, self.horizon], 1e-14)?;
        let x = crate::quadrature::integrate(|x| self.spatial(x), &[0.0, 1.0], 1e-15)?;
        Ok(t * x)
    }
}

impl SpaceTimeTest for TestFunction {
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn phi(&self, t: f64, x: f64) -> f64 {
        self.temporal(t) * self.spatial(x)
    }
    fn phi_t(&self, t: f64, x: f64) -> f64 {
        self.temporal_dt(t) * self.spatial(x)
    }
    fn phi_x(&self, t: f64, x: f64) -> f64 {
        self.temporal(t) * self.spatial_dx(x)
    }
}

/// `lhs + rhs`; both must share a horizon.
#[derive(Debug, Clone, Copy)]
pub struct SumTest<A, B>(pub A, pub B);

impl<A: SpaceTimeTest, B: SpaceTimeTest> SpaceTimeTest for SumTest<A, B> {
    fn horizon(&self) -> f64 {
        self.0.horizon().max(self.1.horizon())
    }
    fn phi(&self, t: f64, x: f64) -> f64 {
        self.0.phi(t, x) + self.1.phi(t, x)
    }
    fn phi_t(&self, t: f64, x: f64) -> f64 {
        self.0.phi_t(t, x) + self.1.phi_t(t, x)
    }
    fn phi_x(&self, t: f64, x: f64) -> f64 {
        self.0.phi_x(t, x) + self.1.phi_x(t, x)
    }
}

/// Eight spatial translates `x0 = j/8` times the three envelopes.
pub fn standard_family(horizon: f64) -> Vec<TestFunction> {
    (0..8)
        .flat_map(|j| Envelope::ALL.map(|e| TestFunction::new(j as f64 / 8.0, e, horizon)))
        .collect()
}

/// Carries the first error out of a quadrature closure, which cannot return `Result`.
struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    fn new() -> Self {
        Self(RefCell::new(None))
    }

    fn take<T, const M: usize>(&self, r: Result<[T; M]>) -> Option<[T; M]> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                None
            }
        }
    }

    fn finish<T>(self, r: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

fn circle_breaks(kinks: &KinkSet) -> Vec<f64> {
    breakpoints(0.0, 1.0, kinks.locations().iter().map(|k| k - k.floor()), 1e-14)
}

/// `[int phi_t, int phi_x, int phi]` over `t in [0, T]` along `x = s + ct`.
fn along_characteristic<P: SpaceTimeTest + ?Sized>(phi: &P, speed: f64, s: f64) -> Result<[f64; 3]> {
    integrate_piecewise(
        |t| {
            let x = s + speed * t;
            [phi.phi_t(t, x), phi.phi_x(t, x), phi.phi(t, x)]
        },
        &[0.0, phi.horizon()],
        TIME_TOL,
        Budget::default(),
    )
}

/// Value of the periodic weak identity
///
/// ```text
/// int_0^T int_S [ u phi_t + (k1/3) u^3 phi_x + k1 G*(u^3 + (3/2) u u_x^2) phi_x
///                 - k1 G*(u_x^3 / 2) phi + (k2/2) u^2 phi_x
///                 + k2 G*(u^2 + (1/2) u_x^2) phi_x ] dx dt
///   + int_S u(0, x) phi(0, x) dx
/// ```
///
/// for a traveling candidate. Space is integrated in the co-moving variable
/// `s = x - ct`, so the subdivision follows the moving crest; for every
/// `s` node the time integral runs along `x = s + ct`.
pub fn weak_residual<W, P>(wave: &W, params: &ModelParams, phi: &P) -> Result<f64>
where
    W: TravelingWave + ?Sized,
    P: SpaceTimeTest + ?Sized,
{
    if wave.domain() != Domain::Circle {
        return Err(Error::InvalidConfig("weak residual is defined on the circle only".into()));
    }
    let kinks = wave.kinks();
    let breaks = circle_breaks(&kinks);
    let kernel = GreenKernel::circle();
    let conv = conv_tol(wave);
    let speed = wave.speed();
    let slot = ErrorSlot::new();
    let body = integrate_piecewise(
        |s| {
            let Some([c1, c2, c3]) = slot.take(convolve_many(
                kernel,
                KernelPart::Value,
                |y| {
                    let (u, ux) = (wave.shape(y), wave.shape_dx(y));
                    [u * u * u + 1.5 * u * ux * ux, 0.5 * ux * ux * ux, u * u + 0.5 * ux * ux]
                },
                &kinks,
                s,
                conv,
            )) else {
                return [0.0];
            };
            let Some([a_t, a_x, a_0]) = slot.take(along_characteristic(phi, speed, s)) else {
                return [0.0];
            };
            let u = wave.shape(s);
            let flux = params.k1 * (u * u * u / 3.0 + c1) + params.k2 * (0.5 * u * u + c3);
            [u * a_t + flux * a_x - params.k1 * c2 * a_0]
        },
        &breaks,
        SPACE_TOL * wave.max_abs().powi(3).max(1.0),
        Budget::default(),
    );
    let [body] = slot.finish(body)?;
    let initial = crate::quadrature::integrate(|x| wave.shape(x) * phi.phi(0.0, x), &breaks, SPACE_TOL)?;
    Ok(body + initial)
}

/// `int_0^T int_S phi sinh(zeta(x - ct)) dx dt`.
pub fn phi_sinh_moment<P: SpaceTimeTest + ?Sized>(speed: f64, phi: &P) -> Result<f64> {
    let slot = ErrorSlot::new();
    let r = integrate_piecewise(
        |s| match slot.take(along_characteristic(phi, speed, s)) {
            Some([_, _, a_0]) => [zeta(s).sinh() * a_0],
            None => [0.0],
        },
        &[0.0, 1.0],
        SPACE_TOL,
        Budget::default(),
    );
    slot.finish(r).map(|[v]| v)
}

/// `int_0^T int_S phi R dx dt` with `R` the quadrature strong residual.
pub fn strong_residual_moment<W, P>(wave: &W, params: &ModelParams, phi: &P) -> Result<f64>
where
    W: TravelingWave + ?Sized,
    P: SpaceTimeTest + ?Sized,
{
    let breaks = circle_breaks(&wave.kinks());
    let slot = ErrorSlot::new();
    let r = integrate_piecewise(
        |s| {
            let Some([r]) = slot.take(strong_residual_at(wave, params, s).map(|v| [v])) else {
                return [0.0];
            };
            match slot.take(along_characteristic(phi, wave.speed(), s)) {
                Some([_, _, a_0]) => [r * a_0],
                None => [0.0],
            }
        },
        &breaks,
        SPACE_TOL * wave.max_abs().powi(3).max(1.0),
        Budget::default(),
    );
    slot.finish(r).map(|[v]| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_strong_residual: f64,
    pub weak_residuals: Vec<f64>,
    pub defect_value: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub tolerance: f64,
    /// Test-function horizon `T`.
    pub horizon: f64,
    /// Sample count per side of the crest for the strong residual.
    pub strong_samples: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            horizon: 1.0,
            strong_samples: 24,
        }
    }
}

/// Points `(t, x)` avoiding the crest: `s` in `[0.05, 10]` on both sides
/// for the line, `s` in `[0.05, 0.95]` on the circle, at two times.
pub fn residual_sample_points(profile: &TravelingProfile, count: usize) -> Vec<(f64, f64)> {
    let count = count.max(2);
    let mut s_values = Vec::new();
    match profile.domain {
        Domain::Line => {
            for i in 0..count {
                let s = 0.05 + (10.0 - 0.05) * i as f64 / (count - 1) as f64;
                s_values.push(s);
                s_values.push(-s);
            }
        }
        Domain::Circle => {
            for i in 0..count {
                s_values.push(0.05 + 0.9 * i as f64 / (count - 1) as f64);
            }
        }
    }
    [0.0, 0.37]
        .iter()
        .flat_map(|&t| s_values.iter().map(move |&s| (t, s + profile.speed * t)))
        .collect()
}

/// Weak residual scale `||phi||_1 max|u|^3 (1 + |k1| + |k2|)`.
pub fn weak_scale(phi: &TestFunction, max_abs_u: f64, params: &ModelParams) -> Result<f64> {
    Ok(phi.l1_norm()? * max_abs_u.powi(3) * (1.0 + params.k1.abs() + params.k2.abs()))
}

/// Strong residual in both modes, and on the circle the weak identity over
/// the standard test-function family.
pub fn certify(profile: &TravelingProfile, params: &ModelParams, options: &CertifyOptions) -> Result<ResidualReport> {
    let points = residual_sample_points(profile, options.strong_samples);
    let closed = strong_residual(profile, params, &points, ResidualMode::ClosedForm)?;
    let quad = strong_residual(profile, params, &points, ResidualMode::Quadrature)?;
    let max_strong_residual = closed.iter().chain(&quad).fold(0.0f64, |m, r| m.max(r.abs()));

    let mut weak_residuals = Vec::new();
    let mut weak_ok = true;
    if profile.domain == Domain::Circle {
        let umax = profile.max_abs();
        for phi in standard_family(options.horizon) {
            let w = weak_residual(profile, params, &phi)?;
            weak_ok &= w.abs() <= options.tolerance * weak_scale(&phi, umax, params)?;
            weak_residuals.push(w);
        }
    }
    let verdict = if max_strong_residual <= options.tolerance && weak_ok {
        Verdict::Certified
    } else {
        Verdict::Rejected
    };
    Ok(ResidualReport {
        max_strong_residual,
        weak_residuals,
        defect_value: amplitude_defect(profile.amplitude, params, profile.domain),
        tolerance: options.tolerance,
        verdict,
    })
}
