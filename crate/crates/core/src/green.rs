//! Green's function of the Helmholtz operator `1 - d^2/dx^2` on the line and
//! on the unit circle, a kink-aware quadrature convolution, and closed forms
//! for the convolutions that appear when the peakon ansatz is substituted
//! into the nonlocal form of the equation.
//!
//! Convolution is `(G * f)(x) = int f(y) G(x - y) dy`.
//!
//! Sign conventions for the closed forms differ by domain. The line forms
//! return the strong-form terms themselves. The circle forms return the
//! coefficient that multiplies the test function after the `phi_x` terms of
//! the weak identity are integrated by parts, which is the negative of the
//! corresponding strong-form term.

use crate::error::{Error, Result};
use crate::model::{ch_half, sgn, sh_half, zeta, Domain, TravelingProfile};
use crate::quadrature::{breakpoints, integrate_piecewise, Budget};

/// Half-width of the line integration window. The kernel is below 2e-18 there.
pub const LINE_TRUNCATION: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreenKernel {
    pub domain: Domain,
}

impl GreenKernel {
    pub fn line() -> Self {
        Self { domain: Domain::Line }
    }

    pub fn circle() -> Self {
        Self { domain: Domain::Circle }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.domain {
            Domain::Line => 0.5 * (-x.abs()).exp(),
            Domain::Circle => zeta(x).cosh() / (2.0 * sh_half()),
        }
    }

    /// Derivative away from the kernel's own kink (0, or the integers).
    pub fn eval_dx(&self, x: f64) -> f64 {
        match self.domain {
            Domain::Line => -0.5 * sgn(x) * (-x.abs()).exp(),
            Domain::Circle => -zeta(x).sinh() / (2.0 * sh_half()),
        }
    }

    fn part(&self, part: KernelPart, x: f64) -> f64 {
        match part {
            KernelPart::Value => self.eval(x),
            KernelPart::Derivative => self.eval_dx(x),
        }
    }
}

pub fn eval_green(kernel: GreenKernel, x: f64) -> f64 {
    kernel.eval(x)
}

/// Which kernel a convolution uses: `G`, or `G_x` (so that
/// `G_x * f = G * f_x` including any jump of `f`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    Value,
    Derivative,
}

/// Sorted locations where an integrand's derivative jumps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KinkSet {
    locations: Vec<f64>,
}

impl KinkSet {
    pub fn new(locations: impl IntoIterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = locations.into_iter().filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);
        Self { locations: v }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 1e-14 && tol < 1e-4 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Breakpoints of a convolution integral evaluated at `x`.
fn convolution_breaks(kernel: GreenKernel, kinks: &KinkSet, x: f64) -> Vec<f64> {
    match kernel.domain {
        Domain::Line => {
            let interior = kinks.locations().iter().copied().chain(std::iter::once(x));
            breakpoints(x - LINE_TRUNCATION, x + LINE_TRUNCATION, interior, 1e-14)
        }
        Domain::Circle => {
            // one period [x, x + 1]; the kernel kink sits at both ends
            let interior = kinks.locations().iter().map(|&k| k - (k - x).floor());
            breakpoints(x, x + 1.0, interior, 1e-14)
        }
    }
}

/// Convolve several integrands against the same kernel in one pass.
pub fn convolve_many<const M: usize, F>(
    kernel: GreenKernel,
    part: KernelPart,
    f: F,
    kinks: &KinkSet,
    x: f64,
    tol: f64,
) -> Result<[f64; M]>
where
    F: Fn(f64) -> [f64; M],
{
    check_tolerance(tol)?;
    let breaks = convolution_breaks(kernel, kinks, x);
    integrate_piecewise(
        |y| {
            let g = kernel.part(part, x - y);
            let mut v = f(y);
            v.iter_mut().for_each(|v| *v *= g);
            v
        },
        &breaks,
        tol,
        Budget::default(),
    )
}

/// `(G * f)(x)` by adaptive 15-point Gauss-Legendre, split at every kink of
/// `f` and at the kernel kink `y = x`. On the line the integral is
/// truncated to `|y - x| <= 40`.
pub fn quad_convolve<F>(kernel: GreenKernel, f: F, kinks: &KinkSet, x: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    convolve_many(kernel, KernelPart::Value, |y| [f(y)], kinks, x, tol).map(|[v]| v)
}

/// `(G_x * f)(x)`, equal to `G * f'` in the distributional sense.
pub fn quad_convolve_dx<F>(kernel: GreenKernel, f: F, kinks: &KinkSet, x: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    convolve_many(kernel, KernelPart::Derivative, |y| [f(y)], kinks, x, tol).map(|[v]| v)
}

/// Which side of a kink a one-sided limit approaches from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// `(1/2) k1 G*(u_x^3) + k1 G*d_x(u^3 + (3/2) u u_x^2)` for the line peakon
/// `A e^{-|s|}`, at `s = x - ct`.
pub fn closedform_line_cubic(amplitude: f64, k1: f64, s: f64) -> f64 {
    let e = (-s.abs()).exp();
    sgn(s) * k1 * amplitude.powi(3) * (e * e * e - e)
}

/// `k2 G*d_x(u^2 + (1/2) u_x^2)` for the line peakon.
pub fn closedform_line_quadratic(amplitude: f64, k2: f64, s: f64) -> f64 {
    let e = (-s.abs()).exp();
    sgn(s) * k2 * amplitude * amplitude * (e * e - e)
}

/// `k1 a^3 (sinh^2(1/2) sinh(zeta) - sinh^3(zeta))`: the test-function
/// coefficient of the two cubic convolution terms in the weak identity.
pub fn closedform_circle_cubic(amplitude: f64, k1: f64, s: f64) -> f64 {
    let sz = zeta(s).sinh();
    let sh = sh_half();
    k1 * amplitude.powi(3) * (sh * sh * sz - sz * sz * sz)
}

fn circle_sh2_at(z: f64) -> f64 {
    2.0 / 3.0 * (ch_half() * z.sinh() - z.sinh() * z.cosh())
}

/// `G * sinh(2 zeta)` on the circle.
pub fn closedform_circle_sh2(s: f64) -> Result<f64> {
    if s == s.floor() {
        return Err(Error::AtKink(s));
    }
    Ok(circle_sh2_at(zeta(s)))
}

/// One-sided limit of [`closedform_circle_sh2`] at an integer.
pub fn closedform_circle_sh2_limit(side: Side) -> f64 {
    circle_sh2_at(edge_zeta(side))
}

fn edge_zeta(side: Side) -> f64 {
    match side {
        // approaching an integer from the right, s - floor(s) -> 0+
        Side::Right => 0.5,
        Side::Left => -0.5,
    }
}

fn circle_quadratic_at(amplitude: f64, k2: f64, z: f64) -> f64 {
    k2 * amplitude * amplitude * (ch_half() - z.cosh()) * z.sinh()
}

/// `k2 a^2 (cosh(1/2) - cosh(zeta)) sinh(zeta)`, the test-function
/// coefficient of the quadratic convolution term; equal to
/// `(3/2) k2 a^2 G*sinh(2 zeta)`.
pub fn closedform_circle_quadratic(amplitude: f64, k2: f64, s: f64) -> Result<f64> {
    if s == s.floor() {
        return Err(Error::AtKink(s));
    }
    Ok(circle_quadratic_at(amplitude, k2, zeta(s)))
}

pub fn closedform_circle_quadratic_limit(amplitude: f64, k2: f64, side: Side) -> f64 {
    circle_quadratic_at(amplitude, k2, edge_zeta(side))
}

/// The same quantities as the closed forms, assembled by quadrature from
/// the peakon profile and its derivatives. These are the independent
/// oracles the closed forms are checked against.
pub mod assembly {
    use super::*;

    fn crest_kinks() -> KinkSet {
        KinkSet::new([0.0])
    }

    /// Line cubic terms from `G * u_x^3` and `G * d_x(...)`, with the
    /// derivative expanded by the product rule.
    pub fn line_cubic(amplitude: f64, k1: f64, s: f64, tol: f64) -> Result<f64> {
        let prof = TravelingProfile::new(Domain::Line, amplitude, 0.0);
        let [a, b] = convolve_many(
            GreenKernel::line(),
            KernelPart::Value,
            |y| {
                let (u, ux, uxx) = (prof.shape(y), prof.shape_dx(y), prof.shape_dxx(y));
                [
                    ux * ux * ux,
                    3.0 * u * u * ux + 1.5 * ux * ux * ux + 3.0 * u * ux * uxx,
                ]
            },
            &crest_kinks(),
            s,
            tol,
        )?;
        Ok(k1 * (0.5 * a + b))
    }

    pub fn line_quadratic(amplitude: f64, k2: f64, s: f64, tol: f64) -> Result<f64> {
        let prof = TravelingProfile::new(Domain::Line, amplitude, 0.0);
        let v = quad_convolve(
            GreenKernel::line(),
            |y| {
                let (u, ux, uxx) = (prof.shape(y), prof.shape_dx(y), prof.shape_dxx(y));
                2.0 * u * ux + ux * uxx
            },
            &crest_kinks(),
            s,
            tol,
        )?;
        Ok(k2 * v)
    }

    /// Circle cubic terms: `-k1 [ (1/2) G*u_x^3 + G_x*(u^3 + (3/2) u u_x^2) ]`.
    pub fn circle_cubic(amplitude: f64, k1: f64, s: f64, tol: f64) -> Result<f64> {
        let prof = TravelingProfile::new(Domain::Circle, amplitude, 0.0);
        let kinks = crest_kinks();
        let a = quad_convolve(GreenKernel::circle(), |y| prof.shape_dx(y).powi(3), &kinks, s, tol)?;
        let b = quad_convolve_dx(
            GreenKernel::circle(),
            |y| {
                let (u, ux) = (prof.shape(y), prof.shape_dx(y));
                u * u * u + 1.5 * u * ux * ux
            },
            &kinks,
            s,
            tol,
        )?;
        Ok(-k1 * (0.5 * a + b))
    }

    /// `G * sinh(2 zeta)` by direct quadrature.
    pub fn circle_sh2(s: f64, tol: f64) -> Result<f64> {
        quad_convolve(GreenKernel::circle(), |y| (2.0 * zeta(y)).sinh(), &crest_kinks(), s, tol)
    }

    /// `-k2 G_x * (u^2 + (1/2) u_x^2)`.
    pub fn circle_quadratic(amplitude: f64, k2: f64, s: f64, tol: f64) -> Result<f64> {
        let prof = TravelingProfile::new(Domain::Circle, amplitude, 0.0);
        let v = quad_convolve_dx(
            GreenKernel::circle(),
            |y| {
                let (u, ux) = (prof.shape(y), prof.shape_dx(y));
                u * u + 0.5 * ux * ux
            },
            &crest_kinks(),
            s,
            tol,
        )?;
        Ok(-k2 * v)
    }
}
