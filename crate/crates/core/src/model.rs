//! Equation parameters, peakon amplitude algebra and exact traveling profiles.
//!
//! The model is
//!
//! ```text
//! m_t + k1 (3 u u_x m + u^2 m_x) + k2 (2 m u_x + m_x u) = 0,   m = u - u_xx
//! ```
//!
//! On the line it carries peakons `A e^{-|x-ct|}` whose amplitude solves
//! `k1 A^2 + k2 A - c = 0`. On the unit circle the periodic peakon is
//! `a cosh(zeta)` with `zeta = 1/2 - (x-ct) + floor(x-ct)` and
//! `k1 (1 + sinh^2(1/2)) a^2 + k2 cosh(1/2) a - c = 0`.
//!
//! `(k1, k2) = (0, 1)` is Camassa-Holm, `(1, 0)` is Novikov.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sinh(1/2)`.
pub fn sh_half() -> f64 {
    0.5f64.sinh()
}

/// `cosh(1/2)`.
pub fn ch_half() -> f64 {
    0.5f64.cosh()
}

/// Sign function with `sgn(0) = 0`.
pub(crate) fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cubic (Novikov) coefficient.
    pub k1: f64,
    /// Quadratic (Camassa-Holm) coefficient.
    pub k2: f64,
    /// Wave speed.
    pub c: f64,
}

impl ModelParams {
    pub fn new(k1: f64, k2: f64, c: f64) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite() && c.is_finite()) {
            return Err(Error::NonFiniteParams);
        }
        Ok(Self { k1, k2, c })
    }

    pub fn camassa_holm(c: f64) -> Self {
        Self { k1: 0.0, k2: 1.0, c }
    }

    pub fn novikov(c: f64) -> Self {
        Self { k1: 1.0, k2: 0.0, c }
    }

    pub fn is_degenerate(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0
    }

    /// `k2^2 + 4 k1 c`.
    pub fn line_discriminant(&self) -> f64 {
        self.k2 * self.k2 + 4.0 * self.k1 * self.c
    }

    /// `k2^2 cosh^2(1/2) + 4 k1 c (1 + sinh^2(1/2))`.
    pub fn periodic_discriminant(&self) -> f64 {
        let (a, b) = self.periodic_coefficients();
        b * b + 4.0 * a * self.c
    }

    /// Leading and linear coefficients of the periodic amplitude polynomial.
    fn periodic_coefficients(&self) -> (f64, f64) {
        let s = sh_half();
        (self.k1 * (1.0 + s * s), self.k2 * ch_half())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Line,
    Circle,
}

/// Which sign precedes the square root in the amplitude formula.
///
/// This is not the sign of the amplitude: for `k1 < 0` the Plus root can be
/// the smaller one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSolution {
    /// Real roots, ascending. A double root is listed once.
    pub roots: Vec<f64>,
    pub discriminant: f64,
    pub exists: bool,
    #[serde(skip)]
    plus: Option<f64>,
    #[serde(skip)]
    minus: Option<f64>,
}

impl AmplitudeSolution {
    pub fn branch(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }

    /// True when Plus and Minus name distinct roots.
    pub fn has_two_branches(&self) -> bool {
        self.roots.len() == 2
    }
}

/// Roots of `alpha a^2 + beta a - c = 0`, classified by branch.
///
/// `alpha = 0` gives the single linear root `c / beta`. For `alpha != 0` the
/// discriminant is clamped: values in `[-eps, 0]` with
/// `eps = 1e-12 (beta^2 + |4 alpha c| + 1)` become a double root.
fn solve_amplitude_quadratic(alpha: f64, beta: f64, c: f64) -> Result<AmplitudeSolution> {
    if alpha == 0.0 && beta == 0.0 {
        return Err(Error::DegenerateParams);
    }
    let discriminant = beta * beta + 4.0 * alpha * c;
    if alpha == 0.0 {
        let root = c / beta;
        return Ok(AmplitudeSolution {
            roots: vec![root],
            discriminant,
            exists: true,
            plus: Some(root),
            minus: Some(root),
        });
    }
    let eps = 1e-12 * (beta * beta + (4.0 * alpha * c).abs() + 1.0);
    if discriminant < -eps {
        return Ok(AmplitudeSolution {
            roots: Vec::new(),
            discriminant,
            exists: false,
            plus: None,
            minus: None,
        });
    }
    if discriminant <= 0.0 {
        let root = -beta / (2.0 * alpha);
        return Ok(AmplitudeSolution {
            roots: vec![root],
            discriminant,
            exists: true,
            plus: Some(root),
            minus: Some(root),
        });
    }

    // q carries the sign of beta so that beta + sign(beta) sqrt(disc) never cancels.
    let sq = discriminant.sqrt();
    let q = -0.5 * (beta + sq.copysign(beta));
    let from_q = q / alpha;
    let from_c = -c / q;
    let (plus, minus) = if beta.is_sign_negative() {
        (from_q, from_c)
    } else {
        (from_c, from_q)
    };
    Ok(AmplitudeSolution {
        roots: vec![plus.min(minus), plus.max(minus)],
        discriminant,
        exists: true,
        plus: Some(plus),
        minus: Some(minus),
    })
}

fn require_existence(sol: AmplitudeSolution) -> Result<AmplitudeSolution> {
    if sol.exists {
        Ok(sol)
    } else {
        Err(Error::NoRealAmplitude {
            discriminant: sol.discriminant,
        })
    }
}

/// Existence report for the line amplitude equation; never fails on
/// nonexistence (`exists = false` instead).
pub fn line_amplitudes(params: &ModelParams) -> Result<AmplitudeSolution> {
    solve_amplitude_quadratic(params.k1, params.k2, params.c)
}

/// Existence report for the periodic amplitude equation.
pub fn periodic_amplitudes(params: &ModelParams) -> Result<AmplitudeSolution> {
    let (alpha, beta) = params.periodic_coefficients();
    solve_amplitude_quadratic(alpha, beta, params.c)
}

/// Roots of `k1 A^2 + k2 A - c = 0`.
pub fn solve_line_amplitudes(params: &ModelParams) -> Result<AmplitudeSolution> {
    require_existence(line_amplitudes(params)?)
}

/// Roots of `k1 (1 + sinh^2(1/2)) a^2 + k2 cosh(1/2) a - c = 0`.
pub fn solve_periodic_amplitudes(params: &ModelParams) -> Result<AmplitudeSolution> {
    require_existence(periodic_amplitudes(params)?)
}

pub fn solve_amplitudes(params: &ModelParams, domain: Domain) -> Result<AmplitudeSolution> {
    match domain {
        Domain::Line => solve_line_amplitudes(params),
        Domain::Circle => solve_periodic_amplitudes(params),
    }
}

/// Periodic phase `1/2 - s + floor(s)`, in `(-1/2, 1/2]`.
pub fn zeta(s: f64) -> f64 {
    let mut frac = s - s.floor();
    // s slightly below an integer can round s - floor(s) up to 1
    if frac >= 1.0 {
        frac = 0.0;
    }
    0.5 - frac
}

/// An exact peakon on the line or the unit circle, travelling at `speed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravelingProfile {
    pub domain: Domain,
    pub amplitude: f64,
    pub speed: f64,
}

impl TravelingProfile {
    pub fn new(domain: Domain, amplitude: f64, speed: f64) -> Self {
        Self {
            domain,
            amplitude,
            speed,
        }
    }

    /// Profile in the co-moving coordinate `s = x - ct`.
    pub fn shape(&self, s: f64) -> f64 {
        match self.domain {
            Domain::Line => self.amplitude * (-s.abs()).exp(),
            Domain::Circle => self.amplitude * zeta(s).cosh(),
        }
    }

    /// `d/ds` of the shape. At the crest this returns the line value 0 and
    /// the right-sided circle value; neither is meaningful there.
    pub fn shape_dx(&self, s: f64) -> f64 {
        match self.domain {
            Domain::Line => -self.amplitude * sgn(s) * (-s.abs()).exp(),
            Domain::Circle => -self.amplitude * zeta(s).sinh(),
        }
    }

    /// Classical second derivative away from the crest. It equals the shape
    /// itself for both families.
    pub fn shape_dxx(&self, s: f64) -> f64 {
        self.shape(s)
    }

    pub fn eval_u(&self, t: f64, x: f64) -> f64 {
        self.shape(x - self.speed * t)
    }

    pub fn eval_ux(&self, t: f64, x: f64) -> f64 {
        self.shape_dx(x - self.speed * t)
    }

    pub fn eval_uxx(&self, t: f64, x: f64) -> f64 {
        self.shape_dxx(x - self.speed * t)
    }

    pub fn eval_ut(&self, t: f64, x: f64) -> f64 {
        -self.speed * self.eval_ux(t, x)
    }

    pub fn crest_height(&self) -> f64 {
        match self.domain {
            Domain::Line => self.amplitude,
            Domain::Circle => self.amplitude * ch_half(),
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        Self { amplitude, ..*self }
    }
}

pub fn make_peakon(params: &ModelParams, domain: Domain, branch: Branch) -> Result<TravelingProfile> {
    let sol = solve_amplitudes(params, domain)?;
    let amplitude = sol.branch(branch).ok_or(Error::NoRealAmplitude {
        discriminant: sol.discriminant,
    })?;
    Ok(TravelingProfile::new(domain, amplitude, params.c))
}

/// Both branches as distinct profiles `(Plus, Minus)`; fails when the
/// amplitude equation has one root (linear case or double root).
pub fn make_peakon_pair(
    params: &ModelParams,
    domain: Domain,
) -> Result<(TravelingProfile, TravelingProfile)> {
    let sol = solve_amplitudes(params, domain)?;
    if !sol.has_two_branches() {
        return Err(Error::BranchUnavailable);
    }
    let plus = sol.branch(Branch::Plus).expect("two roots");
    let minus = sol.branch(Branch::Minus).expect("two roots");
    Ok((
        TravelingProfile::new(domain, plus, params.c),
        TravelingProfile::new(domain, minus, params.c),
    ))
}

/// Line amplitudes along a sequence of `k1` values approaching zero.
///
/// Returns the root that stays bounded as `k1 -> 0` and tends to the
/// Camassa-Holm value `c / k2`: the Plus branch for `k2 > 0`, the Minus
/// branch for `k2 < 0`.
pub fn branch_continuity_limit(k2: f64, c: f64, k1_sequence: &[f64]) -> Result<Vec<f64>> {
    if k2 == 0.0 {
        return Err(Error::DegenerateParams);
    }
    let branch = if k2 > 0.0 { Branch::Plus } else { Branch::Minus };
    k1_sequence
        .iter()
        .map(|&k1| {
            let params = ModelParams::new(k1, k2, c)?;
            let sol = solve_line_amplitudes(&params)?;
            Ok(sol.branch(branch).expect("existing solution has branches"))
        })
        .collect()
}
