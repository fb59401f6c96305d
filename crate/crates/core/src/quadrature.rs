//! Gauss-Legendre rules and an adaptive, breakpoint-aware integrator.
//!
//! Integrands here are piecewise analytic. Splitting at every breakpoint
//! and refining dyadically restores the exponential convergence of the
//! Gauss rule on each piece.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre recurrence, started from the
    /// asymptotic guesses `cos(pi (i - 1/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Apply the rule on `[a, b]` to a vector-valued integrand.
    pub fn apply<const M: usize, F>(&self, a: f64, b: f64, f: &mut F) -> [f64; M]
    where
        F: FnMut(f64) -> [f64; M],
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; M];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x);
            for (a, v) in acc.iter_mut().zip(v) {
                *a += w * v;
            }
        }
        acc.iter_mut().for_each(|a| *a *= half);
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// The 15-point rule used by every adaptive integration in the crate.
pub fn gl15() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(15))
}

/// Limits on adaptive refinement.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_depth: 40,
            max_intervals: 1 << 15,
        }
    }
}

struct Refiner<'a, const M: usize, F> {
    f: &'a mut F,
    budget: Budget,
    intervals: usize,
    overshoot: f64,
}

impl<const M: usize, F> Refiner<'_, M, F>
where
    F: FnMut(f64) -> [f64; M],
{
    fn refine(&mut self, a: f64, b: f64, whole: [f64; M], tol: f64, depth: u32, acc: &mut [f64; M]) {
        let rule = gl15();
        let m = 0.5 * (a + b);
        let left = rule.apply(a, m, self.f);
        let right = rule.apply(m, b, self.f);
        self.intervals += 2;
        let mut est: f64 = 0.0;
        let mut mag: f64 = 0.0;
        for i in 0..M {
            let halves = left[i] + right[i];
            est = est.max((whole[i] - halves).abs());
            mag = mag.max(left[i].abs() + right[i].abs());
        }
        // Below ~100 ulp of the magnitude the estimate is rounding noise.
        let floor = 128.0 * f64::EPSILON * mag;
        let converged = est <= tol.max(floor);
        let exhausted = depth >= self.budget.max_depth
            || self.intervals >= self.budget.max_intervals
            || m <= a
            || m >= b;
        if converged || exhausted {
            if !converged {
                self.overshoot = self.overshoot.max(est);
            }
            for i in 0..M {
                acc[i] += left[i] + right[i];
            }
            return;
        }
        self.refine(a, m, left, 0.5 * tol, depth + 1, acc);
        self.refine(m, b, right, 0.5 * tol, depth + 1, acc);
    }
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, never placing a rule
/// across an interior breakpoint. The absolute tolerance is shared between
/// pieces in proportion to their length.
pub fn integrate_piecewise<const M: usize, F>(
    mut f: F,
    breaks: &[f64],
    tol: f64,
    budget: Budget,
) -> Result<[f64; M]>
where
    F: FnMut(f64) -> [f64; M],
{
    let mut acc = [0.0; M];
    if breaks.len() < 2 {
        return Ok(acc);
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    if total <= 0.0 {
        return Ok(acc);
    }
    let mut refiner = Refiner {
        f: &mut f,
        budget,
        intervals: 0,
        overshoot: 0.0,
    };
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let local_tol = tol * (b - a) / total;
        let whole = gl15().apply(a, b, refiner.f);
        refiner.intervals += 1;
        refiner.refine(a, b, whole, local_tol, 0, &mut acc);
    }
    if refiner.overshoot > tol {
        return Err(Error::ToleranceNotMet {
            tol,
            estimate: refiner.overshoot,
        });
    }
    Ok(acc)
}

/// Scalar convenience wrapper over [`integrate_piecewise`].
pub fn integrate<F>(mut f: F, breaks: &[f64], tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_piecewise(|x| [f(x)], breaks, tol, Budget::default()).map(|[v]| v)
}

/// Sorted breakpoints `a < interior... < b`, dropping interior points that
/// fall outside `(a, b)` or within `min_gap` of a neighbour.
pub fn breakpoints(a: f64, b: f64, interior: impl IntoIterator<Item = f64>, min_gap: f64) -> Vec<f64> {
    let mut inner: Vec<f64> = interior
        .into_iter()
        .filter(|&k| k - a > min_gap && b - k > min_gap)
        .collect();
    inner.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(inner.len() + 2);
    out.push(a);
    for k in inner {
        if k - out[out.len() - 1] > min_gap {
            out.push(k);
        }
    }
    out.push(b);
    out
}
