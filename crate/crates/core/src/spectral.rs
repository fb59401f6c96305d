//! Uniform periodic grids on `[0, 1)` and Fourier multipliers.
//!
//! Coefficients are normalized so that `u(x) = sum_n u_hat(n) e^{2 pi i n x}`,
//! i.e. the forward transform divides by `N`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// `n` must be a power of two, at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::BadGrid(format!("N = {n} is not a power of two >= 8")));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Integer mode of FFT slot `idx`, in `[-N/2, N/2)`.
    pub fn mode(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.mode(idx) as f64
    }

    /// Largest retained mode under the 2/3 rule. Binary products of fields
    /// band-limited to this cutoff alias only onto discarded modes.
    pub fn dealias_cutoff(&self) -> usize {
        (self.n - 1) / 3
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }
}

/// Samples of `u` on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridState {
    pub time: f64,
    pub u: Vec<f64>,
}

impl GridState {
    pub fn new(time: f64, u: Vec<f64>) -> Self {
        Self { time, u }
    }

    pub fn from_fn(grid: &Grid, time: f64, f: impl Fn(f64) -> f64) -> Self {
        Self::new(time, grid.sample(f))
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.u.len())
    }

    pub fn spectrum(&self) -> Result<Vec<Complex64>> {
        Ok(Fourier::new(self.grid()?).forward(&self.u))
    }

    /// Momentum `m = u - u_xx`, via the multiplier `1 + (2 pi n)^2`.
    pub fn momentum(&self) -> Result<Vec<f64>> {
        let grid = self.grid()?;
        let ops = Fourier::new(grid);
        let mut hat = ops.forward(&self.u);
        for (i, h) in hat.iter_mut().enumerate() {
            let k = grid.wavenumber(i);
            *h *= 1.0 + k * k;
        }
        Ok(ops.inverse_real(&hat))
    }
}

/// FFT plans for one grid size.
#[derive(Clone)]
pub struct Fourier {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            fwd: planner.plan_fft_forward(grid.len()),
            inv: planner.plan_fft_inverse(grid.len()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        assert_eq!(u.len(), self.grid.len(), "sample count does not match grid");
        let scale = 1.0 / self.grid.len() as f64;
        let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn inverse_real(&self, hat: &[Complex64]) -> Vec<f64> {
        let mut buf = hat.to_vec();
        self.inv.process(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Multiply every coefficient by `symbol(mode)`.
    pub fn apply(&self, hat: &mut [Complex64], symbol: impl Fn(i64) -> Complex64) {
        for (i, h) in hat.iter_mut().enumerate() {
            *h *= symbol(self.grid.mode(i));
        }
    }

    /// Spectral derivative. The Nyquist mode, which has no real
    /// antisymmetric partner, is set to zero.
    pub fn derivative(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let nyq = -(self.grid.len() as i64 / 2);
        hat.iter()
            .enumerate()
            .map(|(i, &h)| {
                let n = self.grid.mode(i);
                if n == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    h * Complex64::new(0.0, 2.0 * PI * n as f64)
                }
            })
            .collect()
    }

    /// Zero every mode with `|n| > cutoff`.
    pub fn truncate(&self, hat: &mut [Complex64], cutoff: usize) {
        for (i, h) in hat.iter_mut().enumerate() {
            if self.grid.mode(i).unsigned_abs() as usize > cutoff {
                *h = Complex64::new(0.0, 0.0);
            }
        }
    }
}

/// `1 / (1 + (2 pi n)^2)`, the symbol of `(1 - d^2/dx^2)^{-1}` on the unit circle.
pub fn helmholtz_symbol(n: i64) -> f64 {
    let k = 2.0 * PI * n as f64;
    1.0 / (1.0 + k * k)
}

/// `(1 - d^2/dx^2)^{-1}` applied spectrally; the same as circular
/// convolution with the periodic Green's function.
pub fn helmholtz_inverse(samples: &GridState) -> Result<GridState> {
    let grid = samples.grid()?;
    let ops = Fourier::new(grid);
    let mut hat = ops.forward(&samples.u);
    ops.apply(&mut hat, |n| Complex64::new(helmholtz_symbol(n), 0.0));
    Ok(GridState::new(samples.time, ops.inverse_real(&hat)))
}

/// `1 - d^2/dx^2` applied spectrally.
pub fn helmholtz_forward(samples: &GridState) -> Result<GridState> {
    let grid = samples.grid()?;
    let ops = Fourier::new(grid);
    let mut hat = ops.forward(&samples.u);
    ops.apply(&mut hat, |n| Complex64::new(1.0 / helmholtz_symbol(n), 0.0));
    Ok(GridState::new(samples.time, ops.inverse_real(&hat)))
}
