#![allow(dead_code)]

use std::f64::consts::PI;

use peakon_core::spectral::{Grid, GridState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `mean + sum_{n=1}^{modes} (a_n cos 2 pi n x + b_n sin 2 pi n x)` with
/// `a_n, b_n` uniform in `[-amp/n, amp/n]`.
pub fn random_band_limited(grid: &Grid, seed: u64, modes: u32, amp: f64, mean: f64) -> GridState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|n| {
            let r = amp / n as f64;
            (rng.gen_range(-r..=r), rng.gen_range(-r..=r))
        })
        .collect();
    GridState::from_fn(grid, 0.0, |x| {
        coeffs.iter().enumerate().fold(mean, |acc, (i, (a, b))| {
            let th = 2.0 * PI * (i + 1) as f64 * x;
            acc + a * th.cos() + b * th.sin()
        })
    })
}

/// `u = (1 - d_x^2)^{-1} m` for a positive momentum `m` made of three
/// random von Mises bumps over a constant floor, projected to `|n| <= 32`.
/// Positive momentum keeps the flow smooth.
pub fn random_positive_momentum(grid: &Grid, seed: u64) -> GridState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.3..1.0), rng.gen_range(4.0..25.0)))
        .collect();
    let floor = rng.gen_range(0.2..0.5);
    let m = GridState::from_fn(grid, 0.0, |x| {
        bumps
            .iter()
            .fold(floor, |acc, (x0, w, k)| acc + w * (k * ((2.0 * PI * (x - x0)).cos() - 1.0)).exp())
    });
    let ops = peakon_core::spectral::Fourier::new(*grid);
    let mut hat = ops.forward(&m.u);
    ops.truncate(&mut hat, 32);
    ops.apply(&mut hat, |n| peakon_core::spectral::helmholtz_symbol(n).into());
    GridState::new(0.0, ops.inverse_real(&hat))
}
