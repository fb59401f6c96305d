//! Peakons of the generalized Camassa-Holm equation with cubic and
//! quadratic nonlinearity: amplitude algebra, Green's-function
//! convolutions, residual certification and pseudospectral evolution.

pub mod error;
pub mod evolve;
pub mod green;
pub mod model;
pub mod quadrature;
pub mod residual;
pub mod spectral;

pub use error::{Error, Result};
pub use model::{Branch, Domain, ModelParams, TravelingProfile};
