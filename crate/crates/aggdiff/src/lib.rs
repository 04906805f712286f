//! Solver and diagnostics toolkit for aggregation-diffusion equations
//! `d rho / dt = Delta rho + div(rho grad(W * rho))` and their
//! self-similar rescaling, with the energy/entropy/moment functionals
//! needed to verify decay rates toward the Gaussian profile numerically.

pub mod convolve;
pub mod density;
pub mod error;
pub mod fractional;
pub mod functionals;
pub mod grid;
pub mod potential;
pub mod rates;
pub mod solver;

pub use error::{Error, Result};
