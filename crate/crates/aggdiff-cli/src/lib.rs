//! Command-line front end for the aggregation-diffusion toolkit:
//! experiment configuration, bundled presets, the run/rates/check/sweep
//! verbs, and lightweight SVG plotting.

pub mod checks;
pub mod config;
pub mod plot;
pub mod presets;
pub mod runner;
