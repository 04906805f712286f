//! Shipped experiment presets. Each is a complete flat config; command
//! line overrides apply on top.

use crate::config::FlatConfig;
use anyhow::{anyhow, Result};

/// Pure diffusion reference in self-similar variables: the relative
/// entropy to the Gaussian contracts at rate 2 and the variance relaxes
/// as `1 + (s0 - 1) e^{-2 tau}`.
const HEAT_BASELINE: &str = "
grid.dim = 1
grid.half_width = 10.0
grid.cells = 512
potential.kind = zero
ic.kind = gaussian
ic.mean = 0.7
ic.variance = 0.5
solver.tau_end = 4.0
solver.output_dtau = 0.05
fit.window_lo = 0.3
fit.window_hi = 3.0
";

/// Integrable interaction in 1D: a small repulsive (positive) Gaussian
/// bump, mean-shifted start; entropy decay bounded by e^{-tau}.
const L1_POTENTIAL_N1: &str = "
grid.dim = 1
grid.half_width = 10.0
grid.cells = 512
potential.kind = gaussian_bump
potential.amplitude = 0.1
potential.sigma = 1.0
ic.kind = gaussian
ic.mean = 0.7
ic.variance = 0.8
solver.tau_end = 5.0
solver.output_dtau = 0.05
fit.window_lo = 0.5
fit.window_hi = 4.0
";

/// Integrable interaction in 2D; entropy decay bounded by
/// (1 + tau) e^{-2 tau}.
const L1_POTENTIAL_N2: &str = "
grid.dim = 2
grid.half_width = 7.0
grid.cells = 128
potential.kind = gaussian_bump
potential.amplitude = 0.1
potential.sigma = 1.0
ic.kind = gaussian
ic.mean = 0.7, 0.0
ic.variance = 0.8
solver.tau_end = 5.0
solver.output_dtau = 0.05
solver.kernel_subsamples = 4
fit.window_lo = 0.5
fit.window_hi = 4.0
";

/// Integrable interaction in 3D at coarse desk-scale resolution;
/// entropy decay bounded by e^{-2 tau}.
const L1_POTENTIAL_N3: &str = "
grid.dim = 3
grid.half_width = 8.0
grid.cells = 64
potential.kind = gaussian_bump
potential.amplitude = 0.1
potential.sigma = 1.0
ic.kind = gaussian
ic.mean = 0.7, 0.0, 0.0
ic.variance = 0.8
solver.scheme = fv_euler
solver.tau_end = 5.0
solver.output_dtau = 0.1
solver.kernel_subsamples = 2
solver.kernel_refresh = 5
fit.window_lo = 0.5
fit.window_hi = 4.0
";

/// Non-integrable power tail whose gradient is still in L^{4/3} (2D):
/// the slow envelope with exponent 1/2 governs instead of the full
/// rate 2.
const SLOW_TAIL: &str = "
grid.dim = 2
grid.half_width = 7.0
grid.cells = 128
potential.kind = smoothed_power_tail
potential.eps = 0.6
potential.delta = 1.0
ic.kind = gaussian
ic.mean = 0.7, 0.0
ic.variance = 0.8
solver.tau_end = 5.0
solver.output_dtau = 0.05
solver.kernel_subsamples = 4
# Fit past the transient hump; the slow rate emerges after tau ~ 1.5.
fit.window_lo = 2.0
fit.window_hi = 5.0
rates.grad_exponents = 1.3333333333333333
rates.lap_exponents = 1.3333333333333333
# Growing potential: frozen-kernel free energy may rise (see
# log-borderline).
invariants.f_tilde_fwd_limit = 0.1
";

/// Logarithmically growing potential: every probed norm diverges, the
/// rescaled flow settles on a non-Gaussian steady profile, and the
/// relative entropy stops decaying. Negative control.
const LOG_BORDERLINE: &str = "
grid.dim = 1
grid.half_width = 10.0
grid.cells = 256
potential.kind = smoothed_log
potential.chi = 0.8
potential.delta = 1.0
ic.kind = gaussian
ic.mean = 0.5
ic.variance = 0.8
solver.tau_end = 6.0
solver.output_dtau = 0.05
fit.window_lo = 2.0
fit.window_hi = 6.0
rates.grad_exponents = 1.0, 2.0
rates.lap_exponents = 1.0, 2.0
# The rescaled kernel of a growing potential is genuinely
# time-dependent, so the frozen-kernel free energy may rise.
invariants.f_tilde_fwd_limit = 0.1
";

/// 2D run focused on the Gaussian-weighted L^2 entropy, which is
/// bounded by (1 + tau)^2 e^{-2 tau}.
const L2_ENTROPY: &str = "
grid.dim = 2
grid.half_width = 7.0
grid.cells = 128
potential.kind = gaussian_bump
potential.amplitude = 0.1
potential.sigma = 1.0
ic.kind = gaussian
ic.mean = 0.7, 0.0
ic.variance = 0.8
solver.tau_end = 5.0
solver.output_dtau = 0.05
solver.kernel_subsamples = 4
diagnostics.with_e2 = true
fit.window_lo = 0.5
fit.window_hi = 4.0
";

pub const PRESET_NAMES: &[&str] = &[
    "heat-baseline",
    "l1-potential-n1",
    "l1-potential-n2",
    "l1-potential-n3",
    "slow-tail",
    "log-borderline",
    "l2-entropy",
];

/// Returns the flat config text of a preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "heat-baseline" => HEAT_BASELINE,
        "l1-potential-n1" => L1_POTENTIAL_N1,
        "l1-potential-n2" => L1_POTENTIAL_N2,
        "l1-potential-n3" => L1_POTENTIAL_N3,
        "slow-tail" => SLOW_TAIL,
        "log-borderline" => LOG_BORDERLINE,
        "l2-entropy" => L2_ENTROPY,
        other => {
            return Err(anyhow!(
                "unknown preset `{other}` (available: {})",
                PRESET_NAMES.join(", ")
            ))
        }
    })
}

/// Parses a preset into a flat config.
pub fn preset_config(name: &str) -> Result<FlatConfig> {
    FlatConfig::parse_str(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn every_preset_parses_into_a_valid_experiment() {
        for name in PRESET_NAMES {
            let flat = preset_config(name).unwrap();
            let cfg = ExperimentConfig::from_flat(&flat)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            // The initial condition must be constructible on its grid.
            let ic = cfg.build_initial().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!((ic.mass() - 1.0).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(preset_text("nosuchpreset").is_err());
    }
}
