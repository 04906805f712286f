//! Decay-rate extraction from diagnostic time series and the
//! prediction/measurement comparison table.
//!
//! Rates are fitted as log-linear slopes over a user-selected window of
//! the rescaled time `tau`, optionally after dividing out a polynomial
//! modifier `(1 + tau)^k` that accompanies borderline regimes. A floor
//! estimated from the tail of the series excises samples that have hit
//! the discretization plateau, so the fit measures the transient decay
//! and not the floor.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{Norm, PotentialNorms, PotentialSpec};

/// Polynomial-in-`tau` factor divided out before the log-linear fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modifier {
    None,
    DivBy1PlusTau,
    DivBy1PlusTauSq,
}

impl Modifier {
    fn apply(self, tau: f64, value: f64) -> f64 {
        match self {
            Modifier::None => value,
            Modifier::DivBy1PlusTau => value / (1.0 + tau),
            Modifier::DivBy1PlusTauSq => value / ((1.0 + tau) * (1.0 + tau)),
        }
    }
}

/// Result of one log-linear decay fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// d log(value) / d tau over the window (negative for decay).
    pub slope: f64,
    /// log(value) extrapolated to tau = 0.
    pub intercept: f64,
    /// Coefficient of determination of the log-linear regression.
    pub r_squared: f64,
    /// The requested fit window in tau.
    pub window: (f64, f64),
    pub modifier: Modifier,
    /// Number of samples that survived window and floor filtering.
    pub n_points: usize,
    /// The floor below which samples were excluded.
    pub floor: f64,
}

/// Minimum samples required for a meaningful fit.
pub const MIN_FIT_POINTS: usize = 5;

/// Multiplier applied to the tail minimum when estimating the floor.
const FLOOR_FACTOR: f64 = 3.0;

/// Estimates the plateau floor as `FLOOR_FACTOR` times the smallest
/// magnitude over the last tenth of the series.
pub fn estimate_floor(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let tail_start = values.len() - (values.len() / 10).max(1);
    let tail_min = values[tail_start..]
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    FLOOR_FACTOR * tail_min
}

/// Least-squares log-linear fit of `values` against `taus` over the given
/// window, after dividing out `modifier` and discarding samples at or
/// below the floor (pass `floor = Some(0.0)` to disable excision).
pub fn fit_decay(
    taus: &[f64],
    values: &[f64],
    window: (f64, f64),
    modifier: Modifier,
    floor: Option<f64>,
) -> Result<RateFit> {
    if taus.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "series length mismatch: {} taus vs {} values",
            taus.len(),
            values.len()
        )));
    }
    if !(window.0 < window.1) {
        return Err(Error::InvalidArgument(format!(
            "empty fit window ({}, {})",
            window.0, window.1
        )));
    }
    let floor = floor.unwrap_or_else(|| estimate_floor(values));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&tau, &value) in taus.iter().zip(values) {
        if tau < window.0 || tau > window.1 {
            continue;
        }
        if !(value > floor) || !value.is_finite() {
            continue;
        }
        let v = modifier.apply(tau, value);
        if v > 0.0 {
            xs.push(tau);
            ys.push(v.ln());
        }
    }
    let n = xs.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::TooFewFitPoints {
            needed: MIN_FIT_POINTS,
            found: n,
        });
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        let dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate fit window".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window,
        modifier,
        n_points: n,
        floor,
    })
}

/// The decay envelope
/// `F_alpha(tau) = e^{-2 tau} int_0^tau e^{(2 - alpha) r} dr`,
/// evaluated with `expm1` so the removable singularity at `alpha = 2`
/// (where the value is `tau e^{-2 tau}`) is handled smoothly.
pub fn f_alpha(alpha: f64, tau: f64) -> f64 {
    let z = (2.0 - alpha) * tau;
    let phi = if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    };
    tau * (-2.0 * tau).exp() * phi
}

/// One quantity in the prediction/measurement table.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremRow {
    pub quantity: String,
    /// Predicted log-slope in tau, if the hypotheses support one.
    pub predicted_slope: Option<f64>,
    pub modifier: Modifier,
    pub fitted: Option<RateFit>,
    /// Fitted slope translated to an original-time power `t^{slope/2}`.
    pub t_exponent: Option<f64>,
    /// `Some(true)` when fitted slope <= predicted + tolerance.
    pub pass: Option<bool>,
    pub flags: Vec<String>,
    /// Reason the fit is absent, when it is.
    pub fit_error: Option<String>,
}

/// Prediction/measurement comparison for the convergence theorems.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    /// Which hypothesis class the interaction potential landed in.
    pub hypothesis_class: String,
    pub rows: Vec<TheoremRow>,
}

/// Slack allowed between fitted and predicted slopes.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Fitted slopes at or beyond this magnitude sit on the boundary where
/// the limiting profile is known to switch branches.
const PROFILE_SWAP_SLOPE: f64 = 1.0;

fn first_finite(norms: &[(f64, Norm)]) -> Option<f64> {
    norms
        .iter()
        .find(|(_, n)| n.is_finite())
        .map(|&(p, _)| p)
}

/// Classifies the potential and returns (class name, predicted slope for
/// the Gaussian relative entropy, modifier).
fn classify(
    dim: usize,
    spec: &PotentialSpec,
    norms: &PotentialNorms,
) -> (String, Option<f64>, Modifier) {
    if spec.is_zero() {
        return ("zero_potential".into(), Some(-2.0), Modifier::None);
    }
    if norms.l1_w.is_finite() {
        let rate = -(dim.min(2) as f64);
        let modifier = if dim == 2 {
            Modifier::DivBy1PlusTau
        } else {
            Modifier::None
        };
        return ("integrable_potential".into(), Some(rate), modifier);
    }
    // Envelope class: the interaction term can be bounded through either
    // the gradient route (decay exponent n/p1 - 1) or the Laplacian route
    // (n/p2 - 2); each finite norm yields an independent envelope
    // F_alpha, so the best positive exponent governs, capped by the
    // confinement rate 2.
    let mut best: Option<f64> = None;
    if let Some(p1) = first_finite(&norms.grad_lp) {
        let a = dim as f64 / p1 - 1.0;
        if a > 0.0 {
            best = Some(best.map_or(a, |b: f64| b.max(a)));
        }
    }
    if let Some(p2) = first_finite(&norms.lap_lp) {
        let a = dim as f64 / p2 - 2.0;
        if a > 0.0 {
            best = Some(best.map_or(a, |b: f64| b.max(a)));
        }
    }
    let Some(alpha) = best else {
        return ("no_convergence_predicted".into(), None, Modifier::None);
    };
    let modifier = if alpha >= 2.0 {
        Modifier::DivBy1PlusTau
    } else {
        Modifier::None
    };
    ("slow_envelope".into(), Some(-alpha.min(2.0)), modifier)
}

fn build_row(
    quantity: &str,
    predicted: Option<f64>,
    modifier: Modifier,
    taus: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> TheoremRow {
    let (fitted, fit_error) = match fit_decay(taus, values, window, modifier, None) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let t_exponent = fitted.map(|f| f.slope / 2.0);
    let pass = match (predicted, &fitted) {
        (Some(pred), Some(fit)) => Some(fit.slope <= pred + SLOPE_TOLERANCE),
        _ => None,
    };
    TheoremRow {
        quantity: quantity.into(),
        predicted_slope: predicted,
        modifier,
        fitted,
        t_exponent,
        pass,
        flags: Vec::new(),
        fit_error,
    }
}

/// Builds the comparison table for the relative entropy `e1`, the L1
/// distance to the Gaussian, and the second-moment gap `n2 - n`,
/// classifying the potential by its computed norms.
pub fn theorem_report(
    dim: usize,
    spec: &PotentialSpec,
    norms: &PotentialNorms,
    taus: &[f64],
    e1: &[f64],
    l1_dist: &[f64],
    n2_gap: &[f64],
    window: (f64, f64),
) -> Result<TheoremReport> {
    if dim != norms.dim {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {dim} vs norms computed for {}",
            norms.dim
        )));
    }
    let (class, e1_pred, e1_mod) = classify(dim, spec, norms);

    let e1_row = build_row("e1", e1_pred, e1_mod, taus, e1, window);

    // Csiszar-Kullback transfers half the entropy rate to the L1 distance;
    // the (1 + tau) factor becomes a square root, which the 0.15 slope
    // tolerance absorbs over any window of a few tau units.
    let l1_pred = e1_pred.map(|p| p / 2.0);
    let mut l1_row = build_row("l1_dist_g", l1_pred, Modifier::None, taus, l1_dist, window);
    if let Some(fit) = &e1_row.fitted {
        if fit.slope <= -PROFILE_SWAP_SLOPE + 1e-6 {
            l1_row
                .flags
                .push("profile_swap_boundary: fitted entropy rate at or past the branch-switch threshold".into());
        }
    }

    let n2_row = build_row("n2_minus_n", e1_pred, e1_mod, taus, n2_gap, window);

    Ok(TheoremReport {
        hypothesis_class: class,
        rows: vec![e1_row, l1_row, n2_row],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::potential_norms;

    #[test]
    fn envelope_matches_quadrature_oracle() {
        // Trapezoid quadrature of e^{-2 tau} int_0^tau e^{(2-alpha) r} dr.
        for alpha in [0.5, 2.0, 3.0] {
            for tau in [0.3, 1.0, 2.0] {
                let m = 20_000;
                let dr = tau / m as f64;
                let mut acc = 0.0;
                for k in 0..=m {
                    let r = k as f64 * dr;
                    let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                    acc += w * ((2.0 - alpha) * r).exp();
                }
                let oracle = (-2.0 * tau).exp() * acc * dr;
                let val = f_alpha(alpha, tau);
                assert!(
                    (val - oracle).abs() < 1e-8 * oracle.max(1e-12),
                    "alpha={alpha} tau={tau}: {val} vs {oracle}"
                );
            }
        }
        // Removable singularity: F_2(tau) = tau e^{-2 tau}.
        let tau = 1.3;
        assert!((f_alpha(2.0, tau) - tau * (-2.0 * tau).exp()).abs() < 1e-14);
    }

    #[test]
    fn envelope_obeys_closed_form_bounds() {
        for tau in [0.5, 1.0, 3.0] {
            // alpha > 2: below e^{-2 tau} / (alpha - 2).
            assert!(f_alpha(3.0, tau) <= (-2.0 * tau).exp() / 1.0 + 1e-15);
            // alpha < 2: below e^{-alpha tau} / (2 - alpha).
            assert!(f_alpha(0.5, tau) <= (-0.5 * tau).exp() / 1.5 + 1e-15);
        }
    }

    #[test]
    fn fit_recovers_synthetic_slope_with_modifier() {
        let taus: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let values: Vec<f64> = taus
            .iter()
            .map(|&t| 3.0 * (-1.7 * t).exp() * (1.0 + t))
            .collect();
        let fit = fit_decay(
            &taus,
            &values,
            (1.0, 8.0),
            Modifier::DivBy1PlusTau,
            Some(0.0),
        )
        .unwrap();
        assert!((fit.slope + 1.7).abs() < 1e-10, "slope {}", fit.slope);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-10);
        assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn floor_excision_protects_the_fit_from_the_plateau() {
        let taus: Vec<f64> = (0..300).map(|k| 0.05 * k as f64).collect();
        let values: Vec<f64> = taus
            .iter()
            .map(|&t| ((-2.0 * t).exp() + 1e-8f64).max(1e-8))
            .collect();
        // Without excision the plateau drags the slope toward zero.
        let naive = fit_decay(&taus, &values, (0.5, 14.0), Modifier::None, Some(0.0)).unwrap();
        assert!(naive.slope > -1.6, "naive slope {}", naive.slope);
        // Tail-estimated floor removes the plateau samples.
        let fit = fit_decay(&taus, &values, (0.5, 14.0), Modifier::None, None).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let taus = [0.0, 1.0, 2.0];
        let values = [1.0, 0.5, 0.25];
        let err = fit_decay(&taus, &values, (0.0, 2.0), Modifier::None, Some(0.0)).unwrap_err();
        assert!(matches!(err, Error::TooFewFitPoints { .. }));
    }

    fn synthetic_series(rate: f64) -> (Vec<f64>, Vec<f64>) {
        let taus: Vec<f64> = (0..100).map(|k| 0.05 * k as f64).collect();
        let values: Vec<f64> = taus.iter().map(|&t| (rate * t).exp()).collect();
        (taus, values)
    }

    #[test]
    fn report_predicts_two_for_zero_potential() {
        let spec = PotentialSpec::Zero;
        let norms = potential_norms(&spec, 1, &[2.0], &[2.0]).unwrap();
        let (taus, vals) = synthetic_series(-1.95);
        let report =
            theorem_report(1, &spec, &norms, &taus, &vals, &vals, &vals, (0.5, 4.5)).unwrap();
        assert_eq!(report.hypothesis_class, "zero_potential");
        let e1 = &report.rows[0];
        assert_eq!(e1.predicted_slope, Some(-2.0));
        assert_eq!(e1.pass, Some(true));
        // L1 prediction is half the entropy prediction.
        assert_eq!(report.rows[1].predicted_slope, Some(-1.0));
        // -1.95 entropy slope sits past the branch-switch threshold.
        assert!(!report.rows[1].flags.is_empty());
    }

    #[test]
    fn report_uses_dimension_capped_rate_for_integrable_potentials() {
        let spec = PotentialSpec::GaussianBump {
            amplitude: 0.1,
            sigma: 1.0,
        };
        for (dim, expect, modifier) in [
            (1, -1.0, Modifier::None),
            (2, -2.0, Modifier::DivBy1PlusTau),
            (3, -2.0, Modifier::None),
        ] {
            let norms = potential_norms(&spec, dim, &[2.0], &[2.0]).unwrap();
            let (taus, vals) = synthetic_series(expect);
            let report =
                theorem_report(dim, &spec, &norms, &taus, &vals, &vals, &vals, (0.5, 4.5))
                    .unwrap();
            assert_eq!(report.hypothesis_class, "integrable_potential");
            assert_eq!(report.rows[0].predicted_slope, Some(expect));
            assert_eq!(report.rows[0].modifier, modifier);
        }
    }

    #[test]
    fn report_uses_slow_envelope_for_power_tails() {
        // n = 2, tail (delta^2 + r^2)^{-0.3}: gradient decays like
        // r^{-1.6}, in L^{4/3} (4/3 * 1.6 > 2); predicted alpha =
        // 2 / (4/3) - 1 = 0.5.
        let spec = PotentialSpec::SmoothedPowerTail {
            eps: 0.6,
            delta: 1.0,
        };
        let norms = potential_norms(&spec, 2, &[4.0 / 3.0], &[4.0 / 3.0]).unwrap();
        assert!(norms.grad_lp[0].1.is_finite());
        assert!(!norms.l1_w.is_finite());
        let (taus, vals) = synthetic_series(-0.55);
        let report =
            theorem_report(2, &spec, &norms, &taus, &vals, &vals, &vals, (0.5, 4.5)).unwrap();
        assert_eq!(report.hypothesis_class, "slow_envelope");
        assert_eq!(report.rows[0].predicted_slope, Some(-0.5));
        assert_eq!(report.rows[0].pass, Some(true));
    }

    #[test]
    fn report_refuses_prediction_when_norms_diverge() {
        // Logarithmically growing potential: no finite gradient norm at
        // the probed exponent in 1D (grad ~ r^{-1}, L^1 diverges at
        // infinity... p=1, beta=1, p*beta = 1 = n diverges).
        let spec = PotentialSpec::SmoothedLog {
            chi: 0.5,
            delta: 1.0,
        };
        let norms = potential_norms(&spec, 1, &[1.0], &[1.0]).unwrap();
        assert!(!norms.grad_lp[0].1.is_finite());
        let (taus, vals) = synthetic_series(-0.02);
        let report =
            theorem_report(1, &spec, &norms, &taus, &vals, &vals, &vals, (0.5, 4.5)).unwrap();
        assert_eq!(report.hypothesis_class, "no_convergence_predicted");
        assert_eq!(report.rows[0].predicted_slope, None);
        assert_eq!(report.rows[0].pass, None);
    }
}
