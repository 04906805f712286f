//! End-to-end acceptance checks: each test prints one
//! `ACCEPTANCE <n>: PASS/FAIL` line and asserts the stated bound.
//! Preset runs are shared between tests through lazily initialized
//! statics, so the suite costs roughly one pass over the preset list.

use std::sync::OnceLock;

use aggdiff::functionals::DiagnosticsRecord;
use aggdiff::rates::{fit_decay, Modifier, RateFit};
use aggdiff_cli::checks::run_suite;
use aggdiff_cli::config::ExperimentConfig;
use aggdiff_cli::presets::preset_config;
use aggdiff_cli::runner::{run_experiment, RunArtifacts};

// -------------------------------------------------------------------
// Shared preset runs.
// -------------------------------------------------------------------

fn run_preset(name: &str, overrides: &[(&str, &str)]) -> RunArtifacts {
    let mut flat = preset_config(name).unwrap();
    for (key, value) in overrides {
        flat.set(key, value);
    }
    run_experiment(&flat, None).unwrap_or_else(|e| panic!("preset {name}: {e:#}"))
}

macro_rules! shared_run {
    ($fn_name:ident, $preset:expr, $overrides:expr) => {
        fn $fn_name() -> &'static RunArtifacts {
            static CELL: OnceLock<RunArtifacts> = OnceLock::new();
            CELL.get_or_init(|| run_preset($preset, $overrides))
        }
    };
}

shared_run!(heat, "heat-baseline", &[]);
// Extended horizon: the second-moment trend check needs tau up to 6.
shared_run!(l1n1, "l1-potential-n1", &[("solver.tau_end", "6.0")]);
shared_run!(l1n2, "l1-potential-n2", &[]);
shared_run!(l1n3, "l1-potential-n3", &[]);
shared_run!(slow_tail, "slow-tail", &[]);
shared_run!(log_borderline, "log-borderline", &[]);
shared_run!(l2_entropy, "l2-entropy", &[]);

/// Presets whose rescaled flow converges to the Gaussian profile.
fn convergent_runs() -> Vec<(&'static str, &'static RunArtifacts)> {
    vec![
        ("heat-baseline", heat()),
        ("l1-potential-n1", l1n1()),
        ("l1-potential-n2", l1n2()),
        ("l1-potential-n3", l1n3()),
        ("slow-tail", slow_tail()),
        ("l2-entropy", l2_entropy()),
    ]
}

fn all_runs() -> Vec<(&'static str, &'static RunArtifacts)> {
    let mut runs = convergent_runs();
    runs.push(("log-borderline", log_borderline()));
    runs
}

// -------------------------------------------------------------------
// Small helpers.
// -------------------------------------------------------------------

fn series(a: &RunArtifacts, pick: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<f64> {
    a.records.iter().map(pick).collect()
}

/// Sum of positive increments of `values` over the tau window: zero for
/// a monotone decrease, and the cumulative upward drift otherwise.
fn total_increase(taus: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    let mut rise = 0.0;
    let mut prev: Option<f64> = None;
    for (&tau, &v) in taus.iter().zip(values) {
        if tau < lo - 1e-9 || tau > hi + 1e-9 || !v.is_finite() {
            continue;
        }
        if let Some(p) = prev {
            rise += (v - p).max(0.0);
        }
        prev = Some(v);
    }
    rise
}

/// Ordinary (non-log) least-squares slope over the tau window.
fn linear_slope(taus: &[f64], values: &[f64], lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(values)
        .filter(|(&t, _)| t >= lo - 1e-9 && t <= hi + 1e-9)
        .map(|(&t, &v)| (t, v))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn fitted_slope(a: &RunArtifacts, quantity: &str) -> f64 {
    a.report
        .rows
        .iter()
        .find(|r| r.quantity == quantity)
        .and_then(|r| r.fitted.as_ref())
        .map(|f: &RateFit| f.slope)
        .unwrap_or_else(|| panic!("no fit for {quantity}"))
}

fn verdict(number: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {number}: {status} — {detail}");
    assert!(pass, "acceptance {number} failed: {detail}");
}

// -------------------------------------------------------------------
// 1. Pure-diffusion baseline: entropy contraction rate and the exact
//    variance relaxation law.
// -------------------------------------------------------------------

#[test]
fn acceptance_01_heat_baseline_contraction() {
    let slope = fitted_slope(heat(), "e1");

    // Track the variance directly from the density snapshots.
    let flat = preset_config("heat-baseline").unwrap();
    let cfg = ExperimentConfig::from_flat(&flat).unwrap();
    let s0 = 0.5; // preset initial variance
    let mut max_err = 0.0f64;
    aggdiff::solver::run(
        &cfg.potential,
        cfg.build_initial().unwrap(),
        &cfg.solver,
        &cfg.diagnostics,
        &mut |record, field| {
            let mean_sq: f64 = field.mean().iter().map(|m| m * m).sum();
            let variance = record.second_moment - mean_sq;
            let exact = 1.0 + (s0 - 1.0) * (-2.0 * record.tau).exp();
            max_err = max_err.max((variance - exact).abs());
            Ok(())
        },
    )
    .unwrap();

    verdict(
        1,
        slope <= -1.85 && max_err <= 5e-3,
        &format!("entropy slope {slope:.3} (need <= -1.85), variance error {max_err:.2e} (need <= 5e-3)"),
    );
}

// -------------------------------------------------------------------
// 2. Integrable-interaction presets: the compensated log-entropy stays
//    bounded (total upward drift <= 0.2 over tau in [1, 5]).
// -------------------------------------------------------------------

#[test]
fn acceptance_02_compensated_entropy_bounded() {
    let cases: [(&str, &RunArtifacts, fn(f64, f64) -> f64); 3] = [
        ("n=1", l1n1(), |e1: f64, tau: f64| e1.ln() + tau),
        ("n=2", l1n2(), |e1: f64, tau: f64| {
            e1.ln() + 2.0 * tau - (1.0 + tau).ln()
        }),
        ("n=3", l1n3(), |e1: f64, tau: f64| e1.ln() + 2.0 * tau),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (label, run, compensate) in cases {
        let taus = series(run, |r| r.tau);
        let g: Vec<f64> = run
            .records
            .iter()
            .map(|r| compensate(r.e1.max(f64::MIN_POSITIVE), r.tau))
            .collect();
        let rise = total_increase(&taus, &g, 1.0, 5.0);
        pass &= rise <= 0.2;
        detail.push_str(&format!("{label} rise {rise:.3e}; "));
    }
    verdict(2, pass, &format!("{detail}(each needs <= 0.2)"));
}

// -------------------------------------------------------------------
// 3. L1 distance to the Gaussian decays at least like e^{-0.45 tau} on
//    the 1D integrable-interaction preset.
// -------------------------------------------------------------------

#[test]
fn acceptance_03_l1_distance_decays() {
    let slope = fitted_slope(l1n1(), "l1_dist_g");
    verdict(3, slope <= -0.45, &format!("L1 slope {slope:.3} (need <= -0.45)"));
}

// -------------------------------------------------------------------
// 4. Second moment: bounded trend, a convergent discrete balance law,
//    and |N2 - n| decaying on every convergent preset.
// -------------------------------------------------------------------

fn moment_balance_residual(run: &RunArtifacts, dim: f64) -> f64 {
    let r = &run.records;
    let mut max_res = 0.0f64;
    for k in 1..r.len() - 1 {
        let tau = r[k].tau;
        if !(0.2..=1.8).contains(&tau) {
            continue;
        }
        let dtau = r[k + 1].tau - r[k - 1].tau;
        let lhs = (r[k + 1].second_moment - r[k - 1].second_moment) / dtau;
        let rhs = 2.0 * dim - 2.0 * r[k].second_moment - 2.0 * r[k].j1;
        max_res = max_res.max((lhs - rhs).abs());
    }
    max_res
}

#[test]
fn acceptance_04_second_moment_balance() {
    // (a) No upward trend in N2 over tau in [1, 6].
    let taus = series(l1n1(), |r| r.tau);
    let n2 = series(l1n1(), |r| r.second_moment);
    let trend = linear_slope(&taus, &n2, 1.0, 6.0);

    // (b) The discrete balance dN2/dtau = 2n - 2 N2 - 2 J1 converges:
    // refining the grid and the sampling step together shrinks the
    // residual by at least 3x.
    let coarse = run_preset(
        "l1-potential-n1",
        &[
            ("grid.cells", "128"),
            ("solver.output_dtau", "0.1"),
            ("solver.tau_end", "2.0"),
        ],
    );
    let fine = run_preset(
        "l1-potential-n1",
        &[
            ("grid.cells", "256"),
            ("solver.output_dtau", "0.05"),
            ("solver.tau_end", "2.0"),
        ],
    );
    let res_coarse = moment_balance_residual(&coarse, 1.0);
    let res_fine = moment_balance_residual(&fine, 1.0);
    let ratio = res_coarse / res_fine;

    // (c) |N2 - n| has a negative fitted slope on every convergent
    // preset, fitted over that preset's own window.
    let mut gap_ok = true;
    let mut gap_detail = String::new();
    for (name, run) in convergent_runs() {
        let slope = fitted_slope(run, "n2_minus_n");
        gap_ok &= slope < 0.0;
        gap_detail.push_str(&format!("{name} {slope:.2}; "));
    }

    verdict(
        4,
        trend <= 1e-3 && ratio >= 3.0 && gap_ok,
        &format!(
            "N2 trend {trend:.2e} (<= 1e-3), balance residual {res_coarse:.2e} -> {res_fine:.2e} ratio {ratio:.2} (>= 3), gap slopes: {gap_detail}(all < 0)"
        ),
    );
}

// -------------------------------------------------------------------
// 5. Frame-change energy identity, monotone Lyapunov functional, and
//    boundedness of the compensated original-frame energy.
// -------------------------------------------------------------------

#[test]
fn acceptance_05_energy_identities() {
    // (a) E_orig = E_tilde - n tau holds to 1e-6 on the N = 512 presets.
    let mut id_res = 0.0f64;
    for (_, run) in [("heat", heat()), ("l1n1", l1n1())] {
        for r in &run.records {
            id_res = id_res.max((r.e_orig - (r.e_tilde - r.tau)).abs());
        }
    }

    // (b) The rescaled free energy never increases beyond round-off.
    let mut fwd_max = f64::NEG_INFINITY;
    let mut bounded_pass = true;
    let mut detail = String::new();
    let runs = [
        ("heat-baseline", heat(), 1.0),
        ("l1-potential-n1", l1n1(), 1.0),
        ("l1-potential-n2", l1n2(), 2.0),
        ("l1-potential-n3", l1n3(), 3.0),
    ];
    for (name, run, dim) in runs {
        for w in run.records.windows(2) {
            fwd_max = fwd_max.max(w[1].f_tilde - w[0].f_tilde);
        }
        // (c) E_orig + (n/2) log(1 + t) stays bounded (rise <= 0.2).
        let taus = series(run, |r| r.tau);
        let comp: Vec<f64> = run
            .records
            .iter()
            .map(|r| r.e_orig + 0.5 * dim * (1.0 + r.t).ln())
            .collect();
        let rise = total_increase(&taus, &comp, 0.0, f64::INFINITY);
        bounded_pass &= rise <= 0.2;
        detail.push_str(&format!("{name} rise {rise:.2e}; "));
    }

    verdict(
        5,
        id_res <= 1e-6 && fwd_max <= 1e-3 && bounded_pass,
        &format!(
            "frame identity residual {id_res:.2e} (<= 1e-6), max forward energy step {fwd_max:.2e} (<= 1e-3), {detail}(each <= 0.2)"
        ),
    );
}

// -------------------------------------------------------------------
// 6. Pointwise structural invariants on every snapshot of every preset.
// -------------------------------------------------------------------

#[test]
fn acceptance_06_snapshot_invariants() {
    let mut pass = true;
    let mut detail = String::new();
    for (name, run) in all_runs() {
        let mass0 = run.records[0].mass;
        let mut bad: Vec<&str> = Vec::new();
        for r in &run.records {
            if r.e1 < -1e-8 {
                bad.push("e1");
            }
            if r.l1_dist_g > r.ck_rhs + 1e-4 {
                bad.push("ck");
            }
            if r.lsi_gap < -1e-4 {
                bad.push("lsi");
            }
            if r.poincare_gap < -1e-4 {
                bad.push("poincare");
            }
            if ((r.mass - mass0) / mass0).abs() > 1e-12 {
                bad.push("mass");
            }
            if r.min_value < 0.0 {
                bad.push("min");
            }
        }
        bad.dedup();
        if !bad.is_empty() {
            pass = false;
            detail.push_str(&format!("{name}: {}; ", bad.join(",")));
        }
    }
    if pass {
        detail = format!(
            "entropy >= 0, L1 <= CK bound, LSI/Poincare gaps >= -1e-4, mass drift <= 1e-12, density >= 0 on {} presets",
            all_runs().len()
        );
    }
    verdict(6, pass, &detail);
}

// -------------------------------------------------------------------
// 7. Weighted L2 entropy: compensated log stays bounded in 2D.
// -------------------------------------------------------------------

#[test]
fn acceptance_07_l2_entropy_bounded() {
    let run = l2_entropy();
    let taus = series(run, |r| r.tau);
    let g: Vec<f64> = run
        .records
        .iter()
        .map(|r| r.e2.max(f64::MIN_POSITIVE).ln() + 2.0 * r.tau - 2.0 * (1.0 + r.tau).ln())
        .collect();
    let rise = total_increase(&taus, &g, 1.0, 5.0);
    verdict(7, rise <= 0.2, &format!("compensated log E2 rise {rise:.3e} (need <= 0.2)"));
}

// -------------------------------------------------------------------
// 8-10. Verification suites: Gaussian closed forms, fractional-norm
// inequalities, randomized tail inequality.
// -------------------------------------------------------------------

fn suite_verdict(number: u32, suite: &str) {
    let items = run_suite(suite, 7).unwrap();
    let failures: Vec<String> = items
        .iter()
        .filter(|i| !i.pass)
        .map(|i| format!("{}: {}", i.name, i.detail))
        .collect();
    verdict(
        number,
        failures.is_empty(),
        &if failures.is_empty() {
            format!("{suite}: all {} checks passed", items.len())
        } else {
            format!("{suite}: {}", failures.join("; "))
        },
    );
}

#[test]
fn acceptance_08_gaussian_closed_forms() {
    suite_verdict(8, "gaussian-oracles");
}

#[test]
fn acceptance_09_fractional_inequalities() {
    suite_verdict(9, "fractional");
}

#[test]
fn acceptance_10_tail_inequality_randomized() {
    suite_verdict(10, "appendix-c");
}

// -------------------------------------------------------------------
// 11. Borderline log potential: the entropy plateaus instead of
// decaying (negative control for the convergence theory).
// -------------------------------------------------------------------

#[test]
fn acceptance_11_borderline_entropy_plateau() {
    let run = log_borderline();
    let taus = series(run, |r| r.tau);
    let e1 = series(run, |r| r.e1);
    // floor = 0 keeps the plateau samples in the fit.
    let fit = fit_decay(&taus, &e1, (2.0, 6.0), Modifier::None, Some(0.0)).unwrap();
    verdict(
        11,
        fit.slope > -0.05,
        &format!("entropy slope {:.4} on [2, 6] (need > -0.05)", fit.slope),
    );
}
