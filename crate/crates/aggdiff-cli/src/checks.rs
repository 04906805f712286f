//! Self-contained verification suites runnable from the command line.
//! Each suite returns a list of named pass/fail items with a detail
//! string, so a failure pinpoints the offending case.

use aggdiff::convolve::{heat_multiplier_step, Convolver, KernelGrid};
use aggdiff::density::{gaussian_profile, DensityField};
use aggdiff::fractional::{scaling_check, young_check};
use aggdiff::functionals::{
    capped_power_ratio, entropy_tail_check, fisher_information, relative_entropy_l1,
    relative_entropy_l2,
};
use aggdiff::grid::Grid;
use anyhow::{bail, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckItem {
    fn bound(name: impl Into<String>, value: f64, limit: f64) -> Self {
        CheckItem {
            name: name.into(),
            pass: value <= limit,
            detail: format!("{value:.3e} (limit {limit:.1e})"),
        }
    }
}

/// Names of the available suites, as accepted by `check <suite>`.
pub const SUITE_NAMES: [&str; 6] = [
    "quadrature",
    "gaussian-oracles",
    "convolution",
    "fractional",
    "appendix-c",
    "lemma44-scaling",
];

/// Runs the named suite; unknown names are an error (exit code 2 at the
/// command level).
pub fn run_suite(name: &str, seed: u64) -> Result<Vec<CheckItem>> {
    match name {
        "quadrature" => quadrature_suite(),
        "gaussian-oracles" => gaussian_oracle_suite(),
        "convolution" => convolution_suite(),
        "fractional" => fractional_suite(),
        "appendix-c" => tail_inequality_suite(seed),
        "lemma44-scaling" => capped_power_suite(),
        other => bail!(
            "unknown check suite `{other}` (available: {})",
            SUITE_NAMES.join(", ")
        ),
    }
}

// ---------------------------------------------------------------------
// quadrature: midpoint integration against closed forms.
// ---------------------------------------------------------------------

fn quadrature_suite() -> Result<Vec<CheckItem>> {
    let mut items = Vec::new();
    for dim in 1..=2usize {
        let cells = if dim == 1 { 512 } else { 128 };
        let grid = Grid::new(dim, 8.0, cells)?;
        let g = gaussian_profile(&grid, &vec![0.0; dim], 1.0)?;
        items.push(CheckItem::bound(
            format!("gaussian_mass_{dim}d"),
            (g.mass() - 1.0).abs(),
            1e-10,
        ));
        items.push(CheckItem::bound(
            format!("gaussian_second_moment_{dim}d"),
            (g.second_moment() - dim as f64).abs(),
            1e-8,
        ));
    }
    // Midpoint rule is exact on odd monomials over a symmetric box.
    let grid = Grid::new(1, 4.0, 128)?;
    let cubic: Vec<f64> = grid.axis_centers().iter().map(|&x| x * x * x).collect();
    items.push(CheckItem::bound(
        "odd_monomial_cancellation",
        grid.integrate(&cubic).abs(),
        1e-12,
    ));
    // Second-order convergence: quartic error shrinks ~4x per refinement.
    let coarse_err = quartic_error(64)?;
    let fine_err = quartic_error(128)?;
    items.push(CheckItem {
        name: "midpoint_second_order".into(),
        pass: coarse_err / fine_err > 3.5 && coarse_err / fine_err < 4.5,
        detail: format!("refinement ratio {:.3} (expect ~4)", coarse_err / fine_err),
    });
    Ok(items)
}

fn quartic_error(cells: usize) -> Result<f64> {
    let grid = Grid::new(1, 1.0, cells)?;
    let quartic: Vec<f64> = grid.axis_centers().iter().map(|&x| x.powi(4)).collect();
    Ok((grid.integrate(&quartic) - 2.0 / 5.0).abs())
}

// ---------------------------------------------------------------------
// gaussian-oracles: functionals of N(m, s) against closed forms.
// ---------------------------------------------------------------------

struct GaussianCase {
    mean: f64,
    variance: f64,
}

fn gaussian_oracle_suite() -> Result<Vec<CheckItem>> {
    let grid = Grid::new(1, 10.0, 512)?;
    let cases = [
        GaussianCase { mean: 0.0, variance: 1.0 },
        GaussianCase { mean: 0.5, variance: 0.8 },
        GaussianCase { mean: -0.3, variance: 1.2 },
        GaussianCase { mean: 0.7, variance: 0.5 },
    ];
    let tol = 1e-5;
    let mut items = Vec::new();
    for case in &cases {
        let (m, s) = (case.mean, case.variance);
        let field = gaussian_profile(&grid, &[m], s)?;
        let tag = format!("m{m}_s{s}");

        // Differential entropy of N(m, s): int rho log rho = -(1 + log 2 pi s)/2.
        let entropy_exact = -0.5 * (1.0 + (2.0 * std::f64::consts::PI * s).ln());
        items.push(CheckItem::bound(
            format!("entropy_{tag}"),
            (field.entropy() - entropy_exact).abs(),
            tol,
        ));

        let e1_exact = 0.5 * (m * m + (s - 1.0 - s.ln()));
        items.push(CheckItem::bound(
            format!("relative_entropy_{tag}"),
            (relative_entropy_l1(&field) - e1_exact).abs(),
            tol,
        ));

        let i1_exact = (1.0 - 1.0 / s).powi(2) * s + m * m;
        items.push(CheckItem::bound(
            format!("fisher_information_{tag}"),
            (fisher_information(&field)? - i1_exact).abs(),
            tol,
        ));

        // Chi-square divergence to the standard Gaussian (finite for s < 2).
        let e2_exact = (s * (2.0 - s)).powf(-0.5) * (m * m / (2.0 - s)).exp() - 1.0;
        items.push(CheckItem::bound(
            format!("l2_entropy_{tag}"),
            (relative_entropy_l2(&field)?.value - e2_exact).abs(),
            tol,
        ));

        let n2_exact = m * m + s;
        items.push(CheckItem::bound(
            format!("second_moment_{tag}"),
            (field.second_moment() - n2_exact).abs(),
            tol,
        ));
    }
    Ok(items)
}

// ---------------------------------------------------------------------
// convolution: FFT engine against exact algebraic identities.
// ---------------------------------------------------------------------

fn convolution_suite() -> Result<Vec<CheckItem>> {
    let mut items = Vec::new();
    let grid = Grid::new(1, 10.0, 256)?;
    let conv = Convolver::new(&grid);
    let kg = KernelGrid::for_grid(&grid);

    // Delta identity: a one-cell unit-mass field convolved with a kernel
    // returns kernel samples at the realizable differences.
    let h = grid.spacing();
    let mut delta = vec![0.0; grid.total_cells()];
    let spike = grid.total_cells() / 2;
    delta[spike] = 1.0 / h;
    let kernel: Vec<f64> = kg.offsets().iter().map(|&d| (-0.5 * d * d).exp()).collect();
    let out = conv.conv(&grid, &delta, &kg, &kernel)?;
    let x0 = grid.axis_centers()[spike];
    let max_err = out
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let d = grid.axis_centers()[i] - x0;
            (v - (-0.5 * d * d).exp()).abs()
        })
        .fold(0.0f64, f64::max);
    items.push(CheckItem::bound("delta_identity", max_err, 1e-12));

    // Variance addition: N(0, a) * N(0, b) = N(0, a + b).
    let a = 0.6;
    let b = 0.9;
    let f = gaussian_profile(&grid, &[0.0], a)?;
    let kernel_b: Vec<f64> = kg
        .offsets()
        .iter()
        .map(|&d| (2.0 * std::f64::consts::PI * b).powf(-0.5) * (-0.5 * d * d / b).exp())
        .collect();
    let sum = conv.conv(&grid, f.values(), &kg, &kernel_b)?;
    let exact = gaussian_profile(&grid, &[0.0], a + b)?;
    let max_err = sum
        .iter()
        .zip(exact.values())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0f64, f64::max);
    items.push(CheckItem::bound("variance_addition", max_err, 1e-6));

    // Heat semigroup: two half steps equal one full step to round-off.
    let dt = 0.05;
    let one = heat_multiplier_step(&grid, f.values(), dt)?;
    let half = heat_multiplier_step(&grid, f.values(), dt / 2.0)?;
    let two = heat_multiplier_step(&grid, &half, dt / 2.0)?;
    let max_err = one
        .iter()
        .zip(&two)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0f64, f64::max);
    items.push(CheckItem::bound("heat_semigroup", max_err, 1e-10));

    // Heat step against the exact Gaussian spread.
    let spread = heat_multiplier_step(&grid, f.values(), dt)?;
    let exact = gaussian_profile(&grid, &[0.0], a + 2.0 * dt)?;
    let max_err = spread
        .iter()
        .zip(exact.values())
        .map(|(u, v)| (u - v).abs())
        .fold(0.0f64, f64::max);
    items.push(CheckItem::bound("heat_step_exact_spread", max_err, 1e-6));

    Ok(items)
}

// ---------------------------------------------------------------------
// fractional: seminorm scaling law and convolution inequalities.
// ---------------------------------------------------------------------

fn fractional_suite() -> Result<Vec<CheckItem>> {
    let mut items = Vec::new();
    let grid = Grid::new(1, 10.0, 1024)?;
    let gauss = |x: f64| (-0.5 * x * x).exp();
    for s in [0.25, 0.5, 0.75] {
        for p in [1.0, 2.0] {
            for lambda in [0.5, 2.0] {
                let chk = scaling_check(&grid, gauss, s, p, lambda)?;
                items.push(CheckItem {
                    name: format!("scaling_s{s}_p{p}_lambda{lambda}"),
                    pass: (0.97..=1.03).contains(&chk.ratio),
                    detail: format!("ratio {:.4} (want within 3% of 1)", chk.ratio),
                });
            }
        }
    }

    // Classical L1 convolution bound holds with equality for nonnegative
    // inputs on the lattice.
    let grid = Grid::new(1, 10.0, 256)?;
    let f: Vec<f64> = grid.axis_centers().iter().map(|&x| gauss(x)).collect();
    let g: Vec<f64> = grid
        .axis_centers()
        .iter()
        .map(|&x| gauss(0.7 * (x - 1.0)))
        .collect();
    let chk = young_check(&grid, &f, &g, 0.0, 0.0, 1.0, 1.0, 1.0)?;
    items.push(CheckItem {
        name: "classical_convolution_endpoint".into(),
        pass: chk.ratio <= 1.0 + 1e-6,
        detail: format!("ratio {:.12} (limit 1 + 1e-6)", chk.ratio),
    });

    // Smoothness-splitting family: ratios vary by less than 3x across
    // the admissible (s0, s1) splits.
    let grid = Grid::new(1, 10.0, 512)?;
    let f: Vec<f64> = grid.axis_centers().iter().map(|&x| gauss(x)).collect();
    let g: Vec<f64> = grid
        .axis_centers()
        .iter()
        .map(|&x| gauss(1.3 * x) * (1.0 + 0.2 * x.sin()))
        .collect();
    let mut ratios = Vec::new();
    for (s0, s1) in [(0.2, 0.2), (0.3, 0.1), (0.1, 0.4), (0.15, 0.25)] {
        let chk = young_check(&grid, &f, &g, s0, s1, 2.0, 4.0 / 3.0, 4.0 / 3.0)?;
        ratios.push(chk.ratio);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    items.push(CheckItem {
        name: "convolution_family_spread".into(),
        pass: max / min <= 3.0,
        detail: format!("spread {:.3} (limit 3)", max / min),
    });
    Ok(items)
}

// ---------------------------------------------------------------------
// appendix-c: entropy tail inequality on randomized densities.
// ---------------------------------------------------------------------

fn tail_inequality_suite(seed: u64) -> Result<Vec<CheckItem>> {
    let grid = Grid::new(1, 12.0, 256)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    for case in 0..20usize {
        let components = rng.gen_range(1..=3usize);
        let mut values = vec![0.0f64; grid.total_cells()];
        for _ in 0..components {
            let w: f64 = rng.gen_range(0.2..1.0);
            let m: f64 = rng.gen_range(-2.0..2.0);
            let s: f64 = rng.gen_range(0.4..2.0);
            let norm = (2.0 * std::f64::consts::PI * s).powf(-0.5);
            for (flat, v) in values.iter_mut().enumerate() {
                let d = grid.axis_centers()[flat] - m;
                *v += w * norm * (-0.5 * d * d / s).exp();
            }
        }
        let field = DensityField::new(grid.clone(), values)?.normalized()?;
        let report = entropy_tail_check(&field)?;
        items.push(CheckItem {
            name: format!("tail_margin_case_{case:02}"),
            pass: report.margin >= 0.0,
            detail: format!(
                "margin {:.3e} (lhs {:.3e} <= rhs {:.3e})",
                report.margin, report.lhs, report.rhs
            ),
        });
    }
    Ok(items)
}

// ---------------------------------------------------------------------
// lemma44-scaling: scale invariance of the capped-power constant.
// ---------------------------------------------------------------------

fn capped_power_suite() -> Result<Vec<CheckItem>> {
    let mut items = Vec::new();
    let mut ratios = Vec::new();
    for k in [10.0, 1e2, 1e3, 1e4] {
        let (a, ratio) = capped_power_ratio(k, 0.5, 1.0)?;
        items.push(CheckItem {
            name: format!("capped_power_k{k:.0e}"),
            pass: ratio.is_finite() && ratio > 0.0,
            detail: format!("A {a:.4e}, ratio {ratio:.4}"),
        });
        ratios.push(ratio);
    }
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    items.push(CheckItem {
        name: "capped_power_cap_independence".into(),
        pass: max / min < 2.0,
        detail: format!("ratio spread {:.3} across caps (limit 2)", max / min),
    });
    Ok(items)
}
