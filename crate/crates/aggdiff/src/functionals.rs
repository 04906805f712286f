//! Energy, entropy, moment, and inequality diagnostics for densities in
//! the self-similar frame, plus the per-snapshot [`DiagnosticsRecord`].
//!
//! Conventions (unit-mass densities, `G` the standard Gaussian):
//! * `E      = int rho log rho + 1/2 int rho (W * rho)` (original frame)
//! * `E~     = int rho~ log rho~ + 1/2 int rho~ (W~ * rho~)` (rescaled)
//! * `F~     = E~ + 1/2 int |y|^2 rho~` (the rescaled Lyapunov functional)
//! * `E1     = int rho~ log(rho~ / G)` (relative entropy, computed as
//!   entropy + second moment / 2 + (n/2) log(2 pi))
//! * `I1     = int rho~ |grad log rho~ + y|^2` (relative Fisher info)
//! * `E2     = int (rho~ - G)^2 / G` over the Gaussian cut `|y| <= 0.9 L`
//! * `J1     = int rho~ y . (grad W~ * rho~)`,
//!   `J2 = int grad rho~ . (grad W~ * rho~) = -int rho~ (lap W~ * rho~)`
//!
//! The frame-change identity `E(t) = E~(tau) - n tau` holds exactly for
//! the discrete quadratures because the two frames share cell indices.

use serde::Serialize;

use crate::convolve::{Convolver, KernelGrid};
use crate::density::{standard_gaussian, DensityField, LOG_CLAMP};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{
    rescaled_grad_samples, rescaled_lap_samples, rescaled_w_samples, PotentialSpec,
};

/// Relative floor under which a cell is excluded from logarithmic
/// derivatives (`1e-14 * max rho`).
pub const FISHER_FLOOR_REL: f64 = 1e-14;

/// Fraction of the half-width kept by the Gaussian cut for the weighted
/// `L^2` quantities.
pub const G_CUT_FRACTION: f64 = 0.9;

/// Interaction convolutions of one density with one rescaled potential.
pub struct InteractionFields {
    /// `(W~ * rho)` at cell centers.
    pub w_conv: Vec<f64>,
    /// `(grad W~ * rho)`, one component per axis.
    pub grad_conv: Vec<Vec<f64>>,
    /// `(lap W~ * rho)`.
    pub lap_conv: Vec<f64>,
}

/// Computes all interaction convolutions with cell-averaged kernel
/// samples (`subsamples` midpoints per axis per kernel cell).
pub fn interaction_fields(
    spec: &PotentialSpec,
    field: &DensityField,
    tau: f64,
    subsamples: usize,
) -> Result<InteractionFields> {
    let grid = field.grid();
    let total = grid.total_cells();
    if spec.is_zero() {
        return Ok(InteractionFields {
            w_conv: vec![0.0; total],
            grad_conv: vec![vec![0.0; total]; grid.dim()],
            lap_conv: vec![0.0; total],
        });
    }
    let conv = Convolver::new(grid);
    let kernel = KernelGrid::for_grid(grid);
    let rho_hat = conv.field_fft(grid, field.values())?;
    let w_hat = conv.kernel_fft(&kernel, &rescaled_w_samples(spec, grid, tau, subsamples)?)?;
    let lap_hat =
        conv.kernel_fft(&kernel, &rescaled_lap_samples(spec, grid, tau, subsamples)?)?;
    let mut grad_conv = Vec::with_capacity(grid.dim());
    for comp in rescaled_grad_samples(spec, grid, tau, subsamples)? {
        let k = conv.kernel_fft(&kernel, &comp)?;
        grad_conv.push(conv.conv_from_ffts(&rho_hat, &k));
    }
    Ok(InteractionFields {
        w_conv: conv.conv_from_ffts(&rho_hat, &w_hat),
        grad_conv,
        lap_conv: conv.conv_from_ffts(&rho_hat, &lap_hat),
    })
}

/// Free energy `int rho log rho + 1/2 int rho (W * rho)` given the
/// interaction convolution in the same frame as `field`.
pub fn free_energy(field: &DensityField, w_conv: &[f64]) -> f64 {
    field.entropy() + 0.5 * field.grid().integrate_product(field.values(), w_conv)
}

/// `F~ = E~ + 1/2 N2` computed along two independent quadrature paths:
/// (a) entropy + interaction + half second moment, each its own pass;
/// (b) a single fused pass over `rho (log rho + |y|^2 / 2 + (W~*rho)/2)`.
pub fn f_tilde_two_paths(field: &DensityField, w_conv: &[f64]) -> (f64, f64) {
    let path_a = free_energy(field, w_conv) + 0.5 * field.second_moment();
    let grid = field.grid();
    let fused: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            let log_term = if v > LOG_CLAMP { v * v.ln() } else { 0.0 };
            log_term + v * (0.5 * grid.radius_sq(flat) + 0.5 * w_conv[flat])
        })
        .collect();
    (path_a, grid.integrate(&fused))
}

/// Residual of the frame-change identity `E(t) = E~(tau) - n tau`:
/// the rescaled field is mapped to the original frame and both energies
/// are evaluated with their own kernels and quadratures.
pub fn energy_identity_residual(
    spec: &PotentialSpec,
    field: &DensityField,
    tau: f64,
    subsamples: usize,
) -> Result<f64> {
    let e_tilde = {
        let inter = interaction_fields(spec, field, tau, subsamples)?;
        free_energy(field, &inter.w_conv)
    };
    let orig = field.to_original_frame(tau)?;
    let e_orig = {
        let grid = orig.grid();
        if spec.is_zero() {
            orig.entropy()
        } else {
            let conv = Convolver::new(grid);
            let kernel = KernelGrid::for_grid(grid);
            let samples = rescaled_w_samples(spec, grid, 0.0, subsamples)?;
            let w_conv = conv.conv(grid, orig.values(), &kernel, &samples)?;
            free_energy(&orig, &w_conv)
        }
    };
    let n = field.grid().dim() as f64;
    Ok((e_orig - (e_tilde - n * tau)).abs())
}

/// Relative entropy against the standard Gaussian:
/// `E1 = int rho log rho + 1/2 int |y|^2 rho + (n/2) log(2 pi)`.
pub fn relative_entropy_l1(field: &DensityField) -> f64 {
    let n = field.grid().dim() as f64;
    field.entropy()
        + 0.5 * field.second_moment()
        + 0.5 * n * (2.0 * std::f64::consts::PI).ln() * field.mass()
}

/// Relative Fisher information `I1 = int rho |grad log rho + y|^2`.
///
/// Differentiates `log rho` rather than `rho` itself: the log of a
/// sampled Gaussian is exactly quadratic, and both the centered and
/// one-sided stencils reproduce quadratics exactly, so the Gaussian
/// closed form is matched to round-off instead of to `O(h^2)`. Cells
/// below the relative floor contribute zero (their log is clamped so
/// neighboring stencils stay finite).
pub fn fisher_information(field: &DensityField) -> Result<f64> {
    let grid = field.grid();
    let floor = FISHER_FLOOR_REL * field.max_value();
    let log_rho: Vec<f64> = field
        .values()
        .iter()
        .map(|&v| v.max(floor).ln())
        .collect();
    let grad = grid.gradient(&log_rho)?;
    let vals: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            if v <= floor {
                return 0.0;
            }
            let x = grid.center(flat);
            let mut sq = 0.0;
            for axis in 0..grid.dim() {
                let term = grad[axis][flat] + x[axis];
                sq += term * term;
            }
            v * sq
        })
        .collect();
    Ok(grid.integrate(&vals))
}

/// The coupling functionals `(J1, J2, J2 via the Laplacian kernel)`.
pub fn j_functionals(
    field: &DensityField,
    inter: &InteractionFields,
) -> Result<(f64, f64, f64)> {
    let grid = field.grid();
    let j1_vals: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| {
            let x = grid.center(flat);
            let mut dot = 0.0;
            for axis in 0..grid.dim() {
                dot += x[axis] * inter.grad_conv[axis][flat];
            }
            v * dot
        })
        .collect();
    let j1 = grid.integrate(&j1_vals);
    let grad_rho = grid.gradient(field.values())?;
    let mut j2 = 0.0;
    for axis in 0..grid.dim() {
        j2 += grid.integrate_product(&grad_rho[axis], &inter.grad_conv[axis]);
    }
    let j2_alt = -grid.integrate_product(field.values(), &inter.lap_conv);
    Ok((j1, j2, j2_alt))
}

/// Gaussian-weighted `L^2` relative entropy over the cut `|y| <= 0.9 L`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct L2Entropy {
    /// `int_cut (rho - G)^2 / G`.
    pub value: f64,
    /// Density mass outside the cut (quantifies what the cut ignores).
    pub excluded_mass: f64,
}

fn gaussian_at(grid: &Grid, flat: usize) -> f64 {
    let n = grid.dim() as f64;
    (2.0 * std::f64::consts::PI).powf(-n / 2.0) * (-0.5 * grid.radius_sq(flat)).exp()
}

/// `E2` with the Gaussian cut; the weight `1/G` makes the whole-space
/// integral hypersensitive to tail noise, so the far field is excluded
/// and reported separately.
pub fn relative_entropy_l2(field: &DensityField) -> Result<L2Entropy> {
    let grid = field.grid();
    let r_cut = G_CUT_FRACTION * grid.half_width();
    let r2_cut = r_cut * r_cut;
    let mut inside = vec![0.0; grid.total_cells()];
    let mut outside = vec![0.0; grid.total_cells()];
    for (flat, &v) in field.values().iter().enumerate() {
        if grid.radius_sq(flat) <= r2_cut {
            let g = gaussian_at(grid, flat);
            let d = v - g;
            inside[flat] = d * d / g;
        } else {
            outside[flat] = v;
        }
    }
    Ok(L2Entropy {
        value: grid.integrate(&inside),
        excluded_mass: grid.integrate(&outside),
    })
}

/// Log-Sobolev gap `I1 / 2 - E1` (nonnegative in the continuum).
pub fn lsi_gap(field: &DensityField) -> Result<f64> {
    Ok(0.5 * fisher_information(field)? - relative_entropy_l1(field))
}

/// Gaussian Poincare gap
/// `int_cut |grad w|^2 G - int_cut (w - 1)^2 G` for `w = rho / G`
/// (nonnegative in the continuum for unit-mass `rho`).
pub fn poincare_gap(field: &DensityField) -> Result<f64> {
    let grid = field.grid();
    let w: Vec<f64> = field
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| v / gaussian_at(grid, flat))
        .collect();
    let grad_w = grid.gradient(&w)?;
    let r_cut = G_CUT_FRACTION * grid.half_width();
    let r2_cut = r_cut * r_cut;
    let mut vals = vec![0.0; grid.total_cells()];
    for flat in 0..grid.total_cells() {
        if grid.radius_sq(flat) <= r2_cut {
            let g = gaussian_at(grid, flat);
            let mut gsq = 0.0;
            for axis in 0..grid.dim() {
                gsq += grad_w[axis][flat] * grad_w[axis][flat];
            }
            let d = w[flat] - 1.0;
            vals[flat] = (gsq - d * d) * g;
        }
    }
    Ok(grid.integrate(&vals))
}

/// Shape factor `K^{n/(n+alpha)} (log K)^{-alpha/(n+alpha)}` appearing in
/// the sup-norm bound for densities with controlled `rho |log rho|` mass
/// and `C^alpha` modulus constant `K`. Rejects `K <= 1`, where the log
/// factor loses meaning.
pub fn moc_linf_bound(dim: usize, alpha: f64, k: f64) -> Result<f64> {
    if dim == 0 || dim > 3 {
        return Err(Error::InvalidArgument(format!("dimension {dim} not in 1..=3")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Holder exponent alpha={alpha} must lie in (0, 1]"
        )));
    }
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "modulus constant K={k} must exceed 1"
        )));
    }
    let n = dim as f64;
    Ok(k.powf(n / (n + alpha)) * k.ln().powf(-alpha / (n + alpha)))
}

// ---------------------------------------------------------------------
// Rearrangement-tail control of int |rho log rho|.
// ---------------------------------------------------------------------

/// Report of the entropy-tail control inequality: the absolute integral
/// `int |F(rho)|`, `F(s) = s log s`, is bounded by the signed integral
/// plus a correction built from the mass, the second moment, and the
/// fixed thresholds `rho_1 = 1/e`, `rho_2 = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntropyTailReport {
    /// `int |rho log rho|` by grid quadrature.
    pub lhs: f64,
    /// Signed entropy plus correction terms.
    pub rhs: f64,
    /// `rhs - lhs` (nonnegative when the bound holds).
    pub margin: f64,
    /// Comparison radius derived from the mass and thresholds.
    pub r0: f64,
}

fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => unreachable!("dimension checked at grid construction"),
    }
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => unreachable!("dimension checked at grid construction"),
    }
}

/// Evaluates both sides of the entropy-tail inequality for a density
/// with finite mass and second moment.
pub fn entropy_tail_check(field: &DensityField) -> Result<EntropyTailReport> {
    let grid = field.grid();
    let n = grid.dim();
    let mass = field.mass();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "entropy tail check needs positive mass, got {mass}"
        )));
    }
    let rho1 = (-1.0f64).exp();
    let rho2 = 1.0f64;
    // r0 = max over thresholds of (mass / (rho_i |B_1|))^{1/n}; the lower
    // threshold dominates.
    let b1 = unit_ball_volume(n);
    let r0 = (mass / (rho1.min(rho2) * b1)).powf(1.0 / n as f64);
    let c0 = b1 * r0.powi(n as i32);
    // sup of |s log s| on (1/e, 1) is 1/e, attained at the left endpoint.
    let sup_f = (-1.0f64).exp();
    // Tail integral of |F| along the comparison profile
    // N_g / (|S^{n-1}| G(|x|)) with g = r^2, G(s) = s^{n+2} / (n + 2).
    let n_g = field.second_moment();
    let c = n_g / sphere_area(n);
    let profile = |r: f64| -> f64 {
        let s = c * (n as f64 + 2.0) / r.powi(n as i32 + 2);
        if s > LOG_CLAMP {
            (s * s.ln()).abs() * r.powi(n as i32 - 1)
        } else {
            0.0
        }
    };
    // Geometric panels outward; integrand decays like r^{-3} log r.
    let mut tail = 0.0;
    let mut lo = r0.max(1e-12);
    for _ in 0..400 {
        let hi = lo * 1.5;
        // 16-point composite midpoint is plenty at 1% scale; reuse a local
        // fixed rule.
        let mut part = 0.0;
        let steps = 32;
        let dr = (hi - lo) / steps as f64;
        for i in 0..steps {
            part += profile(lo + (i as f64 + 0.5) * dr) * dr;
        }
        tail += part;
        lo = hi;
        if part < 1e-15 * tail.max(1e-300) {
            break;
        }
    }
    tail *= sphere_area(n);

    let lhs = field.l_log_l();
    let rhs = field.entropy() + c0 * (sup_f + tail);
    Ok(EntropyTailReport {
        lhs,
        rhs,
        margin: rhs - lhs,
        r0,
    })
}

// ---------------------------------------------------------------------
// Capped-power extremal family for the sup-norm shape factor.
// ---------------------------------------------------------------------

/// Builds the 1D capped-power profile `f(x) = max(0, A - K |x|^alpha)`
/// with the cap `A` solved (by bisection) so that
/// `int f |log f| = c_target`, and returns `(A, ratio)` where `ratio`
/// is `A` divided by the shape factor [`moc_linf_bound`].
pub fn capped_power_ratio(k: f64, alpha: f64, c_target: f64) -> Result<(f64, f64)> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidArgument(format!("modulus K={k} must exceed 1")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Holder exponent alpha={alpha} must lie in (0, 1]"
        )));
    }
    if !(c_target.is_finite() && c_target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target integral {c_target} must be positive"
        )));
    }
    let payoff = |a: f64| -> f64 {
        // int over x of |f log f|, f = max(0, A - K |x|^alpha), 1D.
        let reach = (a / k).powf(1.0 / alpha);
        let steps = 20_000;
        let dx = reach / steps as f64;
        let mut sum = 0.0;
        for i in 0..steps {
            let x = (i as f64 + 0.5) * dx;
            let f = a - k * x.powf(alpha);
            if f > LOG_CLAMP {
                sum += (f * f.ln()).abs() * dx;
            }
        }
        2.0 * sum
    };
    let (mut lo, mut hi) = (1e-9f64, 1e9f64);
    if payoff(hi) < c_target {
        return Err(Error::InvalidArgument(
            "target integral unreachable for this K".into(),
        ));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if payoff(mid) < c_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = (lo * hi).sqrt();
    let ratio = a / moc_linf_bound(1, alpha, k)?;
    Ok((a, ratio))
}

// ---------------------------------------------------------------------
// Per-snapshot record.
// ---------------------------------------------------------------------

/// One diagnostics row. Field order here *is* the CSV column order.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord {
    pub tau: f64,
    pub t: f64,
    pub mass: f64,
    pub min_value: f64,
    pub second_moment: f64,
    pub entropy: f64,
    pub l_log_l: f64,
    pub e_orig: f64,
    pub e_tilde: f64,
    pub f_tilde: f64,
    pub e1: f64,
    pub i1: f64,
    pub e2: f64,
    pub j1: f64,
    pub j2: f64,
    pub l1_dist_g: f64,
    pub ck_rhs: f64,
    pub lsi_gap: f64,
    pub poincare_gap: f64,
    pub l2_norm: f64,
    pub h1_norm: f64,
    pub holder_seminorm_alpha: f64,
    pub n2_minus_n: f64,
    pub j2_alt: f64,
    pub e2_excluded_mass: f64,
    pub dt: f64,
    pub kernel_resolution: f64,
}

impl DiagnosticsRecord {
    /// CSV column names, in declaration order.
    pub const COLUMNS: [&'static str; 27] = [
        "tau",
        "t",
        "mass",
        "min_value",
        "second_moment",
        "entropy",
        "l_log_l",
        "e_orig",
        "e_tilde",
        "f_tilde",
        "e1",
        "i1",
        "e2",
        "j1",
        "j2",
        "l1_dist_g",
        "ck_rhs",
        "lsi_gap",
        "poincare_gap",
        "l2_norm",
        "h1_norm",
        "holder_seminorm_alpha",
        "n2_minus_n",
        "j2_alt",
        "e2_excluded_mass",
        "dt",
        "kernel_resolution",
    ];

    pub fn csv_header() -> String {
        Self::COLUMNS.join(",")
    }

    fn fields(&self) -> [f64; 27] {
        [
            self.tau,
            self.t,
            self.mass,
            self.min_value,
            self.second_moment,
            self.entropy,
            self.l_log_l,
            self.e_orig,
            self.e_tilde,
            self.f_tilde,
            self.e1,
            self.i1,
            self.e2,
            self.j1,
            self.j2,
            self.l1_dist_g,
            self.ck_rhs,
            self.lsi_gap,
            self.poincare_gap,
            self.l2_norm,
            self.h1_norm,
            self.holder_seminorm_alpha,
            self.n2_minus_n,
            self.j2_alt,
            self.e2_excluded_mass,
            self.dt,
            self.kernel_resolution,
        ]
    }

    /// One CSV row with 17 significant digits (round-trip exact).
    pub fn csv_row(&self) -> String {
        self.fields()
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Value of a column by name.
    pub fn column(&self, name: &str) -> Option<f64> {
        Self::COLUMNS
            .iter()
            .position(|&c| c == name)
            .map(|i| self.fields()[i])
    }
}

/// Knobs for [`compute_record`].
#[derive(Debug, Clone)]
pub struct DiagnosticsOptions {
    /// Kernel sub-quadrature points per axis.
    pub subsamples: usize,
    /// Compute the weighted `L^2` entropy (skippable: it is the most
    /// tail-sensitive quantity).
    pub with_e2: bool,
    /// Compute the original-frame energy via the frame map (extra
    /// convolution on the stretched grid).
    pub with_e_orig: bool,
    /// Holder exponent for the seminorm column.
    pub holder_alpha: f64,
    /// Seed for sampled Holder pairs (n >= 2).
    pub holder_seed: u64,
    /// Time step to record (0 when not produced by a solver).
    pub dt: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            subsamples: 8,
            with_e2: true,
            with_e_orig: true,
            holder_alpha: 0.5,
            holder_seed: 0,
            dt: 0.0,
        }
    }
}

/// Computes a full diagnostics row for a rescaled-frame density at `tau`.
pub fn compute_record(
    spec: &PotentialSpec,
    field: &DensityField,
    tau: f64,
    opts: &DiagnosticsOptions,
) -> Result<DiagnosticsRecord> {
    let grid = field.grid();
    let n = grid.dim() as f64;
    let t = 0.5 * ((2.0 * tau).exp() - 1.0);
    let inter = interaction_fields(spec, field, tau, opts.subsamples)?;
    let e_tilde = free_energy(field, &inter.w_conv);
    let (f_tilde, _) = {
        let (a, b) = f_tilde_two_paths(field, &inter.w_conv);
        (a, b)
    };
    let e_orig = if opts.with_e_orig {
        let orig = field.to_original_frame(tau)?;
        if spec.is_zero() {
            orig.entropy()
        } else {
            let ogrid = orig.grid();
            let conv = Convolver::new(ogrid);
            let kernel = KernelGrid::for_grid(ogrid);
            let samples = rescaled_w_samples(spec, ogrid, 0.0, opts.subsamples)?;
            let w_conv = conv.conv(ogrid, orig.values(), &kernel, &samples)?;
            free_energy(&orig, &w_conv)
        }
    } else {
        e_tilde - n * tau
    };
    let e1 = relative_entropy_l1(field);
    let i1 = fisher_information(field)?;
    let (j1, j2, j2_alt) = j_functionals(field, &inter)?;
    let (e2, e2_excluded) = if opts.with_e2 {
        let r = relative_entropy_l2(field)?;
        (r.value, r.excluded_mass)
    } else {
        (f64::NAN, f64::NAN)
    };
    let gauss = standard_gaussian(grid)?;
    let l1_dist_g = field.l1_distance(&gauss)?;
    let second_moment = field.second_moment();
    let kernel_resolution = if spec.is_zero() {
        f64::INFINITY
    } else {
        (-tau).exp() * spec.intrinsic_width() / grid.spacing()
    };
    Ok(DiagnosticsRecord {
        tau,
        t,
        mass: field.mass(),
        min_value: field.min_value(),
        second_moment,
        entropy: field.entropy(),
        l_log_l: field.l_log_l(),
        e_orig,
        e_tilde,
        f_tilde,
        e1,
        i1,
        e2,
        j1,
        j2,
        l1_dist_g,
        ck_rhs: 2.0 * e1.max(0.0).sqrt(),
        lsi_gap: 0.5 * i1 - e1,
        poincare_gap: poincare_gap(field)?,
        l2_norm: field.lp_norm(2.0)?,
        h1_norm: field.h1_norm()?,
        holder_seminorm_alpha: field.holder_seminorm(
            opts.holder_alpha,
            None,
            opts.holder_seed,
        )?,
        n2_minus_n: second_moment - n * field.mass(),
        j2_alt,
        e2_excluded_mass: e2_excluded,
        dt: opts.dt,
        kernel_resolution,
    })
}
