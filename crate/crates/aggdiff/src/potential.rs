//! Interaction potentials: closed-form evaluators, rescaled kernel
//! sampling on the difference lattice, and whole-space norms with
//! divergence detection.
//!
//! All kinds are even (`W(x) = W(-x)`) and radial. Sign conventions:
//! `gaussian_bump` carries a signed amplitude (negative = attractive
//! well), `smoothed_power_tail` and `smoothed_log` are attractive for
//! positive strength parameters, and `morse` is repulsive-minus-
//! attractive `C_r e^{-r/l_r} - C_a e^{-r/l_a}`.
//!
//! In self-similar variables the potential becomes `W~(tau, y) =
//! W(e^tau y)`, which concentrates toward the origin as `tau` grows;
//! kernel samples are therefore *cell averages* over the difference-
//! lattice cells (midpoint sub-quadrature with `m` points per axis) so
//! that sub-grid kernels keep their integral weight instead of aliasing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convolve::KernelGrid;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// An interaction potential kind with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// No interaction: the equation reduces to the heat flow.
    Zero,
    /// `W(x) = amplitude * exp(-|x|^2 / (2 sigma^2))`; integrable with all
    /// derivatives integrable.
    GaussianBump { amplitude: f64, sigma: f64 },
    /// `W(x) = -(delta^2 + |x|^2)^{-eps/2}`: attractive with a slow
    /// power tail; not integrable for `eps <= n`.
    SmoothedPowerTail { eps: f64, delta: f64 },
    /// `W(x) = (chi/2) log(delta^2 + |x|^2)`: borderline logarithmic
    /// attraction whose gradient does not decay under rescaling.
    SmoothedLog { chi: f64, delta: f64 },
    /// `W(x) = c_rep exp(-|x|/l_rep) - c_att exp(-|x|/l_att)`.
    /// Radially it has a kink at the origin; the Laplacian there is
    /// reported as `n f''(0)` (the smooth-limit convention).
    Morse {
        c_att: f64,
        l_att: f64,
        c_rep: f64,
        l_rep: f64,
    },
}

/// Whole-space norm value with explicit divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "value", rename_all = "snake_case")]
pub enum Norm {
    Finite(f64),
    Infinite,
}

impl Norm {
    pub fn is_finite(&self) -> bool {
        matches!(self, Norm::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Norm::Finite(v) => Some(*v),
            Norm::Infinite => None,
        }
    }
}

/// Whole-space norms of a potential for a given dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialNorms {
    pub dim: usize,
    /// `sup |W|`.
    pub sup_w: Norm,
    /// `||W||_{L^1}`.
    pub l1_w: Norm,
    /// `(p, ||grad W||_{L^p})` for each requested exponent.
    pub grad_lp: Vec<(f64, Norm)>,
    /// `(p, ||Delta W||_{L^p})` for each requested exponent.
    pub lap_lp: Vec<(f64, Norm)>,
}

impl PotentialSpec {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPotential(msg));
        match *self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::GaussianBump { amplitude, sigma } => {
                if !amplitude.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
                    bad(format!("gaussian_bump amplitude={amplitude} sigma={sigma}"))
                } else {
                    Ok(())
                }
            }
            PotentialSpec::SmoothedPowerTail { eps, delta } => {
                if !(eps.is_finite() && eps > 0.0) || !(delta.is_finite() && delta > 0.0) {
                    bad(format!("smoothed_power_tail eps={eps} delta={delta}"))
                } else {
                    Ok(())
                }
            }
            PotentialSpec::SmoothedLog { chi, delta } => {
                if !chi.is_finite() || !(delta.is_finite() && delta > 0.0) {
                    bad(format!("smoothed_log chi={chi} delta={delta}"))
                } else {
                    Ok(())
                }
            }
            PotentialSpec::Morse {
                c_att,
                l_att,
                c_rep,
                l_rep,
            } => {
                if !c_att.is_finite()
                    || !c_rep.is_finite()
                    || !(l_att.is_finite() && l_att > 0.0)
                    || !(l_rep.is_finite() && l_rep > 0.0)
                {
                    bad(format!(
                        "morse c_att={c_att} l_att={l_att} c_rep={c_rep} l_rep={l_rep}"
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Builds a validated spec.
    pub fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// True if the potential is identically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialSpec::Zero)
    }

    /// `W(x)`.
    pub fn eval_w(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::GaussianBump { amplitude, sigma } => {
                amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            PotentialSpec::SmoothedPowerTail { eps, delta } => {
                -(delta * delta + r2).powf(-eps / 2.0)
            }
            PotentialSpec::SmoothedLog { chi, delta } => 0.5 * chi * (delta * delta + r2).ln(),
            PotentialSpec::Morse {
                c_att,
                l_att,
                c_rep,
                l_rep,
            } => {
                let r = r2.sqrt();
                c_rep * (-r / l_rep).exp() - c_att * (-r / l_att).exp()
            }
        }
    }

    /// `grad W(x)` written into `out[..x.len()]`.
    pub fn grad_w(&self, x: &[f64], out: &mut [f64]) {
        let n = x.len();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            PotentialSpec::Zero => out[..n].fill(0.0),
            PotentialSpec::GaussianBump { amplitude, sigma } => {
                let s2 = sigma * sigma;
                let c = -amplitude * (-r2 / (2.0 * s2)).exp() / s2;
                for i in 0..n {
                    out[i] = c * x[i];
                }
            }
            PotentialSpec::SmoothedPowerTail { eps, delta } => {
                let u = delta * delta + r2;
                let c = eps * u.powf(-eps / 2.0 - 1.0);
                for i in 0..n {
                    out[i] = c * x[i];
                }
            }
            PotentialSpec::SmoothedLog { chi, delta } => {
                let c = chi / (delta * delta + r2);
                for i in 0..n {
                    out[i] = c * x[i];
                }
            }
            PotentialSpec::Morse {
                c_att,
                l_att,
                c_rep,
                l_rep,
            } => {
                let r = r2.sqrt();
                if r == 0.0 {
                    out[..n].fill(0.0);
                } else {
                    let fp = -c_rep / l_rep * (-r / l_rep).exp()
                        + c_att / l_att * (-r / l_att).exp();
                    for i in 0..n {
                        out[i] = fp * x[i] / r;
                    }
                }
            }
        }
    }

    /// `Delta W(x)` in dimension `x.len()`.
    pub fn lap_w(&self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::GaussianBump { amplitude, sigma } => {
                let s2 = sigma * sigma;
                amplitude * (-r2 / (2.0 * s2)).exp() * (r2 / (s2 * s2) - n / s2)
            }
            PotentialSpec::SmoothedPowerTail { eps, delta } => {
                let u = delta * delta + r2;
                eps * u.powf(-eps / 2.0 - 2.0) * (n * u - (eps + 2.0) * r2)
            }
            PotentialSpec::SmoothedLog { chi, delta } => {
                let u = delta * delta + r2;
                chi * (n * u - 2.0 * r2) / (u * u)
            }
            PotentialSpec::Morse {
                c_att,
                l_att,
                c_rep,
                l_rep,
            } => {
                let r = r2.sqrt();
                let fpp = c_rep / (l_rep * l_rep) * (-r / l_rep).exp()
                    - c_att / (l_att * l_att) * (-r / l_att).exp();
                if r < 1e-12 {
                    // Smooth-limit convention at the kink.
                    n * fpp
                } else {
                    let fp = -c_rep / l_rep * (-r / l_rep).exp()
                        + c_att / l_att * (-r / l_att).exp();
                    fpp + (n - 1.0) * fp / r
                }
            }
        }
    }

    /// Intrinsic length scale, used for the kernel-resolution health
    /// metric `exp(-tau) * width / h`.
    pub fn intrinsic_width(&self) -> f64 {
        match *self {
            PotentialSpec::Zero => f64::INFINITY,
            PotentialSpec::GaussianBump { sigma, .. } => sigma,
            PotentialSpec::SmoothedPowerTail { delta, .. } => delta,
            PotentialSpec::SmoothedLog { delta, .. } => delta,
            PotentialSpec::Morse { l_att, l_rep, .. } => l_att.max(l_rep),
        }
    }
}

/// Cell-averaged samples of a function over the difference lattice:
/// node `y_k` carries the mean of `f` over `m^n` midpoint sub-quadrature
/// points in the `h`-cell centered on `y_k`.
fn averaged_samples(
    kernel: &KernelGrid,
    subsamples: usize,
    f: impl Fn(&[f64]) -> f64 + Sync,
) -> Vec<f64> {
    let dim = kernel.dim();
    let h = kernel.spacing();
    let m = subsamples.max(1);
    let sub: Vec<f64> = (0..m)
        .map(|j| ((j as f64 + 0.5) / m as f64 - 0.5) * h)
        .collect();
    let weight = 1.0 / (m.pow(dim as u32) as f64);
    (0..kernel.total_nodes())
        .into_par_iter()
        .map(|flat| {
            let y0 = kernel.offset(flat);
            let mut sum = 0.0;
            let mut point = [0.0f64; 3];
            let combos = m.pow(dim as u32);
            for c in 0..combos {
                let mut rem = c;
                for axis in 0..dim {
                    point[axis] = y0[axis] + sub[rem % m];
                    rem /= m;
                }
                sum += f(&point[..dim]);
            }
            sum * weight
        })
        .collect()
}

/// Cell-averaged samples of the rescaled gradient
/// `grad W~(tau, y) = e^tau (grad W)(e^tau y)` on the difference lattice
/// of `grid`, one sample vector per axis.
pub fn rescaled_grad_samples(
    spec: &PotentialSpec,
    grid: &Grid,
    tau: f64,
    subsamples: usize,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let kernel = KernelGrid::for_grid(grid);
    let et = tau.exp();
    let dim = grid.dim();
    let mut out = Vec::with_capacity(dim);
    for axis in 0..dim {
        out.push(averaged_samples(&kernel, subsamples, |y| {
            let mut z = [0.0f64; 3];
            for (i, &yi) in y.iter().enumerate() {
                z[i] = et * yi;
            }
            let mut g = [0.0f64; 3];
            spec.grad_w(&z[..dim], &mut g);
            et * g[axis]
        }));
    }
    Ok(out)
}

/// Cell-averaged samples of the rescaled potential `W~(tau, y) = W(e^tau y)`.
pub fn rescaled_w_samples(
    spec: &PotentialSpec,
    grid: &Grid,
    tau: f64,
    subsamples: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    let kernel = KernelGrid::for_grid(grid);
    let et = tau.exp();
    let dim = grid.dim();
    Ok(averaged_samples(&kernel, subsamples, |y| {
        let mut z = [0.0f64; 3];
        for (i, &yi) in y.iter().enumerate() {
            z[i] = et * yi;
        }
        spec.eval_w(&z[..dim])
    }))
}

/// Cell-averaged samples of the rescaled Laplacian
/// `Delta W~(tau, y) = e^{2 tau} (Delta W)(e^tau y)`.
pub fn rescaled_lap_samples(
    spec: &PotentialSpec,
    grid: &Grid,
    tau: f64,
    subsamples: usize,
) -> Result<Vec<f64>> {
    spec.validate()?;
    let kernel = KernelGrid::for_grid(grid);
    let et = tau.exp();
    let dim = grid.dim();
    Ok(averaged_samples(&kernel, subsamples, |y| {
        let mut z = [0.0f64; 3];
        for (i, &yi) in y.iter().enumerate() {
            z[i] = et * yi;
        }
        et * et * spec.lap_w(&z[..dim])
    }))
}

// ---------------------------------------------------------------------
// Whole-space norms: analytic divergence classification + adaptive
// radial quadrature with analytic power tails.
// ---------------------------------------------------------------------

/// Asymptotic behavior of a radial magnitude profile.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Tail {
    /// Decays at least exponentially.
    Exponential,
    /// `|f(r)| ~ c r^{-beta}` as `r -> infinity`.
    Power { beta: f64 },
    /// Grows without bound (logarithmically); every `L^p` norm diverges.
    Unbounded,
}

/// Derivative order for norm computation: 0 = W, 1 = |grad W|, 2 = |Delta W|.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Order {
    W,
    Grad,
    Lap,
}

fn tail_of(spec: &PotentialSpec, order: Order, dim: usize) -> Tail {
    match (spec, order) {
        (PotentialSpec::Zero, _) => Tail::Exponential,
        (PotentialSpec::GaussianBump { .. }, _) => Tail::Exponential,
        (PotentialSpec::Morse { .. }, _) => Tail::Exponential,
        (PotentialSpec::SmoothedPowerTail { eps, .. }, Order::W) => Tail::Power { beta: *eps },
        (PotentialSpec::SmoothedPowerTail { eps, .. }, Order::Grad) => {
            Tail::Power { beta: eps + 1.0 }
        }
        (PotentialSpec::SmoothedPowerTail { eps, .. }, Order::Lap) => {
            Tail::Power { beta: eps + 2.0 }
        }
        (PotentialSpec::SmoothedLog { .. }, Order::W) => Tail::Unbounded,
        (PotentialSpec::SmoothedLog { .. }, Order::Grad) => Tail::Power { beta: 1.0 },
        (PotentialSpec::SmoothedLog { .. }, Order::Lap) => {
            // Delta W = chi ((n-2) r^2 + n delta^2) / (delta^2 + r^2)^2.
            if dim == 2 {
                Tail::Power { beta: 4.0 }
            } else {
                Tail::Power { beta: 2.0 }
            }
        }
    }
}

/// Power of the origin singularity: `|f(r)| ~ r^{-beta0}` as `r -> 0`.
fn origin_pow(spec: &PotentialSpec, order: Order, dim: usize) -> f64 {
    match (spec, order) {
        (PotentialSpec::Morse { c_att, l_att, c_rep, l_rep }, Order::Lap) if dim >= 2 => {
            let fp0 = c_att / l_att - c_rep / l_rep;
            if fp0.abs() > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

fn magnitude(spec: &PotentialSpec, order: Order, dim: usize, r: f64) -> f64 {
    let mut x = [0.0f64; 3];
    x[0] = r;
    match order {
        Order::W => spec.eval_w(&x[..dim]).abs(),
        Order::Grad => {
            let mut g = [0.0f64; 3];
            spec.grad_w(&x[..dim], &mut g);
            (g[..dim].iter().map(|v| v * v).sum::<f64>()).sqrt()
        }
        Order::Lap => spec.lap_w(&x[..dim]).abs(),
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

// 16-point Gauss-Legendre rule on [-1, 1].
const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003_0,
    0.865_631_202_387_831_7,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_8,
    0.062_253_523_938_647_9,
    0.027_152_459_411_754_1,
];

fn gl_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..8 {
        sum += GL_W[i] * (f(mid + half * GL_X[i]) + f(mid - half * GL_X[i]));
    }
    sum * half
}

/// `(integral of |f|^p r^{n-1} dr over (0, inf)) * |S^{n-1}|`, raised to
/// `1/p`, for a radially classified profile. Caller has already ruled out
/// divergence.
fn radial_lp(
    spec: &PotentialSpec,
    order: Order,
    dim: usize,
    p: f64,
    tail: Tail,
) -> f64 {
    let integrand =
        |r: f64| magnitude(spec, order, dim, r).powf(p) * r.powf(dim as f64 - 1.0);
    let a = spec.intrinsic_width().min(1e3).max(1e-3);
    let mut total = 0.0;
    // Geometric panels toward the origin (resolves integrable singularities).
    let mut hi = a;
    for _ in 0..60 {
        let lo = hi * 0.5;
        total += gl_panel(&integrand, lo, hi);
        hi = lo;
    }
    total += gl_panel(&integrand, 0.0, hi);
    // Geometric panels outward until the contribution is negligible or the
    // analytic tail takes over.
    let mut lo = a;
    let r_max = 1e8;
    while lo < r_max {
        let hi = (2.0 * lo).min(r_max);
        let part = gl_panel(&integrand, lo, hi);
        total += part;
        lo = hi;
        if matches!(tail, Tail::Exponential) && part < 1e-16 * total.max(1e-300) {
            break;
        }
    }
    if let Tail::Power { beta } = tail {
        // |f(r)| ~ c r^{-beta} beyond r_max; integrate the asymptote
        // exactly: c^p * r_max^{n - p beta} / (p beta - n).
        let c = magnitude(spec, order, dim, r_max) * r_max.powf(beta);
        let expo = p * beta - dim as f64;
        total += c.powf(p) * r_max.powf(-expo) / expo;
    }
    (sphere_area(dim) * total).powf(1.0 / p)
}

fn lp_norm_of(spec: &PotentialSpec, order: Order, dim: usize, p: f64) -> Result<Norm> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Lebesgue exponent p={p} must be >= 1"
        )));
    }
    if spec.is_zero() {
        return Ok(Norm::Finite(0.0));
    }
    let tail = tail_of(spec, order, dim);
    if matches!(tail, Tail::Unbounded) {
        return Ok(Norm::Infinite);
    }
    if let Tail::Power { beta } = tail {
        if p * beta <= dim as f64 {
            return Ok(Norm::Infinite);
        }
    }
    if p * origin_pow(spec, order, dim) >= dim as f64 {
        return Ok(Norm::Infinite);
    }
    Ok(Norm::Finite(radial_lp(spec, order, dim, p, tail)))
}

/// `sup |W|`.
pub fn sup_w(spec: &PotentialSpec, dim: usize) -> Norm {
    match *spec {
        PotentialSpec::Zero => Norm::Finite(0.0),
        PotentialSpec::GaussianBump { amplitude, .. } => Norm::Finite(amplitude.abs()),
        PotentialSpec::SmoothedPowerTail { eps, delta } => {
            Norm::Finite(delta.powf(-eps))
        }
        PotentialSpec::SmoothedLog { .. } => Norm::Infinite,
        PotentialSpec::Morse { l_att, l_rep, .. } => {
            // Radial profile is smooth away from 0 and exponentially
            // decaying; scan a generous range.
            let reach = 60.0 * l_att.max(l_rep);
            let mut best = 0.0f64;
            for i in 0..20_000 {
                let r = reach * i as f64 / 20_000.0;
                best = best.max(magnitude(spec, Order::W, dim, r));
            }
            Norm::Finite(best)
        }
    }
}

/// Whole-space norms of `W`, `grad W`, `Delta W` for the requested
/// Lebesgue exponents, with divergent norms reported as
/// [`Norm::Infinite`] rather than as large numbers.
pub fn potential_norms(
    spec: &PotentialSpec,
    dim: usize,
    grad_ps: &[f64],
    lap_ps: &[f64],
) -> Result<PotentialNorms> {
    spec.validate()?;
    if dim == 0 || dim > 3 {
        return Err(Error::InvalidArgument(format!("dimension {dim} not in 1..=3")));
    }
    let l1_w = lp_norm_of(spec, Order::W, dim, 1.0)?;
    let mut grad_lp = Vec::with_capacity(grad_ps.len());
    for &p in grad_ps {
        grad_lp.push((p, lp_norm_of(spec, Order::Grad, dim, p)?));
    }
    let mut lap_lp = Vec::with_capacity(lap_ps.len());
    for &p in lap_ps {
        lap_lp.push((p, lp_norm_of(spec, Order::Lap, dim, p)?));
    }
    Ok(PotentialNorms {
        dim,
        sup_w: sup_w(spec, dim),
        l1_w,
        grad_lp,
        lap_lp,
    })
}
