//! Flat `section.key = value` experiment configuration (a TOML-compatible
//! subset: no tables, no nesting; `#` comments; values are bare scalars or
//! comma-separated lists). Every knob is addressable from the command
//! line via repeated `--override key=value` flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use aggdiff::density::{gaussian_profile, DensityField};
use aggdiff::functionals::DiagnosticsOptions;
use aggdiff::grid::Grid;
use aggdiff::potential::PotentialSpec;
use aggdiff::solver::{Frame, Scheme, SolverConfig};
use anyhow::{anyhow, bail, Context, Result};

/// Parsed key-value view of a config file, ordered for stable echoing.
#[derive(Debug, Clone, Default)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if key.is_empty() {
                bail!("line {}: empty key", lineno + 1);
            }
            entries.insert(key.to_string(), value.to_string());
        }
        Ok(FlatConfig { entries })
    }

    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| anyhow!("config not found: {}", path.display()))?;
        Self::parse_str(&text)
    }

    /// Applies one `key=value` command-line override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .with_context(|| format!("override `{spec}` is not of the form key=value"))?;
        self.entries
            .insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| anyhow!("missing config key `{key}`"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().with_context(|| format!("key `{key}`: bad float `{v}`")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().with_context(|| format!("key `{key}`: bad integer `{v}`")),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().with_context(|| format!("key `{key}`: bad bool `{v}`")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .with_context(|| format!("key `{key}`: bad float `{s}`"))
            })
            .collect()
    }

    /// Canonical text form (used to echo the effective config).
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn echo_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.entries
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

/// Initial-condition kinds.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    /// Normalized Gaussian with per-axis mean and scalar variance.
    Gaussian { mean: Vec<f64>, variance: f64 },
    /// Weighted sum of Gaussians (weights renormalized to unit mass).
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        variances: Vec<f64>,
    },
    /// Normalized indicator of a centered cube.
    Box { center: Vec<f64>, width: f64 },
}

/// Fully typed experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub initial: InitialCondition,
    pub solver: SolverConfig,
    pub diagnostics: DiagnosticsOptions,
    /// Window for the rate fits in the summary.
    pub fit_window: (f64, f64),
    pub seed: u64,
    /// Lebesgue exponents probed for the gradient / Laplacian norms.
    pub grad_exponents: Vec<f64>,
    pub lap_exponents: Vec<f64>,
}

fn potential_from(flat: &FlatConfig) -> Result<PotentialSpec> {
    let kind = flat.get("potential.kind").unwrap_or("zero");
    let spec = match kind {
        "zero" => PotentialSpec::Zero,
        "gaussian_bump" => PotentialSpec::GaussianBump {
            amplitude: flat.f64_or("potential.amplitude", 0.1)?,
            sigma: flat.f64_or("potential.sigma", 1.0)?,
        },
        "smoothed_power_tail" => PotentialSpec::SmoothedPowerTail {
            eps: flat.f64_or("potential.eps", 0.6)?,
            delta: flat.f64_or("potential.delta", 1.0)?,
        },
        "smoothed_log" => PotentialSpec::SmoothedLog {
            chi: flat.f64_or("potential.chi", 0.5)?,
            delta: flat.f64_or("potential.delta", 1.0)?,
        },
        "morse" => PotentialSpec::Morse {
            c_att: flat.f64_or("potential.c_att", 1.0)?,
            l_att: flat.f64_or("potential.l_att", 1.0)?,
            c_rep: flat.f64_or("potential.c_rep", 1.5)?,
            l_rep: flat.f64_or("potential.l_rep", 0.5)?,
        },
        other => bail!("unknown potential kind `{other}`"),
    };
    Ok(spec)
}

fn initial_from(flat: &FlatConfig, dim: usize) -> Result<InitialCondition> {
    let kind = flat.get("ic.kind").unwrap_or("gaussian");
    let ic = match kind {
        "gaussian" => {
            let mean = flat.f64_list("ic.mean")?;
            if mean.len() != dim {
                bail!("ic.mean has {} entries for dimension {dim}", mean.len());
            }
            InitialCondition::Gaussian {
                mean,
                variance: flat.f64_or("ic.variance", 1.0)?,
            }
        }
        "gaussian_mixture" => {
            let weights = flat.f64_list("ic.weights")?;
            let variances = flat.f64_list("ic.variances")?;
            let flat_means = flat.f64_list("ic.means")?;
            if flat_means.len() != weights.len() * dim || variances.len() != weights.len() {
                bail!(
                    "mixture shape mismatch: {} weights, {} variances, {} mean entries for dimension {dim}",
                    weights.len(),
                    variances.len(),
                    flat_means.len()
                );
            }
            let means = flat_means.chunks(dim).map(|c| c.to_vec()).collect();
            InitialCondition::GaussianMixture {
                weights,
                means,
                variances,
            }
        }
        "box" => {
            let center = flat.f64_list("ic.center")?;
            if center.len() != dim {
                bail!("ic.center has {} entries for dimension {dim}", center.len());
            }
            InitialCondition::Box {
                center,
                width: flat.f64_or("ic.width", 1.0)?,
            }
        }
        other => bail!("unknown initial condition kind `{other}`"),
    };
    Ok(ic)
}

fn frame_from(name: &str) -> Result<Frame> {
    match name {
        "rescaled" => Ok(Frame::Rescaled),
        "original" => Ok(Frame::Original),
        other => bail!("unknown frame `{other}`"),
    }
}

fn scheme_from(name: &str) -> Result<Scheme> {
    match name {
        "fv_ssprk2" => Ok(Scheme::FvSsprk2),
        "fv_euler" => Ok(Scheme::FvEuler),
        "imex_cn" => Ok(Scheme::ImexCn),
        "heat_splitting" => Ok(Scheme::HeatSplitting),
        other => bail!("unknown scheme `{other}`"),
    }
}

impl ExperimentConfig {
    pub fn from_flat(flat: &FlatConfig) -> Result<Self> {
        let dim = flat.usize_or("grid.dim", 1)?;
        let grid = Grid::new(
            dim,
            flat.f64_or("grid.half_width", 10.0)?,
            flat.usize_or("grid.cells", 512)?,
        )?;
        let potential = potential_from(flat)?;
        let initial = initial_from(flat, dim)?;
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            frame: frame_from(flat.get("solver.frame").unwrap_or("rescaled"))?,
            scheme: scheme_from(flat.get("solver.scheme").unwrap_or("fv_ssprk2"))?,
            cfl_safety: flat.f64_or("solver.cfl_safety", defaults.cfl_safety)?,
            kernel_refresh: flat.usize_or("solver.kernel_refresh", defaults.kernel_refresh)?,
            kernel_subsamples: flat
                .usize_or("solver.kernel_subsamples", defaults.kernel_subsamples)?,
            positivity_retry_limit: flat
                .usize_or("solver.positivity_retry_limit", defaults.positivity_retry_limit)?,
            time_end: flat.f64_or("solver.tau_end", defaults.time_end)?,
            output_interval: flat.f64_or("solver.output_dtau", defaults.output_interval)?,
            max_dt: flat.f64_or("solver.max_dt", defaults.max_dt)?,
            mass_drift_limit: flat.f64_or("solver.mass_drift_limit", defaults.mass_drift_limit)?,
            boundary_limit: flat.f64_or("solver.boundary_limit", defaults.boundary_limit)?,
        };
        let seed = flat.usize_or("run.seed", 0)? as u64;
        let diag_defaults = DiagnosticsOptions::default();
        let diagnostics = DiagnosticsOptions {
            subsamples: flat.usize_or("diagnostics.subsamples", solver.kernel_subsamples)?,
            with_e2: flat.bool_or("diagnostics.with_e2", diag_defaults.with_e2)?,
            with_e_orig: flat.bool_or("diagnostics.with_e_orig", diag_defaults.with_e_orig)?,
            holder_alpha: flat.f64_or("diagnostics.holder_alpha", diag_defaults.holder_alpha)?,
            holder_seed: seed,
            dt: 0.0,
        };
        let fit_window = (
            flat.f64_or("fit.window_lo", 0.5)?,
            flat.f64_or("fit.window_hi", (solver.time_end - 0.5).max(1.0))?,
        );
        let grad_exponents = match flat.get("rates.grad_exponents") {
            Some(_) => flat.f64_list("rates.grad_exponents")?,
            None => vec![4.0 / 3.0, 2.0],
        };
        let lap_exponents = match flat.get("rates.lap_exponents") {
            Some(_) => flat.f64_list("rates.lap_exponents")?,
            None => vec![4.0 / 3.0, 2.0],
        };
        Ok(ExperimentConfig {
            grid,
            potential,
            initial,
            solver,
            diagnostics,
            fit_window,
            seed,
            grad_exponents,
            lap_exponents,
        })
    }

    /// Builds the initial density on the configured grid.
    pub fn build_initial(&self) -> Result<DensityField> {
        let grid = &self.grid;
        match &self.initial {
            InitialCondition::Gaussian { mean, variance } => {
                Ok(gaussian_profile(grid, mean, *variance)?)
            }
            InitialCondition::GaussianMixture {
                weights,
                means,
                variances,
            } => {
                let dim = grid.dim();
                let mut values = vec![0.0f64; grid.total_cells()];
                for ((w, m), s) in weights.iter().zip(means).zip(variances) {
                    if *s <= 0.0 {
                        bail!("mixture variance must be positive");
                    }
                    let norm = (2.0 * std::f64::consts::PI * s).powf(-(dim as f64) / 2.0);
                    for (flat, v) in values.iter_mut().enumerate() {
                        let x = grid.center(flat);
                        let mut q = 0.0;
                        for axis in 0..dim {
                            let d = x[axis] - m[axis];
                            q += d * d;
                        }
                        *v += w * norm * (-0.5 * q / s).exp();
                    }
                }
                let mut field = DensityField::new(grid.clone(), values)?;
                field = field.normalized()?;
                Ok(field)
            }
            InitialCondition::Box { center, width } => {
                if *width <= 0.0 {
                    bail!("box width must be positive");
                }
                let dim = grid.dim();
                let values: Vec<f64> = (0..grid.total_cells())
                    .map(|flat| {
                        let x = grid.center(flat);
                        let inside = (0..dim).all(|a| (x[a] - center[a]).abs() <= 0.5 * width);
                        if inside {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let field = DensityField::new(grid.clone(), values)?;
                Ok(field.normalized()?)
            }
        }
    }
}
