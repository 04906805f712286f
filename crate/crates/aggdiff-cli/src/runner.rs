//! Executes one experiment: advances the solver, streams `series.csv`,
//! and assembles `summary.json` (rate fits, prediction table, invariant
//! checks) plus SVG quick-look plots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use aggdiff::density::{write_snapshot, DensityField};
use aggdiff::functionals::DiagnosticsRecord;
use aggdiff::potential::potential_norms;
use aggdiff::rates::{fit_decay, theorem_report, Modifier, TheoremReport};
use aggdiff::solver;
use anyhow::{Context, Result};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, FlatConfig};
use crate::plot::{write_line_plot, AxisScale};

/// Everything produced by one run, with the summary already serialized.
pub struct RunArtifacts {
    pub records: Vec<DiagnosticsRecord>,
    pub summary: Value,
    pub report: TheoremReport,
    pub final_field: DensityField,
    /// True when every invariant check passed.
    pub invariants_ok: bool,
}

/// One named invariant check over the whole series.
struct Invariant {
    name: &'static str,
    value: f64,
    limit: f64,
    /// True: pass when value <= limit; false: pass when value >= limit.
    upper: bool,
}

impl Invariant {
    fn pass(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "value": self.value,
            "limit": self.limit,
            "bound": if self.upper { "upper" } else { "lower" },
            "pass": self.pass(),
        })
    }
}

fn series(records: &[DiagnosticsRecord], pick: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<f64> {
    records.iter().map(pick).collect()
}

fn invariants_from(
    records: &[DiagnosticsRecord],
    cfg: &ExperimentConfig,
    f_tilde_fwd_limit: f64,
) -> Vec<Invariant> {
    let mass0 = records.first().map(|r| r.mass).unwrap_or(1.0);
    let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    let mut out = vec![
        Invariant {
            name: "mass_drift_max",
            value: fold_max(&mut records.iter().map(|r| (r.mass - mass0).abs() / mass0)),
            limit: cfg.solver.mass_drift_limit,
            upper: true,
        },
        Invariant {
            name: "density_min",
            value: fold_min(&mut records.iter().map(|r| r.min_value)),
            limit: 0.0,
            upper: false,
        },
        Invariant {
            name: "e1_min",
            value: fold_min(&mut records.iter().map(|r| r.e1)),
            limit: -1e-8,
            upper: false,
        },
        Invariant {
            name: "csiszar_kullback_gap_max",
            value: fold_max(&mut records.iter().map(|r| r.l1_dist_g - r.ck_rhs)),
            limit: 1e-4,
            upper: true,
        },
        Invariant {
            name: "lsi_gap_min",
            value: fold_min(&mut records.iter().map(|r| r.lsi_gap)),
            limit: -1e-4,
            upper: false,
        },
        Invariant {
            name: "poincare_gap_min",
            value: fold_min(&mut records.iter().map(|r| r.poincare_gap)),
            limit: -1e-4,
            upper: false,
        },
        Invariant {
            name: "lyapunov_forward_diff_max",
            value: fold_max(
                &mut records
                    .windows(2)
                    .map(|w| w[1].f_tilde - w[0].f_tilde),
            ),
            limit: f_tilde_fwd_limit,
            upper: true,
        },
    ];
    if cfg.diagnostics.with_e_orig {
        let n = cfg.grid.dim() as f64;
        out.push(Invariant {
            name: "frame_energy_identity_residual_max",
            value: fold_max(
                &mut records
                    .iter()
                    .map(|r| (r.e_orig - (r.e_tilde - n * r.tau)).abs()),
            ),
            limit: 1e-6,
            upper: true,
        });
    }
    out
}

fn rate_fits_json(records: &[DiagnosticsRecord], cfg: &ExperimentConfig) -> Value {
    let taus = series(records, |r| r.tau);
    let n = cfg.grid.dim() as f64;
    let mut fits = serde_json::Map::new();
    let columns: [(&str, Vec<f64>); 3] = [
        ("e1", series(records, |r| r.e1)),
        ("l1_dist_g", series(records, |r| r.l1_dist_g)),
        ("n2_minus_n", series(records, |r| (r.second_moment - n).abs())),
    ];
    for (name, values) in columns {
        let entry = match fit_decay(&taus, &values, cfg.fit_window, Modifier::None, None) {
            Ok(fit) => serde_json::to_value(fit).unwrap_or(Value::Null),
            Err(e) => json!({ "error": e.to_string() }),
        };
        fits.insert(name.to_string(), entry);
    }
    Value::Object(fits)
}

/// Runs the experiment described by `flat`. When `out_dir` is given,
/// `series.csv` is streamed row by row (and retained on abort),
/// `summary.json`, `final.snap`, and `plots/*.svg` are written on
/// success.
pub fn run_experiment(flat: &FlatConfig, out_dir: Option<&Path>) -> Result<RunArtifacts> {
    let started = Instant::now();
    let cfg = ExperimentConfig::from_flat(flat)?;
    let initial = cfg.build_initial()?;

    let mut csv: Option<BufWriter<File>> = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut w = BufWriter::new(File::create(dir.join("series.csv"))?);
            writeln!(w, "{}", DiagnosticsRecord::csv_header())?;
            Some(w)
        }
        None => None,
    };

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let outcome = solver::run(
        &cfg.potential,
        initial,
        &cfg.solver,
        &cfg.diagnostics,
        &mut |record, _field| {
            if let Some(w) = csv.as_mut() {
                writeln!(w, "{}", record.csv_row()).map_err(aggdiff::Error::Io)?;
                w.flush().map_err(aggdiff::Error::Io)?;
            }
            records.push(record.clone());
            Ok(())
        },
    );
    // A solver abort still leaves the partial CSV behind; surface the
    // error after the rows already written are safely flushed.
    let output = outcome.context("solver aborted")?;

    let norms = potential_norms(
        &cfg.potential,
        cfg.grid.dim(),
        &cfg.grad_exponents,
        &cfg.lap_exponents,
    )?;
    let taus = series(&records, |r| r.tau);
    let n = cfg.grid.dim() as f64;
    let e1 = series(&records, |r| r.e1);
    let l1 = series(&records, |r| r.l1_dist_g);
    let n2_gap = series(&records, |r| (r.second_moment - n).abs());
    let report = theorem_report(
        cfg.grid.dim(),
        &cfg.potential,
        &norms,
        &taus,
        &e1,
        &l1,
        &n2_gap,
        cfg.fit_window,
    )?;

    // The free energy evaluated with the frozen-time kernel is only a
    // Lyapunov function when the rescaled kernel is (asymptotically)
    // time-independent; presets with a growing potential relax this.
    let f_tilde_fwd_limit = flat.f64_or("invariants.f_tilde_fwd_limit", 1e-3)?;
    let invariants = invariants_from(&records, &cfg, f_tilde_fwd_limit);
    let invariants_ok = invariants.iter().all(Invariant::pass);
    let summary = json!({
        "config_echo": flat.echo_json(),
        "rate_fits": rate_fits_json(&records, &cfg),
        "theorem_report": serde_json::to_value(&report)?,
        "invariants": Value::Object(
            invariants
                .iter()
                .map(|i| (i.name.to_string(), i.to_json()))
                .collect(),
        ),
        "runtime_seconds": started.elapsed().as_secs_f64(),
    });

    if let Some(dir) = out_dir {
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&summary)?,
        )?;
        let last = records.last();
        let (tau, t) = last.map(|r| (r.tau, r.t)).unwrap_or((0.0, 0.0));
        write_snapshot(&dir.join("final.snap"), &output.field, tau, t)?;
        write_plots(dir, &records)?;
    }

    Ok(RunArtifacts {
        records,
        summary,
        report,
        final_field: output.field,
        invariants_ok,
    })
}

fn write_plots(dir: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let plots: PathBuf = dir.join("plots");
    std::fs::create_dir_all(&plots)?;
    let taus = series(records, |r| r.tau);
    write_line_plot(
        &plots.join("e1_vs_tau.svg"),
        "relative entropy vs tau",
        "tau",
        "E1",
        &taus,
        &series(records, |r| r.e1),
        AxisScale::Linear,
        AxisScale::Log10,
    )?;
    write_line_plot(
        &plots.join("n2_vs_tau.svg"),
        "second moment vs tau",
        "tau",
        "N2",
        &taus,
        &series(records, |r| r.second_moment),
        AxisScale::Linear,
        AxisScale::Linear,
    )?;
    write_line_plot(
        &plots.join("l1_vs_t.svg"),
        "L1 distance to Gaussian vs t",
        "t",
        "L1 distance",
        &series(records, |r| r.t),
        &series(records, |r| r.l1_dist_g),
        AxisScale::Log10,
        AxisScale::Log10,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset_config;

    fn quick_flat() -> FlatConfig {
        let mut flat = preset_config("heat-baseline").unwrap();
        // Shrink for test speed.
        flat.set("grid.cells", 128);
        flat.set("solver.tau_end", "0.4");
        flat.set("solver.output_dtau", "0.1");
        flat.set("diagnostics.with_e2", "false");
        flat
    }

    #[test]
    fn writes_all_artifacts_and_passes_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let art = run_experiment(&quick_flat(), Some(dir.path())).unwrap();
        assert!(art.invariants_ok, "{}", art.summary["invariants"]);
        assert_eq!(art.records.len(), 5);
        for name in ["series.csv", "summary.json", "final.snap"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        for name in ["e1_vs_tau.svg", "n2_vs_tau.svg", "l1_vs_t.svg"] {
            assert!(dir.path().join("plots").join(name).exists(), "{name}");
        }
        let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
        assert_eq!(csv.lines().count(), 6); // header + 5 rows
        for key in [
            "config_echo",
            "rate_fits",
            "theorem_report",
            "invariants",
            "runtime_seconds",
        ] {
            assert!(art.summary.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn identical_seeds_give_byte_identical_csv() {
        let run_once = || {
            let dir = tempfile::tempdir().unwrap();
            run_experiment(&quick_flat(), Some(dir.path())).unwrap();
            std::fs::read(dir.path().join("series.csv")).unwrap()
        };
        assert_eq!(run_once(), run_once());
    }
}
