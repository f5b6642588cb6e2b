use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bound::{phi_integrals, step_spectrum_error_bound, BoundMode};
use super::config::AssetInstanceConfig;
use super::instance::{build_asset_instance, AssetInstance, Mode};
use crate::error::{invalid, Result};
use crate::lp::{extensive_form_dr, extensive_form_marsrm};
use crate::sddp::{dr_train, train, TrainOptions, TrainReport};

/// Mode and solver options of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub mode: Mode,
    pub train: TrainOptions,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSnapshot {
    pub instance: AssetInstanceConfig,
    pub run: RunSettings,
}

/// Reads either a bare instance config or a run snapshot.
pub fn load_config(path: &Path) -> Result<(AssetInstanceConfig, Option<RunSettings>)> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("instance").is_some() {
        let snap: RunSnapshot = serde_json::from_value(value)?;
        snap.instance.validate()?;
        Ok((snap.instance, Some(snap.run)))
    } else {
        Ok((AssetInstanceConfig::from_json(&text)?, None))
    }
}

/// Trains `mode` on a built instance.
pub fn solve_mode(
    inst: &AssetInstance,
    cfg: &AssetInstanceConfig,
    mode: Mode,
    opts: &TrainOptions,
) -> Result<TrainReport> {
    Ok(match mode {
        Mode::Dr => dr_train(&inst.lattice, &inst.ambs, opts)?.report,
        _ => train(&inst.lattice, &inst.prefs_for(mode, cfg)?, opts)?.report,
    })
}

/// Extensive-form value of `mode`.
pub fn oracle_mode(inst: &AssetInstance, cfg: &AssetInstanceConfig, mode: Mode) -> Result<f64> {
    match mode {
        Mode::Dr => extensive_form_dr(&inst.lattice, &inst.ambs),
        _ => extensive_form_marsrm(&inst.lattice, &inst.prefs_for(mode, cfg)?),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: Mode,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub time_s: f64,
}

/// Trains every mode on one lattice with the same options.
pub fn compare_modes(
    cfg: &AssetInstanceConfig,
    modes: &[Mode],
    opts: &TrainOptions,
) -> Result<Vec<ModeResult>> {
    if modes.is_empty() {
        return Err(invalid("no modes to compare"));
    }
    let inst = build_asset_instance(cfg)?;
    modes
        .iter()
        .map(|&mode| {
            let report = solve_mode(&inst, cfg, mode, opts)?;
            let last = report
                .last()
                .ok_or_else(|| invalid("training ran no iterations"))?;
            Ok(ModeResult {
                mode,
                lower: last.lower,
                upper: last.upper,
                gap: last.gap,
                iterations: last.iteration,
                converged: report.converged,
                time_s: last.time_lower_s + last.time_upper_s,
            })
        })
        .collect()
}

pub fn format_comparison(rows: &[ModeResult]) -> String {
    let mut out = format!(
        "{:<13} {:>14} {:>14} {:>12} {:>6} {:>9}\n",
        "mode", "lower", "upper", "gap", "iters", "time_s"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<13} {:>14.4} {:>14.4} {:>12.3e} {:>6} {:>9.1}",
            r.mode.name(),
            r.lower,
            r.upper,
            r.gap,
            r.iterations,
            r.time_s
        );
    }
    out
}

/// Files written for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    /// Bounds table (`cuts,lower,upper,gap,time_lower_s,time_upper_s`).
    pub csv: PathBuf,
    /// Per-iteration series including the raw bounds.
    pub series: PathBuf,
    /// Resolved instance and run settings.
    pub config: PathBuf,
}

pub fn write_artifacts(
    dir: &Path,
    snapshot: &RunSnapshot,
    report: &TrainReport,
) -> Result<RunArtifacts> {
    std::fs::create_dir_all(dir)?;
    let stem = snapshot.run.mode.name();
    let art = RunArtifacts {
        csv: dir.join(format!("{stem}.csv")),
        series: dir.join(format!("{stem}_series.csv")),
        config: dir.join(format!("{stem}_config.json")),
    };
    report.save_csv(&art.csv)?;
    report.save_series(&art.series)?;
    std::fs::write(&art.config, serde_json::to_string_pretty(snapshot)?)?;
    Ok(art)
}

/// Projection error of one grid: the bound for the first stage and, when
/// the oracle fits, the measured `|V - Ṽ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub cells: usize,
    pub bound: f64,
    pub measured: Option<f64>,
}

/// Compares exact spectra with their projections on `cells`-cell grids.
/// The configured `spectrum_breakpoints` is ignored.
pub fn error_bound_table(
    cfg: &AssetInstanceConfig,
    mode: Mode,
    cells: &[usize],
) -> Result<Vec<BoundRow>> {
    let exact_cfg = AssetInstanceConfig {
        spectrum_breakpoints: None,
        ..cfg.clone()
    };
    let inst = build_asset_instance(&exact_cfg)?;
    let phi = phi_integrals(&inst.lattice);
    let (lipschitz, bound_mode) = if mode == Mode::Dr {
        let l: Vec<Vec<f64>> = inst
            .ambs
            .iter()
            .map(|a| a.spectra().iter().map(|s| s.lipschitz()).collect())
            .collect();
        (l, BoundMode::Robust)
    } else {
        let prefs = inst.prefs_for(mode, &exact_cfg)?;
        let l = prefs
            .iter()
            .map(|p| p.atoms().iter().map(|a| a.spectrum.lipschitz()).collect())
            .collect();
        let q = prefs.iter().map(|p| p.probs().to_vec()).collect::<Vec<_>>();
        (
            l,
            BoundMode::Average {
                q: [vec![Vec::new()], q].concat(),
            },
        )
    };
    let lipschitz = [vec![Vec::new()], lipschitz].concat();
    let exact = oracle_mode(&inst, &exact_cfg, mode).ok();
    cells
        .iter()
        .map(|&j| {
            let bound = step_spectrum_error_bound(&lipschitz, j, &phi, &bound_mode)?[0];
            let measured = match exact {
                Some(v) => {
                    let proj_cfg = AssetInstanceConfig {
                        spectrum_breakpoints: Some(j),
                        ..cfg.clone()
                    };
                    let proj = build_asset_instance(&proj_cfg)?;
                    Some((v - oracle_mode(&proj, &proj_cfg, mode)?).abs())
                }
                None => None,
            };
            Ok(BoundRow {
                cells: j,
                bound,
                measured,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::config::{PreferenceSpec, Spread};
    use super::*;
    use crate::scenario::Preset;
    use crate::Execution;

    fn small() -> AssetInstanceConfig {
        let mut cfg = AssetInstanceConfig::reference(3, 3).unwrap();
        cfg.assets = 2;
        cfg.scenarios_per_stage = Spread::All(2);
        cfg.preference = PreferenceSpec::Voronoi {
            centers: 3,
            samples: 200,
            beta: (2.0, 2.0),
        };
        cfg.ambiguity = Some(super::super::config::AmbiguitySpec::Empirical { slab: 0.0 });
        cfg
    }

    fn opts() -> TrainOptions {
        TrainOptions {
            max_iters: 60,
            tol: 1e-7,
            sampling: crate::sddp::Sampling::Enumerate,
            execution: Execution::Sequential,
            ..TrainOptions::default()
        }
    }

    #[test]
    fn risk_neutral_is_cheapest_and_robust_is_dearest() {
        let rows = compare_modes(&small(), &Mode::ALL, &opts()).unwrap();
        let v = |m: Mode| rows.iter().find(|r| r.mode == m).unwrap().upper;
        assert!(rows.iter().all(|r| r.converged));
        for m in [Mode::Marsrm, Mode::Mild, Mode::Strong, Mode::Dr] {
            assert!(v(Mode::RiskNeutral) <= v(m) + 1e-7, "{m}");
        }
        assert!(v(Mode::Marsrm) <= v(Mode::Dr) + 1e-7);
    }

    #[test]
    fn same_seed_same_table() {
        let a = compare_modes(&small(), &[Mode::Mild], &opts()).unwrap();
        let b = compare_modes(&small(), &[Mode::Mild], &opts()).unwrap();
        assert_eq!(
            (a[0].lower, a[0].upper, a[0].iterations),
            (b[0].lower, b[0].upper, b[0].iterations)
        );
    }

    #[test]
    fn snapshot_reproduces_the_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small();
        cfg.preference = PreferenceSpec::Preset {
            preset: Preset::StrongAverse,
        };
        let snap = RunSnapshot {
            instance: cfg.clone(),
            run: RunSettings {
                mode: Mode::Marsrm,
                train: opts(),
            },
        };
        let inst = build_asset_instance(&cfg).unwrap();
        let report = solve_mode(&inst, &cfg, Mode::Marsrm, &snap.run.train).unwrap();
        let art = write_artifacts(dir.path(), &snap, &report).unwrap();
        let (cfg2, run2) = load_config(&art.config).unwrap();
        let run2 = run2.unwrap();
        let inst2 = build_asset_instance(&cfg2).unwrap();
        let again = solve_mode(&inst2, &cfg2, run2.mode, &run2.train).unwrap();
        let bits = |r: &TrainReport| {
            r.rows
                .iter()
                .map(|x| (x.lower.to_bits(), x.upper.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&report), bits(&again));
        let text = std::fs::read_to_string(&art.csv).unwrap();
        assert!(text.starts_with("cuts,lower,upper,gap,time_lower_s,time_upper_s\n"));
    }
}
