use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{AmbiguitySpec, AssetInstanceConfig, PreferenceSpec};
use crate::dr::{moments, MomentAmbiguitySet};
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::risk::{PreferenceDistribution, PreferencePoint, SpectrumRule};
use crate::scenario::{
    build_lognormal_lattice, build_preference_voronoi, preset_preference, LognormalParams, Preset,
    Purpose, RngStream, ScenarioLattice,
};

/// Model variant solved on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The configured preference distribution.
    Marsrm,
    /// Moment ambiguity over preferences.
    Dr,
    RiskNeutral,
    Mild,
    Strong,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Marsrm,
        Mode::RiskNeutral,
        Mode::Mild,
        Mode::Strong,
        Mode::Dr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Marsrm => "marsrm",
            Mode::Dr => "dr",
            Mode::RiskNeutral => "risk-neutral",
            Mode::Mild => "mild",
            Mode::Strong => "strong",
        }
    }

    fn preset(self) -> Option<Preset> {
        match self {
            Mode::RiskNeutral => Some(Preset::RiskNeutral),
            Mode::Mild => Some(Preset::MildAverse),
            Mode::Strong => Some(Preset::StrongAverse),
            Mode::Marsrm | Mode::Dr => None,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown mode `{s}`")))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Lattice plus per-stage risk data; entry `t-1` of `prefs`/`ambs` belongs
/// to stage `t` (0-based).
#[derive(Debug, Clone)]
pub struct AssetInstance {
    pub lattice: ScenarioLattice,
    pub prefs: Vec<PreferenceDistribution>,
    pub ambs: Vec<MomentAmbiguitySet>,
}

impl AssetInstance {
    /// Preferences for a non-robust mode.
    pub fn prefs_for(
        &self,
        mode: Mode,
        cfg: &AssetInstanceConfig,
    ) -> Result<Vec<PreferenceDistribution>> {
        match mode.preset() {
            Some(p) => {
                let pref = preset_preference(p, rule(cfg))?;
                Ok(vec![pref; self.prefs.len()])
            }
            None if mode == Mode::Dr => Err(invalid(
                "the robust mode has no single preference distribution",
            )),
            None => Ok(self.prefs.clone()),
        }
    }
}

fn rule(cfg: &AssetInstanceConfig) -> SpectrumRule {
    match cfg.spectrum_breakpoints {
        Some(cells) => SpectrumRule::Projected { cells },
        None => SpectrumRule::Exact,
    }
}

fn points(raw: &[(f64, f64)]) -> Vec<PreferencePoint> {
    raw.iter()
        .map(|&(l, a)| PreferencePoint::new(l, a))
        .collect()
}

fn preference(cfg: &AssetInstanceConfig, rng: RngStream) -> Result<PreferenceDistribution> {
    let rule = rule(cfg);
    match &cfg.preference {
        PreferenceSpec::Preset { preset } => preset_preference(*preset, rule),
        PreferenceSpec::Voronoi {
            centers,
            samples,
            beta,
        } => build_preference_voronoi(*centers, *samples, *beta, rule, rng, 0),
        PreferenceSpec::Explicit { points: p, probs } => {
            PreferenceDistribution::from_points(&points(p), probs.clone(), rule)
        }
        PreferenceSpec::Spectra { spectra, probs } => {
            let pref = PreferenceDistribution::from_spectra(spectra.clone(), probs.clone())?;
            match cfg.spectrum_breakpoints {
                Some(cells) => pref.projected(cells),
                None => Ok(pref),
            }
        }
    }
}

fn ambiguity(
    cfg: &AssetInstanceConfig,
    pref: &PreferenceDistribution,
    rng: RngStream,
) -> Result<Vec<MomentAmbiguitySet>> {
    let stages = cfg.horizon - 1;
    let rule = rule(cfg);
    let spec = cfg
        .ambiguity
        .clone()
        .unwrap_or(AmbiguitySpec::Empirical { slab: 0.0 });
    match spec {
        AmbiguitySpec::Empirical { slab } => {
            let pts: Option<Vec<PreferencePoint>> = pref.atoms().iter().map(|a| a.point).collect();
            let set = match pts {
                Some(pts) => MomentAmbiguitySet::from_empirical(&pts, pref.probs(), rule)?,
                None => {
                    // Spectra without parameters: moments of the atom index.
                    let feats: Vec<Vec<f64>> = (0..pref.len()).map(|l| vec![l as f64]).collect();
                    let (mu, sigma) = moments(&feats, pref.probs());
                    let spectra = pref.atoms().iter().map(|a| a.spectrum.clone()).collect();
                    MomentAmbiguitySet::from_parts(feats, spectra, mu, sigma, 0.0)?
                }
            };
            let set = if slab > 0.0 {
                set.with_slab(slab)?
            } else {
                set
            };
            Ok(vec![set; stages])
        }
        AmbiguitySpec::Uniform { per_stage, slab } => (1..=stages)
            .map(|s| {
                // Stage s (0-based) is stage s + 1 in 1-based counting.
                let n = per_stage * (s + 1);
                if n == 0 {
                    return Err(invalid("ambiguity support needs at least one point"));
                }
                let mut g = rng.rng(Purpose::Ambiguity, s as u64);
                let pts: Vec<PreferencePoint> = (0..n)
                    .map(|_| PreferencePoint::new(g.gen::<f64>(), g.gen::<f64>()))
                    .collect();
                let set = MomentAmbiguitySet::from_empirical(&pts, &vec![1.0 / n as f64; n], rule)?;
                if slab > 0.0 {
                    set.with_slab(slab)
                } else {
                    Ok(set)
                }
            })
            .collect(),
        AmbiguitySpec::Explicit {
            points: p,
            mu,
            sigma,
            slab,
        } => {
            let set = MomentAmbiguitySet::new(&points(&p), mu, Matrix::from_rows(&sigma)?, rule)?;
            let set = if slab > 0.0 {
                set.with_slab(slab)?
            } else {
                set
            };
            Ok(vec![set; stages])
        }
    }
}

/// Builds the lattice and the per-stage preference and ambiguity data.
///
/// Every stage shares the same preference distribution.
pub fn build_asset_instance(cfg: &AssetInstanceConfig) -> Result<AssetInstance> {
    cfg.validate()?;
    let stages = cfg.horizon - 1;
    let rng = RngStream::new(cfg.seed);
    let params = LognormalParams {
        mu: cfg.lognormal.mu.resolve(cfg.assets, "lognormal.mu")?,
        sigma: cfg.lognormal.sigma.resolve(cfg.assets, "lognormal.sigma")?,
        corr: cfg.lognormal.corr.resolve(cfg.assets)?,
    };
    let lattice = build_lognormal_lattice(
        cfg.horizon,
        &params,
        &cfg.scenarios_per_stage
            .resolve(stages, "scenarios_per_stage")?,
        &cfg.transaction_cost.resolve(stages, "transaction_cost")?,
        rng,
    )?;
    let pref = preference(cfg, rng)?;
    let ambs = ambiguity(cfg, &pref, rng)?;
    Ok(AssetInstance {
        lattice,
        prefs: vec![pref; stages],
        ambs,
    })
}
