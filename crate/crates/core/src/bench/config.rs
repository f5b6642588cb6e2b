use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::risk::Spectrum;
use crate::scenario::Preset;

/// A value shared by every asset or stage, or one entry each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spread<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> Spread<T> {
    pub fn resolve(&self, n: usize, what: &str) -> Result<Vec<T>> {
        match self {
            Spread::All(v) => Ok(vec![v.clone(); n]),
            Spread::Each(v) if v.len() == n => Ok(v.clone()),
            Spread::Each(v) => Err(invalid(format!(
                "{what}: expected {n} entries, got {}",
                v.len()
            ))),
        }
    }
}

/// Pairwise correlation of the log-returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrSpec {
    /// Same correlation for all distinct pairs.
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
    /// `default` everywhere except the listed `(i, j, value)` pairs (0-based).
    Pairs {
        default: f64,
        overrides: Vec<(usize, usize, f64)>,
    },
}

impl CorrSpec {
    pub fn resolve(&self, assets: usize) -> Result<Matrix> {
        let fill = |c: f64| {
            let mut m = Matrix::identity(assets);
            for i in 0..assets {
                for j in 0..assets {
                    if i != j {
                        m[(i, j)] = c;
                    }
                }
            }
            m
        };
        match self {
            CorrSpec::Uniform(c) => Ok(fill(*c)),
            CorrSpec::Matrix(rows) => {
                if rows.len() != assets || rows.iter().any(|r| r.len() != assets) {
                    return Err(invalid(format!(
                        "correlation matrix must be {assets}x{assets}"
                    )));
                }
                Matrix::from_rows(rows)
            }
            CorrSpec::Pairs { default, overrides } => {
                let mut m = fill(*default);
                for &(i, j, c) in overrides {
                    if i >= assets || j >= assets || i == j {
                        return Err(invalid(format!("bad correlation override ({i}, {j})")));
                    }
                    m[(i, j)] = c;
                    m[(j, i)] = c;
                }
                Ok(m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LognormalSpec {
    pub mu: Spread<f64>,
    pub sigma: Spread<f64>,
    pub corr: CorrSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreferenceSpec {
    Preset {
        preset: Preset,
    },
    /// `centers` support points and `samples` Voronoi samples from `Be(a, b)`.
    Voronoi {
        centers: usize,
        samples: usize,
        beta: (f64, f64),
    },
    /// Points `(λ, α)` with probabilities.
    Explicit {
        points: Vec<(f64, f64)>,
        probs: Vec<f64>,
    },
    /// Arbitrary spectra with probabilities.
    Spectra {
        spectra: Vec<Spectrum>,
        probs: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbiguitySpec {
    /// Moments of the preference distribution on its own support.
    Empirical {
        #[serde(default)]
        slab: f64,
    },
    /// Per stage `t` (1-based), `per_stage · t` support points drawn from
    /// `U(0,1)²` with the sample mean and (population) covariance.
    Uniform {
        per_stage: usize,
        #[serde(default)]
        slab: f64,
    },
    Explicit {
        points: Vec<(f64, f64)>,
        mu: Vec<f64>,
        sigma: Vec<Vec<f64>>,
        #[serde(default)]
        slab: f64,
    },
}

/// Asset-allocation instance. Per-stage lists cover stages `2..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetInstanceConfig {
    pub horizon: usize,
    pub assets: usize,
    pub lognormal: LognormalSpec,
    pub transaction_cost: Spread<f64>,
    pub scenarios_per_stage: Spread<usize>,
    pub preference: PreferenceSpec,
    #[serde(default)]
    pub ambiguity: Option<AmbiguitySpec>,
    /// Cells of the step-spectrum grid; `None` keeps spectra exact.
    #[serde(default)]
    pub spectrum_breakpoints: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Transaction cost used by the presets.
pub const DEFAULT_TRANSACTION_COST: f64 = 0.01;

impl AssetInstanceConfig {
    /// The benchmark parameters with the scenario count paired to the
    /// horizon: `T = 2, 3, 5, 10` take `K = 100, 50, 20, 10`.
    pub fn reference(horizon: usize, seed: u64) -> Result<Self> {
        let k = match horizon {
            2 => 100,
            3 => 50,
            5 => 20,
            10 => 10,
            _ => {
                return Err(invalid(format!(
                    "no preset for horizon {horizon}; use 2, 3, 5 or 10"
                )))
            }
        };
        Ok(AssetInstanceConfig {
            horizon,
            assets: 4,
            lognormal: LognormalSpec {
                mu: Spread::All(0.6),
                sigma: Spread::All(0.3),
                corr: CorrSpec::Uniform(0.5),
            },
            transaction_cost: Spread::All(DEFAULT_TRANSACTION_COST),
            scenarios_per_stage: Spread::All(k),
            preference: PreferenceSpec::Voronoi {
                centers: 10,
                samples: 1000,
                beta: (2.0, 2.0),
            },
            ambiguity: Some(AmbiguitySpec::Uniform {
                per_stage: 10,
                slab: 0.0,
            }),
            spectrum_breakpoints: Some(10),
            seed,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.assets == 0 {
            return Err(invalid("horizon and asset count must be at least 1"));
        }
        let stages = self.horizon - 1;
        if self
            .transaction_cost
            .resolve(stages, "transaction_cost")?
            .iter()
            .any(|f| !(0.0..1.0).contains(f))
        {
            return Err(invalid("transaction costs must lie in [0, 1)"));
        }
        if self
            .scenarios_per_stage
            .resolve(stages, "scenarios_per_stage")?
            .contains(&0)
        {
            return Err(invalid("scenario counts must be at least 1"));
        }
        self.lognormal.mu.resolve(self.assets, "lognormal.mu")?;
        self.lognormal
            .sigma
            .resolve(self.assets, "lognormal.sigma")?;
        self.lognormal.corr.resolve(self.assets)?;
        if self.spectrum_breakpoints == Some(0) {
            return Err(invalid("spectrum_breakpoints must be at least 1"));
        }
        match &self.preference {
            PreferenceSpec::Voronoi {
                centers, samples, ..
            } if *centers == 0 || samples < centers => {
                Err(invalid("voronoi preference needs 1 ≤ centers ≤ samples"))
            }
            PreferenceSpec::Explicit { points, probs } if points.len() != probs.len() => {
                Err(invalid("one probability per preference point required"))
            }
            PreferenceSpec::Spectra { spectra, probs } if spectra.len() != probs.len() => {
                Err(invalid("one probability per spectrum required"))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_accepts_scalar_or_list() {
        let a: Spread<f64> = serde_json::from_str("0.5").unwrap();
        assert_eq!(a.resolve(3, "x").unwrap(), vec![0.5; 3]);
        let b: Spread<usize> = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(b.resolve(2, "x").unwrap(), vec![1, 2]);
        assert!(b.resolve(3, "x").is_err());
    }

    #[test]
    fn corr_forms() {
        let c: CorrSpec = serde_json::from_str("0.5").unwrap();
        assert_eq!(c.resolve(2).unwrap()[(0, 1)], 0.5);
        let c: CorrSpec =
            serde_json::from_str(r#"{"default": 0.0, "overrides": [[0, 2, 0.5]]}"#).unwrap();
        let m = c.resolve(3).unwrap();
        assert_eq!((m[(0, 2)], m[(2, 0)], m[(0, 1)]), (0.5, 0.5, 0.0));
        let c: CorrSpec = serde_json::from_str("[[1, 0.2], [0.2, 1]]").unwrap();
        assert_eq!(c.resolve(2).unwrap()[(1, 0)], 0.2);
    }

    #[test]
    fn presets_round_trip_through_json() {
        for t in [2, 3, 5, 10] {
            let cfg = AssetInstanceConfig::reference(t, 9).unwrap();
            assert_eq!(AssetInstanceConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
        assert!(AssetInstanceConfig::reference(4, 0).is_err());
    }

    #[test]
    fn parses_a_hand_written_config() {
        let text = r#"{
            "horizon": 3, "assets": 2,
            "lognormal": {"mu": [0.05, 0.07], "sigma": 0.2, "corr": 0.3},
            "transaction_cost": 0.01, "scenarios_per_stage": [3, 4],
            "preference": {"kind": "preset", "preset": "mild_averse"},
            "ambiguity": {"kind": "empirical"},
            "spectrum_breakpoints": 10, "seed": 4
        }"#;
        let cfg = AssetInstanceConfig::from_json(text).unwrap();
        assert_eq!(cfg.scenarios_per_stage.resolve(2, "k").unwrap(), vec![3, 4]);
        let text = r#"{"horizon": 3, "assets": 2, "lognormal": {"mu": 0, "sigma": 0.2, "corr": 0.3},
            "transaction_cost": 1.5, "scenarios_per_stage": 2,
            "preference": {"kind": "preset", "preset": "risk_neutral"}}"#;
        assert!(AssetInstanceConfig::from_json(text).is_err());
    }
}
