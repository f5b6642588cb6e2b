use serde::{Deserialize, Serialize};

use super::{
    cvar, project_onto_grid, srm, DiscreteDistribution, Spectrum, StepSpectrum, PROB_TOL,
    SPECTRUM_TOL,
};
use crate::error::{invalid, Error, Result};

/// A preference parameter `s = (λ, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferencePoint {
    pub lambda: f64,
    pub alpha: f64,
}

impl PreferencePoint {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        PreferencePoint { lambda, alpha }
    }
}

/// How a preference point becomes a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SpectrumRule {
    /// The exact `λE + (1-λ)CVaR_α` spectrum.
    #[default]
    Exact,
    /// Its step approximation on a uniform grid of `cells` cells.
    Projected { cells: usize },
}

impl SpectrumRule {
    pub fn build(&self, p: PreferencePoint) -> Result<StepSpectrum> {
        match *self {
            SpectrumRule::Exact => StepSpectrum::mean_cvar(p.lambda, p.alpha),
            SpectrumRule::Projected { cells } => super::project_spectrum(p.lambda, p.alpha, cells),
        }
    }
}

/// One support point of a preference distribution and its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceAtom {
    pub point: Option<PreferencePoint>,
    pub spectrum: Spectrum,
}

/// Finite distribution `Q` over risk spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDistribution {
    atoms: Vec<PreferenceAtom>,
    probs: Vec<f64>,
}

impl PreferenceDistribution {
    pub fn new(atoms: Vec<PreferenceAtom>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(invalid(
                "preference distribution needs one probability per atom",
            ));
        }
        if probs.iter().any(|&q| !q.is_finite() || q < 0.0) {
            return Err(invalid(
                "preference probabilities must be finite and nonnegative",
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(invalid(format!(
                "preference probabilities sum to {total}, not 1"
            )));
        }
        for a in &atoms {
            let m = a.spectrum.mass(0.0, 1.0);
            if (m - 1.0).abs() > SPECTRUM_TOL {
                return Err(invalid(format!("spectrum integrates to {m}, not 1")));
            }
        }
        Ok(PreferenceDistribution { atoms, probs })
    }

    pub fn from_points(
        points: &[PreferencePoint],
        probs: Vec<f64>,
        rule: SpectrumRule,
    ) -> Result<Self> {
        let atoms = points
            .iter()
            .map(|&p| {
                Ok(PreferenceAtom {
                    point: Some(p),
                    spectrum: rule.build(p)?.into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, probs)
    }

    pub fn from_spectra(spectra: Vec<Spectrum>, probs: Vec<f64>) -> Result<Self> {
        let atoms = spectra
            .into_iter()
            .map(|spectrum| PreferenceAtom {
                point: None,
                spectrum,
            })
            .collect();
        Self::new(atoms, probs)
    }

    pub fn dirac(lambda: f64, alpha: f64) -> Result<Self> {
        Self::from_points(
            &[PreferencePoint::new(lambda, alpha)],
            vec![1.0],
            SpectrumRule::Exact,
        )
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[PreferenceAtom] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Same atoms with new weights.
    pub fn reweighted(&self, probs: Vec<f64>) -> Result<Self> {
        Self::new(self.atoms.clone(), probs)
    }

    /// `t·self + (1-t)·other` as one distribution over the concatenated atoms.
    pub fn mixture(&self, t: f64, other: &Self) -> Result<Self> {
        let atoms = self.atoms.iter().chain(&other.atoms).cloned().collect();
        let probs = self
            .probs
            .iter()
            .map(|q| t * q)
            .chain(other.probs.iter().map(|q| (1.0 - t) * q))
            .collect();
        Self::new(atoms, probs)
    }

    /// Replaces every spectrum by its cell-average projection on `cells` cells.
    pub fn projected(&self, cells: usize) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                Ok(PreferenceAtom {
                    point: a.point,
                    spectrum: project_onto_grid(&a.spectrum, cells)?.into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms, self.probs.clone())
    }

    /// Largest Lipschitz modulus over the support.
    pub fn max_lipschitz(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.spectrum.lipschitz())
            .fold(0.0, f64::max)
    }

    /// `Σ_l q_l L_l`, skipping atoms of zero weight.
    pub fn mean_lipschitz(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(_, &q)| q > 0.0)
            .map(|(a, q)| q * a.spectrum.lipschitz())
            .sum()
    }
}

/// Reduction of an ARSRM over `K` equiprobable atoms to a combination of
/// `CVaR_{α_k}` with `α_k = (k-1)/K`.
///
/// Row `l` of `psi`/`beta` belongs to support point `l`; column `k` (0-based)
/// to the `k`-th smallest outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArsrmWeights {
    pub k: usize,
    pub psi: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
    pub alpha_levels: Vec<f64>,
}

impl ArsrmWeights {
    pub fn new(k: usize, pref: &PreferenceDistribution) -> Result<Self> {
        if k == 0 {
            return Err(invalid("need at least one scenario"));
        }
        let kf = k as f64;
        let psi: Vec<Vec<f64>> = pref
            .atoms
            .iter()
            .map(|a| {
                (0..k)
                    .map(|i| a.spectrum.mass(i as f64 / kf, (i + 1) as f64 / kf))
                    .collect()
            })
            .collect();
        let beta = psi
            .iter()
            .map(|row| {
                (0..k)
                    .map(|i| {
                        let prev = if i == 0 { 0.0 } else { row[i - 1] };
                        let b = (row[i] - prev) * (k - i) as f64;
                        // Flat spectra leave rounding-level residue.
                        if b.abs() < 1e-12 {
                            0.0
                        } else {
                            b
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ArsrmWeights {
            k,
            psi,
            beta,
            alpha_levels: (0..k).map(|i| i as f64 / kf).collect(),
        })
    }

    /// Weights for a distribution with the given probabilities; only the
    /// equiprobable case reduces to CVaR levels `(k-1)/K`.
    pub fn for_probabilities(probs: &[f64], pref: &PreferenceDistribution) -> Result<Self> {
        let k = probs.len();
        let target = 1.0 / k as f64;
        if probs.iter().any(|p| (p - target).abs() > PROB_TOL) {
            return Err(Error::Unsupported(
                "CVaR-combination weights require equiprobable scenarios".into(),
            ));
        }
        Self::new(k, pref)
    }

    /// `w_k = Σ_l q_l β_{l,k}`.
    pub fn combined(&self, q: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.k];
        for (row, ql) in self.beta.iter().zip(q) {
            for (wk, b) in w.iter_mut().zip(row) {
                *wk += ql * b;
            }
        }
        w
    }

    /// `Σ_k β_{l,k} CVaR_{α_k}(dist)` for every support point `l`.
    pub fn per_atom(&self, dist: &DiscreteDistribution) -> Result<Vec<f64>> {
        let cvars = self.cvar_levels(dist)?;
        Ok(self
            .beta
            .iter()
            .map(|row| row.iter().zip(&cvars).map(|(b, c)| b * c).sum())
            .collect())
    }

    /// `CVaR_{α_k}(dist)` for each level.
    pub fn cvar_levels(&self, dist: &DiscreteDistribution) -> Result<Vec<f64>> {
        if dist.len() != self.k {
            return Err(invalid(format!(
                "weights for {} scenarios, distribution has {}",
                self.k,
                dist.len()
            )));
        }
        self.alpha_levels.iter().map(|&a| cvar(dist, a)).collect()
    }
}

/// `E_Q[ρ_σ(dist)]` by direct integration of each spectrum.
pub fn arsrm(dist: &DiscreteDistribution, pref: &PreferenceDistribution) -> f64 {
    pref.atoms
        .iter()
        .zip(&pref.probs)
        .map(|(a, q)| q * srm(dist, &a.spectrum))
        .sum()
}

/// `Σ_k Σ_l q_l β_{l,k} CVaR_{α_k}(dist)`; requires equiprobable atoms.
pub fn arsrm_cvar_route(dist: &DiscreteDistribution, pref: &PreferenceDistribution) -> Result<f64> {
    let w = ArsrmWeights::for_probabilities(dist.probs(), pref)?;
    let cvars = w.cvar_levels(dist)?;
    Ok(w.combined(pref.probs())
        .iter()
        .zip(&cvars)
        .map(|(a, b)| a * b)
        .sum())
}
