use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::lp::{solve, LpModel, LpStatus, RowSense, Var};
use crate::risk::{ArsrmWeights, PreferenceDistribution, PreferencePoint, Spectrum, SpectrumRule};

/// Distributions `q` on a finite support of preference parameters whose
/// mean and covariance match `mu` and `sigma` (up to `slab` per entry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAmbiguitySet {
    support: Vec<Vec<f64>>,
    spectra: Vec<Spectrum>,
    mu: Vec<f64>,
    sigma: Matrix,
    slab: f64,
}

impl MomentAmbiguitySet {
    /// Support points `s_l = (λ_l, α_l)` with spectra built by `rule`.
    pub fn new(
        points: &[PreferencePoint],
        mu: Vec<f64>,
        sigma: Matrix,
        rule: SpectrumRule,
    ) -> Result<Self> {
        let spectra = points
            .iter()
            .map(|&p| Ok(rule.build(p)?.into()))
            .collect::<Result<Vec<Spectrum>>>()?;
        let support = points.iter().map(|p| vec![p.lambda, p.alpha]).collect();
        Self::from_parts(support, spectra, mu, sigma, 0.0)
    }

    /// Generic form: `support[l]` is the moment feature vector of the atom
    /// whose spectrum is `spectra[l]`.
    pub fn from_parts(
        support: Vec<Vec<f64>>,
        spectra: Vec<Spectrum>,
        mu: Vec<f64>,
        sigma: Matrix,
        slab: f64,
    ) -> Result<Self> {
        if support.is_empty() || support.len() != spectra.len() {
            return Err(invalid("ambiguity support needs one spectrum per point"));
        }
        let d = mu.len();
        if support.iter().any(|s| s.len() != d) || sigma.rows() != d || sigma.cols() != d {
            return Err(invalid("moment dimensions do not match the support"));
        }
        if !sigma.is_symmetric(1e-12) {
            return Err(invalid("covariance must be symmetric"));
        }
        if slab.is_nan() || slab < 0.0 {
            return Err(invalid("slab width must be nonnegative"));
        }
        let set = MomentAmbiguitySet {
            support,
            spectra,
            mu,
            sigma,
            slab,
        };
        set.check_feasible()?;
        Ok(set)
    }

    /// Moments of `q` on `points` (population covariance), so `q` itself
    /// belongs to the set.
    pub fn from_empirical(
        points: &[PreferencePoint],
        q: &[f64],
        rule: SpectrumRule,
    ) -> Result<Self> {
        if points.len() != q.len() {
            return Err(invalid("one weight per support point required"));
        }
        let feats: Vec<Vec<f64>> = points.iter().map(|p| vec![p.lambda, p.alpha]).collect();
        let (mu, sigma) = moments(&feats, q);
        Self::new(points, mu, sigma, rule)
    }

    /// Relaxes every moment equation except normalization to `±slab`.
    pub fn with_slab(mut self, slab: f64) -> Result<Self> {
        if slab.is_nan() || slab < 0.0 {
            return Err(invalid("slab width must be nonnegative"));
        }
        self.slab = slab;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn spectra(&self) -> &[Spectrum] {
        &self.spectra
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn slab(&self) -> f64 {
        self.slab
    }

    /// Moment equations as scalar entries: normalization, then means, then
    /// the upper triangle of the covariance. Row `l` of the returned matrix
    /// holds atom `l`'s contribution; the vector holds the targets.
    pub fn moment_system(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let d = self.mu.len();
        let mut targets = vec![1.0];
        targets.extend_from_slice(&self.mu);
        for i in 0..d {
            for j in i..d {
                targets.push(self.sigma[(i, j)]);
            }
        }
        let rows = self
            .support
            .iter()
            .map(|s| {
                let mut r = vec![1.0];
                r.extend_from_slice(s);
                for i in 0..d {
                    for j in i..d {
                        r.push((s[i] - self.mu[i]) * (s[j] - self.mu[j]));
                    }
                }
                r
            })
            .collect();
        (rows, targets)
    }

    /// Adds `q ≥ 0` with the moment rows and returns the `q` columns.
    pub(crate) fn add_membership(&self, model: &mut LpModel) -> Vec<Var> {
        let (rows, targets) = self.moment_system();
        let q: Vec<Var> = (0..self.len())
            .map(|l| model.nonneg(0.0, format!("q[{l}]")))
            .collect();
        for (e, &target) in targets.iter().enumerate() {
            let terms: Vec<(Var, f64)> = q.iter().zip(&rows).map(|(&v, r)| (v, r[e])).collect();
            if e == 0 || self.slab == 0.0 {
                model.add_row(terms, RowSense::Eq, target, format!("moment[{e}]"));
            } else {
                model.add_row(
                    terms.clone(),
                    RowSense::Le,
                    target + self.slab,
                    format!("moment_hi[{e}]"),
                );
                model.add_row(
                    terms,
                    RowSense::Ge,
                    target - self.slab,
                    format!("moment_lo[{e}]"),
                );
            }
        }
        q
    }

    fn check_feasible(&self) -> Result<()> {
        let mut m = LpModel::new();
        self.add_membership(&mut m);
        match solve(&m)?.status {
            LpStatus::Optimal => Ok(()),
            _ => Err(Error::EmptyAmbiguity(format!(
                "no distribution on {} support points matches the given moments",
                self.len()
            ))),
        }
    }

    /// A preference distribution over the support with weights `q`.
    pub fn preference(&self, q: Vec<f64>) -> Result<PreferenceDistribution> {
        let atoms = self
            .spectra
            .iter()
            .zip(&self.support)
            .map(|(s, f)| crate::risk::PreferenceAtom {
                point: (f.len() == 2).then(|| PreferencePoint::new(f[0], f[1])),
                spectrum: s.clone(),
            })
            .collect();
        PreferenceDistribution::new(atoms, q)
    }

    /// CVaR-combination weights for `K` equiprobable scenarios; they depend
    /// only on the spectra, not on `q`.
    pub fn arsrm_weights(&self, probs: &[f64]) -> Result<ArsrmWeights> {
        let n = self.len();
        ArsrmWeights::for_probabilities(probs, &self.preference(vec![1.0 / n as f64; n])?)
    }

    /// Some member of the set, found by the feasibility LP.
    pub fn feasible_point(&self) -> Result<Vec<f64>> {
        let mut m = LpModel::new();
        let q = self.add_membership(&mut m);
        let s = solve(&m)?;
        if !s.is_optimal() {
            return Err(Error::EmptyAmbiguity("feasibility LP failed".into()));
        }
        Ok(q.iter().map(|v| s.x[v.0].max(0.0)).collect())
    }
}

/// Weighted mean and population covariance of `features` under `q`.
pub fn moments(features: &[Vec<f64>], q: &[f64]) -> (Vec<f64>, Matrix) {
    let d = features.first().map_or(0, |f| f.len());
    let mut mu = vec![0.0; d];
    for (f, w) in features.iter().zip(q) {
        for i in 0..d {
            mu[i] += w * f[i];
        }
    }
    let mut sigma = Matrix::zeros(d, d);
    for (f, w) in features.iter().zip(q) {
        for i in 0..d {
            for j in 0..d {
                sigma[(i, j)] += w * (f[i] - mu[i]) * (f[j] - mu[j]);
            }
        }
    }
    // Symmetrize exactly.
    for i in 0..d {
        for j in 0..i {
            let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    (mu, sigma)
}
