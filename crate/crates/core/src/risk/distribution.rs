use serde::{Deserialize, Serialize};

use super::PROB_TOL;
use crate::error::{domain, invalid, Result};

/// A finitely supported loss distribution, kept sorted by outcome.
///
/// Sorting is stable, so tied outcomes keep the order of their original
/// indices; [`source_indices`](Self::source_indices) maps each sorted atom
/// back to its position in the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    outcomes: Vec<f64>,
    probs: Vec<f64>,
    source: Vec<usize>,
}

impl DiscreteDistribution {
    pub fn new(outcomes: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(invalid("distribution has no atoms"));
        }
        if outcomes.len() != probs.len() {
            return Err(invalid(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        if outcomes.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite outcome"));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(invalid("probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }

        let mut source: Vec<usize> = (0..outcomes.len()).collect();
        source.sort_by(|&a, &b| outcomes[a].total_cmp(&outcomes[b]).then(a.cmp(&b)));
        Ok(DiscreteDistribution {
            outcomes: source.iter().map(|&i| outcomes[i]).collect(),
            probs: source.iter().map(|&i| probs[i]).collect(),
            source,
        })
    }

    /// Uniform weights `1/K` on the given outcomes.
    pub fn equiprobable(outcomes: Vec<f64>) -> Result<Self> {
        let k = outcomes.len();
        if k == 0 {
            return Err(invalid("distribution has no atoms"));
        }
        Self::new(outcomes, vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Outcomes in nondecreasing order.
    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    /// Probabilities aligned with [`outcomes`](Self::outcomes).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Original index of each sorted atom.
    pub fn source_indices(&self) -> &[usize] {
        &self.source
    }

    pub fn mean(&self) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probs)
            .map(|(x, p)| x * p)
            .sum()
    }

    /// Cumulative probabilities `π_1 = 0, …, π_{K+1} = 1` (length `K + 1`).
    /// The last entry is pinned to exactly one.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut pi = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        pi.push(0.0);
        for p in &self.probs {
            acc += p;
            pi.push(acc);
        }
        *pi.last_mut().unwrap() = 1.0;
        pi
    }

    pub fn is_equiprobable(&self) -> bool {
        let target = 1.0 / self.len() as f64;
        self.probs.iter().all(|p| (p - target).abs() <= PROB_TOL)
    }

    /// Reorders a vector given in sorted-atom order back to input order.
    pub fn to_source_order(&self, sorted: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted.len()];
        for (pos, &src) in self.source.iter().enumerate() {
            out[src] = sorted[pos];
        }
        out
    }
}

/// Left-continuous quantile: returns `ξ_k` for `z ∈ (π_k, π_{k+1}]`.
pub fn quantile(dist: &DiscreteDistribution, z: f64) -> Result<f64> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(domain(format!("quantile level {z} outside (0, 1]")));
    }
    let mut acc = 0.0;
    for (x, p) in dist.outcomes.iter().zip(&dist.probs) {
        acc += p;
        if z <= acc && *p > 0.0 {
            return Ok(*x);
        }
    }
    // z rounds above the accumulated total: take the largest atom with mass.
    let last = dist
        .probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(dist.len() - 1);
    Ok(dist.outcomes[last])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarters() -> DiscreteDistribution {
        DiscreteDistribution::equiprobable(vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn quantile_is_left_continuous_at_breakpoints() {
        assert_eq!(quantile(&quarters(), 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&quarters(), 0.51).unwrap(), 3.0);
        assert_eq!(quantile(&quarters(), 1.0).unwrap(), 4.0);
        assert_eq!(quantile(&quarters(), 1e-9).unwrap(), 1.0);
    }

    #[test]
    fn quantile_of_degenerate_distribution() {
        let d = DiscreteDistribution::new(vec![5.0], vec![1.0]).unwrap();
        assert_eq!(quantile(&d, 0.3).unwrap(), 5.0);
    }

    #[test]
    fn quantile_rejects_levels_outside_unit_interval() {
        assert!(quantile(&quarters(), 0.0).is_err());
        assert!(quantile(&quarters(), 1.5).is_err());
        assert!(quantile(&quarters(), f64::NAN).is_err());
    }

    #[test]
    fn quantile_skips_zero_mass_atoms() {
        let d = DiscreteDistribution::new(vec![1.0, 2.0, 3.0], vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(quantile(&d, 0.5).unwrap(), 1.0);
        assert_eq!(quantile(&d, 0.6).unwrap(), 3.0);
    }

    #[test]
    fn canonicalization_is_stable_on_ties() {
        let d = DiscreteDistribution::new(vec![2.0, 1.0, 2.0, 0.0], vec![0.25; 4]).unwrap();
        assert_eq!(d.outcomes(), &[0.0, 1.0, 2.0, 2.0]);
        assert_eq!(d.source_indices(), &[3, 1, 0, 2]);
        assert_eq!(
            d.to_source_order(&[10.0, 11.0, 12.0, 13.0]),
            vec![12.0, 11.0, 13.0, 10.0]
        );
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0, 2.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(vec![], vec![]).is_err());
    }
}
