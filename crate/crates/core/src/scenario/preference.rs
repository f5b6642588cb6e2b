use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{Purpose, RngStream};
use crate::error::{invalid, Result};
use crate::risk::{PreferenceDistribution, PreferencePoint, SpectrumRule};

/// Named single-point preferences. Labels follow the benchmark's
/// conventions; note that `StrongAverse` has the larger weight on the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    RiskNeutral,
    MildAverse,
    StrongAverse,
    Dirac { lambda: f64, alpha: f64 },
}

impl Preset {
    pub fn point(self) -> PreferencePoint {
        match self {
            Preset::RiskNeutral => PreferencePoint::new(1.0, 0.0),
            Preset::MildAverse => PreferencePoint::new(0.5, 0.8),
            Preset::StrongAverse => PreferencePoint::new(0.8, 0.8),
            Preset::Dirac { lambda, alpha } => PreferencePoint::new(lambda, alpha),
        }
    }
}

pub fn preset_preference(kind: Preset, rule: SpectrumRule) -> Result<PreferenceDistribution> {
    PreferenceDistribution::from_points(&[kind.point()], vec![1.0], rule)
}

/// Fraction of `samples` whose nearest center (Euclidean) is each center;
/// ties go to the lowest index.
pub fn voronoi_weights(centers: &[Vec<f64>], samples: &[Vec<f64>]) -> Vec<f64> {
    let mut counts = vec![0usize; centers.len()];
    for s in samples {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (l, c) in centers.iter().enumerate() {
            let d: f64 = c.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = l;
            }
        }
        counts[best] += 1;
    }
    counts
        .iter()
        .map(|&c| c as f64 / samples.len() as f64)
        .collect()
}

/// Draws `centers` support points and `samples` further points from
/// `Be(a, b)` in each coordinate of `(λ, α)`; each center's weight is the
/// share of samples in its Voronoi cell.
pub fn build_preference_voronoi(
    centers: usize,
    samples: usize,
    beta: (f64, f64),
    rule: SpectrumRule,
    rng: RngStream,
    index: u64,
) -> Result<PreferenceDistribution> {
    if centers == 0 || samples < centers {
        return Err(invalid(
            "need at least one center and no fewer samples than centers",
        ));
    }
    let dist = Beta::new(beta.0, beta.1).map_err(|e| invalid(format!("beta parameters: {e}")))?;
    let mut g = rng.rng(Purpose::Preference, index);
    let draw = |g: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        // α must stay below one; Beta draws hit 1.0 only through rounding.
        let lambda: f64 = dist.sample(g);
        let alpha: f64 = dist.sample(g);
        vec![lambda, alpha.min(1.0 - f64::EPSILON)]
    };
    let c: Vec<Vec<f64>> = (0..centers).map(|_| draw(&mut g)).collect();
    let s: Vec<Vec<f64>> = (0..samples).map(|_| draw(&mut g)).collect();
    let q = voronoi_weights(&c, &s);
    let points: Vec<PreferencePoint> = c.iter().map(|v| PreferencePoint::new(v[0], v[1])).collect();
    PreferenceDistribution::from_points(&points, q, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn presets_match_benchmark_settings() {
        assert_eq!(Preset::RiskNeutral.point(), PreferencePoint::new(1.0, 0.0));
        assert_eq!(Preset::MildAverse.point(), PreferencePoint::new(0.5, 0.8));
        assert_eq!(Preset::StrongAverse.point(), PreferencePoint::new(0.8, 0.8));
    }

    #[test]
    fn single_center_is_a_dirac() {
        let p =
            build_preference_voronoi(1, 50, (2.0, 2.0), SpectrumRule::Exact, RngStream::new(3), 0)
                .unwrap();
        assert_eq!(p.probs(), &[1.0]);
    }

    #[test]
    fn symmetric_centers_split_uniform_samples() {
        let centers = vec![vec![0.2], vec![0.8]];
        let n = 4000;
        let mut g = RngStream::new(5).rng(Purpose::Instance, 0);
        let samples: Vec<Vec<f64>> = (0..n).map(|_| vec![g.gen::<f64>()]).collect();
        let q = voronoi_weights(&centers, &samples);
        let se = (0.25 / n as f64).sqrt();
        assert!((q[0] - 0.5).abs() < 3.0 * se, "{q:?}");
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let q = voronoi_weights(&[vec![0.0], vec![1.0]], &[vec![0.5]]);
        assert_eq!(q, vec![1.0, 0.0]);
    }

    #[test]
    fn weights_sum_to_one() {
        for seed in 0..20 {
            let p = build_preference_voronoi(
                10,
                1000,
                (2.0, 2.0),
                SpectrumRule::Projected { cells: 10 },
                RngStream::new(seed),
                2,
            )
            .unwrap();
            let total: f64 = p.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
