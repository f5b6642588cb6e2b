use serde::{Deserialize, Serialize};

use super::{DiscreteDistribution, SPECTRUM_TOL};
use crate::error::{domain, invalid, Result};

/// Slack allowed when checking that levels are nondecreasing; cell averages
/// of a flat region may differ in the last bits.
const MONOTONE_TOL: f64 = 1e-12;

/// Piecewise-constant risk spectrum: `σ(z) = levels[j]` on
/// `[breakpoints[j], breakpoints[j+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpectrum {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl StepSpectrum {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        check_grid(&breakpoints)?;
        if levels.len() + 1 != breakpoints.len() {
            return Err(invalid(format!(
                "{} levels need {} breakpoints, got {}",
                levels.len(),
                levels.len() + 1,
                breakpoints.len()
            )));
        }
        check_levels(&levels)?;
        let total: f64 = levels
            .iter()
            .zip(breakpoints.windows(2))
            .map(|(s, w)| s * (w[1] - w[0]))
            .sum();
        check_normalized(total)?;
        Ok(StepSpectrum {
            breakpoints,
            levels,
        })
    }

    /// `σ ≡ 1`, the expectation.
    pub fn uniform() -> Self {
        StepSpectrum {
            breakpoints: vec![0.0, 1.0],
            levels: vec![1.0],
        }
    }

    /// `σ = λ·1[0,1) + (1-λ)/(1-α)·1[α,1)`, the spectrum of `λE + (1-λ)CVaR_α`.
    pub fn mean_cvar(lambda: f64, alpha: f64) -> Result<Self> {
        check_point(lambda, alpha)?;
        if alpha == 0.0 || lambda == 1.0 {
            return Ok(Self::uniform());
        }
        Self::new(
            vec![0.0, alpha, 1.0],
            vec![lambda, lambda + (1.0 - lambda) / (1.0 - alpha)],
        )
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Number of interior breakpoints.
    pub fn interior_breakpoints(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn eval(&self, z: f64) -> f64 {
        let j = self.breakpoints[1..].partition_point(|&b| b <= z);
        self.levels[j.min(self.levels.len() - 1)]
    }

    /// Exact `∫_a^b σ(z) dz` for `0 ≤ a ≤ b ≤ 1`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for (s, w) in self.levels.iter().zip(self.breakpoints.windows(2)) {
            let lo = a.max(w[0]);
            let hi = b.min(w[1]);
            if hi > lo {
                acc += s * (hi - lo);
            }
        }
        acc
    }
}

/// Continuous, piecewise-linear risk spectrum interpolating `values` at
/// `knots`. Lipschitz with modulus equal to the steepest slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearSpectrum {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearSpectrum {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&knots)?;
        if values.len() != knots.len() {
            return Err(invalid(
                "piecewise-linear spectrum needs one value per knot",
            ));
        }
        check_levels(&values)?;
        let total: f64 = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| 0.5 * (v[0] + v[1]) * (k[1] - k[0]))
            .sum();
        check_normalized(total)?;
        Ok(PiecewiseLinearSpectrum { knots, values })
    }

    /// `σ(z) = 1 + κ(z - 1/2)` with `κ ∈ [0, 2]`.
    pub fn tilted(kappa: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&kappa) {
            return Err(domain(format!("tilt {kappa} outside [0, 2]")));
        }
        Self::new(vec![0.0, 1.0], vec![1.0 - 0.5 * kappa, 1.0 + 0.5 * kappa])
    }

    /// Smoothed `CVaR_α`: zero up to `α - w`, then a linear ramp of width
    /// `2w` to a plateau, normalized to integrate to one.
    pub fn ramp(alpha: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && alpha - width >= 0.0 && alpha + width < 1.0) {
            return Err(domain(format!(
                "ramp at {alpha} with half-width {width} does not fit in [0, 1)"
            )));
        }
        let h = 1.0 / (1.0 - alpha);
        Self::new(
            vec![0.0, alpha - width, alpha + width, 1.0],
            vec![0.0, 0.0, h, h],
        )
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, 1.0);
        let i = self.knots[1..]
            .partition_point(|&k| k < z)
            .min(self.knots.len() - 2);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let t = (z - k0) / (k1 - k0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    pub fn lipschitz(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]).abs() / (k[1] - k[0]))
            .fold(0.0, f64::max)
    }

    /// Exact `∫_a^b σ(z) dz` by the trapezoid rule on each linear piece.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let mut acc = 0.0;
        for k in self.knots.windows(2) {
            let lo = a.max(k[0]);
            let hi = b.min(k[1]);
            if hi > lo {
                acc += 0.5 * (self.eval(lo) + self.eval(hi)) * (hi - lo);
            }
        }
        acc
    }
}

/// A risk spectrum: nonnegative, nondecreasing, integrating to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    Step(StepSpectrum),
    PiecewiseLinear(PiecewiseLinearSpectrum),
}

impl Spectrum {
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        match self {
            Spectrum::Step(s) => s.mass(a, b),
            Spectrum::PiecewiseLinear(s) => s.mass(a, b),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Spectrum::Step(s) => s.eval(z),
            Spectrum::PiecewiseLinear(s) => s.eval(z),
        }
    }

    /// Lipschitz modulus; infinite for step spectra with a jump.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Spectrum::Step(s) if s.levels.iter().all(|&l| l == s.levels[0]) => 0.0,
            Spectrum::Step(_) => f64::INFINITY,
            Spectrum::PiecewiseLinear(s) => s.lipschitz(),
        }
    }
}

impl From<StepSpectrum> for Spectrum {
    fn from(s: StepSpectrum) -> Self {
        Spectrum::Step(s)
    }
}

impl From<PiecewiseLinearSpectrum> for Spectrum {
    fn from(s: PiecewiseLinearSpectrum) -> Self {
        Spectrum::PiecewiseLinear(s)
    }
}

/// Spectral risk measure `Σ_k ξ_k ∫_{π_k}^{π_{k+1}} σ(z) dz`.
pub fn srm(dist: &DiscreteDistribution, spectrum: &Spectrum) -> f64 {
    let pi = dist.cumulative();
    dist.outcomes()
        .iter()
        .zip(pi.windows(2))
        .map(|(x, w)| x * spectrum.mass(w[0], w[1]))
        .sum()
}

/// Projects a spectrum onto step functions over the uniform grid with `cells`
/// cells of width `1/cells`, taking each level to be the cell average.
///
/// Cell averages keep the total mass and lie between the spectrum's values
/// at the two cell ends, which is what a projection must satisfy.
pub fn project_onto_grid(spectrum: &Spectrum, cells: usize) -> Result<StepSpectrum> {
    if cells == 0 {
        return Err(domain("projection grid needs at least one cell"));
    }
    let n = cells as f64;
    let breakpoints: Vec<f64> = (0..=cells).map(|j| j as f64 / n).collect();
    let levels: Vec<f64> = breakpoints
        .windows(2)
        .map(|w| spectrum.mass(w[0], w[1]) * n)
        .collect();
    StepSpectrum::new(breakpoints, levels)
}

/// Step approximation of the `λE + (1-λ)CVaR_α` spectrum on the grid
/// `{0, 1/J, …, 1}`: level `λ` before the cell holding `α`, the top level
/// after it, and a mass-preserving level on that cell.
pub fn project_spectrum(lambda: f64, alpha: f64, cells: usize) -> Result<StepSpectrum> {
    let exact = Spectrum::Step(StepSpectrum::mean_cvar(lambda, alpha)?);
    project_onto_grid(&exact, cells)
}

fn check_point(lambda: f64, alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(domain(format!("λ = {lambda} outside [0, 1]")));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain(format!("α = {alpha} outside [0, 1)")));
    }
    Ok(())
}

fn check_grid(points: &[f64]) -> Result<()> {
    if points.len() < 2 || points[0] != 0.0 || *points.last().unwrap() != 1.0 {
        return Err(invalid("breakpoints must run from 0 to 1"));
    }
    if points.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
        return Err(invalid("breakpoints must be strictly increasing"));
    }
    Ok(())
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.iter().any(|&l| !l.is_finite() || l < 0.0) {
        return Err(invalid("spectrum levels must be finite and nonnegative"));
    }
    if levels
        .windows(2)
        .any(|w| w[1] < w[0] - MONOTONE_TOL * w[0].max(1.0))
    {
        return Err(invalid("spectrum levels must be nondecreasing"));
    }
    Ok(())
}

fn check_normalized(total: f64) -> Result<()> {
    if (total - 1.0).abs() > SPECTRUM_TOL {
        return Err(invalid(format!("spectrum integrates to {total}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::cvar;
    use approx::assert_abs_diff_eq;

    fn quarters() -> DiscreteDistribution {
        DiscreteDistribution::equiprobable(vec![1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn uniform_spectrum_gives_the_mean() {
        let d = DiscreteDistribution::new(vec![3.0, -1.0, 7.0], vec![0.2, 0.5, 0.3]).unwrap();
        assert_abs_diff_eq!(
            srm(&d, &StepSpectrum::uniform().into()),
            d.mean(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn indicator_spectrum_gives_cvar() {
        let s = StepSpectrum::mean_cvar(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(srm(&quarters(), &s.into()), 3.5, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_distribution_returns_its_atom() {
        let d = DiscreteDistribution::new(vec![-2.5], vec![1.0]).unwrap();
        let s = StepSpectrum::new(vec![0.0, 0.3, 1.0], vec![0.5, 1.0 / 0.7 * 0.85]).unwrap();
        assert_abs_diff_eq!(srm(&d, &s.into()), -2.5, epsilon = 1e-12);
    }

    #[test]
    fn rejects_malformed_spectra() {
        assert!(StepSpectrum::new(vec![0.0, 0.5, 1.0], vec![1.5, 0.5]).is_err());
        assert!(StepSpectrum::new(vec![0.0, 0.5, 1.0], vec![1.0, 1.1]).is_err());
        assert!(StepSpectrum::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(StepSpectrum::new(vec![0.1, 1.0], vec![1.0]).is_err());
        assert!(StepSpectrum::mean_cvar(0.5, 1.0).is_err());
        assert!(StepSpectrum::mean_cvar(1.5, 0.5).is_err());
    }

    #[test]
    fn mass_over_partial_cells() {
        let s = StepSpectrum::mean_cvar(0.5, 0.8).unwrap();
        // levels 0.5 on [0, 0.8) and 3.0 on [0.8, 1)
        assert_abs_diff_eq!(s.mass(0.7, 0.9), 0.05 + 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mass(0.0, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.eval(0.8), 3.0, epsilon = 1e-12);
        assert_eq!(s.eval(0.79), 0.5);
    }

    #[test]
    fn projection_with_lambda_one_is_uniform() {
        for j in 1..12 {
            let p = project_spectrum(1.0, 0.37, j).unwrap();
            assert!(p.levels().iter().all(|&l| (l - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn projection_is_exact_when_alpha_is_on_the_grid() {
        let d = DiscreteDistribution::new(
            vec![4.0, 1.0, 3.0, 2.0, 0.5],
            vec![0.1, 0.3, 0.2, 0.15, 0.25],
        )
        .unwrap();
        for (lambda, i, j) in [(0.0, 3, 10), (0.3, 1, 2), (0.8, 4, 5)] {
            let alpha = i as f64 / j as f64;
            let projected = srm(&d, &project_spectrum(lambda, alpha, j).unwrap().into());
            let direct = lambda * d.mean() + (1.0 - lambda) * cvar(&d, alpha).unwrap();
            assert_abs_diff_eq!(projected, direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn projection_transition_level_preserves_mass() {
        let p = project_spectrum(0.2, 0.55, 10).unwrap();
        let top = 0.2 + 0.8 / 0.45;
        assert_abs_diff_eq!(p.levels()[4], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(p.levels()[6], top, epsilon = 1e-12);
        // Half the cell [0.5, 0.6) sits below α.
        assert_abs_diff_eq!(p.levels()[5], 0.5 * 0.2 + 0.5 * top, epsilon = 1e-12);
    }

    #[test]
    fn projection_error_for_off_grid_cvar() {
        // |srm(σ̃) - CVaR| ≤ max|σ̃ - σ| mass times max|ξ|, a crude but sound check.
        let d = quarters();
        let p = project_spectrum(0.0, 0.55, 10).unwrap();
        let err = (srm(&d, &p.into()) - cvar(&d, 0.55).unwrap()).abs();
        assert!(err <= 0.1 / 0.45 * 4.0);
    }

    #[test]
    fn piecewise_linear_mass_and_modulus() {
        let s = PiecewiseLinearSpectrum::tilted(1.0).unwrap();
        assert_abs_diff_eq!(s.mass(0.0, 0.5), 0.5 * (0.5 + 1.0) * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.lipschitz(), 1.0);
        let r = PiecewiseLinearSpectrum::ramp(0.6, 0.1).unwrap();
        assert_abs_diff_eq!(r.mass(0.0, 1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.lipschitz(), 2.5 / 0.2, epsilon = 1e-9);
    }

    #[test]
    fn grid_projection_is_pointwise_close_for_lipschitz_spectra() {
        let s: Spectrum = PiecewiseLinearSpectrum::ramp(0.55, 0.2).unwrap().into();
        for j in [2, 5, 10, 40] {
            let p = project_onto_grid(&s, j).unwrap();
            for i in 0..1000 {
                let z = i as f64 / 1000.0;
                assert!((p.eval(z) - s.eval(z)).abs() <= s.lipschitz() / j as f64 + 1e-12);
            }
        }
    }
}
