use super::DiscreteDistribution;
use crate::error::{domain, Result};

/// Slack used when locating the pivot atom, so that levels like `3/10`
/// are not pushed past an atom by cumulative rounding.
const PIVOT_TOL: f64 = 1e-12;

/// Maximizer of the CVaR dual `sup { Σ p_k λ_k Z_k : λ ∈ Λ_α }`.
///
/// Weights are stored in sorted-atom order of the distribution they were
/// computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct CvarDualWeights {
    pub lambda_hat: Vec<f64>,
    /// 0-based index of the pivot atom; the 1-based `k̂` is this plus one.
    pub pivot: usize,
}

impl CvarDualWeights {
    /// 1-based pivot index.
    pub fn khat(&self) -> usize {
        self.pivot + 1
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(domain(format!("CVaR level {alpha} outside [0, 1)")));
    }
    Ok(())
}

/// Dual weights: zero below the pivot, `1/(1-α)` above it, and the pivot
/// absorbs whatever keeps `Σ p λ̂ = 1`.
pub fn cvar_dual_weights(dist: &DiscreteDistribution, alpha: f64) -> Result<CvarDualWeights> {
    check_alpha(alpha)?;
    let probs = dist.probs();
    let k = probs.len();
    let cap = 1.0 / (1.0 - alpha);

    let mut pivot = k - 1;
    if 1.0 - probs[k - 1] > alpha {
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if acc > alpha + PIVOT_TOL {
                pivot = i;
                break;
            }
        }
    }

    let tail: f64 = probs[pivot + 1..].iter().sum();
    let mut lambda_hat = vec![0.0; k];
    for l in &mut lambda_hat[pivot + 1..] {
        *l = cap;
    }
    lambda_hat[pivot] = ((1.0 - cap * tail) / probs[pivot]).clamp(0.0, cap);
    Ok(CvarDualWeights { lambda_hat, pivot })
}

/// `CVaR_α` via the dual weights.
pub fn cvar(dist: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    let w = cvar_dual_weights(dist, alpha)?;
    Ok(dist
        .outcomes()
        .iter()
        .zip(dist.probs())
        .zip(&w.lambda_hat)
        .map(|((z, p), l)| z * p * l)
        .sum())
}

/// `CVaR_α = min_η { η + E[(Z-η)_+] / (1-α) }`, minimized over the atoms
/// (the minimum is attained at `VaR_α`, which is an atom).
pub fn cvar_variational(dist: &DiscreteDistribution, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let scale = 1.0 / (1.0 - alpha);
    let objective = |eta: f64| {
        eta + scale
            * dist
                .outcomes()
                .iter()
                .zip(dist.probs())
                .map(|(z, p)| p * (z - eta).max(0.0))
                .sum::<f64>()
    };
    Ok(dist
        .outcomes()
        .iter()
        .map(|&eta| objective(eta))
        .fold(f64::INFINITY, f64::min))
}
