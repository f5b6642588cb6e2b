use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scenario::ScenarioLattice;

/// Lower bounds `a_t(ξ_{t,j})` on the allocation model's stage values;
/// the values never exceed 0, so `|V_t| ≤ |a_t|`.
///
/// Wealth after stage `t` is at most `W_t = W_{t-1} · max_{j,r} ξ_{t,j,r}`
/// with `W_0 = 1`, and `a_t(ξ) = -W_{t-1} · max_r ξ_r + min_j a_{t+1}(ξ_j)`.
/// Entry `[t][j]` is stage `t` (0-based), scenario `j`.
pub fn asset_value_bounds(lattice: &ScenarioLattice) -> Vec<Vec<f64>> {
    let horizon = lattice.horizon();
    let assets = lattice.vars(0);
    let gross = |t: usize, j: usize| -> f64 {
        if t == 0 {
            1.0
        } else {
            // Budget row: eᵀx + f eᵀz - ξᵀx_prev = 0.
            lattice.stage(t)[j]
                .e
                .row(0)
                .iter()
                .take(assets)
                .map(|v| -v)
                .fold(0.0, f64::max)
        }
    };
    let mut wealth = vec![1.0; horizon];
    for t in 1..horizon {
        let m = (0..lattice.scenario_count(t))
            .map(|j| gross(t, j))
            .fold(0.0, f64::max);
        wealth[t] = wealth[t - 1] * m;
    }
    let mut out = vec![Vec::new(); horizon];
    let mut next_min = 0.0;
    for t in (0..horizon).rev() {
        let prev = if t == 0 { 1.0 } else { wealth[t - 1] };
        out[t] = (0..lattice.scenario_count(t))
            .map(|j| -prev * gross(t, j) + next_min)
            .collect();
        next_min = out[t].iter().cloned().fold(f64::INFINITY, f64::min);
    }
    out
}

/// `∫₀¹ Φ_t(z) dz` with `Φ_t` the larger absolute quantile of the bounds
/// `a_t ≤ V_t ≤ 0`; for stagewise data this is `E|a_t(ξ_t)|`.
pub fn phi_integrals(lattice: &ScenarioLattice) -> Vec<f64> {
    asset_value_bounds(lattice)
        .iter()
        .enumerate()
        .map(|(t, a)| {
            a.iter()
                .zip(lattice.probs(t))
                .map(|(v, p)| p * v.abs())
                .sum()
        })
        .collect()
}

/// How the per-stage Lipschitz moduli are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundMode {
    /// Largest modulus over the support (robust setting).
    Robust,
    /// Moduli weighted by `q[t]` (single preference distribution).
    Average { q: Vec<Vec<f64>> },
}

/// Per-stage bound on `|V_t - Ṽ_t|` when each spectrum is replaced by its
/// projection on a uniform grid of `cells` cells:
/// `Σ_{t' > t} L_{t'} β ∫Φ_{t'}` with `β = 1/cells`.
///
/// `lipschitz[t]` and `phi[t]` describe stage `t` (0-based); entry 0 is
/// unused because the first stage carries no risk measure.
pub fn step_spectrum_error_bound(
    lipschitz: &[Vec<f64>],
    cells: usize,
    phi: &[f64],
    mode: &BoundMode,
) -> Result<Vec<f64>> {
    if cells == 0 {
        return Err(invalid("the grid needs at least one cell"));
    }
    if lipschitz.len() != phi.len() {
        return Err(invalid(
            "need one Lipschitz list and one Φ integral per stage",
        ));
    }
    let horizon = phi.len();
    let beta = 1.0 / cells as f64;
    let factor = |t: usize| -> Result<f64> {
        let l = &lipschitz[t];
        match mode {
            BoundMode::Robust => Ok(l.iter().cloned().fold(0.0, f64::max)),
            BoundMode::Average { q } => {
                let q = q
                    .get(t)
                    .filter(|q| q.len() == l.len())
                    .ok_or_else(|| invalid(format!("stage {t}: weights do not match moduli")))?;
                Ok(l.iter()
                    .zip(q)
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(a, w)| a * w)
                    .sum())
            }
        }
    };
    let mut out = vec![0.0; horizon];
    let mut tail = 0.0;
    for t in (0..horizon).rev() {
        out[t] = tail;
        if t > 0 {
            tail += factor(t)? * beta * phi[t];
        }
    }
    Ok(out)
}
