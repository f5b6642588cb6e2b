use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Purpose, RngStream, ScenarioLattice, StageRealization};
use crate::error::{invalid, Result};
use crate::linalg::{cholesky_psd, Matrix};

/// `ξ_r = exp(φ_r)` with `φ ~ N(mu, diag(sigma)·corr·diag(sigma))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub corr: Matrix,
}

impl LognormalParams {
    pub fn assets(&self) -> usize {
        self.mu.len()
    }

    fn check(&self) -> Result<()> {
        let r = self.mu.len();
        if r == 0 || self.sigma.len() != r || self.corr.rows() != r || self.corr.cols() != r {
            return Err(invalid("lognormal parameters have inconsistent sizes"));
        }
        if self.sigma.iter().any(|&s| s.is_nan() || s < 0.0) {
            return Err(invalid("volatilities must be nonnegative"));
        }
        if !self.corr.is_symmetric(1e-12) || (0..r).any(|i| (self.corr[(i, i)] - 1.0).abs() > 1e-12)
        {
            return Err(invalid("correlation must be symmetric with unit diagonal"));
        }
        Ok(())
    }

    /// Lower factor `L` with `L Lᵀ` equal to the log-return covariance.
    pub fn covariance_factor(&self) -> Result<Matrix> {
        self.check()?;
        let r = self.assets();
        cholesky_psd(&self.corr, 1e-10)?;
        let mut cov = Matrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                cov[(i, j)] = self.sigma[i] * self.sigma[j] * self.corr[(i, j)];
            }
        }
        cholesky_psd(&cov, 1e-10)
    }
}

/// Gross-return vectors for stages `2..=T`: entry `[t-2][k]` is the `k`-th
/// realization of stage `t`.
pub fn sample_lognormal_returns(
    params: &LognormalParams,
    k: &[usize],
    rng: RngStream,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let l = params.covariance_factor()?;
    let r = params.assets();
    let mut out = Vec::with_capacity(k.len());
    for (s, &count) in k.iter().enumerate() {
        if count == 0 {
            return Err(invalid(format!("stage {} has zero scenarios", s + 2)));
        }
        let mut g = rng.rng(Purpose::Lattice, (s + 2) as u64);
        let stage = (0..count)
            .map(|_| {
                let n: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut g)).collect();
                let phi = l.mul_vec(&n);
                phi.iter()
                    .zip(&params.mu)
                    .map(|(p, m)| (m + p).exp())
                    .collect()
            })
            .collect();
        out.push(stage);
    }
    Ok(out)
}

/// First stage of the allocation model: `min -eᵀx  s.t.  eᵀx = 1, x ≥ 0`.
pub fn asset_first_stage(assets: usize) -> StageRealization {
    StageRealization {
        c: vec![-1.0; assets],
        b: vec![1.0],
        a: Matrix::from_rows(&[vec![1.0; assets]]).unwrap(),
        e: Matrix::zeros(1, 0),
        prob: 1.0,
    }
}

/// Rebalancing stage with variables `(x, z, s⁺, s⁻)`:
///
/// ```text
///  eᵀx + f eᵀz        = ξᵀ x_prev
///   x  -  z  + s⁺     =    x_prev
///  -x  -  z       + s⁻ =  - x_prev
/// ```
///
/// The previous holdings occupy the first `returns.len()` of `prev_vars`
/// columns.
pub fn asset_realization(returns: &[f64], f: f64, prev_vars: usize, prob: f64) -> StageRealization {
    let r = returns.len();
    let n = 4 * r;
    let m = 1 + 2 * r;
    let mut a = Matrix::zeros(m, n);
    let mut e = Matrix::zeros(m, prev_vars);
    for i in 0..r {
        a[(0, i)] = 1.0;
        a[(0, r + i)] = f;
        e[(0, i)] = -returns[i];

        a[(1 + i, i)] = 1.0;
        a[(1 + i, r + i)] = -1.0;
        a[(1 + i, 2 * r + i)] = 1.0;
        e[(1 + i, i)] = -1.0;

        a[(1 + r + i, i)] = -1.0;
        a[(1 + r + i, r + i)] = -1.0;
        a[(1 + r + i, 3 * r + i)] = 1.0;
        e[(1 + r + i, i)] = 1.0;
    }
    let mut c = vec![0.0; n];
    c[..r].iter_mut().for_each(|v| *v = -1.0);
    StageRealization {
        c,
        b: vec![0.0; m],
        a,
        e,
        prob,
    }
}

/// Lattice for the allocation model with lognormal returns; `k` and
/// `transaction_cost` list stages `2..=T`.
pub fn build_lognormal_lattice(
    horizon: usize,
    params: &LognormalParams,
    k: &[usize],
    transaction_cost: &[f64],
    rng: RngStream,
) -> Result<ScenarioLattice> {
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if k.len() != horizon - 1 || transaction_cost.len() != horizon - 1 {
        return Err(invalid(format!(
            "need {} per-stage scenario counts and transaction costs",
            horizon - 1
        )));
    }
    if transaction_cost.iter().any(|f| !(0.0..1.0).contains(f)) {
        return Err(invalid("transaction costs must lie in [0, 1)"));
    }
    let r = params.assets();
    let returns = sample_lognormal_returns(params, k, rng)?;
    let mut stages = vec![vec![asset_first_stage(r)]];
    for (s, stage_returns) in returns.iter().enumerate() {
        let prev_vars = if s == 0 { r } else { 4 * r };
        let prob = 1.0 / stage_returns.len() as f64;
        stages.push(
            stage_returns
                .iter()
                .map(|xi| asset_realization(xi, transaction_cost[s], prev_vars, prob))
                .collect(),
        );
    }
    ScenarioLattice::new(stages)
}
