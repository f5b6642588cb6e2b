use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::risk::PROB_TOL;

/// One realization `ξ_t = (c, b, A, E)` of a stage: the stage LP is
/// `min c x  s.t.  A x = b - E x_prev, x ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRealization {
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Matrix,
    pub e: Matrix,
    pub prob: f64,
}

impl StageRealization {
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn vars(&self) -> usize {
        self.a.cols()
    }

    /// `b - E x_prev`.
    pub fn rhs(&self, x_prev: &[f64]) -> Vec<f64> {
        let ex = self.e.mul_vec(x_prev);
        self.b.iter().zip(ex).map(|(b, e)| b - e).collect()
    }
}

/// Stagewise-independent lattice; `stages[0]` is the deterministic first
/// stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLattice {
    stages: Vec<Vec<StageRealization>>,
    /// Per stage `t ≥ 1` (0-based), the columns of `x_{t-1}` touched by `E`.
    state_cols: Vec<Vec<usize>>,
}

impl ScenarioLattice {
    pub fn new(stages: Vec<Vec<StageRealization>>) -> Result<Self> {
        if stages.is_empty() {
            return Err(invalid("lattice has no stages"));
        }
        if stages[0].len() != 1 {
            return Err(invalid("first stage must have exactly one realization"));
        }
        let mut prev_vars = 0;
        for (t, stage) in stages.iter().enumerate() {
            if stage.is_empty() {
                return Err(invalid(format!("stage {} has no realizations", t + 1)));
            }
            let (m, n) = (stage[0].rows(), stage[0].vars());
            for r in stage {
                if r.rows() != m || r.vars() != n || r.c.len() != n || r.b.len() != m {
                    return Err(invalid(format!("stage {}: inconsistent dimensions", t + 1)));
                }
                if r.e.rows() != m || r.e.cols() != prev_vars {
                    return Err(invalid(format!(
                        "stage {}: E is {}x{}, expected {}x{}",
                        t + 1,
                        r.e.rows(),
                        r.e.cols(),
                        m,
                        prev_vars
                    )));
                }
                if r.prob.is_nan() || r.prob < 0.0 {
                    return Err(invalid(format!("stage {}: negative probability", t + 1)));
                }
            }
            let total: f64 = stage.iter().map(|r| r.prob).sum();
            if (total - 1.0).abs() > PROB_TOL * stage.len() as f64 {
                return Err(invalid(format!(
                    "stage {}: probabilities sum to {total}",
                    t + 1
                )));
            }
            prev_vars = n;
        }
        let state_cols = (0..stages.len())
            .map(|t| {
                if t == 0 {
                    return Vec::new();
                }
                let cols = stages[t][0].e.cols();
                (0..cols)
                    .filter(|&j| {
                        stages[t]
                            .iter()
                            .any(|r| (0..r.e.rows()).any(|i| r.e[(i, j)] != 0.0))
                    })
                    .collect()
            })
            .collect();
        Ok(ScenarioLattice { stages, state_cols })
    }

    /// Number of stages `T`.
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    /// Realizations of stage `t` (0-based).
    pub fn stage(&self, t: usize) -> &[StageRealization] {
        &self.stages[t]
    }

    pub fn stages(&self) -> &[Vec<StageRealization>] {
        &self.stages
    }

    pub fn scenario_count(&self, t: usize) -> usize {
        self.stages[t].len()
    }

    pub fn vars(&self, t: usize) -> usize {
        self.stages[t][0].vars()
    }

    pub fn probs(&self, t: usize) -> Vec<f64> {
        self.stages[t].iter().map(|r| r.prob).collect()
    }

    pub fn is_equiprobable(&self, t: usize) -> bool {
        let k = self.stages[t].len() as f64;
        self.stages[t]
            .iter()
            .all(|r| (r.prob - 1.0 / k).abs() <= 1e-15)
    }

    /// Columns of `x_{t-1}` that stage `t` (0-based, `t ≥ 1`) actually reads.
    /// Cuts and envelopes only depend on these coordinates.
    pub fn state_cols(&self, t: usize) -> &[usize] {
        &self.state_cols[t]
    }

    /// Number of leaves of the full scenario tree.
    pub fn tree_leaves(&self) -> usize {
        self.stages.iter().map(|s| s.len()).product()
    }
}
