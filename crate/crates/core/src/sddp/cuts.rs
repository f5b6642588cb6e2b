use serde::{Deserialize, Serialize};

/// Affine minorant `θ ≥ g + G·x` of a cost-to-go function of `x_{t-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub g: f64,
    pub grad: Vec<f64>,
    /// Iteration that produced the cut (0 for initial cuts).
    pub iteration: usize,
    /// Forward path index within the iteration.
    pub path: usize,
}

impl Cut {
    pub fn initial(dim: usize, big: f64) -> Self {
        Cut {
            g: -big,
            grad: vec![0.0; dim],
            iteration: 0,
            path: 0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.g + self.grad.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn is_flat(&self) -> bool {
        self.grad.iter().all(|&a| a == 0.0)
    }

    pub fn grad_inf_norm(&self) -> f64 {
        self.grad.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Single-cut pools: `stages[t]` approximates the risk-adjusted cost-to-go
/// of stage `t` (0-based) as a function of `x_{t-1}`; `stages[0]` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPool {
    pub stages: Vec<Vec<Cut>>,
}

impl CutPool {
    /// One initial cut `(g, G) = (-big, 0)` per stage `t ≥ 1`; `dims[t]` is
    /// the dimension of `x_t`.
    pub fn new(dims: &[usize], big: f64) -> Self {
        let stages = (0..dims.len())
            .map(|t| {
                if t == 0 {
                    Vec::new()
                } else {
                    vec![Cut::initial(dims[t - 1], big)]
                }
            })
            .collect();
        CutPool { stages }
    }

    pub fn stage(&self, t: usize) -> &[Cut] {
        &self.stages[t]
    }

    /// Value of the polyhedral model of stage `t` at `x`.
    pub fn eval(&self, t: usize, x: &[f64]) -> f64 {
        self.stages[t]
            .iter()
            .map(|c| c.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.stages.iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_grad(&self, t: usize) -> f64 {
        self.stages[t]
            .iter()
            .map(|c| c.grad_inf_norm())
            .fold(0.0, f64::max)
    }
}

/// Multi-cut pools: `stages[t][j]` approximates the value of scenario `j`
/// of stage `t` as a function of `x_{t-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrCutPool {
    pub stages: Vec<Vec<Vec<Cut>>>,
}

impl DrCutPool {
    /// `counts[t]` scenarios per stage, `dims[t]` columns of `x_t`.
    pub fn new(counts: &[usize], dims: &[usize], big: f64) -> Self {
        let stages = (0..dims.len())
            .map(|t| {
                if t == 0 {
                    Vec::new()
                } else {
                    (0..counts[t])
                        .map(|_| vec![Cut::initial(dims[t - 1], big)])
                        .collect()
                }
            })
            .collect();
        DrCutPool { stages }
    }

    pub fn scenario(&self, t: usize, j: usize) -> &[Cut] {
        &self.stages[t][j]
    }

    pub fn eval(&self, t: usize, j: usize, x: &[f64]) -> f64 {
        self.stages[t][j]
            .iter()
            .map(|c| c.eval(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn len(&self) -> usize {
        self.stages.iter().flatten().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_grad(&self, t: usize) -> f64 {
        self.stages[t]
            .iter()
            .flatten()
            .map(|c| c.grad_inf_norm())
            .fold(0.0, f64::max)
    }
}

/// A cut for one scenario's value function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrCut {
    pub scenario: usize,
    pub cut: Cut,
}

/// Visited states and their upper values: `stages[t]` holds pairs
/// `(x̂_{t-1} restricted to the state columns, V̄)`, where `V̄` has one entry
/// for the aggregated cost-to-go or one per scenario in the robust variant.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StateArchive {
    pub stages: Vec<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl StateArchive {
    pub fn new(horizon: usize) -> Self {
        StateArchive {
            stages: vec![Vec::new(); horizon],
        }
    }

    pub fn stage(&self, t: usize) -> &[(Vec<f64>, Vec<f64>)] {
        &self.stages[t]
    }

    pub fn push(&mut self, t: usize, state: Vec<f64>, values: Vec<f64>) {
        self.stages[t].push((state, values));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pools_start_with_flat_cuts() {
        let p = CutPool::new(&[2, 3, 4], 1e9);
        assert!(p.stage(0).is_empty());
        assert_eq!(p.stage(1)[0].grad.len(), 2);
        assert_eq!(p.stage(2)[0].grad.len(), 3);
        assert_eq!(p.eval(2, &[1.0, 2.0, 3.0]), -1e9);
        let d = DrCutPool::new(&[1, 3, 2], &[2, 3, 4], 5.0);
        assert_eq!(d.stages[1].len(), 3);
        assert_eq!(d.eval(2, 1, &[0.0; 3]), -5.0);
    }

    #[test]
    fn cut_evaluation() {
        let c = Cut {
            g: 1.0,
            grad: vec![2.0, -1.0],
            iteration: 3,
            path: 0,
        };
        assert_eq!(c.eval(&[1.0, 4.0]), -1.0);
        assert_eq!(c.grad_inf_norm(), 2.0);
        assert!(!c.is_flat());
    }
}
