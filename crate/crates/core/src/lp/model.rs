use serde::{Deserialize, Serialize};

/// Column handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Var(pub usize);

/// Row handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
    pub name: String,
}

/// Sparse LP `min cᵀx + offset` built column by column and row by row.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
    pub offset: f64,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64, name: impl Into<String>) -> Var {
        self.vars.push(Variable {
            cost,
            lower,
            upper,
            name: name.into(),
        });
        Var(self.vars.len() - 1)
    }

    /// `x ≥ 0` with the given cost.
    pub fn nonneg(&mut self, cost: f64, name: impl Into<String>) -> Var {
        self.add_var(cost, 0.0, f64::INFINITY, name)
    }

    pub fn free(&mut self, cost: f64, name: impl Into<String>) -> Var {
        self.add_var(cost, f64::NEG_INFINITY, f64::INFINITY, name)
    }

    pub fn add_cost(&mut self, v: Var, cost: f64) {
        self.vars[v.0].cost += cost;
    }

    pub fn set_bounds(&mut self, v: Var, lower: f64, upper: f64) {
        self.vars[v.0].lower = lower;
        self.vars[v.0].upper = upper;
    }

    /// Adds `Σ coef·x sense rhs`. Repeated columns are summed; exact zeros
    /// are dropped.
    pub fn add_row(
        &mut self,
        terms: impl IntoIterator<Item = (Var, f64)>,
        sense: RowSense,
        rhs: f64,
        name: impl Into<String>,
    ) -> RowId {
        let mut coefs: Vec<(usize, f64)> = Vec::new();
        for (v, a) in terms {
            if a == 0.0 {
                continue;
            }
            match coefs.iter_mut().find(|(j, _)| *j == v.0) {
                Some(entry) => entry.1 += a,
                None => coefs.push((v.0, a)),
            }
        }
        self.rows.push(Constraint {
            coefs,
            sense,
            rhs,
            name: name.into(),
        });
        RowId(self.rows.len() - 1)
    }

    /// Objective value of `x` including the offset.
    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.offset
            + self
                .vars
                .iter()
                .zip(x)
                .map(|(v, xi)| v.cost * xi)
                .sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, xi) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
        }
        for r in &self.rows {
            let act: f64 = r.coefs.iter().map(|(j, a)| a * x[*j]).sum();
            let viol = match r.sense {
                RowSense::Eq => (act - r.rhs).abs(),
                RowSense::Le => act - r.rhs,
                RowSense::Ge => r.rhs - act,
            };
            worst = worst.max(viol);
        }
        worst
    }
}
