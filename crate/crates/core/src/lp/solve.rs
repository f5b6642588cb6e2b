use highs::{ColProblem, HighsModelStatus, Model, Sense};

use super::{LpModel, RowSense};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        }
    }
}

/// Primal-dual solution. `x`, `duals` and `activity` are empty unless the
/// status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub activity: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn without_point(status: LpStatus) -> Self {
        let objective = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        LpSolution {
            status,
            objective,
            x: Vec::new(),
            duals: Vec::new(),
            activity: Vec::new(),
        }
    }
}

fn build(model: &LpModel, presolve: bool) -> Model {
    let mut pb = ColProblem::default();
    let rows: Vec<_> = model
        .rows
        .iter()
        .map(|r| match r.sense {
            RowSense::Eq => pb.add_row(r.rhs..=r.rhs),
            RowSense::Le => pb.add_row(..=r.rhs),
            RowSense::Ge => pb.add_row(r.rhs..),
        })
        .collect();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (i, r) in model.rows.iter().enumerate() {
        for &(j, a) in &r.coefs {
            by_col[j].push((i, a));
        }
    }
    for (v, col) in model.vars.iter().zip(by_col) {
        let entries = col.into_iter().map(|(i, a)| (rows[i], a));
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => pb.add_column(v.cost, v.lower..=v.upper, entries),
            (true, false) => pb.add_column(v.cost, v.lower.., entries),
            (false, true) => pb.add_column(v.cost, ..=v.upper, entries),
            (false, false) => pb.add_column::<f64, _, _, _>(v.cost, .., entries),
        }
    }
    let mut m = pb.optimise(Sense::Minimise);
    m.make_quiet();
    m.set_option("threads", 1);
    m.set_option("primal_feasibility_tolerance", 1e-9);
    m.set_option("dual_feasibility_tolerance", 1e-9);
    if !presolve {
        m.set_option("presolve", "off");
    }
    m
}

/// Solves `model` to optimality with HiGHS' dual simplex.
///
/// Infeasible and unbounded models are reported through the status; only
/// backend failures become errors.
pub fn solve(model: &LpModel) -> Result<LpSolution> {
    if model.vars.is_empty() {
        return Ok(solve_empty(model));
    }
    for attempt in 0..2 {
        let solved = build(model, attempt == 0)
            .try_solve()
            .map_err(|s| Error::Backend(format!("HiGHS run failed: {s:?}")))?;
        let status = match solved.status() {
            HighsModelStatus::Optimal => LpStatus::Optimal,
            HighsModelStatus::Infeasible => LpStatus::Infeasible,
            HighsModelStatus::Unbounded => LpStatus::Unbounded,
            // Presolve cannot always tell the two apart; resolve without it.
            HighsModelStatus::UnboundedOrInfeasible if attempt == 0 => continue,
            HighsModelStatus::UnboundedOrInfeasible => LpStatus::Infeasible,
            other => return Err(Error::Backend(format!("HiGHS returned status {other:?}"))),
        };
        if status != LpStatus::Optimal {
            return Ok(LpSolution::without_point(status));
        }
        let sol = solved.get_solution();
        return Ok(LpSolution {
            status,
            objective: solved.objective_value() + model.offset,
            x: sol.columns().to_vec(),
            duals: sol.dual_rows().to_vec(),
            activity: sol.rows().to_vec(),
        });
    }
    unreachable!("second attempt always returns")
}

fn solve_empty(model: &LpModel) -> LpSolution {
    let feasible = model.rows.iter().all(|r| match r.sense {
        RowSense::Eq => r.rhs == 0.0,
        RowSense::Le => r.rhs >= 0.0,
        RowSense::Ge => r.rhs <= 0.0,
    });
    if !feasible {
        return LpSolution::without_point(LpStatus::Infeasible);
    }
    LpSolution {
        status: LpStatus::Optimal,
        objective: model.offset,
        x: Vec::new(),
        duals: vec![0.0; model.rows.len()],
        activity: vec![0.0; model.rows.len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equality_dual_is_the_rhs_sensitivity() {
        let mut m = LpModel::new();
        let x = m.nonneg(1.0, "x");
        m.add_row([(x, 1.0)], RowSense::Eq, 3.0, "fix");
        let s = solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.duals[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bounded_maximization_by_negation() {
        let mut m = LpModel::new();
        let x = m.nonneg(-1.0, "x");
        m.add_row([(x, 1.0)], RowSense::Le, 2.0, "cap");
        let s = solve(&m).unwrap();
        assert_abs_diff_eq!(s.objective, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.duals[0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn redundant_equalities_are_fine() {
        let mut m = LpModel::new();
        let x = m.nonneg(1.0, "x");
        let y = m.nonneg(2.0, "y");
        m.add_row([(x, 1.0), (y, 1.0)], RowSense::Eq, 4.0, "a");
        m.add_row([(x, 2.0), (y, 2.0)], RowSense::Eq, 8.0, "b");
        m.add_row([(x, 1.0), (y, -1.0)], RowSense::Eq, 0.0, "c");
        let s = solve(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 6.0, epsilon = 1e-9);
        assert!(m.max_violation(&s.x) < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded_are_statuses() {
        let mut m = LpModel::new();
        let x = m.nonneg(1.0, "x");
        m.add_row([(x, 1.0)], RowSense::Le, -1.0, "neg");
        assert_eq!(solve(&m).unwrap().status, LpStatus::Infeasible);

        let mut m = LpModel::new();
        let x = m.free(1.0, "x");
        m.add_row([(x, 1.0)], RowSense::Le, 1.0, "cap");
        assert_eq!(solve(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn duals_predict_rhs_perturbations() {
        // min 2x + 3y + z  s.t. x + y + z = 5, x - y = 1, y + 2z >= 2
        let build = |d: [f64; 3]| {
            let mut m = LpModel::new();
            let x = m.nonneg(2.0, "x");
            let y = m.nonneg(3.0, "y");
            let z = m.nonneg(1.0, "z");
            m.add_row(
                [(x, 1.0), (y, 1.0), (z, 1.0)],
                RowSense::Eq,
                5.0 + d[0],
                "a",
            );
            m.add_row([(x, 1.0), (y, -1.0)], RowSense::Eq, 1.0 + d[1], "b");
            m.add_row([(y, 1.0), (z, 2.0)], RowSense::Ge, 2.0 + d[2], "c");
            m
        };
        let base = solve(&build([0.0; 3])).unwrap();
        let delta = 1e-4;
        for i in 0..3 {
            let mut d = [0.0; 3];
            d[i] = delta;
            let moved = solve(&build(d)).unwrap();
            assert_abs_diff_eq!(
                moved.objective - base.objective,
                delta * base.duals[i],
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn empty_model_returns_offset() {
        let mut m = LpModel::new();
        m.offset = 2.5;
        assert_abs_diff_eq!(solve(&m).unwrap().objective, 2.5);
    }
}
