use super::{CutPool, DrCutPool, StateArchive};
use crate::dr::MomentAmbiguitySet;
use crate::error::{invalid, Error, Result};
use crate::lp::{dr_block, solve, LpModel, RowId, RowSense, Var};
use crate::risk::ArsrmWeights;
use crate::scenario::{ScenarioLattice, StageRealization};

/// A stage LP with handles to its decision columns and balance rows.
#[derive(Debug, Clone)]
pub struct StageLp {
    pub model: LpModel,
    pub x: Vec<Var>,
    pub balance: Vec<RowId>,
}

/// Optimal value, decision and balance-row duals of a stage LP.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
}

/// `min c x  s.t.  A x = b - E x_prev, x ≥ 0`.
fn base(x_prev: &[f64], real: &StageRealization) -> StageLp {
    let mut model = LpModel::new();
    let x: Vec<Var> = real
        .c
        .iter()
        .enumerate()
        .map(|(i, &c)| model.nonneg(c, format!("x[{i}]")))
        .collect();
    let rhs = real.rhs(x_prev);
    let balance = (0..real.rows())
        .map(|r| {
            let terms: Vec<(Var, f64)> = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| (xi, real.a[(r, i)]))
                .collect();
            model.add_row(terms, RowSense::Eq, rhs[r], format!("balance[{r}]"))
        })
        .collect();
    StageLp { model, x, balance }
}

/// Column bounded below by the best flat cut, with one row per sloped cut.
fn add_epigraph(model: &mut LpModel, x: &[Var], cuts: &[super::Cut], name: &str) -> Var {
    let floor = cuts
        .iter()
        .filter(|c| c.is_flat())
        .map(|c| c.g)
        .fold(f64::NEG_INFINITY, f64::max);
    let theta = model.add_var(0.0, floor, f64::INFINITY, name);
    for (n, c) in cuts.iter().enumerate().filter(|(_, c)| !c.is_flat()) {
        let mut row = vec![(theta, 1.0)];
        row.extend(x.iter().zip(&c.grad).map(|(&xi, &a)| (xi, -a)));
        model.add_row(row, RowSense::Ge, c.g, format!("{name}.cut[{n}]"));
    }
    theta
}

/// Convex-envelope column `v ≥ Σ_n θ_n V̄_n + M‖y‖₁` with
/// `Σ_n θ_n x̂_n + y = x[state]`, `Σ θ = 1`.
fn add_envelope(
    model: &mut LpModel,
    x: &[Var],
    state: &[usize],
    points: &[(&[f64], f64)],
    m: f64,
    name: &str,
) -> Var {
    let theta: Vec<Var> = (0..points.len())
        .map(|n| model.nonneg(0.0, format!("{name}.theta[{n}]")))
        .collect();
    let v = model.free(0.0, name);
    let mut value_row = vec![(v, 1.0)];
    value_row.extend(theta.iter().zip(points).map(|(&th, (_, val))| (th, -val)));
    for (c, &col) in state.iter().enumerate() {
        let up = model.nonneg(0.0, format!("{name}.y+[{c}]"));
        let dn = model.nonneg(0.0, format!("{name}.y-[{c}]"));
        value_row.push((up, -m));
        value_row.push((dn, -m));
        let mut row: Vec<(Var, f64)> = theta
            .iter()
            .zip(points)
            .map(|(&th, (p, _))| (th, p[c]))
            .collect();
        row.extend([(up, 1.0), (dn, -1.0), (x[col], -1.0)]);
        model.add_row(row, RowSense::Eq, 0.0, format!("{name}.state[{c}]"));
    }
    model.add_row(
        theta.iter().map(|&th| (th, 1.0)),
        RowSense::Eq,
        1.0,
        format!("{name}.convex"),
    );
    model.add_row(value_row, RowSense::Ge, 0.0, format!("{name}.value"));
    v
}

/// Stage `t` (0-based) subproblem of single-cut SDDP. The last stage has no
/// `θ` column and no cut rows.
pub fn stage_subproblem(
    lattice: &ScenarioLattice,
    t: usize,
    x_prev: &[f64],
    real: &StageRealization,
    pools: &CutPool,
) -> StageLp {
    let mut lp = base(x_prev, real);
    if t + 1 < lattice.horizon() {
        let theta = add_epigraph(&mut lp.model, &lp.x, pools.stage(t + 1), "theta");
        lp.model.add_cost(theta, 1.0);
    }
    lp
}

/// Robust stage subproblem: one epigraph column per next-stage scenario,
/// aggregated by the worst-case ARSRM dual.
pub fn dr_stage_subproblem(
    lattice: &ScenarioLattice,
    t: usize,
    x_prev: &[f64],
    real: &StageRealization,
    pools: &DrCutPool,
    next: Option<(&ArsrmWeights, &MomentAmbiguitySet)>,
) -> Result<StageLp> {
    let mut lp = base(x_prev, real);
    if t + 1 < lattice.horizon() {
        let (weights, amb) =
            next.ok_or_else(|| invalid("robust subproblem needs the next stage's ambiguity set"))?;
        let v: Vec<Var> = (0..lattice.scenario_count(t + 1))
            .map(|j| {
                add_epigraph(
                    &mut lp.model,
                    &lp.x,
                    pools.scenario(t + 1, j),
                    &format!("v[{j}]"),
                )
            })
            .collect();
        for (var, a) in dr_block(&mut lp.model, &v, &lattice.probs(t + 1), weights, amb, "") {
            lp.model.add_cost(var, a);
        }
    }
    Ok(lp)
}

/// Solves a stage LP; infeasibility breaks relatively complete recourse
/// and is reported with its stage (1-based) and scenario index.
pub fn solve_stage(lp: &StageLp, t: usize, scenario: usize) -> Result<StageSolution> {
    let s = solve(&lp.model)?;
    if !s.is_optimal() {
        return Err(Error::Recourse {
            stage: t + 1,
            scenario,
            status: s.status.as_str(),
        });
    }
    Ok(StageSolution {
        value: s.objective,
        x: lp.x.iter().map(|v| s.x[v.0]).collect(),
        duals: lp.balance.iter().map(|r| s.duals[r.0]).collect(),
    })
}

/// Upper value of stage `t` at `(x_prev, real)`: the stage LP with the
/// cost-to-go replaced by the penalized convex envelope of the archived
/// points of stage `t + 1`.
pub fn upper_value(
    lattice: &ScenarioLattice,
    t: usize,
    x_prev: &[f64],
    real: &StageRealization,
    archive: &StateArchive,
    m: f64,
) -> Result<f64> {
    let mut lp = base(x_prev, real);
    if t + 1 < lattice.horizon() {
        let pts = archive.stage(t + 1);
        if pts.is_empty() {
            return Err(invalid(format!("no archived states for stage {}", t + 2)));
        }
        let points: Vec<(&[f64], f64)> = pts.iter().map(|(s, v)| (s.as_slice(), v[0])).collect();
        let v = add_envelope(
            &mut lp.model,
            &lp.x,
            lattice.state_cols(t + 1),
            &points,
            m,
            "ub",
        );
        lp.model.add_cost(v, 1.0);
    }
    Ok(solve_stage(&lp, t, 0)?.value)
}

/// Robust upper value: per-scenario envelopes of stage `t + 1` combined by
/// the worst-case ARSRM dual.
#[allow(clippy::too_many_arguments)]
pub fn dr_upper_value(
    lattice: &ScenarioLattice,
    t: usize,
    x_prev: &[f64],
    real: &StageRealization,
    archive: &StateArchive,
    m: f64,
    next: Option<(&ArsrmWeights, &MomentAmbiguitySet)>,
) -> Result<f64> {
    let mut lp = base(x_prev, real);
    if t + 1 < lattice.horizon() {
        let (weights, amb) =
            next.ok_or_else(|| invalid("robust upper value needs the next stage's ambiguity set"))?;
        let pts = archive.stage(t + 1);
        if pts.is_empty() {
            return Err(invalid(format!("no archived states for stage {}", t + 2)));
        }
        let v: Vec<Var> = (0..lattice.scenario_count(t + 1))
            .map(|j| {
                let points: Vec<(&[f64], f64)> =
                    pts.iter().map(|(s, v)| (s.as_slice(), v[j])).collect();
                add_envelope(
                    &mut lp.model,
                    &lp.x,
                    lattice.state_cols(t + 1),
                    &points,
                    m,
                    &format!("ub[{j}]"),
                )
            })
            .collect();
        for (var, a) in dr_block(&mut lp.model, &v, &lattice.probs(t + 1), weights, amb, "") {
            lp.model.add_cost(var, a);
        }
    }
    Ok(solve_stage(&lp, t, 0)?.value)
}
