use super::{dr_block, marsrm_block, solve, LpModel, LpStatus, RowSense, Var};
use crate::dr::MomentAmbiguitySet;
use crate::error::{invalid, Error, Result};
use crate::risk::{ArsrmWeights, PreferenceDistribution};
use crate::scenario::ScenarioLattice;

/// Default cap on the number of LP columns of an extensive form.
pub const DEFAULT_SIZE_LIMIT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    pub size_limit: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            size_limit: DEFAULT_SIZE_LIMIT,
        }
    }
}

/// Risk functional applied to the children of each tree node; entry `t-1`
/// aggregates stage `t` (0-based).
enum StageRisk<'a> {
    Marsrm(Vec<(Vec<f64>, Vec<f64>)>),
    Dr(Vec<(ArsrmWeights, &'a MomentAmbiguitySet)>),
}

enum Parent<'a> {
    Root,
    Vars(&'a [Var]),
    Fixed(&'a [f64]),
}

struct Tree<'a> {
    lattice: &'a ScenarioLattice,
    risk: StageRisk<'a>,
    model: LpModel,
}

impl Tree<'_> {
    fn aggregate(&mut self, t: usize, v: &[Var], tag: &str) -> Vec<(Var, f64)> {
        let p = self.lattice.probs(t);
        match &self.risk {
            StageRisk::Marsrm(w) => {
                let (w, alpha) = &w[t - 1];
                marsrm_block(&mut self.model, v, &p, w, alpha, tag)
            }
            StageRisk::Dr(w) => {
                let (weights, amb) = &w[t - 1];
                dr_block(&mut self.model, v, &p, weights, amb, tag)
            }
        }
    }

    /// Node for realization `j` of stage `t`; returns its value column.
    fn node(&mut self, t: usize, j: usize, parent: Parent<'_>, tag: &str) -> Var {
        let real = &self.lattice.stage(t)[j];
        let x: Vec<Var> = (0..real.vars())
            .map(|i| self.model.nonneg(0.0, format!("{tag}x[{i}]")))
            .collect();
        for r in 0..real.rows() {
            let mut terms: Vec<(Var, f64)> = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| (xi, real.a[(r, i)]))
                .collect();
            let mut rhs = real.b[r];
            match parent {
                Parent::Root => {}
                Parent::Vars(px) => {
                    terms.extend(px.iter().enumerate().map(|(i, &pi)| (pi, real.e[(r, i)])))
                }
                Parent::Fixed(px) => {
                    rhs -= px
                        .iter()
                        .enumerate()
                        .map(|(i, pi)| real.e[(r, i)] * pi)
                        .sum::<f64>()
                }
            }
            self.model
                .add_row(terms, RowSense::Eq, rhs, format!("{tag}bal[{r}]"));
        }
        let mut value_terms: Vec<(Var, f64)> =
            x.iter().zip(&real.c).map(|(&xi, &c)| (xi, c)).collect();
        if t + 1 < self.lattice.horizon() {
            let children = self.children(t + 1, &x, tag);
            value_terms.extend(self.aggregate(t + 1, &children, tag));
        }
        let v = self.model.free(0.0, format!("{tag}v"));
        let mut row = vec![(v, 1.0)];
        row.extend(value_terms.into_iter().map(|(x, a)| (x, -a)));
        self.model
            .add_row(row, RowSense::Eq, 0.0, format!("{tag}value"));
        v
    }

    fn children(&mut self, t: usize, x: &[Var], tag: &str) -> Vec<Var> {
        (0..self.lattice.scenario_count(t))
            .map(|j| self.node(t, j, Parent::Vars(x), &format!("{tag}{j}.")))
            .collect()
    }
}

fn estimate_vars(lattice: &ScenarioLattice, from: usize, extra_per_node: usize) -> usize {
    let mut nodes = 1usize;
    let mut total = 0usize;
    for t in from..lattice.horizon() {
        let k = lattice.scenario_count(t);
        nodes = nodes.saturating_mul(k);
        let mut per = lattice.vars(t) + 1;
        if t + 1 < lattice.horizon() {
            let kn = lattice.scenario_count(t + 1);
            per += kn * (kn + 1) + extra_per_node;
        }
        total = total.saturating_add(nodes.saturating_mul(per));
    }
    total
}

fn solve_tree(tree: Tree<'_>, objective: Vec<(Var, f64)>, limit: usize) -> Result<f64> {
    let mut model = tree.model;
    if model.num_vars() > limit {
        return Err(Error::SizeGuard {
            vars: model.num_vars(),
            limit,
        });
    }
    for (v, a) in objective {
        model.add_cost(v, a);
    }
    let sol = solve(&model)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        s => Err(invalid(format!("extensive form is {}", s.as_str()))),
    }
}

fn marsrm_risk<'a>(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
) -> Result<StageRisk<'a>> {
    check_len(lattice, prefs.len())?;
    let w = prefs
        .iter()
        .enumerate()
        .map(|(s, pref)| {
            let w = ArsrmWeights::for_probabilities(&lattice.probs(s + 1), pref)?;
            Ok((w.combined(pref.probs()), w.alpha_levels))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StageRisk::Marsrm(w))
}

fn dr_risk<'a>(lattice: &ScenarioLattice, ambs: &'a [MomentAmbiguitySet]) -> Result<StageRisk<'a>> {
    check_len(lattice, ambs.len())?;
    let w = ambs
        .iter()
        .enumerate()
        .map(|(s, amb)| Ok((amb.arsrm_weights(&lattice.probs(s + 1))?, amb)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StageRisk::Dr(w))
}

fn check_len(lattice: &ScenarioLattice, n: usize) -> Result<()> {
    if n + 1 != lattice.horizon() {
        return Err(invalid(format!(
            "need {} per-stage risk specifications, got {n}",
            lattice.horizon() - 1
        )));
    }
    Ok(())
}

fn root_value(
    lattice: &ScenarioLattice,
    risk: StageRisk<'_>,
    extra: usize,
    opts: OracleOptions,
) -> Result<f64> {
    let est = estimate_vars(lattice, 0, extra);
    if est > opts.size_limit {
        return Err(Error::SizeGuard {
            vars: est,
            limit: opts.size_limit,
        });
    }
    let mut tree = Tree {
        lattice,
        risk,
        model: LpModel::new(),
    };
    let v = tree.node(0, 0, Parent::Root, "");
    solve_tree(tree, vec![(v, 1.0)], opts.size_limit)
}

fn subtree_value(
    lattice: &ScenarioLattice,
    risk: StageRisk<'_>,
    t: usize,
    x_prev: &[f64],
    extra: usize,
    opts: OracleOptions,
) -> Result<f64> {
    if t == 0 || t >= lattice.horizon() {
        return Err(invalid(format!(
            "cost-to-go stage {t} outside 1..{}",
            lattice.horizon()
        )));
    }
    let est = estimate_vars(lattice, t, extra);
    if est > opts.size_limit {
        return Err(Error::SizeGuard {
            vars: est,
            limit: opts.size_limit,
        });
    }
    let mut tree = Tree {
        lattice,
        risk,
        model: LpModel::new(),
    };
    let children: Vec<Var> = (0..lattice.scenario_count(t))
        .map(|j| tree.node(t, j, Parent::Fixed(x_prev), &format!("{j}.")))
        .collect();
    let obj = tree.aggregate(t, &children, "");
    solve_tree(tree, obj, opts.size_limit)
}

/// Exact optimal value of the nested MARSRM problem as one LP over the
/// full scenario tree. `prefs[t-1]` is the preference for stage `t`
/// (0-based, so `prefs` has `T - 1` entries).
pub fn extensive_form_marsrm(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
) -> Result<f64> {
    extensive_form_marsrm_with(lattice, prefs, OracleOptions::default())
}

pub fn extensive_form_marsrm_with(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
    opts: OracleOptions,
) -> Result<f64> {
    root_value(lattice, marsrm_risk(lattice, prefs)?, 0, opts)
}

/// Exact robust value with the worst-case preference dualized at every
/// node.
pub fn extensive_form_dr(lattice: &ScenarioLattice, ambs: &[MomentAmbiguitySet]) -> Result<f64> {
    extensive_form_dr_with(lattice, ambs, OracleOptions::default())
}

pub fn extensive_form_dr_with(
    lattice: &ScenarioLattice,
    ambs: &[MomentAmbiguitySet],
    opts: OracleOptions,
) -> Result<f64> {
    let extra = ambs
        .iter()
        .map(|a| a.moment_system().1.len())
        .max()
        .unwrap_or(0);
    root_value(lattice, dr_risk(lattice, ambs)?, extra, opts)
}

/// Exact MARSRM cost-to-go `ρ_t[V_t(x_prev, ξ_t)]` for `t ≥ 1` (0-based).
pub fn cost_to_go_marsrm(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
    t: usize,
    x_prev: &[f64],
) -> Result<f64> {
    subtree_value(
        lattice,
        marsrm_risk(lattice, prefs)?,
        t,
        x_prev,
        0,
        OracleOptions::default(),
    )
}

/// Exact robust cost-to-go at stage `t ≥ 1` (0-based).
pub fn cost_to_go_dr(
    lattice: &ScenarioLattice,
    ambs: &[MomentAmbiguitySet],
    t: usize,
    x_prev: &[f64],
) -> Result<f64> {
    let extra = ambs
        .iter()
        .map(|a| a.moment_system().1.len())
        .max()
        .unwrap_or(0);
    subtree_value(
        lattice,
        dr_risk(lattice, ambs)?,
        t,
        x_prev,
        extra,
        OracleOptions::default(),
    )
}

/// Exact value of one stage-`t` scenario subtree, `V_t(x_prev, ξ_{t,j})`.
pub fn scenario_value_marsrm(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
    t: usize,
    j: usize,
    x_prev: &[f64],
) -> Result<f64> {
    let mut tree = Tree {
        lattice,
        risk: marsrm_risk(lattice, prefs)?,
        model: LpModel::new(),
    };
    let v = tree.node(t, j, Parent::Fixed(x_prev), "");
    solve_tree(tree, vec![(v, 1.0)], DEFAULT_SIZE_LIMIT)
}

/// Exact robust value of one stage-`t` scenario subtree.
pub fn scenario_value_dr(
    lattice: &ScenarioLattice,
    ambs: &[MomentAmbiguitySet],
    t: usize,
    j: usize,
    x_prev: &[f64],
) -> Result<f64> {
    let mut tree = Tree {
        lattice,
        risk: dr_risk(lattice, ambs)?,
        model: LpModel::new(),
    };
    let v = tree.node(t, j, Parent::Fixed(x_prev), "");
    solve_tree(tree, vec![(v, 1.0)], DEFAULT_SIZE_LIMIT)
}
