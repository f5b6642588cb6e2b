use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stage::{
    dr_stage_subproblem, dr_upper_value, solve_stage, stage_subproblem, upper_value, StageSolution,
};
use super::{Cut, CutPool, DrCut, DrCutPool, ReportRow, StateArchive, TrainReport};
use crate::dr::MomentAmbiguitySet;
use crate::error::{invalid, Result};
use crate::par::Execution;
use crate::risk::{
    cvar, cvar_dual_weights, ArsrmWeights, DiscreteDistribution, PreferenceDistribution,
};
use crate::scenario::{Purpose, RngStream, ScenarioLattice};

/// How forward paths are chosen each iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `paths` scenario paths drawn uniformly with replacement.
    #[default]
    Sample,
    /// Every path of the scenario tree.
    Enumerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOptions {
    /// Forward paths per iteration (`N`).
    pub paths: usize,
    pub max_iters: usize,
    /// Stop once `upper - lower ≤ tol`.
    pub tol: f64,
    /// Initial cuts sit at `-big`.
    pub big: f64,
    /// Envelope penalty is `max(m_floor, m_factor · max ‖G‖∞)` over the
    /// cuts of the next stage unless `m_fixed` gives it per stage.
    pub m_floor: f64,
    pub m_factor: f64,
    pub m_fixed: Option<Vec<f64>>,
    pub seed: u64,
    pub sampling: Sampling,
    pub execution: Execution,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            paths: 1,
            max_iters: 100,
            tol: 1e-6,
            big: 1e9,
            m_floor: 1.0,
            m_factor: 10.0,
            m_fixed: None,
            seed: 0,
            sampling: Sampling::Sample,
            execution: Execution::default(),
        }
    }
}

/// CVaR-combination weights of one stage: `w_k = Σ_l q_l β_{l,k}` at
/// levels `α_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageWeights {
    pub w: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl StageWeights {
    pub fn new(probs: &[f64], pref: &PreferenceDistribution) -> Result<Self> {
        let a = ArsrmWeights::for_probabilities(probs, pref)?;
        Ok(StageWeights {
            w: a.combined(pref.probs()),
            alpha: a.alpha_levels,
        })
    }
}

/// `Σ_k w_k CVaR_{α_k}` of the scenario values.
pub fn upper_aggregate(values: &[f64], probs: &[f64], weights: &StageWeights) -> Result<f64> {
    let dist = DiscreteDistribution::new(values.to_vec(), probs.to_vec())?;
    let mut acc = 0.0;
    for (&w, &a) in weights.w.iter().zip(&weights.alpha) {
        if w > 0.0 {
            acc += w * cvar(&dist, a)?;
        }
    }
    Ok(acc)
}

/// Per-scenario multipliers `π_j = Σ_k w_k p_j λ̂_{k,j}` attaining the
/// CVaR combination at `values`.
pub fn risk_multipliers(values: &[f64], probs: &[f64], weights: &StageWeights) -> Result<Vec<f64>> {
    let dist = DiscreteDistribution::new(values.to_vec(), probs.to_vec())?;
    let mut pi = vec![0.0; values.len()];
    for (&w, &a) in weights.w.iter().zip(&weights.alpha) {
        if w <= 0.0 {
            continue;
        }
        let lam = dist.to_source_order(&cvar_dual_weights(&dist, a)?.lambda_hat);
        for j in 0..values.len() {
            pi[j] += w * probs[j] * lam[j];
        }
    }
    Ok(pi)
}

/// Draws `n` paths; entry `t` of a path is the realization index of stage
/// `t` (0 for the first stage).
pub fn sample_paths<R: Rng>(lattice: &ScenarioLattice, n: usize, rng: &mut R) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            (0..lattice.horizon())
                .map(|t| {
                    if t == 0 {
                        0
                    } else {
                        rng.gen_range(0..lattice.scenario_count(t))
                    }
                })
                .collect()
        })
        .collect()
}

/// All paths of the scenario tree, in lexicographic order.
pub fn enumerate_paths(lattice: &ScenarioLattice) -> Result<Vec<Vec<usize>>> {
    let leaves = lattice.tree_leaves();
    if leaves > 1_000_000 {
        return Err(invalid(format!(
            "{leaves} tree paths are too many to enumerate"
        )));
    }
    let mut paths = vec![vec![0usize]];
    for t in 1..lattice.horizon() {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                (0..lattice.scenario_count(t)).map(move |j| {
                    let mut q = p.clone();
                    q.push(j);
                    q
                })
            })
            .collect();
    }
    Ok(paths)
}

/// States visited by the forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    /// Stage-1 value with the pools as they were at the start of the pass.
    pub lower: f64,
    /// `states[n][t]` is `x̂_t` along path `n`.
    pub states: Vec<Vec<Vec<f64>>>,
}

impl Trajectories {
    /// Distinct `x̂_t` over all paths, in first-seen order.
    pub fn unique_states(&self, t: usize) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for path in &self.states {
            if !out.iter().any(|s| s == &path[t]) {
                out.push(path[t].clone());
            }
        }
        out
    }
}

/// The pieces that differ between the single-cut and the robust method.
trait Method: Sync {
    type Pool: Sync;

    fn lattice(&self) -> &ScenarioLattice;

    fn solve(&self, t: usize, x_prev: &[f64], j: usize, pool: &Self::Pool)
        -> Result<StageSolution>;

    /// Cuts for stage `t` from the scenario solutions at `state`.
    fn cuts(
        &self,
        t: usize,
        state: &[f64],
        sols: &[StageSolution],
        iteration: usize,
        path: usize,
    ) -> Result<Vec<(usize, Cut)>>;

    fn append(&self, pool: &mut Self::Pool, t: usize, cuts: Vec<(usize, Cut)>);

    fn upper(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        archive: &StateArchive,
        m: f64,
    ) -> Result<f64>;

    /// Archive record from the scenario upper values at a state.
    fn record(&self, t: usize, values: Vec<f64>) -> Result<Vec<f64>>;

    fn max_grad(&self, pool: &Self::Pool, t: usize) -> f64;
}

fn forward<M: Method>(
    method: &M,
    pool: &M::Pool,
    paths: &[Vec<usize>],
    exec: Execution,
) -> Result<Trajectories> {
    let first = method.solve(0, &[], 0, pool)?;
    let states = exec.map(paths, |path| -> Result<Vec<Vec<f64>>> {
        let mut traj = vec![first.x.clone()];
        for t in 1..method.lattice().horizon() {
            let s = method.solve(t, &traj[t - 1], path[t], pool)?;
            traj.push(s.x);
        }
        Ok(traj)
    });
    Ok(Trajectories {
        lower: first.value,
        states: states.into_iter().collect::<Result<_>>()?,
    })
}

fn backward<M: Method>(
    method: &M,
    pool: &mut M::Pool,
    traj: &Trajectories,
    iteration: usize,
    exec: Execution,
) -> Result<()> {
    let lattice = method.lattice();
    for t in (1..lattice.horizon()).rev() {
        let states = traj.unique_states(t - 1);
        let k = lattice.scenario_count(t);
        let pool_ref: &M::Pool = pool;
        let sols = exec.map_range(states.len() * k, |i| {
            method.solve(t, &states[i / k], i % k, pool_ref)
        });
        let sols = sols.into_iter().collect::<Result<Vec<_>>>()?;
        let mut cuts = Vec::new();
        for (n, state) in states.iter().enumerate() {
            cuts.extend(method.cuts(t, state, &sols[n * k..(n + 1) * k], iteration, n)?);
        }
        method.append(pool, t, cuts);
    }
    Ok(())
}

fn penalty<M: Method>(method: &M, pool: &M::Pool, opts: &TrainOptions, t: usize) -> f64 {
    if let Some(m) = &opts.m_fixed {
        return m[t.min(m.len() - 1)];
    }
    if t + 1 >= method.lattice().horizon() {
        return 0.0;
    }
    opts.m_floor
        .max(opts.m_factor * method.max_grad(pool, t + 1))
}

fn push_dedup(archive: &mut StateArchive, t: usize, state: Vec<f64>, values: Vec<f64>) {
    if let Some((_, old)) = archive.stages[t].iter_mut().find(|(s, _)| *s == state) {
        for (o, v) in old.iter_mut().zip(values) {
            *o = o.min(v);
        }
    } else {
        archive.push(t, state, values);
    }
}

fn upper_sweep<M: Method>(
    method: &M,
    pool: &M::Pool,
    archive: &mut StateArchive,
    traj: &Trajectories,
    opts: &TrainOptions,
) -> Result<f64> {
    let lattice = method.lattice();
    for t in (1..lattice.horizon()).rev() {
        let m = penalty(method, pool, opts, t);
        let states = traj.unique_states(t - 1);
        let k = lattice.scenario_count(t);
        let arch: &StateArchive = archive;
        let vals = opts.execution.map_range(states.len() * k, |i| {
            method.upper(t, &states[i / k], i % k, arch, m)
        });
        let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
        let cols = lattice.state_cols(t);
        for (n, state) in states.iter().enumerate() {
            let rec = method.record(t, vals[n * k..(n + 1) * k].to_vec())?;
            push_dedup(archive, t, cols.iter().map(|&c| state[c]).collect(), rec);
        }
    }
    method.upper(0, &[], 0, archive, penalty(method, pool, opts, 0))
}

/// Result of a training run together with the learned approximations.
#[derive(Debug, Clone)]
pub struct Trained<P> {
    pub report: TrainReport,
    pub pools: P,
    pub archive: StateArchive,
    pub first_stage: Vec<f64>,
}

fn run<M: Method>(method: &M, mut pool: M::Pool, opts: &TrainOptions) -> Result<Trained<M::Pool>> {
    let lattice = method.lattice();
    if opts.paths == 0 && opts.sampling == Sampling::Sample {
        return Err(invalid("need at least one forward path"));
    }
    let enumerated = match opts.sampling {
        Sampling::Enumerate => Some(enumerate_paths(lattice)?),
        Sampling::Sample => None,
    };
    let per_iter = enumerated.as_ref().map_or(opts.paths, |p| p.len());
    let rng = RngStream::new(opts.seed);
    let mut archive = StateArchive::new(lattice.horizon());
    let mut report = TrainReport::default();
    let (mut t_lower, mut t_upper) = (0.0, 0.0);
    let (mut best_lower, mut best_upper) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut first_stage = Vec::new();

    for it in 1..=opts.max_iters {
        let clock = Instant::now();
        let paths = match &enumerated {
            Some(p) => p.clone(),
            None => sample_paths(
                lattice,
                opts.paths,
                &mut rng.rng(Purpose::Forward, it as u64),
            ),
        };
        let traj = forward(method, &pool, &paths, opts.execution)?;
        backward(method, &mut pool, &traj, it, opts.execution)?;
        let first = method.solve(0, &[], 0, &pool)?;
        t_lower += clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let raw_upper = if lattice.horizon() == 1 {
            first.value
        } else {
            upper_sweep(method, &pool, &mut archive, &traj, opts)?
        };
        t_upper += clock.elapsed().as_secs_f64();

        best_lower = best_lower.max(first.value);
        best_upper = best_upper.min(raw_upper);
        first_stage = first.x;
        let gap = best_upper - best_lower;
        report.rows.push(ReportRow {
            iteration: it,
            cuts: it * per_iter,
            lower: best_lower,
            upper: best_upper,
            gap,
            raw_lower: first.value,
            raw_upper,
            time_lower_s: t_lower,
            time_upper_s: t_upper,
        });
        if best_lower.abs() > 1.0 {
            log::debug!("iteration {it}: lower {best_lower:.6} upper {best_upper:.6} gap {gap:.3e} (rel {:.3e})", gap / best_lower.abs());
        } else {
            log::debug!(
                "iteration {it}: lower {best_lower:.6} upper {best_upper:.6} gap {gap:.3e}"
            );
        }
        if gap <= opts.tol {
            report.converged = true;
            break;
        }
    }
    Ok(Trained {
        report,
        pools: pool,
        archive,
        first_stage,
    })
}

fn check_stages(lattice: &ScenarioLattice, n: usize) -> Result<()> {
    if n + 1 != lattice.horizon() {
        return Err(invalid(format!(
            "need {} per-stage risk specifications, got {n}",
            lattice.horizon() - 1
        )));
    }
    Ok(())
}

fn dims(lattice: &ScenarioLattice) -> Vec<usize> {
    (0..lattice.horizon()).map(|t| lattice.vars(t)).collect()
}

/// Single-cut SDDP for the nested MARSRM problem.
pub struct Marsrm<'a> {
    lattice: &'a ScenarioLattice,
    weights: Vec<StageWeights>,
}

impl<'a> Marsrm<'a> {
    /// `prefs[t-1]` is the preference of stage `t` (0-based).
    pub fn new(lattice: &'a ScenarioLattice, prefs: &[PreferenceDistribution]) -> Result<Self> {
        check_stages(lattice, prefs.len())?;
        let weights = prefs
            .iter()
            .enumerate()
            .map(|(s, p)| StageWeights::new(&lattice.probs(s + 1), p))
            .collect::<Result<_>>()?;
        Ok(Marsrm { lattice, weights })
    }

    pub fn weights(&self, t: usize) -> &StageWeights {
        &self.weights[t - 1]
    }

    pub fn new_pool(&self, big: f64) -> CutPool {
        CutPool::new(&dims(self.lattice), big)
    }

    pub fn solve_stage(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        pools: &CutPool,
    ) -> Result<StageSolution> {
        Method::solve(self, t, x_prev, j, pools)
    }

    /// Forward pass along `paths`.
    pub fn forward_pass(
        &self,
        pools: &CutPool,
        paths: &[Vec<usize>],
        exec: Execution,
    ) -> Result<Trajectories> {
        forward(self, pools, paths, exec)
    }

    /// Appends one aggregated cut per distinct visited state and stage.
    pub fn backward_pass(
        &self,
        pools: &mut CutPool,
        traj: &Trajectories,
        iteration: usize,
        exec: Execution,
    ) -> Result<()> {
        backward(self, pools, traj, iteration, exec)
    }

    pub fn train(&self, opts: &TrainOptions) -> Result<Trained<CutPool>> {
        run(self, self.new_pool(opts.big), opts)
    }
}

impl Method for Marsrm<'_> {
    type Pool = CutPool;

    fn lattice(&self) -> &ScenarioLattice {
        self.lattice
    }

    fn solve(&self, t: usize, x_prev: &[f64], j: usize, pool: &CutPool) -> Result<StageSolution> {
        let lp = stage_subproblem(self.lattice, t, x_prev, &self.lattice.stage(t)[j], pool);
        solve_stage(&lp, t, j)
    }

    fn cuts(
        &self,
        t: usize,
        state: &[f64],
        sols: &[StageSolution],
        iteration: usize,
        path: usize,
    ) -> Result<Vec<(usize, Cut)>> {
        let values: Vec<f64> = sols.iter().map(|s| s.value).collect();
        let pi = risk_multipliers(&values, &self.lattice.probs(t), &self.weights[t - 1])?;
        let mut grad = vec![0.0; state.len()];
        let mut g = 0.0;
        for ((s, real), &w) in sols.iter().zip(self.lattice.stage(t)).zip(&pi) {
            if w == 0.0 {
                continue;
            }
            // ∂V_j/∂x_prev = -E_jᵀ τ_j
            for (gi, e) in grad.iter_mut().zip(real.e.tr_mul_vec(&s.duals)) {
                *gi -= w * e;
            }
            g += w * s.value;
        }
        g -= grad.iter().zip(state).map(|(a, b)| a * b).sum::<f64>();
        Ok(vec![(
            0,
            Cut {
                g,
                grad,
                iteration,
                path,
            },
        )])
    }

    fn append(&self, pool: &mut CutPool, t: usize, cuts: Vec<(usize, Cut)>) {
        pool.stages[t].extend(cuts.into_iter().map(|(_, c)| c));
    }

    fn upper(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        archive: &StateArchive,
        m: f64,
    ) -> Result<f64> {
        upper_value(
            self.lattice,
            t,
            x_prev,
            &self.lattice.stage(t)[j],
            archive,
            m,
        )
    }

    fn record(&self, t: usize, values: Vec<f64>) -> Result<Vec<f64>> {
        Ok(vec![upper_aggregate(
            &values,
            &self.lattice.probs(t),
            &self.weights[t - 1],
        )?])
    }

    fn max_grad(&self, pool: &CutPool, t: usize) -> f64 {
        pool.max_grad(t)
    }
}

/// Multi-cut SDDP for the distributionally robust problem.
pub struct DrMarsrm<'a> {
    lattice: &'a ScenarioLattice,
    ambs: &'a [MomentAmbiguitySet],
    weights: Vec<ArsrmWeights>,
}

impl<'a> DrMarsrm<'a> {
    /// `ambs[t-1]` is the ambiguity set of stage `t` (0-based).
    pub fn new(lattice: &'a ScenarioLattice, ambs: &'a [MomentAmbiguitySet]) -> Result<Self> {
        check_stages(lattice, ambs.len())?;
        let weights = ambs
            .iter()
            .enumerate()
            .map(|(s, a)| a.arsrm_weights(&lattice.probs(s + 1)))
            .collect::<Result<_>>()?;
        Ok(DrMarsrm {
            lattice,
            ambs,
            weights,
        })
    }

    fn next(&self, t: usize) -> Option<(&ArsrmWeights, &MomentAmbiguitySet)> {
        (t + 1 < self.lattice.horizon()).then(|| (&self.weights[t], &self.ambs[t]))
    }

    pub fn new_pool(&self, big: f64) -> DrCutPool {
        let counts: Vec<usize> = (0..self.lattice.horizon())
            .map(|t| self.lattice.scenario_count(t))
            .collect();
        DrCutPool::new(&counts, &dims(self.lattice), big)
    }

    pub fn solve_stage(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        pools: &DrCutPool,
    ) -> Result<StageSolution> {
        Method::solve(self, t, x_prev, j, pools)
    }

    pub fn forward_pass(
        &self,
        pools: &DrCutPool,
        paths: &[Vec<usize>],
        exec: Execution,
    ) -> Result<Trajectories> {
        forward(self, pools, paths, exec)
    }

    /// One cut per scenario of stage `t` at the state `x_hat`.
    pub fn backward_step(
        &self,
        t: usize,
        x_hat: &[f64],
        pools: &DrCutPool,
        exec: Execution,
    ) -> Result<Vec<DrCut>> {
        let sols = exec.map_range(self.lattice.scenario_count(t), |j| {
            Method::solve(self, t, x_hat, j, pools)
        });
        let sols = sols.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(self
            .cuts(t, x_hat, &sols, 0, 0)?
            .into_iter()
            .map(|(scenario, cut)| DrCut { scenario, cut })
            .collect())
    }

    pub fn backward_pass(
        &self,
        pools: &mut DrCutPool,
        traj: &Trajectories,
        iteration: usize,
        exec: Execution,
    ) -> Result<()> {
        backward(self, pools, traj, iteration, exec)
    }

    pub fn upper_value(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        archive: &StateArchive,
        m: f64,
    ) -> Result<f64> {
        Method::upper(self, t, x_prev, j, archive, m)
    }

    pub fn train(&self, opts: &TrainOptions) -> Result<Trained<DrCutPool>> {
        run(self, self.new_pool(opts.big), opts)
    }
}

impl Method for DrMarsrm<'_> {
    type Pool = DrCutPool;

    fn lattice(&self) -> &ScenarioLattice {
        self.lattice
    }

    fn solve(&self, t: usize, x_prev: &[f64], j: usize, pool: &DrCutPool) -> Result<StageSolution> {
        let lp = dr_stage_subproblem(
            self.lattice,
            t,
            x_prev,
            &self.lattice.stage(t)[j],
            pool,
            self.next(t),
        )?;
        solve_stage(&lp, t, j)
    }

    fn cuts(
        &self,
        t: usize,
        state: &[f64],
        sols: &[StageSolution],
        iteration: usize,
        path: usize,
    ) -> Result<Vec<(usize, Cut)>> {
        Ok(sols
            .iter()
            .zip(self.lattice.stage(t))
            .enumerate()
            .map(|(j, (s, real))| {
                let grad: Vec<f64> = real
                    .e
                    .tr_mul_vec(&s.duals)
                    .into_iter()
                    .map(|e| -e)
                    .collect();
                let g = s.value - grad.iter().zip(state).map(|(a, b)| a * b).sum::<f64>();
                (
                    j,
                    Cut {
                        g,
                        grad,
                        iteration,
                        path,
                    },
                )
            })
            .collect())
    }

    fn append(&self, pool: &mut DrCutPool, t: usize, cuts: Vec<(usize, Cut)>) {
        for (j, c) in cuts {
            pool.stages[t][j].push(c);
        }
    }

    fn upper(
        &self,
        t: usize,
        x_prev: &[f64],
        j: usize,
        archive: &StateArchive,
        m: f64,
    ) -> Result<f64> {
        dr_upper_value(
            self.lattice,
            t,
            x_prev,
            &self.lattice.stage(t)[j],
            archive,
            m,
            self.next(t),
        )
    }

    fn record(&self, _t: usize, values: Vec<f64>) -> Result<Vec<f64>> {
        Ok(values)
    }

    fn max_grad(&self, pool: &DrCutPool, t: usize) -> f64 {
        pool.max_grad(t)
    }
}

/// Trains single-cut SDDP; `prefs[t-1]` is the preference of stage `t`.
pub fn train(
    lattice: &ScenarioLattice,
    prefs: &[PreferenceDistribution],
    opts: &TrainOptions,
) -> Result<Trained<CutPool>> {
    Marsrm::new(lattice, prefs)?.train(opts)
}

/// Trains robust multi-cut SDDP; `ambs[t-1]` is the ambiguity set of stage `t`.
pub fn dr_train(
    lattice: &ScenarioLattice,
    ambs: &[MomentAmbiguitySet],
    opts: &TrainOptions,
) -> Result<Trained<DrCutPool>> {
    DrMarsrm::new(lattice, ambs)?.train(opts)
}
