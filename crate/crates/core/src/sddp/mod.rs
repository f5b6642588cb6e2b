//! Stochastic dual dynamic programming with deterministic bounds.
//!
//! Stages are 0-based in code: stage 0 is the deterministic first stage.
//! Cut pool `t` approximates the risk-adjusted cost-to-go of stage `t` as a
//! function of `x_{t-1}` and is used as `θ` in the stage `t-1` subproblem.
//!
//! The lower bound reported for an iteration is the first-stage value after
//! that iteration's backward pass. The upper bound comes from a backward
//! sweep of convex-envelope LPs over all states archived so far.

mod cuts;
mod report;
mod stage;
mod train;

pub use cuts::{Cut, CutPool, DrCut, DrCutPool, StateArchive};
pub use report::{ReportRow, TrainReport, CSV_HEADER};
pub use stage::{
    dr_stage_subproblem, dr_upper_value, solve_stage, stage_subproblem, upper_value, StageLp,
    StageSolution,
};
pub use train::{
    dr_train, enumerate_paths, risk_multipliers, sample_paths, train, upper_aggregate, DrMarsrm,
    Marsrm, Sampling, StageWeights, TrainOptions, Trained, Trajectories,
};
