//! LP models, the single solve entry point and the extensive-form oracles.
//!
//! Models are always minimizations: `min cᵀx + offset` subject to linear
//! rows and column bounds. Row duals are signed so that for every row,
//! `d(objective)/d(rhs) = dual`.

mod blocks;
mod extensive;
mod model;
mod solve;
mod text;

pub(crate) use blocks::{dr_block, marsrm_block};
pub use extensive::{
    cost_to_go_dr, cost_to_go_marsrm, extensive_form_dr, extensive_form_dr_with,
    extensive_form_marsrm, extensive_form_marsrm_with, scenario_value_dr, scenario_value_marsrm,
    OracleOptions, DEFAULT_SIZE_LIMIT,
};
pub use model::{Constraint, LpModel, RowId, RowSense, Var, Variable};
pub use solve::{solve, LpSolution, LpStatus};
pub use text::{read_lp, write_lp};
