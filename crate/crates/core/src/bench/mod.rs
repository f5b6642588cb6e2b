//! Multistage asset allocation with transaction costs: instance
//! configuration, spectrum-projection error bounds and run plumbing.
//!
//! Stage 1 invests one unit of wealth, `eᵀx = 1`. Every later stage holds
//! `(x, z, s⁺, s⁻)` with
//!
//! ```text
//! eᵀx + f eᵀz = ξᵀx_prev
//! x - z + s⁺ = x_prev
//! -x - z + s⁻ = -x_prev
//! ```
//!
//! and cost `-eᵀx`, so losses are negative wealth.

mod bound;
mod config;
mod instance;
mod run;

pub use bound::{asset_value_bounds, phi_integrals, step_spectrum_error_bound, BoundMode};
pub use config::{
    AmbiguitySpec, AssetInstanceConfig, CorrSpec, LognormalSpec, PreferenceSpec, Spread,
    DEFAULT_TRANSACTION_COST,
};
pub use instance::{build_asset_instance, AssetInstance, Mode};
pub use run::{
    compare_modes, error_bound_table, format_comparison, load_config, oracle_mode, solve_mode,
    write_artifacts, BoundRow, ModeResult, RunArtifacts, RunSettings, RunSnapshot,
};
