//! Stagewise-independent scenario lattices and preference distributions.

mod lattice;
mod lognormal;
mod preference;
mod rng;

pub use lattice::{ScenarioLattice, StageRealization};
pub use lognormal::{
    asset_first_stage, asset_realization, build_lognormal_lattice, sample_lognormal_returns,
    LognormalParams,
};
pub use preference::{build_preference_voronoi, preset_preference, voronoi_weights, Preset};
pub use rng::{Purpose, RngStream};
