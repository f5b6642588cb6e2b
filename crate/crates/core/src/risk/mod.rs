//! Exact risk calculus on finitely supported random variables.
//!
//! Everything here is closed form: spectra are integrated piecewise over
//! breakpoint intersections and CVaR is computed from its dual weights, so
//! results are exact up to floating-point rounding.

mod arsrm;
mod cvar;
mod distribution;
mod spectrum;

pub use arsrm::{
    arsrm, arsrm_cvar_route, ArsrmWeights, PreferenceAtom, PreferenceDistribution, PreferencePoint,
    SpectrumRule,
};
pub use cvar::{cvar, cvar_dual_weights, cvar_variational, CvarDualWeights};
pub use distribution::{quantile, DiscreteDistribution};
pub use spectrum::{
    project_onto_grid, project_spectrum, srm, PiecewiseLinearSpectrum, Spectrum, StepSpectrum,
};

/// Probability vectors must sum to one within this tolerance.
pub const PROB_TOL: f64 = 1e-12;

/// Spectra must integrate to one within this tolerance.
pub const SPECTRUM_TOL: f64 = 1e-10;
