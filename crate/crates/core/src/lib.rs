//! Multistage risk-averse stochastic linear programming with average
//! randomized spectral risk measures (ARSRM) and their distributionally
//! robust counterpart, solved by SDDP with deterministic lower and upper
//! bounds.
//!
//! The crate is organized bottom-up:
//!
//! - [`risk`]: exact risk calculus on finite distributions (quantiles, CVaR,
//!   step spectra, the ARSRM reduction to a convex combination of CVaRs).
//! - [`scenario`]: stagewise-independent lattices and preference
//!   distributions over spectrum parameters.
//! - [`lp`]: LP model/solution types, the HiGHS-backed solve entry point and
//!   the extensive-form oracles.
//! - [`sddp`]: single-cut SDDP with a convex-envelope upper bound.
//! - [`dr`]: moment ambiguity sets, the worst-case ARSRM dual and multi-cut
//!   robust SDDP.
//! - [`bench`]: the asset-allocation benchmark, instance files, the
//!   step-spectrum error bound and mode comparison.

pub mod bench;
pub mod dr;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod par;
pub mod risk;
pub mod scenario;
pub mod sddp;

pub use error::{Error, Result};
pub use par::Execution;
