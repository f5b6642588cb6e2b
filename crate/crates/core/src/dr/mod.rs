//! Distributionally robust MARSRM: moment ambiguity sets over preference
//! parameters, the worst-case ARSRM and multi-cut robust SDDP.

mod ambiguity;
mod worst_case;

pub use ambiguity::{moments, MomentAmbiguitySet};
pub use worst_case::{arsrm_under, support_values, worst_case_arsrm, worst_case_primal};
