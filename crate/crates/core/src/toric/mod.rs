//! Split toric geometry: fans, piecewise-linear functions, Picard data,
//! strata counts and two-dimensional resolution.

pub mod fan;
pub mod invariants;
pub mod picard;
pub mod pl;
pub mod resolve;
pub mod strata;

pub use fan::{Fan, FanJson};
pub use invariants::{compute_alpha, compute_beta, compute_gamma, compute_gamma_quotient};
pub use picard::{build_picard, PicardModel};
pub use pl::{anticanonical_pl, PLFunction, PLJson};
pub use resolve::resolve_fan_2d;
pub use strata::{count_points_mod_q, strata_count, strata_counts_relative, StrataDescriptor};
