//! Exact generalized-degrees-of-freedom (GDoF) regions for the K-user MISO
//! broadcast channel under finite-precision channel state information at the
//! transmitter.

pub mod channel;
pub mod kuser;
pub mod polytope;
pub mod rational;
pub mod regions;
pub mod sim;
pub mod sls;

#[cfg(test)]
pub(crate) mod testgen;

pub use channel::{
    check_sls_conditions, compute_deltas, cyclic_channel, dual, ChannelError, ChannelMatrix, ConditionReport, DeltaSet,
};
pub use polytope::{poly_equal, poly_subset, Infeasible, LinearInequality, Point, Polytope, PolytopeError};
pub use rational::{parse_rational, Rational, Q};
pub use regions::{
    achievability_verdict, achievable_d_hat, achievable_f_hat, cyclic_region, outer_region, PartLabel, RegionError,
    RegionVerdict, Variant,
};
pub use sls::{
    certify_vertex, full_region_d123, full_region_f123, param_region_d, param_region_f, params_for_vertex,
    sinr_exponents, validate_rate_split, RateSplit, SinrReport, SlsError, SlsParams, SlsScheme,
};
pub use kuser::{
    bound_from_pattern, enumerate_outer_bounds, explain, f_of_p, generate_patterns, merge, BoundingPattern,
    GdofBound, GenerationBudget, KBounds, KUserError, MergeResult, Permutation,
};
pub use sim::{simulate_scheme, slope_estimate, SimConfig, SimError, SimResult};
