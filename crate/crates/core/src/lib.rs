//! Concurrence bounds for bipartite and multipartite mixed states.
//!
//! The crate computes three families of measurable lower bounds on the
//! concurrence of a density operator:
//!
//! * purely algebraic bounds from singular values of symmetric overlap
//!   matrices ([`bounds`]),
//! * expectation values of two-copy observables ([`twocopy`], [`bounds`]),
//! * single-copy entanglement witnesses derived from a reference state
//!   ([`witness`]),
//!
//! plus their aggregation over all bipartitions of a multi-factor system
//! ([`multipartite`]), closed-form benchmark families and a two-qubit exact
//! oracle ([`models`]), and randomized brute-force verifiers ([`oracle`]).

pub mod bounds;
pub mod error;
pub mod models;
pub mod multipartite;
pub mod oracle;
pub mod qstate;
pub mod twocopy;
pub mod witness;

pub use bounds::{
    algebraic_lower_bound, lb_tau, pure_concurrence, sum_sq_algebraic_bound, two_copy_bound_vi,
    two_copy_bound_valpha_sum, BoundKind, BoundReport, TauVector,
};
pub use error::{Error, Result};
pub use qstate::{CMat, CVec, DensityOperator, HilbertSpace, PureState};
pub use twocopy::{ChiIndex, ChiVector, VWeights};
pub use witness::{build_witness_sigma, build_witness_sigma_alpha, WitnessOperator};
