//! Index-set engine for infinite-dimensional hyperbolic crosses.
//!
//! * [`weights`]: smoothness sequences, cross specifications, log-space weights.
//! * [`crosses`]: exact enumeration and counting, a brute-force oracle, simplex counts.
//! * [`bounds`]: closed-form constants and cardinality bounds.
//! * [`approx`]: coefficient-space projections, Jackson/Bernstein checks, ε-dimension.
//! * [`spde`]: a one-dimensional parametric diffusion problem with Legendre chaos.

pub mod approx;
pub mod bounds;
pub mod crosses;
pub mod error;
pub mod fixtures;
pub mod report;
mod series;
pub mod spde;
pub mod weights;

pub use crosses::{
    brute_force_count, count_cross, cross_records, enumerate_cross, simplex_count, BruteBox,
    CompressedRecord, CrossCount, CrossWalker,
};
pub use error::{Error, ErrorKind, Result};
pub use weights::{
    validate_spec, CrossSpec, Hypotheses, MultiIndex, SmoothnessSequence, SparseIndex, Tail,
    ValidatedSpec, Variant, MEMBERSHIP_TOL,
};
