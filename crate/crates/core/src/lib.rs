//! Exact combinatorics of tent-map inverse limits.
//!
//! The algorithms are generic over [`numerics::Scalar`]; the aliases below
//! fix the three supported number types.

pub mod arcs;
pub mod chains;
pub mod error;
pub mod folding;
pub mod frechet;
pub mod invariants;
pub mod numerics;
pub mod symmetry;
pub mod tentmap;

pub use error::{Error, Result};
pub use folding::{Pattern, PLFunction, TurningPoint};
pub use numerics::{parse_scalar, ExactScalar, Scalar};
pub use tentmap::{CriticalOrbit, TentMap, Window};

pub use num_rational::BigRational;

/// Certified map: rational slopes exactly, irrational ones by intervals.
pub type ExactMap = TentMap<ExactScalar>;
/// Exact rational map, the fast path for rational slopes.
pub type RationalMap = TentMap<BigRational>;
/// Uncertified double-precision map.
pub type FloatMap = TentMap<f64>;
