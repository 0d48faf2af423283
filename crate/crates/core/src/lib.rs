//! Intrinsic 1-dimensional persistence of compact geodesic model spaces,
//! computed and certified from finite samples.
//!
//! The pipeline: exact space models ([`spaces`]) are sampled with density
//! certificates ([`sampling`]), the open Vietoris-Rips 2-skeleton of the
//! restricted metric is built ([`rips`]), H1 persistence over a prime field
//! is reduced with decorated intervals and representative cycles
//! ([`homology`]), loops are snapped, filled and contracted explicitly
//! ([`loops`]), edge-path presentations expose the fundamental group side
//! ([`pi1`]), and the stability / order / minimality guarantees are checked
//! numerically ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod homology;
pub mod loops;
pub mod pi1;
pub mod rips;
pub mod sampling;
pub mod spaces;
pub mod svg;

pub use error::{Error, Result};
