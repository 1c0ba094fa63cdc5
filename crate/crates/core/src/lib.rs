//! Kneading theory for systems of strictly monotone interval maps.
//!
//! A system is a finite family of monotone branches `f_i: I_i -> R`.
//! The crate computes itineraries, the kneading matrix and determinant
//! over truncated power series, lap-count and determinant-root entropy,
//! the self-similar measure and a constant-slope model.

pub mod entropy;
pub mod error;
pub mod numeric;

pub use error::{Error, Result};
pub use numeric::{ClosedInterval, Rational, Span, TruncatedSeries, VectorSeries};
pub mod itinerary;
pub mod kneading;
pub mod measure;
pub mod overlap;
pub mod system;
pub mod words;

pub use system::{load_system, Address, Branch, Side, SignedPoint, SystemSpec};
pub use words::{Letter, Word};
