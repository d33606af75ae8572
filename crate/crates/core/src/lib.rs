//! Balanced metrics and diastatic entropy on bounded symmetric and
//! homogeneous domains.
//!
//! * [`catalog`] lists the irreducible symmetric domains and their invariants.
//! * [`homog`] works with the root-system constants of a homogeneous domain.
//! * [`geometry`] holds concrete models (disk, ball, polydisk, type I).
//! * [`hilbert`] builds weighted Bergman spaces numerically.
//! * [`entropy_numeric`] estimates the diastatic entropy by shell exhaustion.

pub mod catalog;
pub mod cli;
pub mod entropy_numeric;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod hilbert;
pub mod homog;
pub mod point;
pub mod quadrature;
pub mod shells;

pub use catalog::{DomainDescriptor, Family};
pub use error::{Error, Result};
pub use exact::Rational;
pub use geometry::{DomainModel, ModelKind};
pub use homog::RootConstants;
pub use point::{Point, C64};
