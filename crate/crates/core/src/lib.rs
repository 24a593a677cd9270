//! Symbolic dynamics of polygonal billiards.
//!
//! The crate computes billiard orbits and their itineraries, unfolds them
//! into corridors of reflected tables, realizes pillowcase codes as
//! cylinders of periodic orbits, enumerates the set of periodic codes up to
//! a length bound, and compares those sets between two tables, recovering a
//! similarity or affine similarity when they agree.

pub mod billiard;
pub mod codes;
pub mod compare;
pub mod document;
pub mod geom;
pub mod periodic;
pub mod polygon;
pub mod unfold;

pub use billiard::{iterate, PhasePoint, StepOutcome};
pub use codes::PillowcaseCode;
pub use geom::{Point2, EPS_GEOM, EPS_ISO};
pub use polygon::Polygon;
