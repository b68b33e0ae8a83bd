//! Bottom-left strip packing: exact rational geometry, placement-order
//! heuristics, a bottom-left placement engine with audit trail, occupancy
//! analysis of the packed strip, lower bounds and performance certificates,
//! an exact branch-and-bound optimum for small instances, and instance
//! generators.

pub mod analysis;
pub mod bounds;
pub mod engine;
pub mod generators;
pub mod model;
pub mod oracle;
pub mod ordering;
pub mod scalar;

pub use model::{Instance, Packing, Placement, Rect, RectId};
pub use scalar::Scalar;
