//! Planar soap-bubble clusters: circular-arc geometry, equilibrium checks,
//! variational dimension counts, explicit constructions and the de Sitter
//! picture of equilibrium junctions.

pub mod cluster;
pub mod constructions;
pub mod desitter;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod scalar;
pub mod tolerance;
pub mod variation;

pub use cluster::{Cluster, EdgeRecord};
pub use error::{Error, Result};
pub use tolerance::TolerancePolicy;

pub type Point = geometry::Point<f64>;
pub type Arc = geometry::Arc<f64>;
pub type MobiusMap = geometry::MobiusMap<f64>;
pub type OrientedCircleLine = geometry::OrientedCircleLine<f64>;
pub type DeSitterPoint = desitter::DeSitterPoint<f64>;
pub type HermitianCircle = desitter::HermitianCircle<f64>;
