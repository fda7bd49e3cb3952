//! Circular-arc primitives, oriented circles/lines and Möbius maps.

mod arc;
mod circle;
mod mobius;
mod point;

pub use arc::{bulge_angle_from_area, segment_area, Arc, ArcProperties, MAX_TURN_MARGIN};
pub use circle::OrientedCircleLine;
pub use mobius::{second_intersection, MobiusMap, SecondPoint};
pub use point::{circle_through, Point};
