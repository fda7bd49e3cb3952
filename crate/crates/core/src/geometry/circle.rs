use serde::{Deserialize, Serialize};

use super::point::Point;
use crate::scalar::Real;

/// An oriented circle or an oriented straight line.
///
/// A line is stored by its unit left normal `normal` (pointing to the left of
/// the direction of travel) and the offset `normal . p` of any point `p` on
/// it; the direction of travel is `normal` rotated by -90°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrientedCircleLine<T> {
    Circle { center: Point<T>, radius: T, ccw: bool },
    Line { normal: Point<T>, offset: T },
}

impl<T: Real> OrientedCircleLine<T> {
    pub fn circle(center: Point<T>, radius: T, ccw: bool) -> Self {
        Self::Circle { center, radius, ccw }
    }

    /// Line through `p` travelling along `direction` (need not be unit).
    pub fn line_through(p: Point<T>, direction: Point<T>) -> Self {
        let d = direction.normalized().expect("line direction must be nonzero");
        let normal = d.perp();
        Self::Line { normal, offset: normal.dot(p) }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, Self::Line { .. })
    }

    /// Same carrier, opposite orientation.
    pub fn reversed(&self) -> Self {
        match *self {
            Self::Circle { center, radius, ccw } => Self::Circle { center, radius, ccw: !ccw },
            Self::Line { normal, offset } => Self::Line { normal: -normal, offset: -offset },
        }
    }

    /// Unit direction of travel at a point `p` on the carrier.
    pub fn direction_at(&self, p: Point<T>) -> Point<T> {
        match *self {
            Self::Circle { center, ccw, .. } => {
                let r = (p - center).normalized().unwrap_or(Point::new(T::one(), T::zero()));
                if ccw {
                    r.perp()
                } else {
                    -r.perp()
                }
            }
            Self::Line { normal, .. } => -normal.perp(),
        }
    }

    /// Signed distance of `p` from the carrier (positive on the left side).
    pub fn signed_distance(&self, p: Point<T>) -> T {
        match *self {
            Self::Circle { center, radius, ccw } => {
                let d = radius - p.distance(center);
                if ccw {
                    d
                } else {
                    -d
                }
            }
            Self::Line { normal, offset } => normal.dot(p) - offset,
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Self::Circle { center, radius, .. } => radius > T::zero() && center.is_finite() && radius.is_finite(),
            Self::Line { normal, offset } => {
                (normal.norm() - T::one()).abs() < T::lit(1e-9) && offset.is_finite()
            }
        }
    }
}
