use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// A point (or free vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at angle `theta` (radians, counterclockwise from +x).
    #[inline]
    pub fn from_angle(theta: T) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Rotation by +90°.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Returns `None` for vectors shorter than `T::min_positive_value()`.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::min_positive_value() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn lerp(self, o: Self, s: T) -> Self {
        self + (o - self) * s
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.x, self.y)
    }

    #[inline]
    pub fn from_complex(z: Complex<T>) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn cast<U: Real>(self) -> Point<U> {
        Point::new(
            U::from_f64(self.x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan()),
            U::from_f64(self.y.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan()),
        )
    }
}

impl<T: Real> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Point<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> SubAssign for Point<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<T: Real> Neg for Point<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Center and radius of the circle through three points, or `None` when
/// they are collinear to within `rel_tol` (relative to the spread of the points).
pub fn circle_through<T: Real>(a: Point<T>, b: Point<T>, c: Point<T>, rel_tol: T) -> Option<(Point<T>, T)> {
    let ab = b - a;
    let ac = c - a;
    let d = ab.cross(ac) * T::lit(2.0);
    let spread = ab.norm_sq().max(ac.norm_sq());
    if d.abs() <= rel_tol * spread {
        return None;
    }
    let ux = (ac.y * ab.norm_sq() - ab.y * ac.norm_sq()) / d;
    let uy = (ab.x * ac.norm_sq() - ac.x * ab.norm_sq()) / d;
    let off = Point::new(ux, uy);
    Some((a + off, off.norm()))
}
