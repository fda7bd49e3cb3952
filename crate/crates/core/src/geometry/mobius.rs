use num_complex::Complex;
use rand::Rng;

use super::arc::Arc;
use super::circle::OrientedCircleLine;
use super::point::Point;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Poles closer than this to the evaluated point (after normalization) are rejected.
const POLE_TOL: f64 = 1e-9;
/// Arcs passing within this distance (relative to the chord) of the pole are rejected.
const ARC_POLE_TOL: f64 = 1e-6;

/// Linear fractional map `z -> (a z + b) / (c z + d)` normalized to `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap<T: Real> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> MobiusMap<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm_sqr().max(b.norm_sqr()).max(c.norm_sqr()).max(d.norm_sqr());
        if !(det.norm() > T::lit(1e-12) * scale) || !det.norm().is_finite() {
            return Err(Error::Domain("degenerate Möbius map (ad - bc = 0)".into()));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Self { a: o, b: z, c: z, d: o }
    }

    pub fn translation(v: Point<T>) -> Self {
        let o = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self { a: o, b: v.to_complex(), c: z, d: o }
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(theta: T) -> Self {
        let h = Complex::from_polar(T::one(), theta * T::lit(0.5));
        let z = Complex::new(T::zero(), T::zero());
        Self { a: h, b: z, c: z, d: h.conj() }
    }

    pub fn scaling(s: T) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(Complex::new(s, T::zero()), z, z, Complex::new(T::one(), T::zero()))
            .expect("nonzero scale")
    }

    /// `z -> 1/z`.
    pub fn reciprocal() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Self::new(z, o, o, z).unwrap()
    }

    /// The map sending `q` to infinity and `p` to the origin with
    /// `|m'(p)| = 1`: `z -> |p - q| (p - z) / (z - q)`.
    pub fn sending_to_infinity(q: Point<T>, p: Point<T>) -> Result<Self> {
        let pc = p.to_complex();
        let qc = q.to_complex();
        let k = Complex::new((pc - qc).norm(), T::zero());
        Self::new(-k, k * pc, Complex::new(T::one(), T::zero()), -qc)
    }

    /// The unique map with `z_i -> w_i` for three distinct points on each side.
    pub fn from_three_points(z: [Point<T>; 3], w: [Point<T>; 3]) -> Result<Self> {
        let to_std = |p: [Point<T>; 3]| -> Result<Self> {
            let (z1, z2, z3) = (p[0].to_complex(), p[1].to_complex(), p[2].to_complex());
            Self::new(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))
        };
        Ok(to_std(w)?.inverse().compose(&to_std(z)?))
    }

    /// A random map with bounded distortion: `z -> alpha / (z - q) + beta` or
    /// an affine map, with the pole `q` placed outside the disc
    /// `|z - center| <= 1.5 radius`.
    pub fn random_off_disc<R: Rng + ?Sized>(rng: &mut R, center: Point<T>, radius: T) -> Self {
        let angle = T::lit(rng.gen_range(0.0..std::f64::consts::TAU));
        let rot = Complex::from_polar(T::one(), T::lit(rng.gen_range(0.0..std::f64::consts::TAU)));
        let beta = Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)));
        if rng.gen_bool(0.2) {
            let s = T::lit(rng.gen_range(0.5..2.0));
            return Self::new(rot * s, beta, Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()))
                .unwrap();
        }
        let dist = radius * T::lit(rng.gen_range(1.5..4.0));
        let q = center + Point::from_angle(angle) * dist;
        let alpha = rot * (dist * dist);
        // alpha/(z-q) + beta = (beta z + alpha - beta q) / (z - q)
        let qc = q.to_complex();
        Self::new(beta, alpha - beta * qc, Complex::new(T::one(), T::zero()), -qc).unwrap()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        Self::new(a, b, c, d).expect("composition of invertible maps")
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// The point sent to infinity, if finite.
    pub fn pole(&self) -> Option<Point<T>> {
        if self.c.norm() <= T::lit(1e-300) {
            None
        } else {
            Some(Point::from_complex(-self.d / self.c))
        }
    }

    pub fn apply_point(&self, p: Point<T>) -> Result<Point<T>> {
        let z = p.to_complex();
        let den = self.c * z + self.d;
        if den.norm() <= T::lit(POLE_TOL) {
            return Err(Error::Domain("point is at the pole of the Möbius map".into()));
        }
        Ok(Point::from_complex((self.a * z + self.b) / den))
    }

    /// Complex derivative `1 / (c z + d)^2`.
    pub fn derivative(&self, p: Point<T>) -> Complex<T> {
        let den = self.c * p.to_complex() + self.d;
        Complex::new(T::one(), T::zero()) / (den * den)
    }

    /// Image of a tangent direction at `p` (unit output).
    pub fn push_direction(&self, p: Point<T>, dir: Point<T>) -> Point<T> {
        let v = self.derivative(p) * dir.to_complex();
        Point::from_complex(v).normalized().unwrap_or(dir)
    }

    /// Image of an arc, fitted through the images of its tail, midpoint and head.
    pub fn apply_arc(&self, arc: &Arc<T>) -> Result<Arc<T>> {
        if let Some(pole) = self.pole() {
            let d = arc.distance_to(pole)?;
            if d <= T::lit(ARC_POLE_TOL) * arc.chord_length() {
                return Err(Error::Domain("Möbius pole lies on the arc".into()));
            }
        }
        let mid = arc.midpoint()?;
        Arc::through_points(self.apply_point(arc.tail)?, self.apply_point(mid)?, self.apply_point(arc.head)?)
    }
}

/// Result of [`second_intersection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondPoint<T> {
    Finite(Point<T>),
    AtInfinity,
}

/// The second point shared by three carriers through `p`.
///
/// Inverting about `p` turns each carrier into a line; the carriers share a
/// second point exactly when the three image lines are concurrent. Three
/// straight carriers give lines through the origin, i.e. the point at
/// infinity. `tol` bounds the dimensionless concurrency defect.
pub fn second_intersection<T: Real>(
    p: Point<T>,
    carriers: &[OrientedCircleLine<T>; 3],
    tol: T,
) -> Result<SecondPoint<T>> {
    let mut rows: Vec<(Point<T>, T)> = Vec::with_capacity(3);
    for c in carriers {
        match *c {
            OrientedCircleLine::Circle { center, radius, .. } => {
                let off = center - p;
                if (off.norm() - radius).abs() > T::lit(1e-7) * radius.max(T::one()) {
                    return Err(Error::Domain("carrier does not pass through the vertex".into()));
                }
                let n = Point::new(off.x, -off.y);
                let len = n.norm();
                rows.push((n * (T::one() / len), T::one() / (T::lit(2.0) * len)));
            }
            OrientedCircleLine::Line { normal, offset } => {
                if (normal.dot(p) - offset).abs() > T::lit(1e-7) * p.norm().max(T::one()) {
                    return Err(Error::Domain("carrier does not pass through the vertex".into()));
                }
                rows.push((Point::new(normal.x, -normal.y), T::zero()));
            }
        }
    }
    let rho = rows.iter().fold(T::zero(), |m, r| m.max(r.1.abs()));
    if rho == T::zero() {
        return Ok(SecondPoint::AtInfinity);
    }
    // 3x2 least squares via normal equations
    let (mut a11, mut a12, mut a22, mut r1, mut r2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for (n, b) in &rows {
        a11 = a11 + n.x * n.x;
        a12 = a12 + n.x * n.y;
        a22 = a22 + n.y * n.y;
        r1 = r1 + n.x * *b;
        r2 = r2 + n.y * *b;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < T::lit(1e-14) {
        return Err(Error::NotConcurrent { defect: f64::INFINITY });
    }
    let w = Point::new((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det);
    let defect = rows.iter().fold(T::zero(), |m, (n, b)| m.max((n.dot(w) - *b).abs())) / rho;
    if defect > tol {
        return Err(Error::NotConcurrent { defect: defect.to_f64().unwrap() });
    }
    if w.norm() <= T::lit(1e-12) * rho {
        return Ok(SecondPoint::AtInfinity);
    }
    let q = Complex::new(T::one(), T::zero()) / w.to_complex();
    Ok(SecondPoint::Finite(p + Point::from_complex(q)))
}
