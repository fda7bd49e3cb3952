//! Circular arcs stored as chord plus signed segment ("bulge") area.
//!
//! Sign convention: a positive bulge means the arc lies to the left of the
//! directed chord `tail -> head`. The signed half-angle `phi` is the angle
//! from the chord to the tangent at the tail; the tangent at the head is the
//! chord rotated by `-phi`. A left-bulging arc therefore turns clockwise.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::circle::OrientedCircleLine;
use super::point::Point;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Below this |phi| the closed forms lose digits and the power series is used.
const SERIES_PHI: f64 = 1e-3;
/// Areas below `SMALL_AREA * chord^2` use the inverted series directly.
const SMALL_AREA: f64 = 1e-8;
/// Arcs must keep |phi| below `pi - MAX_TURN_MARGIN`.
pub const MAX_TURN_MARGIN: f64 = 1e-6;

/// `x - sin x` without cancellation for small and moderate `x`.
fn x_minus_sin<T: Real>(x: T) -> T {
    if x.abs() < T::one() {
        let x2 = x * x;
        let mut term = x * x2 / T::lit(6.0);
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > sum.abs() * T::epsilon() {
            term = -term * x2 / T::lit((k + 1.0) * (k + 2.0));
            sum = sum + term;
            k += 2.0;
        }
        sum
    } else {
        x - x.sin()
    }
}

/// `phi - sin(phi) cos(phi)`.
fn turning_excess<T: Real>(phi: T) -> T {
    x_minus_sin(phi * T::lit(2.0)) * T::lit(0.5)
}

/// Segment-area shape factor: area / chord^2 as a function of phi.
fn area_factor<T: Real>(phi: T) -> T {
    if phi.abs().to_f64().unwrap() < SERIES_PHI {
        let p2 = phi * phi;
        phi / T::lit(6.0) * (T::one() + p2 * T::lit(2.0 / 15.0) + p2 * p2 * T::lit(2.0 / 105.0))
    } else {
        let s = phi.sin();
        turning_excess(phi) / (T::lit(4.0) * s * s)
    }
}

fn area_factor_deriv<T: Real>(phi: T) -> T {
    if phi.abs().to_f64().unwrap() < SERIES_PHI {
        let p2 = phi * phi;
        T::lit(1.0 / 6.0) + p2 / T::lit(15.0) + p2 * p2 / T::lit(63.0)
    } else {
        let (s, c) = phi.sin_cos();
        T::lit(0.5) - turning_excess(phi) * c / (T::lit(2.0) * s * s * s)
    }
}

/// Signed area between a circular arc and its chord.
///
/// `chord^2 (phi - sin phi cos phi) / (4 sin^2 phi)`, continued by its power
/// series near `phi = 0`.
pub fn segment_area<T: Real>(chord: T, phi: T) -> T {
    chord * chord * area_factor(phi)
}

/// Inverts [`segment_area`]: the signed half-angle of the arc with the given
/// chord and bulge area.
///
/// Safeguarded Newton on the (odd, strictly increasing) area map, falling
/// back to bisection whenever a step leaves the current bracket.
pub fn bulge_angle_from_area<T: Real>(chord: T, area: T) -> Result<T> {
    if !(chord > T::zero()) || !chord.is_finite() {
        return Err(Error::Domain(format!("chord length must be positive, got {chord:?}")));
    }
    if !area.is_finite() {
        return Err(Error::Domain("bulge area must be finite".into()));
    }
    if area == T::zero() {
        return Ok(T::zero());
    }
    let target = area.abs() / (chord * chord);
    let sign = area.signum();

    if target.to_f64().unwrap() < SMALL_AREA {
        let rho = target * T::lit(6.0);
        let r2 = rho * rho;
        let phi = rho * (T::one() - r2 * T::lit(2.0 / 15.0) + r2 * r2 * T::lit(6.0 / 175.0));
        return Ok(sign * phi);
    }

    let pi = T::PI();
    let hi_limit = pi - T::lit(MAX_TURN_MARGIN);
    if target >= area_factor(hi_limit) {
        return Err(Error::Domain(format!(
            "bulge area {area:?} too large for chord {chord:?}: arc would turn through a full circle"
        )));
    }

    let mut lo = T::zero();
    let mut hi = hi_limit;
    // Initial guess from the small-angle series or the near-circle asymptote.
    let rho = target * T::lit(6.0);
    let mut phi = if rho < T::one() {
        rho
    } else {
        (pi - (pi / (T::lit(4.0) * target)).sqrt()).max(T::lit(0.5)).min(hi)
    };

    let tol = T::lit(4.0 * T::eps_f64());
    for _ in 0..200 {
        let f = area_factor(phi) - target;
        if f > T::zero() {
            hi = phi;
        } else {
            lo = phi;
        }
        let df = area_factor_deriv(phi);
        let mut next = phi - f / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) * T::lit(0.5);
        }
        let step = (next - phi).abs();
        phi = next;
        if step <= tol * phi.abs().max(T::lit(1e-300)) || hi - lo <= tol * hi {
            break;
        }
    }
    Ok(sign * phi)
}

/// Closed-form derived quantities of an [`Arc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcProperties<T> {
    pub half_angle: T,
    pub length: T,
    /// `2 sin(phi) / chord`; positive when the arc bulges left.
    pub signed_curvature: T,
    pub carrier: OrientedCircleLine<T>,
    pub tangent_at_tail: Point<T>,
    pub tangent_at_head: Point<T>,
}

/// A circular arc or straight segment between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc<T> {
    pub tail: Point<T>,
    pub head: Point<T>,
    /// Signed area between arc and chord; positive = left of `tail -> head`.
    pub bulge: T,
}

impl<T: Real> Arc<T> {
    pub fn new(tail: Point<T>, head: Point<T>, bulge: T) -> Self {
        Self { tail, head, bulge }
    }

    pub fn straight(tail: Point<T>, head: Point<T>) -> Self {
        Self::new(tail, head, T::zero())
    }

    /// Arc with a prescribed signed half-angle.
    pub fn from_half_angle(tail: Point<T>, head: Point<T>, phi: T) -> Self {
        let c = tail.distance(head);
        Self::new(tail, head, segment_area(c, phi))
    }

    /// The arc on the circle `(center, radius)` from `tail` to `head`,
    /// traversed counterclockwise when `ccw` is set. Both endpoints are
    /// assumed to lie on the circle.
    pub fn on_circle(center: Point<T>, tail: Point<T>, head: Point<T>, ccw: bool) -> Self {
        let two_pi = T::PI() * T::lit(2.0);
        let a0 = (tail - center).angle();
        let a1 = (head - center).angle();
        let mut sweep = a1 - a0;
        if ccw {
            while sweep <= T::zero() {
                sweep = sweep + two_pi;
            }
            while sweep > two_pi {
                sweep = sweep - two_pi;
            }
        } else {
            while sweep >= T::zero() {
                sweep = sweep - two_pi;
            }
            while sweep < -two_pi {
                sweep = sweep + two_pi;
            }
        }
        // A counterclockwise sweep turns left, i.e. bulges right.
        Self::from_half_angle(tail, head, -sweep * T::lit(0.5))
    }

    /// Arc from `tail` through `mid` to `head` (three-point circle fit).
    /// Collinear input with `mid` between the endpoints gives a straight edge.
    pub fn through_points(tail: Point<T>, mid: Point<T>, head: Point<T>) -> Result<Self> {
        if tail.distance(head) <= T::zero() {
            return Err(Error::Domain("arc endpoints coincide".into()));
        }
        let u = tail - mid;
        let v = head - mid;
        let alpha = u.cross(v).atan2(u.dot(v));
        let pi = T::PI();
        let phi = if alpha == T::zero() {
            // mid coincides with the direction of both endpoints: beyond the chord
            return Err(Error::Domain("midpoint not between endpoints".into()));
        } else {
            alpha.signum() * (pi - alpha.abs())
        };
        if phi.abs() >= pi - T::lit(MAX_TURN_MARGIN) {
            return Err(Error::Domain("fitted arc turns through a full circle".into()));
        }
        Ok(Self::from_half_angle(tail, head, phi))
    }

    pub fn chord(&self) -> Point<T> {
        self.head - self.tail
    }

    pub fn chord_length(&self) -> T {
        self.chord().norm()
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.head, self.tail, -self.bulge)
    }

    pub fn half_angle(&self) -> Result<T> {
        bulge_angle_from_area(self.chord_length(), self.bulge)
    }

    pub fn length(&self) -> Result<T> {
        let c = self.chord_length();
        let phi = self.half_angle()?;
        Ok(arc_length(c, phi))
    }

    pub fn properties(&self) -> Result<ArcProperties<T>> {
        let c = self.chord_length();
        let phi = self.half_angle()?;
        let dir = self.chord() * (T::one() / c);
        let tangent_at_tail = dir.rotated(phi);
        let tangent_at_head = dir.rotated(-phi);
        let signed_curvature = T::lit(2.0) * phi.sin() / c;
        let carrier = if phi.sin().abs() < T::lit(1e-12) {
            OrientedCircleLine::line_through(self.tail, dir)
        } else {
            let mid = (self.tail + self.head) * T::lit(0.5);
            let left = dir.perp();
            let center = mid - left * (c * T::lit(0.5) * phi.cos() / phi.sin());
            let radius = c / (T::lit(2.0) * phi.sin().abs());
            // left bulge => clockwise travel
            OrientedCircleLine::circle(center, radius, phi < T::zero())
        };
        Ok(ArcProperties {
            half_angle: phi,
            length: arc_length(c, phi),
            signed_curvature,
            carrier,
            tangent_at_tail,
            tangent_at_head,
        })
    }

    /// Point at turning fraction `s` in `[0, 1]` (equal angle steps along the arc).
    pub fn point_at(&self, s: T) -> Result<Point<T>> {
        let phi = self.half_angle()?;
        Ok(point_at_with(self.tail, self.chord(), phi, s))
    }

    pub fn midpoint(&self) -> Result<Point<T>> {
        self.point_at(T::lit(0.5))
    }

    /// `k + 1` points equally spaced in angle, endpoints included exactly.
    pub fn sample(&self, k: usize) -> Result<Vec<Point<T>>> {
        let phi = self.half_angle()?;
        let chord = self.chord();
        let kk = T::from_usize(k).unwrap();
        let mut pts: Vec<_> = (0..=k)
            .map(|i| point_at_with(self.tail, chord, phi, T::from_usize(i).unwrap() / kk))
            .collect();
        pts[0] = self.tail;
        pts[k] = self.head;
        Ok(pts)
    }

    /// Euclidean distance from `p` to the arc.
    pub fn distance_to(&self, p: Point<T>) -> Result<T> {
        let props = self.properties()?;
        let end = p.distance(self.tail).min(p.distance(self.head));
        match props.carrier {
            OrientedCircleLine::Line { .. } => {
                let d = self.chord();
                let t = ((p - self.tail).dot(d) / d.norm_sq()).max(T::zero()).min(T::one());
                Ok(p.distance(self.tail + d * t))
            }
            OrientedCircleLine::Circle { center, radius, .. } => {
                let two_pi = T::PI() * T::lit(2.0);
                let sweep = -props.half_angle * T::lit(2.0);
                let a0 = (self.tail - center).angle();
                let b = (p - center).angle();
                let mut rel = if sweep > T::zero() { b - a0 } else { a0 - b };
                while rel < T::zero() {
                    rel = rel + two_pi;
                }
                while rel >= two_pi {
                    rel = rel - two_pi;
                }
                if rel <= sweep.abs() {
                    Ok((p.distance(center) - radius).abs().min(end))
                } else {
                    Ok(end)
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_finite() && self.head.is_finite() && self.bulge.is_finite()
    }
}

fn arc_length<T: Real>(c: T, phi: T) -> T {
    if phi.abs().to_f64().unwrap() < SERIES_PHI {
        let p2 = phi * phi;
        c * (T::one() + p2 / T::lit(6.0) + p2 * p2 * T::lit(7.0 / 360.0))
    } else {
        c * phi / phi.sin()
    }
}

fn sinc<T: Real>(x: T) -> T {
    if x.abs().to_f64().unwrap() < 1e-4 {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

/// Position at turning fraction `s`: the tangent angle moves linearly from
/// `+phi` to `-phi` relative to the chord, which integrates to
/// `tail + chord * e^{i phi (1-s)} * s * sinc(phi s) / sinc(phi)`.
fn point_at_with<T: Real>(tail: Point<T>, chord: Point<T>, phi: T, s: T) -> Point<T> {
    let rot = Complex::from_polar(T::one(), phi * (T::one() - s));
    let scale = s * sinc(phi * s) / sinc(phi);
    let z = chord.to_complex() * rot * scale;
    tail + Point::from_complex(z)
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Plain bisection on the closed form, independent of the Newton path.
    fn bisect_oracle(c: f64, a: f64) -> f64 {
        let f = |phi: f64| c * c * (phi - phi.sin() * phi.cos()) / (4.0 * phi.sin().powi(2)) - a.abs();
        let (mut lo, mut hi) = (1e-12, PI - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        a.signum() * 0.5 * (lo + hi)
    }

    #[test]
    fn semicircle_half_angle() {
        let phi = bulge_angle_from_area(2.0, PI / 2.0).unwrap();
        assert!((phi - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_area_is_straight() {
        assert_eq!(bulge_angle_from_area(3.7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn small_bulge_matches_bisection_oracle() {
        let phi = bulge_angle_from_area(1.0, 0.1).unwrap();
        let oracle = bisect_oracle(1.0, 0.1);
        assert!((phi - oracle).abs() < 1e-12, "{phi} vs {oracle}");
        assert!((segment_area(1.0, phi) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn odd_and_increasing() {
        let areas = [-3.0, -0.5, -1e-9, 0.0, 1e-9, 0.5, 3.0];
        let phis: Vec<f64> = areas.iter().map(|&a| bulge_angle_from_area(1.3, a).unwrap()).collect();
        for w in phis.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(phis[1], -phis[5]);
    }

    #[test]
    fn huge_area_is_domain_error() {
        assert!(matches!(bulge_angle_from_area(1.0, 1e20), Err(Error::Domain(_))));
        assert!(matches!(bulge_angle_from_area(0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn unit_semicircle_properties() {
        let arc = Arc::from_half_angle(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), PI / 2.0);
        let p = arc.properties().unwrap();
        assert!((p.length - PI).abs() < 1e-12);
        assert!((p.signed_curvature.abs() - 1.0).abs() < 1e-12);
        // bulges left (up): leaves the tail going up
        assert!((p.tangent_at_tail - Point::new(0.0, 1.0)).norm() < 1e-12);
        assert!((p.tangent_at_head - Point::new(0.0, -1.0)).norm() < 1e-12);
        let mid = arc.midpoint().unwrap();
        assert!((mid - Point::new(0.0, 1.0)).norm() < 1e-12);
        match p.carrier {
            OrientedCircleLine::Circle { center, radius, ccw } => {
                assert!(center.norm() < 1e-12);
                assert!((radius - 1.0).abs() < 1e-12);
                assert!(!ccw);
            }
            _ => panic!("expected circle"),
        }
    }

    #[test]
    fn straight_edge_properties() {
        let arc = Arc::straight(Point::new(0.0, 0.0), Point::new(3.0, 0.0));
        let p = arc.properties().unwrap();
        assert_eq!(p.length, 3.0);
        assert_eq!(p.signed_curvature, 0.0);
        assert_eq!(p.tangent_at_tail, Point::new(1.0, 0.0));
        assert_eq!(p.tangent_at_head, Point::new(1.0, 0.0));
        assert!(matches!(p.carrier, OrientedCircleLine::Line { .. }));
    }

    #[test]
    fn length_matches_polyline_oracle() {
        let arc = Arc::new(Point::new(0.2, -0.1), Point::new(1.1, 0.4), 0.1);
        let pts = arc.sample(10_000).unwrap();
        let poly: f64 = pts.windows(2).map(|w| w[0].distance(w[1])).sum();
        let exact = arc.length().unwrap();
        assert!(((poly - exact) / exact).abs() < 1e-6);
        // curvature from the sampled turning: total turning / length
        let t0 = (pts[1] - pts[0]).angle();
        let t1 = (pts[10_000] - pts[9_999]).angle();
        let k = arc.properties().unwrap().signed_curvature;
        // clockwise turning for a left bulge
        assert!((((t0 - t1) / poly) - k).abs() / k < 1e-3);
        // the sampled points lie on the carrier
        if let OrientedCircleLine::Circle { center, radius, .. } = arc.properties().unwrap().carrier {
            for p in pts.iter().step_by(997) {
                assert!((p.distance(center) - radius).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn through_points_recovers_arc() {
        for &b in &[-2.0f64, -0.3, 0.0, 0.01, 0.7, 4.0] {
            let arc = Arc::new(Point::new(0.5, 0.5), Point::new(-0.4, 1.2), b);
            let m = arc.point_at(0.3).unwrap();
            let fit = Arc::through_points(arc.tail, m, arc.head).unwrap();
            assert!((fit.bulge - b).abs() < 1e-10 * (1.0 + b.abs()), "{} vs {b}", fit.bulge);
        }
    }

    #[test]
    fn on_circle_orientation() {
        let c = Point::new(0.0, 0.0);
        let ccw = Arc::on_circle(c, Point::new(1.0, 0.0), Point::new(0.0, 1.0), true);
        assert!(ccw.bulge < 0.0);
        assert!((ccw.half_angle().unwrap() + PI / 4.0).abs() < 1e-12);
        let cw = Arc::on_circle(c, Point::new(1.0, 0.0), Point::new(0.0, 1.0), false);
        assert!((cw.half_angle().unwrap() - 3.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn distance_to_arc() {
        let arc = Arc::from_half_angle(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), PI / 2.0);
        assert!(arc.distance_to(Point::new(0.0, 0.0)).unwrap() - 1.0 < 1e-12);
        assert!(arc.distance_to(Point::new(0.0, 2.0)).unwrap() - 1.0 < 1e-12);
        // below the chord the nearest point is an endpoint
        let d = arc.distance_to(Point::new(0.0, -1.0)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let phi = bulge_angle_from_area(2.0f32, std::f32::consts::FRAC_PI_2).unwrap();
        assert!((phi - std::f32::consts::FRAC_PI_2).abs() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn roundtrip(c in 0.01f64..100.0, phi in -3.1f64..3.1) {
                let a = segment_area(c, phi);
                let back = bulge_angle_from_area(c, a).unwrap();
                prop_assert!((back - phi).abs() <= 1e-12 * phi.abs().max(1e-3), "{} {}", back, phi);
            }

            #[test]
            fn rigid_invariance(b in -1.0f64..1.0, th in 0.0f64..std::f64::consts::TAU, dx in -5.0f64..5.0) {
                let arc = Arc::new(Point::new(0.1, 0.2), Point::new(0.9, -0.3), b);
                let f = |p: Point<f64>| p.rotated(th) + Point::new(dx, -dx);
                let moved = Arc::new(f(arc.tail), f(arc.head), b);
                let l0 = arc.length().unwrap();
                let l1 = moved.length().unwrap();
                prop_assert!((l0 - l1).abs() < 1e-12 * l0);
                let rev = arc.reversed();
                prop_assert!((rev.half_angle().unwrap() + arc.half_angle().unwrap()).abs() < 1e-14);
            }
        }
    }
}
