//! Oriented circles as points of de Sitter space.
//!
//! An oriented circle or line is the Hermitian matrix `[[A, B], [conj B, D]]`
//! of its equation `A|z|^2 + B conj(z) + conj(B) z + D = 0`, scaled so that
//! `AD - |B|^2 = -1` and signed by orientation. Writing the matrix as
//! `[[t + z, x + iy], [x - iy, t - z]]` puts it on the quadric
//! `t^2 - x^2 - y^2 - z^2 = -1`. Reversing orientation is the antipodal map,
//! and the angle between two circles becomes a Lorentzian distance.

use nalgebra::{Matrix3x4, Vector4};
use num_complex::Complex;
use serde::Serialize;

use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::geometry::{OrientedCircleLine, Point};
use crate::scalar::Real;

/// Normalized Hermitian representative of an oriented circle or line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianCircle<T> {
    pub a: T,
    pub b: Complex<T>,
    pub d: T,
}

impl<T: Real> HermitianCircle<T> {
    pub fn from_carrier(c: &OrientedCircleLine<T>) -> Self {
        match *c {
            OrientedCircleLine::Circle { center, radius, ccw } => {
                let s = if ccw { T::one() } else { -T::one() } / radius;
                HermitianCircle {
                    a: s,
                    b: -center.to_complex() * s,
                    d: (center.norm_sq() - radius * radius) * s,
                }
            }
            OrientedCircleLine::Line { normal, offset } => {
                HermitianCircle { a: T::zero(), b: -normal.to_complex(), d: offset * T::lit(2.0) }
            }
        }
    }

    /// `AD - |B|^2`; equals -1 for a normalized representative.
    pub fn det(&self) -> T {
        self.a * self.d - self.b.norm_sqr()
    }

    pub fn to_point(&self) -> DeSitterPoint<T> {
        let half = T::lit(0.5);
        DeSitterPoint { t: (self.a + self.d) * half, x: self.b.re, y: self.b.im, z: (self.a - self.d) * half }
    }

    /// Circle with center `-B / A` and radius `1 / |A|`, counterclockwise when
    /// `A > 0`; a line when `A` vanishes relative to the other entries.
    pub fn to_carrier(&self) -> Result<OrientedCircleLine<T>> {
        let bn = self.b.norm();
        let scale = self.a.abs().max(bn).max(self.d.abs());
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::Domain("degenerate Hermitian circle".into()));
        }
        if self.a.abs() <= T::lit(1e-13) * scale {
            if !(bn > T::zero()) {
                return Err(Error::Domain("line with zero normal".into()));
            }
            let normal = Point::from_complex(-self.b / bn);
            return Ok(OrientedCircleLine::Line { normal, offset: self.d / (T::lit(2.0) * bn) });
        }
        let center = Point::from_complex(-self.b / self.a);
        Ok(OrientedCircleLine::Circle { center, radius: T::one() / self.a.abs(), ccw: self.a > T::zero() })
    }
}

/// A point `(t, x, y, z)` of Minkowski space on the quadric `q = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeSitterPoint<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> DeSitterPoint<T> {
    pub fn new(t: T, x: T, y: T, z: T) -> Self {
        Self { t, x, y, z }
    }

    /// `t^2 - x^2 - y^2 - z^2`.
    pub fn q(&self) -> T {
        minkowski_form(self, self)
    }

    pub fn antipode(&self) -> Self {
        Self { t: -self.t, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn to_hermitian(&self) -> HermitianCircle<T> {
        HermitianCircle { a: self.t + self.z, b: Complex::new(self.x, self.y), d: self.t - self.z }
    }

    pub fn coords(&self) -> [T; 4] {
        [self.t, self.x, self.y, self.z]
    }
}

/// Polarization of the determinant: `t t' - x x' - y y' - z z'`.
pub fn minkowski_form<T: Real>(p: &DeSitterPoint<T>, q: &DeSitterPoint<T>) -> T {
    p.t * q.t - p.x * q.x - p.y * q.y - p.z * q.z
}

pub fn circle_to_point<T: Real>(c: &OrientedCircleLine<T>) -> DeSitterPoint<T> {
    HermitianCircle::from_carrier(c).to_point()
}

/// Inverse of [`circle_to_point`]; rejects points off the quadric.
pub fn point_to_circle<T: Real>(p: &DeSitterPoint<T>) -> Result<OrientedCircleLine<T>> {
    let q = p.q();
    if !((q + T::one()).abs() <= T::lit(1e-9)) {
        return Err(Error::Domain(format!("not a de Sitter point: q = {q:?}, expected -1")));
    }
    p.to_hermitian().to_carrier()
}

/// Form value between consecutive outgoing carriers at a junction, fixed by
/// three straight lines leaving the origin at 120 degrees.
pub fn spacing_constant<T: Real>() -> T {
    let line = |deg: f64| {
        let d = Point::<T>::from_angle(T::lit(deg.to_radians()));
        circle_to_point(&OrientedCircleLine::line_through(Point::zero(), d))
    };
    let (p, q) = (line(90.0), line(210.0));
    minkowski_form(&p, &q)
}

/// The three carriers leaving a junction, counterclockwise by tangent.
#[derive(Debug, Clone, Serialize)]
pub struct JunctionTriple {
    pub vertex: usize,
    /// Edge of each point, and whether the edge leaves through its tail.
    pub edges: [(usize, bool); 3],
    pub points: [DeSitterPoint<f64>; 3],
}

pub fn junction_triples(c: &Cluster) -> Result<Vec<JunctionTriple>> {
    (0..c.vertex_count())
        .map(|v| {
            let out = c.outgoing_ccw(v)?;
            if out.len() != 3 {
                return Err(Error::Structural(format!("vertex {v} has degree {}", out.len())));
            }
            let mut edges = [(0, true); 3];
            let mut points = [DeSitterPoint::new(0.0, 0.0, 0.0, 0.0); 3];
            for (k, (h, _)) in out.iter().enumerate() {
                edges[k] = (h.edge, h.forward);
                points[k] = circle_to_point(&c.half_arc(*h).properties()?.carrier);
            }
            Ok(JunctionTriple { vertex: v, edges, points })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct JunctionCheck {
    pub vertex: usize,
    /// Smallest over largest singular value of the 3x4 coordinate matrix.
    pub collinearity: f64,
    /// Form values of the pairs (0, 1), (1, 2), (2, 0).
    pub forms: [f64; 3],
    pub spacing_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceReport {
    pub spacing_constant: f64,
    pub junctions: Vec<JunctionCheck>,
    /// Euclidean norm of the sum of each edge's two points.
    pub antipodality: Vec<f64>,
    /// Pairs of distinct edges with coincident carriers (same or opposite
    /// orientation), reported but not treated as failures.
    pub coincident_carriers: Vec<(usize, usize)>,
    pub max_collinearity: f64,
    pub max_spacing: f64,
    pub max_antipodality: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CorrespondenceReport {
    pub fn collinear(&self) -> bool {
        self.max_collinearity < self.tol
    }

    pub fn evenly_spaced(&self) -> bool {
        self.max_spacing < self.tol
    }
}

/// Checks that every junction triple lies on one geodesic with consecutive
/// points at the 120-degree form value, and that the two ends of each edge
/// give antipodal points.
pub fn verify_correspondence(c: &Cluster, tol: f64) -> Result<CorrespondenceReport> {
    let triples = junction_triples(c)?;
    let k = spacing_constant::<f64>();
    let mut junctions = Vec::with_capacity(triples.len());
    let mut ends: Vec<Vec<Vector4<f64>>> = vec![Vec::new(); c.edge_count()];
    for tr in &triples {
        let m = Matrix3x4::from_fn(|i, j| tr.points[i].coords()[j]);
        let sv = m.svd(false, false).singular_values;
        let (hi, lo) = (sv.max(), sv.min());
        let collinearity = if hi > 0.0 { lo / hi } else { 0.0 };
        let forms = [0, 1, 2].map(|i| minkowski_form(&tr.points[i], &tr.points[(i + 1) % 3]));
        let spacing_defect = forms.iter().fold(0.0f64, |a, f| a.max((f - k).abs()));
        junctions.push(JunctionCheck { vertex: tr.vertex, collinearity, forms, spacing_defect });
        for (i, (e, _)) in tr.edges.iter().enumerate() {
            ends[*e].push(Vector4::from(tr.points[i].coords()));
        }
    }
    let antipodality: Vec<f64> = ends
        .iter()
        .map(|v| match v.as_slice() {
            [a, b] => (a + b).norm(),
            _ => f64::INFINITY,
        })
        .collect();

    let mut coincident_carriers = Vec::new();
    for i in 0..ends.len() {
        for j in (i + 1)..ends.len() {
            let (Some(a), Some(b)) = (ends[i].first(), ends[j].first()) else { continue };
            if (a - b).norm() < tol || (a + b).norm() < tol {
                coincident_carriers.push((i, j));
            }
        }
    }

    let max_collinearity = junctions.iter().fold(0.0f64, |a, j| a.max(j.collinearity));
    let max_spacing = junctions.iter().fold(0.0f64, |a, j| a.max(j.spacing_defect));
    let max_antipodality = antipodality.iter().fold(0.0f64, |a, x| a.max(*x));
    let pass = max_collinearity < tol && max_spacing < tol && max_antipodality < tol;
    Ok(CorrespondenceReport {
        spacing_constant: k,
        junctions,
        antipodality,
        coincident_carriers,
        max_collinearity,
        max_spacing,
        max_antipodality,
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::*;
    use crate::geometry::MobiusMap;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type P = Point<f64>;

    fn unit(ccw: bool) -> OrientedCircleLine<f64> {
        OrientedCircleLine::circle(P::zero(), 1.0, ccw)
    }

    #[test]
    fn unit_circle_anchor() {
        assert_eq!(circle_to_point(&unit(true)), DeSitterPoint::new(0.0, 0.0, 0.0, 1.0));
        assert_eq!(circle_to_point(&unit(false)), DeSitterPoint::new(0.0, 0.0, 0.0, -1.0));
        let back = point_to_circle(&DeSitterPoint::new(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(back, unit(true));
    }

    #[test]
    fn shifted_circle_roundtrip() {
        let c = OrientedCircleLine::circle(P::new(3.0, 0.0), 1.0, true);
        let p = circle_to_point(&c);
        assert!((p.q() + 1.0).abs() < 1e-12);
        // (A, B, D) = (1, -3, 8): t = 4.5, z = -3.5, x = -3
        assert_eq!(p, DeSitterPoint::new(4.5, -3.0, 0.0, -3.5));
        assert_eq!(point_to_circle(&p).unwrap(), c);
    }

    #[test]
    fn lines_have_zero_a() {
        let l = OrientedCircleLine::line_through(P::new(0.0, 2.0), P::new(1.0, 0.0));
        let h = HermitianCircle::from_carrier(&l);
        assert_eq!(h.a, 0.0);
        assert!((h.det() + 1.0).abs() < 1e-15);
        match point_to_circle(&h.to_point()).unwrap() {
            OrientedCircleLine::Line { normal, offset } => {
                assert!((normal - P::new(0.0, 1.0)).norm() < 1e-15 && (offset - 2.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_quadric_rejected() {
        assert!(matches!(point_to_circle(&DeSitterPoint::new(0.0, 0.0, 0.0, 2.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn form_basics() {
        let p = circle_to_point(&OrientedCircleLine::circle(P::new(0.3, -1.2), 0.7, false));
        assert!((minkowski_form(&p, &p) + 1.0).abs() < 1e-12);
        assert!((minkowski_form(&p, &p.antipode()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibration() {
        assert!((spacing_constant::<f64>() - 0.5).abs() < 1e-15);
        assert!((spacing_constant::<f32>() - 0.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn roundtrip_circles(cx in -10.0..10.0f64, cy in -10.0..10.0f64, r in 0.01..20.0f64, ccw: bool) {
            let c = OrientedCircleLine::circle(P::new(cx, cy), r, ccw);
            let p = circle_to_point(&c);
            prop_assert!((p.q() + 1.0).abs() < 1e-12 * (1.0 + p.t.abs()).powi(2));
            match point_to_circle(&p).unwrap() {
                OrientedCircleLine::Circle { center, radius, ccw: o } => {
                    prop_assert!((center - P::new(cx, cy)).norm() < 1e-10 * (1.0 + r));
                    prop_assert!((radius - r).abs() < 1e-10 * r);
                    prop_assert_eq!(o, ccw);
                }
                other => prop_assert!(false, "{:?}", other),
            }
            let rev = circle_to_point(&c.reversed());
            prop_assert_eq!(rev, p.antipode());
        }

        #[test]
        fn roundtrip_points(x in -3.0..3.0f64, y in -3.0..3.0f64, z in -3.0..3.0f64, up: bool) {
            // t from the quadric, either sign
            let t2 = x * x + y * y + z * z - 1.0;
            prop_assume!(t2 >= 0.0 && (x * x + y * y) > 1e-3);
            let t = if up { t2.sqrt() } else { -t2.sqrt() };
            prop_assume!((t + z).abs() > 1e-6);
            let p = DeSitterPoint::new(t, x, y, z);
            let back = circle_to_point(&point_to_circle(&p).unwrap());
            for (a, b) in back.coords().iter().zip(p.coords()) {
                prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn roundtrip_lines(theta in -3.1..3.1f64, off in -5.0..5.0f64) {
            let n = P::from_angle(theta);
            let l = OrientedCircleLine::Line { normal: n, offset: off };
            match point_to_circle(&circle_to_point(&l)).unwrap() {
                OrientedCircleLine::Line { normal, offset } => {
                    prop_assert!((normal - n).norm() < 1e-12 && (offset - off).abs() < 1e-12);
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn double_bubble_triples_are_antipodal() {
        let c = double_bubble(1.0, 0.6).unwrap();
        let t = junction_triples(&c).unwrap();
        assert_eq!(t.len(), 2);
        for (e, _) in t[0].edges {
            let i = t[0].edges.iter().position(|x| x.0 == e).unwrap();
            let j = t[1].edges.iter().position(|x| x.0 == e).unwrap();
            let s = Vector4::from(t[0].points[i].coords()) + Vector4::from(t[1].points[j].coords());
            assert!(s.norm() < 1e-12);
        }
    }

    #[test]
    fn triple_bubble_counts() {
        let c = symmetric_triple_bubble(1.0).unwrap();
        let t = junction_triples(&c).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.iter().map(|x| x.points.len()).sum::<usize>(), 12);
        let r = verify_correspondence(&c, 1e-8).unwrap();
        assert_eq!(r.antipodality.len(), 6);
    }

    #[test]
    fn equilibrium_presets_pass() {
        for c in [
            double_bubble(1.0, 0.6).unwrap(),
            symmetric_triple_bubble(1.0).unwrap(),
            four_bubble(1.0, 0.8, 0.2, 0.25).unwrap(),
            two_lens(1.0, 0.3).unwrap(),
            necklace(7, 0.03).unwrap(),
            flower(1.0, 0.9, 0.05).unwrap(),
        ] {
            let r = verify_correspondence(&c, 1e-8).unwrap();
            assert!(r.pass, "{} {} {}", r.max_collinearity, r.max_spacing, r.max_antipodality);
        }
    }

    #[test]
    fn quasi_presets_fail_collinearity_only() {
        for kind in [QuasiKind::TwoLensRecurved, QuasiKind::FourStretched] {
            let r = verify_correspondence(&quasi_variant(kind, 0.1).unwrap(), 1e-8).unwrap();
            assert!(r.evenly_spaced(), "{}", r.max_spacing);
            assert!(!r.collinear());
            assert!(r.max_antipodality < 1e-10);
        }
    }

    #[test]
    fn rotation_preserves_forms() {
        let c = four_bubble(1.0, 0.8, 0.2, 0.25).unwrap();
        let a = verify_correspondence(&c, 1e-8).unwrap();
        let b = verify_correspondence(&c.transformed(1.0, 0.8, P::new(0.0, 0.0)), 1e-8).unwrap();
        for (x, y) in a.junctions.iter().zip(&b.junctions) {
            for (f, g) in x.forms.iter().zip(&y.forms) {
                assert!((f - g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mobius_images_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = symmetric_triple_bubble(1.0).unwrap();
        for _ in 0..5 {
            let m = MobiusMap::random_off_disc(&mut rng, c.centroid(), 2.0 * c.diameter());
            let img = mobius_image(&c, &m).unwrap();
            assert!(verify_correspondence(&img, 1e-8).unwrap().pass);
        }
    }

    #[test]
    fn perturbation_defects_scale_linearly() {
        let c = four_bubble(1.0, 0.8, 0.2, 0.25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = |eps: f64, rng: &mut ChaCha8Rng| {
            let s: Vec<f64> = c.state().iter().map(|x| x + eps * rng.gen_range(-1.0..1.0)).collect();
            let r = verify_correspondence(&c.with_state(&s), 1e-8).unwrap();
            r.max_collinearity.max(r.max_spacing)
        };
        use rand::Rng;
        let (a, b) = (noise(1e-3, &mut rng), noise(1e-4, &mut rng));
        assert!(a > 1e-4, "{a}");
        assert!((a / b).log10() > 0.7 && (a / b).log10() < 1.3, "{a} {b}");
    }
}
