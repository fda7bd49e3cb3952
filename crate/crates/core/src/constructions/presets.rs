use std::f64::consts::PI;

use crate::cluster::{Cluster, EdgeRecord, P2};
use crate::error::{Error, Result};
use crate::geometry::{segment_area, Arc};

use super::basic::double_bubble;
use super::decorate::four_bubble;

/// A bubble of radius `radius` carrying two small bubbles ("lenses") of
/// outer radii `lens1`, `lens2` on its boundary, centered in the directions
/// `angle1`, `angle2` from the big center (origin).
///
/// Each lens with the big bubble is locally a double bubble, so any
/// placement is an equilibrium as long as the lenses stay apart.
pub fn two_lens_at(radius: f64, lens: [(f64, f64); 2]) -> Result<Cluster> {
    if !(radius > 0.0) || lens.iter().any(|l| !(l.0 > 0.0)) {
        return Err(Error::Domain("radii must be positive".into()));
    }
    let mut lens = lens;
    lens.sort_by(|a, b| a.1.rem_euclid(2.0 * PI).total_cmp(&b.1.rem_euclid(2.0 * PI)));
    // local double bubbles, big bubble centered at the origin
    let mut pieces = Vec::new();
    for &(r, angle) in &lens {
        let db = double_bubble(radius, r)?;
        let c1 = match db.arc(1).properties()?.carrier {
            crate::geometry::OrientedCircleLine::Circle { center, .. } => center,
            _ => unreachable!("outer arcs are circles"),
        };
        // lens center sits at angle pi from c1 in the double bubble frame
        pieces.push(db.transformed(1.0, 0.0, -c1).transformed(1.0, angle - PI, P2::zero()));
    }
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for (k, db) in pieces.iter().enumerate() {
        let (a, b) = (vertices.len(), vertices.len() + 1);
        vertices.extend_from_slice(db.vertices());
        let lens_id = k + 2;
        let e = db.edges();
        // interface (big bubble = db region 1 on the left) and lens outer arc
        edges.push(EdgeRecord { tail: a, head: b, bulge: e[0].bulge, left: 1, right: lens_id });
        edges.push(EdgeRecord { tail: b, head: a, bulge: e[2].bulge, left: 0, right: lens_id });
    }
    // big-circle arcs from the second vertex of a lens to the first of the next
    for k in 0..2 {
        let from = 2 * k + 1;
        let to = 2 * ((k + 1) % 2);
        let arc = Arc::on_circle(P2::zero(), vertices[from], vertices[to], true);
        let ok = Arc::on_circle(P2::zero(), vertices[to - to % 2], vertices[from], true).half_angle().is_ok();
        if !ok || arc.half_angle()? > 0.0 {
            return Err(Error::TopologyBreakdown("lenses overlap".into()));
        }
        edges.push(EdgeRecord { tail: from, head: to, bulge: arc.bulge, left: 1, right: 0 });
    }
    let out = Cluster::new(vertices, edges, 3)?;
    let r = out.validate_with(true, 48);
    if !r.is_valid() {
        return Err(Error::TopologyBreakdown(r.failures().map(|f| f.name).collect::<Vec<_>>().join(", ")));
    }
    Ok(out)
}

/// Symmetric two-lens cluster: lenses of radius `lens` at the top and the
/// bottom of a bubble of radius `radius`.
pub fn two_lens(radius: f64, lens: f64) -> Result<Cluster> {
    two_lens_at(radius, [(lens, PI / 2.0), (lens, -PI / 2.0)])
}

/// Pulls the two halves `{x.n > 0}` and `{x.n < 0}` apart by `s` along the
/// unit direction `n`, keeping every edge's turning half-angle. Edges whose
/// chords cross the axis get longer (or shorter) and change curvature while
/// the junction angles stay put.
pub fn stretch(c: &Cluster, n: P2, s: f64) -> Result<Cluster> {
    if s == 0.0 {
        return Ok(c.clone());
    }
    let scale = c.diameter();
    let mut v = c.vertices().to_vec();
    for p in v.iter_mut() {
        let side = p.dot(n);
        if side.abs() < 1e-9 * scale {
            return Err(Error::Domain("a vertex lies on the stretching axis".into()));
        }
        *p += n * (0.5 * s * side.signum());
    }
    let mut edges = c.edges().to_vec();
    for (i, r) in edges.iter_mut().enumerate() {
        let phi = c.arc(i).half_angle()?;
        r.bulge = segment_area(v[r.tail].distance(v[r.head]), phi);
    }
    Cluster::with_labels(v, edges, c.labels().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiKind {
    /// Two-lens cluster with the side arcs between the lenses replaced by
    /// arcs of a different curvature.
    TwoLensRecurved,
    /// Doubly symmetric 4-bubble with a longer middle edge and flatter top
    /// and bottom arcs.
    FourStretched,
}

/// Quasi-equilibria obtained by stretching a doubly symmetric equilibrium.
/// `s = 0` returns the equilibrium itself.
pub fn quasi_variant(kind: QuasiKind, s: f64) -> Result<Cluster> {
    match kind {
        QuasiKind::TwoLensRecurved => stretch(&two_lens(1.0, 0.3)?, P2::new(0.0, 1.0), s),
        QuasiKind::FourStretched => {
            let base = four_bubble(1.0, 1.0, 0.2, 0.2)?;
            stretch(&base, P2::new(1.0, 0.0), s)
        }
    }
}

/// Vertices of an equilateral `k`-gon of side 1, counterclockwise. With
/// `slide = 0` the polygon is regular; otherwise it is pushed along a
/// fixed non-symmetric deformation and projected back onto unit sides.
pub fn equilateral_polygon(k: usize, slide: f64) -> Result<Vec<P2>> {
    let big_r = 1.0 / (2.0 * (PI / k as f64).sin());
    let mut pts: Vec<P2> = (0..k).map(|i| P2::from_angle(2.0 * PI * i as f64 / k as f64) * big_r).collect();
    if slide == 0.0 {
        return Ok(pts);
    }
    for (i, p) in pts.iter_mut().enumerate() {
        let th = 2.0 * PI * i as f64 / k as f64;
        let w = (2.0 * th + 0.3).cos() + 0.5 * (3.0 * th - 0.7).sin();
        *p += P2::from_angle(th) * (slide * w);
    }
    // Gauss-Newton projection onto |p_{i+1} - p_i| = 1 (minimum-norm steps)
    for _ in 0..100 {
        let r: Vec<f64> = (0..k).map(|i| pts[(i + 1) % k].distance(pts[i]) - 1.0).collect();
        if r.iter().all(|x| x.abs() < 1e-15) {
            break;
        }
        let mut j = nalgebra::DMatrix::<f64>::zeros(k, 2 * k);
        for i in 0..k {
            let n = i + 1 - if i + 1 == k { k } else { 0 };
            let d = (pts[n] - pts[i]) * (1.0 / pts[n].distance(pts[i]));
            j[(i, 2 * n)] += d.x;
            j[(i, 2 * n + 1)] += d.y;
            j[(i, 2 * i)] -= d.x;
            j[(i, 2 * i + 1)] -= d.y;
        }
        let jjt = &j * j.transpose();
        let y = jjt
            .cholesky()
            .ok_or_else(|| Error::Domain("polygon projection is singular".into()))?
            .solve(&nalgebra::DVector::from_vec(r));
        let dx = j.transpose() * y;
        for i in 0..k {
            pts[i] -= P2::new(dx[2 * i], dx[2 * i + 1]);
        }
    }
    Ok(pts)
}

/// Necklace of `k` unit-curvature bubbles around a zero-pressure chamber.
///
/// Bubble `i` is the unit disk about the `i`-th vertex of an equilateral
/// polygon of side 1, cut by the common chords with its neighbours.
/// Bubbles are regions `1..=k`, the chamber is region `k + 1`.
///
/// The chamber's boundary turns by `k pi / 3 - 2 pi` along its arcs, so a
/// chamber of positive size needs `k >= 7`; smaller `k` is rejected.
pub fn necklace(k: usize, slide: f64) -> Result<Cluster> {
    if k < 7 {
        return Err(Error::Domain(format!(
            "no necklace of {k} unit-curvature bubbles around a zero-pressure chamber exists: \
             the chamber's arcs would have to turn through k*pi/3 - 2*pi <= 0"
        )));
    }
    let c = equilateral_polygon(k, slide)?;
    let h = 3f64.sqrt() / 2.0;
    let mut outer = Vec::with_capacity(k);
    let mut inner = Vec::with_capacity(k);
    for i in 0..k {
        let (a, b) = (c[i], c[(i + 1) % k]);
        let d = b - a;
        let nu = P2::new(d.y, -d.x); // outward for a counterclockwise polygon
        let m = (a + b) * 0.5;
        outer.push(m + nu * h);
        inner.push(m - nu * h);
    }
    // vertices: outer_i = 2i, inner_i = 2i + 1 (pair i joins bubbles i, i+1)
    let mut vertices = Vec::with_capacity(2 * k);
    for i in 0..k {
        vertices.push(outer[i]);
        vertices.push(inner[i]);
    }
    let chamber = k + 1;
    let bubble = |i: usize| i % k + 1;
    let mut edges = Vec::with_capacity(3 * k);
    for i in 0..k {
        edges.push(EdgeRecord { tail: 2 * i, head: 2 * i + 1, bulge: 0.0, left: bubble(i), right: bubble(i + 1) });
    }
    for i in 0..k {
        let prev = (i + k - 1) % k;
        let o = Arc::on_circle(c[i], outer[prev], outer[i], true);
        edges.push(EdgeRecord { tail: 2 * prev, head: 2 * i, bulge: o.bulge, left: bubble(i), right: 0 });
        let q = Arc::on_circle(c[i], inner[prev], inner[i], false);
        edges.push(EdgeRecord { tail: 2 * prev + 1, head: 2 * i + 1, bulge: q.bulge, left: chamber, right: bubble(i) });
    }
    let out = Cluster::new(vertices, edges, k + 1)?;
    let r = out.validate_with(true, 32);
    if !r.is_valid() {
        return Err(Error::TopologyBreakdown(r.failures().map(|f| f.name).collect::<Vec<_>>().join(", ")));
    }
    Ok(out)
}

/// Four-fold symmetric flower: a four-sided central bubble with corners at
/// distance `inner` on the diagonals, straight spokes out to distance
/// `outer`, and four petals. Petal `j + 1` lies between spokes `j`, `j + 1`
/// (at 45 + 90 j degrees); the center is region 5.
pub fn flower_symmetric(inner: f64, outer: f64) -> Result<Cluster> {
    if !(inner > 0.0 && outer > inner) {
        return Err(Error::Domain("need 0 < inner < outer".into()));
    }
    let dir = |j: usize| P2::from_angle(PI / 4.0 + PI / 2.0 * j as f64);
    let mut vertices = Vec::new();
    for j in 0..4 {
        vertices.push(dir(j) * inner);
        vertices.push(dir(j) * outer);
    }
    let petal = |j: usize| j % 4 + 1;
    let mut edges = Vec::new();
    for j in 0..4 {
        edges.push(EdgeRecord { tail: 2 * j, head: 2 * j + 1, bulge: 0.0, left: petal(j), right: petal(j + 3) });
    }
    for j in 0..4 {
        let n = (j + 1) % 4;
        let center = Arc::from_half_angle(vertices[2 * j], vertices[2 * n], -PI / 12.0);
        edges.push(EdgeRecord { tail: 2 * j, head: 2 * n, bulge: center.bulge, left: 5, right: petal(j) });
        let rim = Arc::from_half_angle(vertices[2 * j + 1], vertices[2 * n + 1], -5.0 * PI / 12.0);
        edges.push(EdgeRecord { tail: 2 * j + 1, head: 2 * n + 1, bulge: rim.bulge, left: petal(j), right: 0 });
    }
    Cluster::new(vertices, edges, 5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify, pressure_report, pressures, Verdict};
    use crate::tolerance::TolerancePolicy;

    #[test]
    fn two_lens_is_an_equilibrium() {
        for c in [two_lens(1.0, 0.3).unwrap(), two_lens_at(1.0, [(0.2, 0.3), (0.35, 2.5)]).unwrap()] {
            let r = c.validate();
            assert!(r.is_valid(), "{:?}", r.failures().collect::<Vec<_>>());
            assert_eq!(classify(&c, 1e-9).unwrap().verdict, Verdict::Equilibrium);
        }
        assert!(matches!(two_lens_at(1.0, [(0.5, 0.0), (0.5, 0.3)]), Err(Error::TopologyBreakdown(_))));
    }

    #[test]
    fn quasi_variants() {
        let same = quasi_variant(QuasiKind::TwoLensRecurved, 0.0).unwrap();
        assert_eq!(same, two_lens(1.0, 0.3).unwrap());
        for kind in [QuasiKind::TwoLensRecurved, QuasiKind::FourStretched] {
            let c = quasi_variant(kind, 0.3).unwrap();
            assert!(c.validate().is_valid());
            let k = classify(&c, 1e-9).unwrap();
            assert_eq!(k.verdict, Verdict::QuasiEquilibrium, "{kind:?} {k:?}");
            assert!(k.angle_sup < 1e-9);
            assert!(matches!(pressures(&c, &TolerancePolicy::default()), Err(Error::PathInconsistent { .. })));
        }
    }

    #[test]
    fn necklace_pressures() {
        for (k, slide) in [(7, 0.0), (8, 0.0), (7, 0.05)] {
            let c = necklace(k, slide).unwrap();
            assert_eq!(classify(&c, 1e-9).unwrap().verdict, Verdict::Equilibrium);
            let p = pressure_report(&c).unwrap();
            for i in 1..=k {
                assert!((p.pressures[i] - 1.0).abs() < 1e-12);
            }
            assert!(p.pressures[k + 1].abs() < 1e-12);
        }
        assert!(matches!(necklace(6, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn necklace_bubble_areas_do_not_depend_on_the_polygon() {
        let a = necklace(7, 0.0).unwrap().region_areas().unwrap();
        let b = necklace(7, 0.03).unwrap().region_areas().unwrap();
        let bubble = PI / 3.0 + 3f64.sqrt() / 2.0;
        for i in 0..7 {
            assert!((a[i] - bubble).abs() < 1e-12 && (b[i] - bubble).abs() < 1e-12);
        }
        assert!(b[7] < a[7]);
    }

    #[test]
    fn symmetric_flower_is_an_equilibrium() {
        for (a, b) in [(0.5, 1.5), (0.3, 1.0), (1.0, 1.4)] {
            let c = flower_symmetric(a, b).unwrap();
            let r = c.validate_with(true, 32);
            assert!(r.is_valid(), "{:?}", r.failures().collect::<Vec<_>>());
            assert_eq!(classify(&c, 1e-9).unwrap().verdict, Verdict::Equilibrium);
        }
    }
}
