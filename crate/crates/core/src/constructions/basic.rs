use std::f64::consts::{FRAC_PI_2, PI};

use crate::cluster::{Cluster, EdgeRecord, P2};
use crate::equilibrium::{solve, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::{Arc, MobiusMap};

fn edge(a: &Arc<f64>, tail: usize, head: usize, left: usize, right: usize) -> EdgeRecord {
    EdgeRecord { tail, head, bulge: a.bulge, left, right }
}

/// Distance between the outer centers of a double bubble with outer radii
/// `r1`, `r2` (120 degree junctions).
pub fn double_bubble_center_distance(r1: f64, r2: f64) -> f64 {
    (r1 * r1 + r2 * r2 - r1 * r2).sqrt()
}

/// Standard double bubble: bubble 1 (outer radius `r1`) on the right,
/// bubble 2 on the left, vertices at `(0, ±h)`.
pub fn double_bubble(r1: f64, r2: f64) -> Result<Cluster> {
    if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) {
        return Err(Error::Domain("double bubble radii must be positive".into()));
    }
    let d = double_bubble_center_distance(r1, r2);
    let x1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - x1 * x1).max(0.0).sqrt();
    let (top, bot) = (P2::new(0.0, h), P2::new(0.0, -h));
    let c1 = P2::new(x1, 0.0);
    let c2 = P2::new(x1 - d, 0.0);
    // interface: bubble 1 on the left of top -> bot, so kappa = p2 - p1
    let kappa = 1.0 / r2 - 1.0 / r1;
    let mid = Arc::from_half_angle(top, bot, (kappa * h).clamp(-1.0, 1.0).asin());
    let outer1 = Arc::on_circle(c1, top, bot, false);
    let outer2 = Arc::on_circle(c2, bot, top, false);
    Cluster::new(
        vec![top, bot],
        vec![edge(&mid, 0, 1, 1, 2), edge(&outer1, 0, 1, 0, 1), edge(&outer2, 1, 0, 0, 2)],
        2,
    )
}

/// Area of each bubble of the symmetric triple bubble with spoke length `l`.
pub fn symmetric_triple_area(l: f64) -> f64 {
    l * l * (3f64.sqrt() / 4.0 + 3.0 * PI / 8.0)
}

/// Three-fold symmetric triple bubble: straight spokes of length `l` from
/// the origin at 90, 210 and 330 degrees, outer edges semicircles.
///
/// Vertex 0 is the center, vertex `k + 1` the end of spoke `k`; bubble
/// `k + 1` lies between spokes `k` and `k + 1`.
pub fn symmetric_triple_bubble(l: f64) -> Result<Cluster> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain("spoke length must be positive".into()));
    }
    let ends: Vec<P2> = (0..3).map(|k| P2::from_angle(FRAC_PI_2 + 2.0 * PI * k as f64 / 3.0) * l).collect();
    let mut v = vec![P2::zero()];
    v.extend(&ends);
    let mut e = Vec::new();
    for k in 0..3 {
        e.push(EdgeRecord { tail: 0, head: k + 1, bulge: 0.0, left: k + 1, right: (k + 2) % 3 + 1 });
    }
    for k in 0..3 {
        let a = Arc::from_half_angle(ends[k], ends[(k + 1) % 3], -FRAC_PI_2);
        e.push(edge(&a, k + 1, (k + 1) % 3 + 1, k + 1, 0));
    }
    Cluster::new(v, e, 3)
}

/// Image of a cluster under a Möbius map whose pole lies in the exterior.
pub fn mobius_image(c: &Cluster, m: &MobiusMap<f64>) -> Result<Cluster> {
    let vertices = c.vertices().iter().map(|&p| m.apply_point(p)).collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::with_capacity(c.edge_count());
    for (i, r) in c.edges().iter().enumerate() {
        let a = m.apply_arc(&c.arc(i))?;
        edges.push(EdgeRecord { bulge: a.bulge, ..*r });
    }
    let out = Cluster::with_labels(vertices, edges, c.labels().to_vec())?;
    // vertices must be bit-identical to the arc endpoints
    let report = out.validate();
    if !report.is_valid() {
        return Err(Error::Domain(format!(
            "Möbius image is not a cluster (is the pole inside a bubble?): {}",
            report.failures().map(|f| f.name).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(out)
}

/// Triple bubble whose three outer vertices are the given points: the
/// Möbius image of the symmetric triple bubble.
pub fn triple_bubble_through(points: [P2; 3]) -> Result<Cluster> {
    let base = symmetric_triple_bubble(1.0)?;
    let src = [base.vertices()[1], base.vertices()[2], base.vertices()[3]];
    let m = MobiusMap::from_three_points(src, points)?;
    mobius_image(&base, &m)
}

/// Triple bubble with the given areas, solved from the symmetric cluster
/// of the same mean area.
pub fn triple_bubble(areas: [f64; 3], opts: &SolveOptions) -> Result<Cluster> {
    if areas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Domain("areas must be positive".into()));
    }
    let mean = areas.iter().sum::<f64>() / 3.0;
    let base = symmetric_triple_bubble((mean / symmetric_triple_area(1.0)).sqrt())?;
    if areas.iter().all(|&a| (a - mean).abs() <= 1e-15 * mean) {
        return Ok(base);
    }
    Ok(solve(&base, &areas, opts)?.cluster)
}

/// Three circular arcs meeting pairwise at 120 degrees, traversed
/// counterclockwise; `arcs[k]` runs from `vertices[k]` to `vertices[k + 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcTriangle {
    pub vertices: [P2; 3],
    pub arcs: [Arc<f64>; 3],
}

impl ArcTriangle {
    /// Equilateral instance with circumradius `r` centered at the origin,
    /// vertex 0 at angle `rotation`.
    pub fn equilateral(r: f64, rotation: f64) -> Self {
        let v: [P2; 3] = std::array::from_fn(|k| P2::from_angle(rotation + 2.0 * PI * k as f64 / 3.0) * r);
        Self::from_vertices(v)
    }

    /// Equilateral-picture arcs on arbitrary vertices (bulging outward by
    /// a half-angle of 30 degrees).
    fn from_vertices(v: [P2; 3]) -> Self {
        let arcs = std::array::from_fn(|k| Arc::from_half_angle(v[k], v[(k + 1) % 3], -PI / 6.0));
        Self { vertices: v, arcs }
    }

    pub fn mobius(&self, m: &MobiusMap<f64>) -> Result<Self> {
        let vertices = [m.apply_point(self.vertices[0])?, m.apply_point(self.vertices[1])?, m.apply_point(self.vertices[2])?];
        let arcs = [m.apply_arc(&self.arcs[0])?, m.apply_arc(&self.arcs[1])?, m.apply_arc(&self.arcs[2])?];
        Ok(Self { vertices, arcs })
    }

    /// Interior angle at each vertex (between the incoming arc reversed and
    /// the outgoing arc).
    pub fn interior_angles(&self) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let outgoing = self.arcs[k].properties()?.tangent_at_tail;
            let incoming = -self.arcs[(k + 2) % 3].properties()?.tangent_at_head;
            out[k] = outgoing.cross(incoming).atan2(outgoing.dot(incoming)).abs();
        }
        Ok(out)
    }

    /// Chart coordinates `(x_0, y_0, .., x_2, y_2, b_0, b_1, b_2)`.
    pub fn state(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.vertices.iter().flat_map(|p| [p.x, p.y]).collect();
        s.extend(self.arcs.iter().map(|a| a.bulge));
        s
    }

    pub fn with_state(s: &[f64]) -> Self {
        let v: [P2; 3] = std::array::from_fn(|k| P2::new(s[2 * k], s[2 * k + 1]));
        let arcs = std::array::from_fn(|k| Arc::new(v[k], v[(k + 1) % 3], s[6 + k]));
        Self { vertices: v, arcs }
    }
}

/// Arc triangle of circumradius `scale` deformed by the map
/// `z -> z / (1 + w z)` with `w = shape`, which stays a 120 degree triangle.
pub fn arc_triangle(scale: f64, shape: P2) -> Result<ArcTriangle> {
    let base = ArcTriangle::equilateral(scale, FRAC_PI_2);
    if shape == P2::zero() {
        return Ok(base);
    }
    let one = num_complex::Complex::new(1.0, 0.0);
    let zero = num_complex::Complex::new(0.0, 0.0);
    let m = MobiusMap::new(one, zero, shape.to_complex(), one)?;
    base.mobius(&m)
}
