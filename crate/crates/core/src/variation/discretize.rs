use crate::cluster::{Cluster, EXTERIOR, P2};
use crate::error::{Error, Result};

/// A cluster with every arc replaced by an inscribed polyline.
///
/// Points `0..v` are the junctions (same indices as the cluster's vertices);
/// the interior points of each edge follow in edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<P2>,
    /// Unit normal (left of the edge direction) at each point; zero at
    /// junctions.
    pub normals: Vec<P2>,
    /// Owning edge and turning fraction of each interior point (`None` at
    /// junctions).
    pub along: Vec<Option<(usize, f64)>>,
    /// Point indices of each edge from tail to head.
    pub edge_points: Vec<Vec<usize>>,
    /// Region of each edge on its left and right.
    pub sides: Vec<(usize, usize)>,
    pub junctions: usize,
    pub regions: usize,
}

/// Samples every edge at `m + 1` points equally spaced in angle.
pub fn discretize(c: &Cluster, m: usize) -> Result<Polyline> {
    if m < 8 {
        return Err(Error::Domain(format!("need at least 8 points per edge, got {m}")));
    }
    let mut points = c.vertices().to_vec();
    let mut normals = vec![P2::zero(); points.len()];
    let mut along = vec![None; points.len()];
    let mut edge_points = Vec::with_capacity(c.edge_count());
    for (e, r) in c.edges().iter().enumerate() {
        let arc = c.arc(e);
        let phi = arc.half_angle()?;
        let dir = arc.chord() * (1.0 / arc.chord_length());
        let samples = arc.sample(m)?;
        let mut idx = Vec::with_capacity(m + 1);
        idx.push(r.tail);
        for (i, p) in samples.iter().enumerate().take(m).skip(1) {
            let s = i as f64 / m as f64;
            idx.push(points.len());
            points.push(*p);
            normals.push(dir.rotated(phi * (1.0 - 2.0 * s)).perp());
            along.push(Some((e, s)));
        }
        idx.push(r.head);
        edge_points.push(idx);
    }
    Ok(Polyline {
        points,
        normals,
        along,
        edge_points,
        sides: c.edges().iter().map(|r| (r.left, r.right)).collect(),
        junctions: c.vertex_count(),
        regions: c.region_count(),
    })
}

impl Polyline {
    /// Unit tangent (edge direction) at an interior point.
    pub fn tangent(&self, k: usize) -> P2 {
        let n = self.normals[k];
        P2::new(n.y, -n.x)
    }

    /// Directed segments `(a, b, edge)` in edge order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edge_points.iter().enumerate().flat_map(|(e, idx)| idx.windows(2).map(move |w| (w[0], w[1], e)))
    }

    pub fn perimeter(&self) -> f64 {
        self.segments().map(|(a, b, _)| self.points[a].distance(self.points[b])).sum()
    }

    /// Shoelace areas of the interior regions (index 0 is the exterior and
    /// reported as 0). Each edge contributes to the region on its left with
    /// a plus sign and to the region on its right with a minus sign.
    pub fn region_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.regions + 1];
        for (a, b, e) in self.segments() {
            let w = 0.5 * self.points[a].cross(self.points[b]);
            let (l, r) = self.sides[e];
            out[l] += w;
            out[r] -= w;
        }
        out[EXTERIOR] = 0.0;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::EdgeRecord;
    use std::f64::consts::PI;

    fn half_disk() -> Cluster {
        // a semicircle over a diameter, closed into a 2-region cluster by a
        // second semicircle
        let v = vec![P2::new(-1.0, 0.0), P2::new(1.0, 0.0)];
        let e = vec![
            EdgeRecord { tail: 0, head: 1, bulge: 0.0, left: 1, right: 2 },
            EdgeRecord { tail: 1, head: 0, bulge: -PI / 2.0, left: 1, right: 0 },
            EdgeRecord { tail: 0, head: 1, bulge: -PI / 2.0, left: 2, right: 0 },
        ];
        Cluster::new(v, e, 2).unwrap()
    }

    #[test]
    fn straight_edge_is_even() {
        let p = discretize(&half_disk(), 8).unwrap();
        let idx = &p.edge_points[0];
        assert_eq!(idx.len(), 9);
        for (k, &i) in idx.iter().enumerate() {
            let q = p.points[i];
            assert!((q.x - (-1.0 + 0.25 * k as f64)).abs() < 1e-15 && q.y.abs() < 1e-15);
        }
    }

    #[test]
    fn junctions_are_shared() {
        let c = half_disk();
        let p = discretize(&c, 16).unwrap();
        for (e, r) in c.edges().iter().enumerate() {
            assert_eq!(p.edge_points[e][0], r.tail);
            assert_eq!(*p.edge_points[e].last().unwrap(), r.head);
        }
        assert_eq!(p.points.len(), 2 + 3 * 15);
    }

    #[test]
    fn normals_point_left() {
        let p = discretize(&half_disk(), 16).unwrap();
        // edge 1 runs ccw over the top half, so left is inward
        for &i in &p.edge_points[1][1..16] {
            let q = p.points[i];
            assert!((p.normals[i] + q).norm() < 1e-12);
        }
    }

    #[test]
    fn semicircle_errors_at_64() {
        let p = discretize(&half_disk(), 64).unwrap();
        let a = p.region_areas();
        assert!((a[1] - PI / 2.0).abs() < 1e-3 && (a[2] - PI / 2.0).abs() < 1e-3, "{a:?}");
        let upper: f64 = p.edge_points[1].windows(2).map(|w| p.points[w[0]].distance(p.points[w[1]])).sum();
        assert!((upper - PI).abs() < 1e-3);
    }

    #[test]
    fn second_order_convergence() {
        let c = half_disk();
        let err = |m| {
            let p = discretize(&c, m).unwrap();
            ((p.perimeter() - c.perimeter().unwrap()).abs(), (p.region_areas()[1] - PI / 2.0).abs())
        };
        let (p1, a1) = err(32);
        let (p2, a2) = err(64);
        let (sp, sa) = ((p1 / p2).log2(), (a1 / a2).log2());
        assert!((sp - 2.0).abs() < 0.05 && (sa - 2.0).abs() < 0.05, "slopes {sp} {sa}");
    }
}
