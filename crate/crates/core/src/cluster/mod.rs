//! The cluster chart: vertices plus signed bulge areas of the edges, with
//! region labels on both sides of every edge.
//!
//! Region 0 is always the exterior. Interior regions are `1..=n`. Each
//! geometric edge is stored once; traversing it against its stored
//! orientation flips the sign of its bulge.

mod areas;
mod codec;
mod svg;
mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Arc, Point};

pub use codec::{from_json, json_string, to_json, ClusterDocument};
pub use svg::{to_svg, SvgStyle};
pub use validate::{Check, ValidationReport};

pub type P2 = Point<f64>;

/// Id of the exterior region.
pub const EXTERIOR: usize = 0;

/// One oriented arc between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub tail: usize,
    pub head: usize,
    /// Signed segment area; positive = the arc bulges toward `left`.
    pub bulge: f64,
    pub left: usize,
    pub right: usize,
}

/// An edge traversed in a given direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub edge: usize,
    pub forward: bool,
}

/// Closed boundary walk of one region, with the region on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryWalk {
    pub region: usize,
    pub steps: Vec<HalfEdge>,
}

/// A planar cluster of fixed combinatorial type.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    vertices: Vec<P2>,
    edges: Vec<EdgeRecord>,
    labels: Vec<String>,
}

impl Cluster {
    /// Builds a cluster with `regions` interior regions. Only index bounds are
    /// checked here; see [`Cluster::validate`] for the full invariants.
    pub fn new(vertices: Vec<P2>, edges: Vec<EdgeRecord>, regions: usize) -> Result<Self> {
        let labels = std::iter::once("exterior".to_string())
            .chain((1..=regions).map(|i| format!("bubble {i}")))
            .collect();
        Self::with_labels(vertices, edges, labels)
    }

    pub fn with_labels(vertices: Vec<P2>, edges: Vec<EdgeRecord>, labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Structural("a cluster needs at least one interior region".into()));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertices.len() || e.head >= vertices.len() {
                return Err(Error::Structural(format!("edge {i} references a missing vertex")));
            }
            if e.left >= labels.len() || e.right >= labels.len() {
                return Err(Error::Structural(format!("edge {i} references a missing region")));
            }
        }
        Ok(Self { vertices, edges, labels })
    }

    pub fn vertices(&self) -> &[P2] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of interior regions `n`.
    pub fn region_count(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Chart dimension `2v + e`.
    pub fn chart_dim(&self) -> usize {
        2 * self.vertices.len() + self.edges.len()
    }

    pub fn arc(&self, e: usize) -> Arc<f64> {
        let r = &self.edges[e];
        Arc::new(self.vertices[r.tail], self.vertices[r.head], r.bulge)
    }

    pub fn half_arc(&self, h: HalfEdge) -> Arc<f64> {
        let a = self.arc(h.edge);
        if h.forward {
            a
        } else {
            a.reversed()
        }
    }

    pub fn half_start(&self, h: HalfEdge) -> usize {
        let r = &self.edges[h.edge];
        if h.forward {
            r.tail
        } else {
            r.head
        }
    }

    pub fn half_end(&self, h: HalfEdge) -> usize {
        let r = &self.edges[h.edge];
        if h.forward {
            r.head
        } else {
            r.tail
        }
    }

    /// Region on the left of a half-edge.
    pub fn half_left(&self, h: HalfEdge) -> usize {
        let r = &self.edges[h.edge];
        if h.forward {
            r.left
        } else {
            r.right
        }
    }

    pub fn half_right(&self, h: HalfEdge) -> usize {
        let r = &self.edges[h.edge];
        if h.forward {
            r.right
        } else {
            r.left
        }
    }

    /// Half-edges leaving vertex `v`, in edge order.
    pub fn outgoing(&self, v: usize) -> Vec<HalfEdge> {
        let mut out = Vec::with_capacity(3);
        for (i, e) in self.edges.iter().enumerate() {
            if e.tail == v {
                out.push(HalfEdge { edge: i, forward: true });
            }
            if e.head == v {
                out.push(HalfEdge { edge: i, forward: false });
            }
        }
        out
    }

    /// Outgoing half-edges at `v` sorted counterclockwise by tangent angle,
    /// starting from the smallest angle in `(-pi, pi]`.
    pub fn outgoing_ccw(&self, v: usize) -> Result<Vec<(HalfEdge, P2)>> {
        let mut out = self
            .outgoing(v)
            .into_iter()
            .map(|h| Ok((h, self.half_arc(h).properties()?.tangent_at_tail)))
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| a.1.angle().total_cmp(&b.1.angle()));
        Ok(out)
    }

    /// Boundary walk of every region (exterior first), derived from the
    /// region labels: each region has exactly one half-edge leaving and one
    /// arriving at every vertex it touches, and these chain into one cycle.
    pub fn boundary_walks(&self) -> Result<Vec<BoundaryWalk>> {
        let nreg = self.labels.len();
        let mut by_region: Vec<Vec<HalfEdge>> = vec![Vec::new(); nreg];
        for (i, e) in self.edges.iter().enumerate() {
            if e.left == e.right {
                return Err(Error::Structural(format!("edge {i} has the same region on both sides")));
            }
            by_region[e.left].push(HalfEdge { edge: i, forward: true });
            by_region[e.right].push(HalfEdge { edge: i, forward: false });
        }
        let mut walks = Vec::with_capacity(nreg);
        for (region, halves) in by_region.into_iter().enumerate() {
            if halves.is_empty() {
                return Err(Error::Structural(format!("region {region} has no boundary")));
            }
            let mut next_from = vec![None; self.vertices.len()];
            for &h in &halves {
                let s = self.half_start(h);
                if next_from[s].replace(h).is_some() {
                    return Err(Error::Structural(format!(
                        "region {region} leaves vertex {s} along two edges (inconsistent labels)"
                    )));
                }
            }
            let first = halves[0];
            let mut steps = vec![first];
            let mut cur = first;
            loop {
                let v = self.half_end(cur);
                let nxt = next_from[v].ok_or_else(|| {
                    Error::Structural(format!("boundary walk of region {region} is open at vertex {v}"))
                })?;
                if nxt == first {
                    break;
                }
                steps.push(nxt);
                cur = nxt;
                if steps.len() > halves.len() {
                    return Err(Error::Structural(format!("boundary walk of region {region} does not close")));
                }
            }
            if steps.len() != halves.len() {
                return Err(Error::Structural(format!(
                    "region {region} has {} boundary components",
                    if steps.len() < halves.len() { "several" } else { "inconsistent" }
                )));
            }
            walks.push(BoundaryWalk { region, steps });
        }
        Ok(walks)
    }

    /// Chart coordinates `(x_1, y_1, ..., x_v, y_v, b_1, ..., b_e)`.
    pub fn state(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.chart_dim());
        for p in &self.vertices {
            s.push(p.x);
            s.push(p.y);
        }
        s.extend(self.edges.iter().map(|e| e.bulge));
        s
    }

    /// Same combinatorics with new chart coordinates.
    pub fn with_state(&self, s: &[f64]) -> Self {
        assert_eq!(s.len(), self.chart_dim(), "chart vector has wrong length");
        let nv = self.vertices.len();
        let vertices = (0..nv).map(|i| P2::new(s[2 * i], s[2 * i + 1])).collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeRecord { bulge: s[2 * nv + i], ..*e })
            .collect();
        Self { vertices, edges, labels: self.labels.clone() }
    }

    pub fn with_vertices(&self, vertices: Vec<P2>) -> Self {
        assert_eq!(vertices.len(), self.vertices.len());
        Self { vertices, ..self.clone() }
    }

    /// Applies a similarity `p -> s R p + t` (bulges scale by `s^2`).
    pub fn transformed(&self, scale: f64, rotation: f64, shift: P2) -> Self {
        let vertices = self.vertices.iter().map(|&p| p.rotated(rotation) * scale + shift).collect();
        let edges = self.edges.iter().map(|e| EdgeRecord { bulge: e.bulge * scale * scale, ..*e }).collect();
        Self { vertices, edges, labels: self.labels.clone() }
    }

    /// Mirror image across the x-axis. Orientation reverses, so left and
    /// right labels swap and bulges keep their sign relative to the labels.
    pub fn mirrored(&self) -> Self {
        let vertices = self.vertices.iter().map(|p| P2::new(p.x, -p.y)).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeRecord { bulge: -e.bulge, left: e.right, right: e.left, ..*e })
            .collect();
        Self { vertices, edges, labels: self.labels.clone() }
    }

    /// Bounding-box diagonal of the arcs (sampled), the length scale used by
    /// every relative tolerance.
    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (P2::new(f64::INFINITY, f64::INFINITY), P2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        let mut add = |p: P2| {
            lo = P2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = P2::new(hi.x.max(p.x), hi.y.max(p.y));
        };
        for p in &self.vertices {
            add(*p);
        }
        for e in 0..self.edges.len() {
            if let Ok(pts) = self.arc(e).sample(16) {
                pts.into_iter().for_each(&mut add);
            }
        }
        hi.distance(lo)
    }

    /// Centroid of the vertices.
    pub fn centroid(&self) -> P2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(P2::zero(), |a, &p| a + p) * (1.0 / n)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Equal double bubble with unit outer radii, vertices at `(0, ±√3/2)`.
    pub fn equal_double_bubble() -> Cluster {
        let h = 3f64.sqrt() / 2.0;
        let cap = 2.0 * std::f64::consts::PI / 3.0 + 3f64.sqrt() / 4.0;
        let v = vec![P2::new(0.0, h), P2::new(0.0, -h)];
        let e = vec![
            EdgeRecord { tail: 0, head: 1, bulge: 0.0, left: 1, right: 2 },
            EdgeRecord { tail: 0, head: 1, bulge: cap, left: 0, right: 1 },
            EdgeRecord { tail: 1, head: 0, bulge: cap, left: 0, right: 2 },
        ];
        Cluster::new(v, e, 2).unwrap()
    }
}
