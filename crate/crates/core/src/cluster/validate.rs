use serde::Serialize;

use super::{Cluster, HalfEdge, P2};

/// Minimum vertex separation for an edge.
const MIN_CHORD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of every structural and geometric invariant check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub vertices: usize,
    pub edges: usize,
    pub regions: usize,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl Cluster {
    /// Checks every cluster invariant. With `disjointness` set, also scans
    /// all pairs of edges for crossings at `samples` points per edge.
    pub fn validate_with(&self, disjointness: bool, samples: usize) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name, problems: Vec<String>| {
            checks.push(Check { name, passed: problems.is_empty(), detail: problems.join("; ") });
        };
        let (v, e, n) = (self.vertex_count(), self.edge_count(), self.region_count());

        push(
            "finite",
            self.vertices
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_finite())
                .map(|(i, _)| format!("vertex {i} is not finite"))
                .chain(self.edges.iter().enumerate().filter(|(_, r)| !r.bulge.is_finite()).map(|(i, _)| format!("edge {i} bulge not finite")))
                .collect(),
        );

        push(
            "region_count",
            if n >= 2 { vec![] } else { vec![format!("n = {n}, need at least 2 regions")] },
        );

        push(
            "euler_counts",
            if n >= 1 && v == 2 * (n - 1) && e == 3 * (n - 1) {
                vec![]
            } else {
                vec![format!("v = {v}, e = {e}, n = {n}; expected v = {}, e = {}", 2 * n.saturating_sub(1), 3 * n.saturating_sub(1))]
            },
        );

        push(
            "degree_three",
            (0..v)
                .filter_map(|i| {
                    let d = self.outgoing(i).len();
                    (d != 3).then(|| format!("vertex {i} has degree {d}"))
                })
                .collect(),
        );

        push(
            "distinct_endpoints",
            self.edges
                .iter()
                .enumerate()
                .filter(|(_, r)| self.vertices[r.tail].distance(self.vertices[r.head]) <= MIN_CHORD)
                .map(|(i, _)| format!("edge {i} has coincident endpoints"))
                .collect(),
        );

        push(
            "two_sided",
            self.edges
                .iter()
                .enumerate()
                .filter(|(_, r)| r.left == r.right)
                .map(|(i, _)| format!("edge {i} has region {} on both sides", self.edges[i].left))
                .collect(),
        );

        push(
            "arcs",
            (0..e)
                .filter_map(|i| self.arc(i).half_angle().err().map(|err| format!("edge {i}: {err}")))
                .collect(),
        );

        let walks = self.boundary_walks();
        push("boundary_walks", walks.as_ref().err().map(|e| vec![e.to_string()]).unwrap_or_default());

        push("connected", self.connectivity_problems());

        let mut order = Vec::new();
        for i in 0..v {
            let Ok(out) = self.outgoing_ccw(i) else { continue };
            let k = out.len();
            for j in 0..k {
                let (h, _) = out[j];
                let (g, _) = out[(j + 1) % k];
                if self.half_left(h) != self.half_right(g) {
                    order.push(format!(
                        "vertex {i}: region {} left of edge {} but {} right of edge {}",
                        self.half_left(h),
                        h.edge,
                        self.half_right(g),
                        g.edge
                    ));
                }
            }
        }
        push("tangent_order", order);

        let areas = match &walks {
            Ok(ws) => ws
                .iter()
                .filter(|w| w.region != super::EXTERIOR)
                .filter_map(|w| {
                    let a = self.walk_area(w);
                    (a <= 0.0).then(|| format!("region {} has area {a:.3e}", w.region))
                })
                .collect(),
            Err(_) => vec!["boundary walks unavailable".into()],
        };
        push("positive_areas", areas);

        if disjointness {
            push("disjoint", self.crossing_problems(samples.max(4)));
        }

        ValidationReport { vertices: v, edges: e, regions: n, checks }
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(false, 0)
    }

    fn connectivity_problems(&self) -> Vec<String> {
        let v = self.vertex_count();
        if v == 0 {
            return vec!["no vertices".into()];
        }
        let mut parent: Vec<usize> = (0..v).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for r in &self.edges {
            let (a, b) = (find(&mut parent, r.tail), find(&mut parent, r.head));
            parent[a] = b;
        }
        let root = find(&mut parent, 0);
        let mut problems = Vec::new();
        if (0..v).any(|i| find(&mut parent, i) != root) {
            problems.push("the edge graph is disconnected".to_string());
        }
        let mut seen = vec![false; self.labels.len()];
        for r in &self.edges {
            seen[r.left] = true;
            seen[r.right] = true;
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                problems.push(format!("region {i} touches no edge"));
            }
        }
        problems
    }

    fn crossing_problems(&self, samples: usize) -> Vec<String> {
        let polys: Vec<Option<Vec<P2>>> = (0..self.edge_count()).map(|i| self.arc(i).sample(samples).ok()).collect();
        let mut problems = Vec::new();
        for i in 0..polys.len() {
            for j in (i + 1)..polys.len() {
                let (Some(a), Some(b)) = (&polys[i], &polys[j]) else { continue };
                if polylines_cross(a, b) {
                    problems.push(format!("edges {i} and {j} cross"));
                }
            }
        }
        problems
    }
}

/// Proper crossings between two polylines, ignoring segments that touch a
/// shared endpoint.
fn polylines_cross(a: &[P2], b: &[P2]) -> bool {
    let shared = |p: P2| p.distance(b[0]) < 1e-12 || p.distance(b[b.len() - 1]) < 1e-12;
    let skip_a_first = shared(a[0]);
    let skip_a_last = shared(a[a.len() - 1]);
    for i in 0..a.len() - 1 {
        if (i == 0 && skip_a_first) || (i == a.len() - 2 && skip_a_last) {
            continue;
        }
        for j in 0..b.len() - 1 {
            let touches = |q: P2| q.distance(a[0]) < 1e-12 || q.distance(a[a.len() - 1]) < 1e-12;
            if (j == 0 && touches(b[0])) || (j == b.len() - 2 && touches(b[b.len() - 1])) {
                continue;
            }
            if segments_cross(a[i], a[i + 1], b[j], b[j + 1]) {
                return true;
            }
        }
    }
    false
}

fn segments_cross(p1: P2, p2: P2, q1: P2, q2: P2) -> bool {
    let d1 = (p2 - p1).cross(q1 - p1);
    let d2 = (p2 - p1).cross(q2 - p1);
    let d3 = (q2 - q1).cross(p1 - q1);
    let d4 = (q2 - q1).cross(p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

#[allow(dead_code)]
fn _assert_halfedge_copy(h: HalfEdge) -> HalfEdge {
    h
}
