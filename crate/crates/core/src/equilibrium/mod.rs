//! Force balance at the triple junctions.
//!
//! Pressure convention: crossing an edge from its left region `L` to its
//! right region `R` raises the pressure by the signed curvature
//! `kappa = 2 sin(phi) / c`, i.e. `p_R - p_L = kappa`. With this choice an
//! isolated bubble has positive pressure.

mod solve;

use std::collections::VecDeque;

use serde::Serialize;

use crate::cluster::{Cluster, HalfEdge, EXTERIOR, P2};
use crate::error::{Error, Result};
use crate::geometry::{second_intersection, OrientedCircleLine, SecondPoint};
use crate::tolerance::TolerancePolicy;

pub use solve::{solve, SolveOptions, SolveOutcome};

/// Per-edge quantities needed by the junction conditions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeGeometry {
    pub tangent_tail: P2,
    /// Direction of travel at the head.
    pub tangent_head: P2,
    pub curvature: f64,
    pub carrier: OrientedCircleLine<f64>,
}

pub(crate) fn edge_geometry(c: &Cluster) -> Result<Vec<EdgeGeometry>> {
    (0..c.edge_count())
        .map(|e| {
            let p = c.arc(e).properties()?;
            Ok(EdgeGeometry {
                tangent_tail: p.tangent_at_tail,
                tangent_head: p.tangent_at_head,
                curvature: p.signed_curvature,
                carrier: p.carrier,
            })
        })
        .collect()
}

/// Outgoing unit tangent and signed curvature of a half-edge at its start.
pub(crate) fn half_start_data(g: &[EdgeGeometry], h: HalfEdge) -> (P2, f64) {
    let e = &g[h.edge];
    if h.forward {
        (e.tangent_tail, e.curvature)
    } else {
        (-e.tangent_head, -e.curvature)
    }
}

fn vertex_halves(c: &Cluster) -> Result<Vec<Vec<HalfEdge>>> {
    (0..c.vertex_count())
        .map(|v| {
            let out = c.outgoing(v);
            if out.len() == 3 {
                Ok(out)
            } else {
                Err(Error::Structural(format!("vertex {v} has degree {}", out.len())))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `t_1 + t_2 + t_3` per vertex, flattened as `(x, y)` pairs.
    pub angle_block: Vec<f64>,
    /// Sum of outgoing signed curvatures per vertex (inverse length units).
    pub cocycle_block: Vec<f64>,
    pub angle_sup: f64,
    pub angle_l2: f64,
    pub cocycle_sup: f64,
    pub cocycle_l2: f64,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Angle and curvature-cocycle residuals at every vertex.
pub fn residuals(c: &Cluster) -> Result<ResidualReport> {
    let halves = vertex_halves(c)?;
    let g = edge_geometry(c)?;
    let mut angle_block = Vec::with_capacity(2 * halves.len());
    let mut cocycle_block = Vec::with_capacity(halves.len());
    for hs in &halves {
        let mut t = P2::zero();
        let mut k = 0.0;
        for &h in hs {
            let (tan, kap) = half_start_data(&g, h);
            t += tan;
            k += kap;
        }
        angle_block.extend([t.x, t.y]);
        cocycle_block.push(k);
    }
    Ok(ResidualReport {
        angle_sup: sup(&angle_block),
        angle_l2: l2(&angle_block),
        cocycle_sup: sup(&cocycle_block),
        cocycle_l2: l2(&cocycle_block),
        angle_block,
        cocycle_block,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureReport {
    /// `p_0 = 0` for the exterior, then `p_1..p_n`.
    pub pressures: Vec<f64>,
    /// Largest disagreement over edges not used by the spanning tree.
    pub defect: f64,
    /// Curvature scale the defect is compared against.
    pub scale: f64,
}

/// Pressures without the consistency verdict.
pub fn pressure_report(c: &Cluster) -> Result<PressureReport> {
    let g = edge_geometry(c)?;
    let nreg = c.region_count() + 1;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nreg];
    for (e, r) in c.edges().iter().enumerate() {
        adj[r.left].push((r.right, g[e].curvature));
        adj[r.right].push((r.left, -g[e].curvature));
    }
    let mut p = vec![f64::NAN; nreg];
    p[EXTERIOR] = 0.0;
    let mut queue = VecDeque::from([EXTERIOR]);
    while let Some(r) = queue.pop_front() {
        for &(s, k) in &adj[r] {
            if p[s].is_nan() {
                p[s] = p[r] + k;
                queue.push_back(s);
            }
        }
    }
    if let Some(i) = p.iter().position(|x| x.is_nan()) {
        return Err(Error::Structural(format!("region {i} is not reachable from the exterior")));
    }
    let defect = c
        .edges()
        .iter()
        .enumerate()
        .map(|(e, r)| (p[r.right] - p[r.left] - g[e].curvature).abs())
        .fold(0.0, f64::max);
    let kmax = g.iter().fold(0.0f64, |m, e| m.max(e.curvature.abs()));
    let scale = kmax.max(1.0 / c.diameter());
    Ok(PressureReport { pressures: p, defect, scale })
}

/// Region pressures, failing with `PathInconsistent` when they depend on
/// the path from the exterior.
pub fn pressures(c: &Cluster, policy: &TolerancePolicy) -> Result<Vec<f64>> {
    let r = pressure_report(c)?;
    if r.defect > policy.pressure_defect * r.scale {
        return Err(Error::PathInconsistent { defect: r.defect / r.scale });
    }
    Ok(r.pressures)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    NonEquilibrium,
    QuasiEquilibrium,
    Equilibrium,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NonEquilibrium => "non-equilibrium",
            Verdict::QuasiEquilibrium => "quasi-equilibrium",
            Verdict::Equilibrium => "equilibrium",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub angle_sup: f64,
    /// Cocycle residual made dimensionless by the cluster diameter.
    pub cocycle_sup: f64,
    /// For equilibria: whether the three carriers at every vertex meet again
    /// at a common point.
    pub concurrent: Option<bool>,
}

/// Classifies a cluster; both residual blocks are compared against `tol`
/// after scaling the cocycle by the diameter.
pub fn classify(c: &Cluster, tol: f64) -> Result<Classification> {
    let r = residuals(c)?;
    let cocycle_sup = r.cocycle_sup * c.diameter();
    let verdict = if r.angle_sup >= tol {
        Verdict::NonEquilibrium
    } else if cocycle_sup >= tol {
        Verdict::QuasiEquilibrium
    } else {
        Verdict::Equilibrium
    };
    let concurrent = (verdict == Verdict::Equilibrium).then(|| second_points(c, tol.max(1e-6)).is_ok());
    Ok(Classification { verdict, angle_sup: r.angle_sup, cocycle_sup, concurrent })
}

/// Common second point of the three carriers at every vertex.
pub fn second_points(c: &Cluster, tol: f64) -> Result<Vec<SecondPoint<f64>>> {
    let halves = vertex_halves(c)?;
    let g = edge_geometry(c)?;
    halves
        .iter()
        .enumerate()
        .map(|(v, hs)| {
            let carriers = [g[hs[0].edge].carrier, g[hs[1].edge].carrier, g[hs[2].edge].carrier];
            second_intersection(c.vertices()[v], &carriers, tol)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::cluster::fixtures::equal_double_bubble;
    use crate::cluster::EdgeRecord;

    /// Double bubble with outer radii `r1` (right) and `r2` (left), built
    /// from the law of sines independently of the constructions module.
    fn double_bubble(r1: f64, r2: f64) -> Cluster {
        let d = (r1 * r1 + r2 * r2 - r1 * r2).sqrt();
        // centers at (x1, 0), (-x2, 0); common chord at x = 0
        let x1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
        let h = (r1 * r1 - x1 * x1).sqrt();
        let (top, bot) = (P2::new(0.0, h), P2::new(0.0, -h));
        let c1 = P2::new(x1, 0.0);
        let c2 = P2::new(x1 - d, 0.0);
        let outer1 = crate::geometry::Arc::on_circle(c1, top, bot, false);
        let outer2 = crate::geometry::Arc::on_circle(c2, bot, top, false);
        // interface circle: curvature 1/r2 - 1/r1 (bulges into the bigger bubble)
        let mid = if (r1 - r2).abs() < 1e-15 {
            crate::geometry::Arc::straight(top, bot)
        } else {
            let ri = r1 * r2 / (r1 - r2);
            let ci = P2::new(-(ri * ri - h * h).sqrt() * ri.signum(), 0.0);
            crate::geometry::Arc::on_circle(ci, top, bot, ri < 0.0)
        };
        let e = vec![
            EdgeRecord { tail: 0, head: 1, bulge: mid.bulge, left: 1, right: 2 },
            EdgeRecord { tail: 0, head: 1, bulge: outer1.bulge, left: 0, right: 1 },
            EdgeRecord { tail: 1, head: 0, bulge: outer2.bulge, left: 0, right: 2 },
        ];
        Cluster::new(vec![top, bot], e, 2).unwrap()
    }

    #[test]
    fn symmetric_y_is_balanced() {
        // centre of a symmetric triple-bubble graph; outer arcs are arbitrary
        let mut v = vec![P2::zero()];
        v.extend((0..3).map(|k| P2::from_angle(2.0 * PI * k as f64 / 3.0)));
        let mut e = Vec::new();
        for k in 0..3 {
            e.push(EdgeRecord { tail: 0, head: k + 1, bulge: 0.0, left: k + 1, right: (k + 2) % 3 + 1 });
        }
        for k in 0..3 {
            e.push(EdgeRecord { tail: k + 1, head: (k + 1) % 3 + 1, bulge: -0.4, left: k + 1, right: 0 });
        }
        let c = Cluster::new(v, e, 3).unwrap();
        let r = residuals(&c).unwrap();
        assert!(r.angle_block[0].abs() < 1e-15 && r.angle_block[1].abs() < 1e-15);
        assert_eq!(r.cocycle_block[0], 0.0);
    }

    #[test]
    fn equal_double_bubble_is_balanced() {
        let c = equal_double_bubble();
        let r = residuals(&c).unwrap();
        assert_eq!(r.angle_block.len(), 4);
        assert_eq!(r.cocycle_block.len(), 2);
        assert!(r.angle_sup < 1e-12 && r.cocycle_sup < 1e-12, "{r:?}");
        let p = pressures(&c, &TolerancePolicy::default()).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-12 && (p[2] - 1.0).abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn unequal_double_bubble_pressures_follow_radii() {
        for &(r1, r2) in &[(1.0, 0.6), (0.5, 2.0), (1.3, 1.1)] {
            let c = double_bubble(r1, r2);
            assert!(c.validate().is_valid());
            let r = residuals(&c).unwrap();
            assert!(r.angle_sup < 1e-12 && r.cocycle_sup < 1e-11, "{r:?}");
            let p = pressures(&c, &TolerancePolicy::default()).unwrap();
            assert!((p[1] - 1.0 / r1).abs() < 1e-12, "{p:?}");
            assert!((p[2] - 1.0 / r2).abs() < 1e-12, "{p:?}");
            let k = c.arc(0).properties().unwrap().signed_curvature.abs();
            assert!((k - (1.0 / r1 - 1.0 / r2).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn double_bubble_carriers_meet_at_the_other_vertex() {
        let c = double_bubble(1.0, 0.7);
        let q = second_points(&c, 1e-9).unwrap();
        for (v, s) in q.iter().enumerate() {
            let SecondPoint::Finite(p) = s else { panic!("expected a finite point") };
            assert!(p.distance(c.vertices()[1 - v]) < 1e-10);
        }
        assert_eq!(classify(&c, 1e-9).unwrap().concurrent, Some(true));
    }

    #[test]
    fn straight_edges_have_zero_pressure() {
        let c = equal_double_bubble();
        let flat = c.with_state(&[c.state()[..4].to_vec(), vec![0.0; 3]].concat());
        let r = pressure_report(&flat).unwrap();
        assert!(r.pressures.iter().all(|&p| p == 0.0));
        assert_eq!(r.defect, 0.0);
    }

    #[test]
    fn noise_breaks_equilibrium() {
        let c = double_bubble(1.0, 0.8);
        let mut v = c.vertices().to_vec();
        v[0] += P2::new(1e-2, -0.7e-2);
        let bad = c.with_vertices(v);
        assert_eq!(classify(&bad, 1e-7).unwrap().verdict, Verdict::NonEquilibrium);
        assert_eq!(classify(&c, 1e-7).unwrap().verdict, Verdict::Equilibrium);
    }

    #[test]
    fn pressure_sign_calibration() {
        // a lone lens of two arcs bulging outward has positive pressure
        let c = equal_double_bubble();
        let g = edge_geometry(&c).unwrap();
        assert!(g[1].curvature > 0.0);
        assert!(pressure_report(&c).unwrap().pressures[1] > 0.0);
    }
}
