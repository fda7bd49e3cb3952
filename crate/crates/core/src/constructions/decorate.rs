use std::f64::consts::PI;

use crate::cluster::{Cluster, EdgeRecord, HalfEdge, P2};
use crate::equilibrium::{edge_geometry, half_start_data, second_points};
use crate::error::{Error, Result};
use crate::geometry::{Arc, MobiusMap, OrientedCircleLine, SecondPoint};

use super::basic::double_bubble;

/// Concurrency tolerance used to locate the second common point.
const CONCURRENT_TOL: f64 = 1e-6;

/// Normalizing map for a junction at `p` whose carriers meet again at `q`:
/// `p -> 0`, `q -> infinity`, `|m'(p)| = 1`.
fn normalizer(p: P2, q: SecondPoint<f64>) -> Result<(MobiusMap<f64>, f64)> {
    match q {
        SecondPoint::Finite(q) => Ok((MobiusMap::sending_to_infinity(q, p)?, p.distance(q))),
        SecondPoint::AtInfinity => Ok((MobiusMap::translation(-p), f64::INFINITY)),
    }
}

/// A point on the ray `{s u : s > t}` of the normalized picture that lies on
/// the image of the edge running out to `end`, mapped back.
fn ray_point(m: &MobiusMap<f64>, inv: &MobiusMap<f64>, u: P2, t: f64, end: P2, reach: f64) -> Result<P2> {
    let s = match m.apply_point(end) {
        Ok(w) if w.dot(u) > 0.0 => {
            let r = w.norm();
            if t >= r {
                return Err(Error::TopologyBreakdown(format!(
                    "three-sided bubble of size {t:.3e} reaches the far end of an edge ({r:.3e})"
                )));
            }
            0.5 * (t + r)
        }
        // the edge runs out through infinity in the normalized picture
        _ => (2.0 * t).max(if reach.is_finite() { 0.5 * reach } else { 1.0 }),
    };
    inv.apply_point(u * s)
}

/// Replaces the junction end of edge `e` (at the old vertex position) with
/// `new_end`, keeping the carrier.
fn retarget(c: &Cluster, h: HalfEdge, new_end: P2, through: P2) -> Result<f64> {
    let far = c.vertices()[c.half_end(h)];
    let a = if h.forward { Arc::through_points(new_end, through, far)? } else { Arc::through_points(far, through, new_end)? };
    Ok(a.bulge)
}

fn check(out: Cluster) -> Result<Cluster> {
    let r = out.validate_with(true, 48);
    if r.is_valid() {
        Ok(out)
    } else {
        Err(Error::TopologyBreakdown(
            r.failures().map(|f| format!("{}: {}", f.name, f.detail)).collect::<Vec<_>>().join("; "),
        ))
    }
}

/// Inserts a three-sided bubble at vertex `v`.
///
/// The second common point of the three carriers at `v` is sent to
/// infinity, turning the incident edges into rays at 120 degrees; an
/// equilateral arc triangle with circumradius `t` is placed at the junction
/// and everything is mapped back. Only the three incident edges change.
pub fn decorate(c: &Cluster, v: usize, t: f64) -> Result<Cluster> {
    if v >= c.vertex_count() {
        return Err(Error::Domain(format!("no vertex {v}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain("decoration size must be positive".into()));
    }
    let p = c.vertices()[v];
    let q = second_points(c, CONCURRENT_TOL)?[v];
    let (m, reach) = normalizer(p, q)?;
    let inv = m.inverse();
    let g = edge_geometry(c)?;
    let mut rays: Vec<(HalfEdge, P2)> =
        c.outgoing(v).into_iter().map(|h| (h, m.push_direction(p, half_start_data(&g, h).0))).collect();
    rays.sort_by(|a, b| a.1.angle().total_cmp(&b.1.angle()));

    let nv = c.vertex_count();
    let ids = [v, nv, nv + 1];
    let new_region = c.region_count() + 1;
    let mut vertices = c.vertices().to_vec();
    let mut edges = c.edges().to_vec();
    let mut corners = [P2::zero(); 3];
    for k in 0..3 {
        let (h, u) = rays[k];
        let w = inv.apply_point(u * t)?;
        corners[k] = w;
        let mid = ray_point(&m, &inv, u, t, c.vertices()[c.half_end(h)], reach)?;
        let r = &mut edges[h.edge];
        r.bulge = retarget(c, h, w, mid)?;
        if h.forward {
            r.tail = ids[k];
        } else {
            r.head = ids[k];
        }
    }
    vertices[v] = corners[0];
    vertices.push(corners[1]);
    vertices.push(corners[2]);
    for k in 0..3 {
        let (a, b) = (rays[k].1 * t, rays[(k + 1) % 3].1 * t);
        let arc = inv.apply_arc(&Arc::from_half_angle(a, b, -PI / 6.0))?;
        edges.push(EdgeRecord {
            tail: ids[k],
            head: ids[(k + 1) % 3],
            bulge: arc.bulge,
            left: new_region,
            right: c.half_left(rays[k].0),
        });
    }
    let mut labels = c.labels().to_vec();
    labels.push(format!("bubble {new_region}"));
    check(Cluster::with_labels(vertices, edges, labels)?)
}

/// Intersection points of two carriers.
fn meet(a: &OrientedCircleLine<f64>, b: &OrientedCircleLine<f64>) -> Vec<P2> {
    use OrientedCircleLine::{Circle, Line};
    match (*a, *b) {
        (Circle { center: c1, radius: r1, .. }, Circle { center: c2, radius: r2, .. }) => {
            let d = c1.distance(c2);
            if d == 0.0 {
                return vec![];
            }
            let x = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
            let h2 = r1 * r1 - x * x;
            let e = (c2 - c1) * (1.0 / d);
            let base = c1 + e * x;
            let h = h2.max(0.0).sqrt();
            vec![base + e.perp() * h, base - e.perp() * h]
        }
        (Circle { center, radius, .. }, Line { normal, offset }) | (Line { normal, offset }, Circle { center, radius, .. }) => {
            let dist = normal.dot(center) - offset;
            let foot = center - normal * dist;
            let h = (radius * radius - dist * dist).max(0.0).sqrt();
            let dir = normal.perp();
            vec![foot + dir * h, foot - dir * h]
        }
        (Line { normal: n1, offset: o1 }, Line { normal: n2, offset: o2 }) => {
            let det = n1.cross(n2);
            if det.abs() < 1e-14 {
                return vec![];
            }
            vec![P2::new((o1 * n2.y - o2 * n1.y) / det, (n1.x * o2 - n2.x * o1) / det)]
        }
    }
}

fn inside(poly: &[P2], p: P2) -> bool {
    let mut inside = false;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

/// Grows or shrinks a three-sided bubble in the normalized picture where
/// its three outgoing edges are rays from the origin. `factor = 0` removes
/// the bubble and joins its three edges at a single junction.
pub fn scale_three_sided(c: &Cluster, region: usize, factor: f64) -> Result<Cluster> {
    if !(factor >= 0.0 && factor.is_finite()) {
        return Err(Error::Domain("factor must be non-negative".into()));
    }
    if region == 0 || region > c.region_count() {
        return Err(Error::Domain(format!("no interior region {region}")));
    }
    let walks = c.boundary_walks()?;
    let walk = walks.iter().find(|w| w.region == region).expect("every region has a walk");
    if walk.steps.len() != 3 {
        return Err(Error::Domain(format!("region {region} has {} sides, not 3", walk.steps.len())));
    }
    let corners: Vec<usize> = walk.steps.iter().map(|&h| c.half_start(h)).collect();
    let spokes: Vec<HalfEdge> = corners
        .iter()
        .map(|&v| {
            c.outgoing(v)
                .into_iter()
                .find(|h| !walk.steps.iter().any(|s| s.edge == h.edge))
                .ok_or_else(|| Error::Structural(format!("vertex {v} has no outgoing edge off the bubble")))
        })
        .collect::<Result<_>>()?;
    if spokes.iter().any(|s| corners.contains(&c.half_end(*s))) {
        return Err(Error::Domain("an edge leaving the bubble returns to it".into()));
    }

    // the virtual junction p (inside the bubble) and the far point q
    let g = edge_geometry(c)?;
    let carriers: Vec<_> = spokes.iter().map(|h| g[h.edge].carrier).collect();
    let scale = c.diameter();
    let on = |x: P2, k: usize| carriers[k].signed_distance(x).abs() < CONCURRENT_TOL * scale;
    let mut common: Vec<P2> = meet(&carriers[0], &carriers[1]).into_iter().filter(|&x| on(x, 2)).collect();
    let poly: Vec<P2> = walk.steps.iter().flat_map(|&h| {
        let pts = c.half_arc(h).sample(64).unwrap_or_default();
        pts.into_iter().skip(1)
    }).collect();
    common.sort_by_key(|&x| !inside(&poly, x));
    let p = *common
        .first()
        .filter(|&&x| inside(&poly, x))
        .ok_or_else(|| Error::Domain("the edges leaving the bubble do not meet inside it".into()))?;
    let q = match common.get(1) {
        Some(&x) if x.distance(p) > 1e-9 * scale => SecondPoint::Finite(x),
        _ if carriers.iter().all(|k| k.is_line()) => SecondPoint::AtInfinity,
        _ => return Err(Error::Domain("the edges leaving the bubble have no second common point".into())),
    };
    let (m, reach) = normalizer(p, q)?;
    let inv = m.inverse();
    let images: Vec<P2> = corners.iter().map(|&v| m.apply_point(c.vertices()[v])).collect::<Result<_>>()?;
    let t = images.iter().map(|w| w.norm()).sum::<f64>() / 3.0;
    if images.iter().any(|w| (w.norm() - t).abs() > 1e-6 * t) {
        return Err(Error::Domain("bubble is not equilateral in the normalized picture (not an equilibrium)".into()));
    }
    let dirs: Vec<P2> = images.iter().map(|w| *w * (1.0 / w.norm())).collect();
    let tn = factor * t;

    let mut vertices = c.vertices().to_vec();
    let mut edges = c.edges().to_vec();
    for k in 0..3 {
        let h = spokes[k];
        let w = if factor == 0.0 { p } else { inv.apply_point(dirs[k] * tn)? };
        let mid = ray_point(&m, &inv, dirs[k], tn, c.vertices()[c.half_end(h)], reach)?;
        edges[h.edge].bulge = retarget(c, h, w, mid)?;
        vertices[corners[k]] = w;
    }
    if factor > 0.0 {
        for (k, &h) in walk.steps.iter().enumerate() {
            let (a, b) = (dirs[k] * tn, dirs[(k + 1) % 3] * tn);
            let arc = inv.apply_arc(&Arc::from_half_angle(a, b, -PI / 6.0))?;
            edges[h.edge].bulge = if h.forward { arc.bulge } else { -arc.bulge };
        }
        return check(Cluster::with_labels(vertices, edges, c.labels().to_vec())?);
    }

    // collapse: merge the corners, drop the three sides and the region
    let keep = *corners.iter().min().expect("three corners");
    let mut vmap = Vec::with_capacity(vertices.len());
    let mut next = 0;
    for i in 0..vertices.len() {
        if corners.contains(&i) && i != keep {
            vmap.push(usize::MAX);
        } else {
            vmap.push(next);
            next += 1;
        }
    }
    let vid = |i: usize| if corners.contains(&i) { vmap[keep] } else { vmap[i] };
    let rid = |r: usize| if r > region { r - 1 } else { r };
    let merged: Vec<P2> = vertices.iter().enumerate().filter(|(i, _)| vmap[*i] != usize::MAX).map(|(_, &p)| p).collect();
    let dropped: Vec<usize> = walk.steps.iter().map(|h| h.edge).collect();
    let new_edges = edges
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .map(|(_, r)| EdgeRecord { tail: vid(r.tail), head: vid(r.head), left: rid(r.left), right: rid(r.right), bulge: r.bulge })
        .collect();
    let mut labels = c.labels().to_vec();
    labels.remove(region);
    check(Cluster::with_labels(merged, new_edges, labels)?)
}

/// Standard 4-bubble: a double bubble with bubble 1 on top, decorated at
/// both junctions (left with `t_left`, right with `t_right`).
pub fn four_bubble(r1: f64, r2: f64, t_left: f64, t_right: f64) -> Result<Cluster> {
    let base = double_bubble(r1, r2)?.transformed(1.0, PI / 2.0, P2::zero());
    // vertex 0 sits at (-h, 0) after the quarter turn
    let once = decorate(&base, 0, t_left)?;
    decorate(&once, 1, t_right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::basic::symmetric_triple_bubble;
    use crate::equilibrium::{classify, Verdict};

    fn max_shift(a: &Cluster, b: &Cluster) -> f64 {
        a.vertices().iter().zip(b.vertices()).map(|(p, q)| p.distance(*q)).fold(0.0, f64::max)
    }

    #[test]
    fn decorated_double_bubble_is_a_triple_bubble() {
        let db = double_bubble(1.0, 0.7).unwrap();
        let c = decorate(&db, 0, 0.2).unwrap();
        assert_eq!((c.vertex_count(), c.edge_count(), c.region_count()), (4, 6, 3));
        let k = classify(&c, 1e-9).unwrap();
        assert_eq!(k.verdict, Verdict::Equilibrium, "{k:?}");
        assert_eq!(c.vertices()[1], db.vertices()[1]);
    }

    #[test]
    fn new_area_shrinks_with_t() {
        let db = double_bubble(1.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for &t in &[0.4, 0.2, 0.1, 0.05, 0.01] {
            let a = decorate(&db, 1, t).unwrap().region_areas().unwrap()[2];
            assert!(a > 0.0 && a < last);
            last = a;
        }
    }

    #[test]
    fn shrink_to_a_point_undoes_decoration() {
        let tb = symmetric_triple_bubble(1.0).unwrap();
        for v in 0..4 {
            let d = decorate(&tb, v, 0.15).unwrap();
            let back = scale_three_sided(&d, 4, 0.0).unwrap();
            assert_eq!(back.edges().len(), tb.edges().len());
            assert!(max_shift(&back, &tb) < 1e-7, "{}", max_shift(&back, &tb));
            for (a, b) in back.edges().iter().zip(tb.edges()) {
                assert_eq!((a.tail, a.head, a.left, a.right), (b.tail, b.head, b.left, b.right));
                assert!((a.bulge - b.bulge).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn unit_factor_is_identity() {
        let c = four_bubble(1.0, 1.0, 0.2, 0.3).unwrap();
        let same = scale_three_sided(&c, 3, 1.0).unwrap();
        assert!(max_shift(&same, &c) < 1e-10);
    }

    #[test]
    fn growing_keeps_the_rest_fixed() {
        let c = four_bubble(1.0, 0.8, 0.15, 0.15).unwrap();
        let big = scale_three_sided(&c, 4, 2.0).unwrap();
        assert_eq!(classify(&big, 1e-9).unwrap().verdict, Verdict::Equilibrium);
        let walks = c.boundary_walks().unwrap();
        let touched: Vec<usize> = walks[4].steps.iter().map(|&h| c.half_start(h)).collect();
        for i in 0..c.vertex_count() {
            if !touched.contains(&i) {
                assert_eq!(c.vertices()[i], big.vertices()[i]);
            }
        }
    }

    #[test]
    fn non_triangles_rejected() {
        let c = four_bubble(1.0, 1.0, 0.2, 0.2).unwrap();
        assert!(matches!(scale_three_sided(&c, 1, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn oversized_decoration_breaks() {
        let db = double_bubble(1.0, 1.0).unwrap();
        assert!(matches!(decorate(&db, 0, 50.0), Err(Error::TopologyBreakdown(_))));
    }
}
