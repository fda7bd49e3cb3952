use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use crate::cluster::{Cluster, EdgeRecord, EXTERIOR, P2};
use crate::error::{Error, Result};
use crate::geometry::{Arc, OrientedCircleLine};

use super::basic::double_bubble;

/// A mirror line through `point` with unit `dir`.
#[derive(Debug, Clone, Copy)]
struct Mirror {
    point: P2,
    dir: P2,
}

impl Mirror {
    fn through(a: P2, b: P2) -> Result<Self> {
        let dir = (b - a).normalized().ok_or_else(|| Error::Domain("mirror through coincident centers".into()))?;
        Ok(Self { point: a, dir })
    }

    fn reflect(&self, q: P2) -> P2 {
        let d = q - self.point;
        self.point + self.dir * (2.0 * d.dot(self.dir)) - d
    }
}

fn center_of(arc: &Arc<f64>) -> Result<(P2, f64)> {
    match arc.properties()?.carrier {
        OrientedCircleLine::Circle { center, radius, .. } => Ok((center, radius)),
        OrientedCircleLine::Line { .. } => Err(Error::Domain("expected a curved arc".into())),
    }
}

/// The point where the mirror through a circle's center crosses the arc.
fn crossing(arc: &Arc<f64>, m: &Mirror) -> Result<P2> {
    let (o, r) = center_of(arc)?;
    let (a, b) = (o + m.dir * r, o - m.dir * r);
    Ok(if arc.distance_to(a)? <= arc.distance_to(b)? { a } else { b })
}

/// The lens cut from the interface at turning fractions `u -+ half`, and the
/// two mirror lines it defines.
struct Layout {
    interface: Arc<f64>,
    tip: P2,
    tip_fraction: f64,
    lens_left: Arc<f64>,
    lens_right: Arc<f64>,
    mirror_left: Mirror,
    mirror_right: Mirror,
}

fn layout(interface: &Arc<f64>, outer_left: P2, outer_right: P2, u: f64, half: f64) -> Result<Layout> {
    let phi = interface.half_angle()?;
    let t1 = interface.point_at(u - half)?;
    let t2 = interface.point_at(u + half)?;
    let sub = phi * 2.0 * half;
    let lens_left = Arc::from_half_angle(t1, t2, sub + FRAC_PI_3);
    let lens_right = Arc::from_half_angle(t1, t2, sub - FRAC_PI_3);
    let mirror_left = Mirror::through(outer_left, center_of(&lens_left)?.0)?;
    let mirror_right = Mirror::through(outer_right, center_of(&lens_right)?.0)?;
    Ok(Layout { interface: *interface, tip: t1, tip_fraction: u - half, lens_left, lens_right, mirror_left, mirror_right })
}

/// Klein four-group element: bit 0 = left mirror, bit 1 = right mirror.
type G = usize;

/// Four-petal flower with a four-sided center and two perpendicular mirror
/// lines.
///
/// Starts from the double bubble of radii `r_left` (above) and `r_right`
/// (below), inserts a lens of half-width `half` (a turning fraction of the
/// interface) and slides it away from the first vertex until the line through
/// the upper centers is perpendicular to the line through the lower centers.
/// Reflecting the quadrant at the lens tip across both lines assembles the
/// flower. Petals 1 and 2 contain the two halves of the original bubbles;
/// 3 and 4 are their mirror images; the center is region 5.
pub fn flower(r_left: f64, r_right: f64, half: f64) -> Result<Cluster> {
    if !(half > 0.0 && half < 0.25) {
        return Err(Error::Domain(format!("lens half-width must lie in (0, 0.25), got {half}")));
    }
    let db = double_bubble(r_left, r_right)?.transformed(1.0, FRAC_PI_2, P2::zero());
    // bubble 1 is now on the left of the interface direction
    let (ie, rec) = db
        .edges()
        .iter()
        .enumerate()
        .find(|(_, r)| r.left != EXTERIOR && r.right != EXTERIOR)
        .ok_or_else(|| Error::Structural("double bubble without an interface".into()))?;
    let mut interface = db.arc(ie);
    let (mut l_region, mut r_region) = (rec.left, rec.right);
    if interface.tail.x > interface.head.x {
        // keep the first vertex on the left so the slide direction is fixed
        interface = interface.reversed();
        std::mem::swap(&mut l_region, &mut r_region);
    }
    let outer = |region: usize| -> Result<Arc<f64>> {
        let e = (0..db.edge_count())
            .find(|&e| {
                let r = &db.edges()[e];
                (r.left == region && r.right == EXTERIOR) || (r.right == region && r.left == EXTERIOR)
            })
            .ok_or_else(|| Error::Structural("double bubble without an outer arc".into()))?;
        Ok(db.arc(e))
    };
    let (outer_l, outer_r) = (outer(l_region)?, outer(r_region)?);
    let (ol, orr) = (center_of(&outer_l)?.0, center_of(&outer_r)?.0);

    let f = |u: f64| -> Result<f64> {
        let g = layout(&interface, ol, orr, u, half)?;
        Ok(g.mirror_left.dir.dot(g.mirror_right.dir))
    };
    // scan from the centered lens toward the second vertex for a sign change
    let steps = 200;
    let hi_limit = 1.0 - half - 1e-9;
    let mut prev = 0.5;
    let mut f_prev = f(prev)?;
    let mut bracket = None;
    for k in 1..=steps {
        let u = 0.5 + (hi_limit - 0.5) * k as f64 / steps as f64;
        let fu = f(u)?;
        if fu.signum() != f_prev.signum() {
            bracket = Some((prev, u, f_prev));
            break;
        }
        prev = u;
        f_prev = fu;
    }
    let Some((mut a, mut b, mut fa)) = bracket else {
        return Err(Error::NonConvergence { history: vec![f_prev] });
    };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if b - a <= 1e-16 {
            break;
        }
    }
    let g = layout(&interface, ol, orr, 0.5 * (a + b), half)?;
    assemble(&g, &outer_l, &outer_r)
}

fn assemble(g: &Layout, outer_l: &Arc<f64>, outer_r: &Arc<f64>) -> Result<Cluster> {
    let (ml, mr) = (g.mirror_left, g.mirror_right);
    let act = |e: G, p: P2| {
        let p = if e & 1 != 0 { ml.reflect(p) } else { p };
        if e & 2 != 0 {
            mr.reflect(p)
        } else {
            p
        }
    };
    let v1 = g.interface.tail;
    let t1 = g.tip;
    // vertices: tip images 0..4, outer vertex images 4..8
    let mut vertices = Vec::with_capacity(8);
    for e in 0..4 {
        vertices.push(act(e, t1));
    }
    for e in 0..4 {
        vertices.push(act(e, v1));
    }
    let (tip, out) = (|e: G| e, |e: G| 4 + e);
    // petals: 1 = left half, 2 = right half, 3 = right-mirror image of 1,
    // 4 = left-mirror image of 2
    let region = |r: usize, e: G| match r {
        1 => if e & 2 != 0 { 3 } else { 1 },
        2 => if e & 1 != 0 { 4 } else { 2 },
        3 => if e & 2 != 0 { 1 } else { 3 },
        4 => if e & 1 != 0 { 2 } else { 4 },
        other => other,
    };
    const CENTER: usize = 5;

    // quadrant edges as (tail, mid, head, tail id, head id, left, right)
    let spoke_mid = g.interface.point_at(0.5 * g.tip_fraction)?;
    let cl_mid = crossing(&g.lens_left, &ml)?;
    let cr_mid = crossing(&g.lens_right, &mr)?;
    let ol_mid = crossing(outer_l, &ml)?;
    let or_mid = crossing(outer_r, &mr)?;
    struct Base {
        mid: P2,
        tail: usize,
        head: usize,
        left: usize,
        right: usize,
        orbit: &'static [G],
    }
    let base = [
        Base { mid: spoke_mid, tail: out(0), head: tip(0), left: 1, right: 2, orbit: &[0, 1, 2, 3] },
        Base { mid: cl_mid, tail: tip(0), head: tip(1), left: 1, right: CENTER, orbit: &[0, 2] },
        Base { mid: cr_mid, tail: tip(0), head: tip(2), left: CENTER, right: 2, orbit: &[0, 1] },
        Base { mid: ol_mid, tail: out(0), head: out(1), left: EXTERIOR, right: 1, orbit: &[0, 2] },
        Base { mid: or_mid, tail: out(0), head: out(2), left: 2, right: EXTERIOR, orbit: &[0, 1] },
    ];
    let image = |id: usize, e: G| if id < 4 { tip(id ^ e) } else { out((id - 4) ^ e) };
    let mut edges = Vec::with_capacity(12);
    for b in &base {
        for &e in b.orbit {
            let (ti, hi) = (image(b.tail, e), image(b.head, e));
            let arc = Arc::through_points(vertices[ti], act(e, b.mid), vertices[hi])?;
            let (l, r) = (region(b.left, e), region(b.right, e));
            // an odd number of reflections swaps the sides
            let (left, right) = if (e.count_ones() & 1) == 1 { (r, l) } else { (l, r) };
            edges.push(EdgeRecord { tail: ti, head: hi, bulge: arc.bulge, left, right });
        }
    }
    let c = Cluster::new(vertices, edges, 5)?;
    let report = c.validate_with(true, 32);
    if !report.is_valid() {
        return Err(Error::TopologyBreakdown(report.failures().map(|f| f.name).collect::<Vec<_>>().join(", ")));
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify, Verdict};

    #[test]
    fn equal_petals_are_fourfold() {
        let c = flower(1.0, 1.0, 0.05).unwrap();
        assert_eq!(classify(&c, 1e-9).unwrap().verdict, Verdict::Equilibrium);
        let a = c.region_areas().unwrap();
        for k in 1..4 {
            assert!((a[k] - a[0]).abs() < 1e-9, "{a:?}");
        }
        // the center is a curvilinear square: all four corners equidistant
        // from the centroid of the tips
        let g = (0..4).fold(P2::zero(), |s, i| s + c.vertices()[i]) * 0.25;
        let d: Vec<f64> = (0..4).map(|i| c.vertices()[i].distance(g)).collect();
        assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-9), "{d:?}");
    }

    #[test]
    fn unequal_petals_are_equilibria() {
        for (a, b, h) in [(1.0, 0.9, 0.05), (1.0, 1.15, 0.04), (0.8, 1.0, 0.06)] {
            let c = flower(a, b, h).unwrap();
            let cl = classify(&c, 1e-9).unwrap();
            assert_eq!(cl.verdict, Verdict::Equilibrium, "{a} {b} {h}: {cl:?}");
        }
    }

    #[test]
    fn mirror_lines_are_perpendicular() {
        let c = flower(1.0, 0.9, 0.05).unwrap();
        // petals 1 and 3 are mirror images, so are 2 and 4
        let a = c.region_areas().unwrap();
        assert!((a[0] - a[2]).abs() < 1e-9 && (a[1] - a[3]).abs() < 1e-9, "{a:?}");
        assert!((a[0] - a[1]).abs() > 1e-3);
    }

    #[test]
    fn bad_lens_rejected() {
        assert!(matches!(flower(1.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(flower(1.0, 1.0, 0.2).is_err());
    }
}
