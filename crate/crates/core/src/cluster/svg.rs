use std::fmt::Write as _;

use super::{Cluster, HalfEdge, EXTERIOR, P2};
use crate::geometry::{Arc, OrientedCircleLine};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Output width in pixels; height follows the aspect ratio.
    pub width: f64,
    pub stroke: String,
    /// Stroke width relative to the cluster diameter.
    pub stroke_rel: f64,
    /// When set, interior region `i` is filled by a color scaled from
    /// `pressures[i]` (exterior at index 0 is left blank).
    pub pressures: Option<Vec<f64>>,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self { width: 600.0, stroke: "#222".into(), stroke_rel: 0.004, pressures: None }
    }
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

// SVG y grows downward; the picture is flipped so that math orientation is kept.
fn xy(p: P2) -> String {
    format!("{} {}", fmt(p.x), fmt(-p.y))
}

/// Path command drawing `arc` from its current point (the tail).
fn arc_command(arc: &Arc<f64>) -> String {
    let props = match arc.properties() {
        Ok(p) => p,
        Err(_) => return format!("L {}", xy(arc.head)),
    };
    match props.carrier {
        OrientedCircleLine::Line { .. } => format!("L {}", xy(arc.head)),
        OrientedCircleLine::Circle { radius, .. } => {
            let phi = props.half_angle;
            let large = u8::from(phi.abs() > std::f64::consts::FRAC_PI_2 + 1e-12);
            let sweep = u8::from(phi > 0.0);
            format!("A {r} {r} 0 {large} {sweep} {}", xy(arc.head), r = fmt(radius))
        }
    }
}

/// Path data for a single edge: a move to the tail and one line or arc command.
pub fn edge_path(arc: &Arc<f64>) -> String {
    format!("M {} {}", xy(arc.tail), arc_command(arc))
}

fn pressure_color(p: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { (p - lo) / (hi - lo) } else { 0.5 };
    let c = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(222.0, 200.0), c(235.0, 60.0), c(247.0, 50.0))
}

/// Renders the cluster as an SVG 1.1 document.
pub fn to_svg(c: &Cluster, style: &SvgStyle) -> String {
    let mut lo = P2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for e in 0..c.edge_count() {
        for p in c.arc(e).sample(64).unwrap_or_else(|_| vec![c.arc(e).tail, c.arc(e).head]) {
            lo = P2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = P2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    let (w, h) = ((hi.x - lo.x).max(1e-12), (hi.y - lo.y).max(1e-12));
    let m = 0.05 * w.max(h);
    let (vx, vy, vw, vh) = (lo.x - m, -hi.y - m, w + 2.0 * m, h + 2.0 * m);
    let height = style.width * vh / vw;
    let stroke_w = style.stroke_rel * (w * w + h * h).sqrt();

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{} {} {} {}">"#,
        fmt(style.width),
        fmt(height),
        fmt(vx),
        fmt(vy),
        fmt(vw),
        fmt(vh)
    );

    if let (Some(p), Ok(walks)) = (&style.pressures, c.boundary_walks()) {
        let inner: Vec<f64> = p.iter().skip(1).copied().collect();
        let plo = inner.iter().copied().fold(f64::INFINITY, f64::min);
        let phi = inner.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let _ = writeln!(out, r#"<g id="regions" stroke="none">"#);
        for w in walks.iter().filter(|w| w.region != EXTERIOR) {
            let Some(&pr) = p.get(w.region) else { continue };
            let d = region_path(c, &w.steps);
            let _ = writeln!(
                out,
                r#"<path id="region-{}" d="{d}" fill="{}"><title>{} p={}</title></path>"#,
                w.region,
                pressure_color(pr, plo, phi),
                c.labels()[w.region],
                fmt(pr)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(
        out,
        r#"<g id="edges" fill="none" stroke="{}" stroke-width="{}" stroke-linecap="round">"#,
        style.stroke,
        fmt(stroke_w)
    );
    for e in 0..c.edge_count() {
        let _ = writeln!(out, r#"<path id="edge-{e}" d="{}"/>"#, edge_path(&c.arc(e)));
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn region_path(c: &Cluster, steps: &[HalfEdge]) -> String {
    let mut d = format!("M {}", xy(c.half_arc(steps[0]).tail));
    for &h in steps {
        d.push(' ');
        d.push_str(&arc_command(&c.half_arc(h)));
    }
    d.push_str(" Z");
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_edge_is_a_line() {
        let a = Arc::straight(P2::new(0.0, 0.0), P2::new(2.0, 1.0));
        assert_eq!(edge_path(&a), "M 0 0 L 2 -1");
    }

    #[test]
    fn semicircle_is_an_arc_of_radius_one() {
        let a = Arc::new(P2::new(-1.0, 0.0), P2::new(1.0, 0.0), -std::f64::consts::FRAC_PI_2);
        let d = edge_path(&a);
        assert!(d.starts_with("M -1 0 A 1 1 0 "), "{d}");
        // bulging right of a left-to-right chord means below the x-axis
        assert!(d.ends_with(" 0 1 0"), "{d}");
        let b = a.reversed();
        assert!(edge_path(&b).contains(" A 1 1 0 0 1 -1 0"), "{}", edge_path(&b));
    }

    #[test]
    fn large_arc_flag_past_a_semicircle() {
        let a = Arc::from_half_angle(P2::new(-1.0, 0.0), P2::new(1.0, 0.0), 2.0);
        assert!(edge_path(&a).contains(" 1 1 1 0"), "{}", edge_path(&a));
    }
}
