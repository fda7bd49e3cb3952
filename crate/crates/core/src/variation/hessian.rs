use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::Serialize;

use super::discretize::{discretize, Polyline};
use crate::cluster::{Cluster, EXTERIOR, P2};
use crate::equilibrium::pressures;
use crate::error::Result;
use crate::tolerance::TolerancePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    StrictlyStable,
    /// Number of persistent near-zero modes.
    Degenerate(usize),
    /// Number of negative modes.
    Unstable(usize),
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stability::StrictlyStable => write!(f, "StrictlyStable"),
            Stability::Degenerate(k) => write!(f, "Degenerate({k})"),
            Stability::Unstable(j) => write!(f, "Unstable({j})"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    /// Projected, mass-weighted eigenvalues at `m` (ascending), multiplied by
    /// the squared cluster diameter.
    pub eigenvalues: Vec<f64>,
    pub zero_mode_count: usize,
    pub negative_count: usize,
    pub classification: Stability,
    /// Set when a counted zero mode shrank under refinement, but slowly.
    pub ambiguous: bool,
    pub m: usize,
    /// Smallest-magnitude eigenvalues at `2m`.
    pub refined_low: Vec<f64>,
    /// Ceiling for zero modes at `m`.
    pub threshold: f64,
    /// Euclidean norm of the Lagrangian gradient in reduced coordinates at `m`.
    pub gradient_norm: f64,
}

/// Derivative of a point's position with respect to each reduced
/// coordinate it depends on. Junctions move freely; an interior point moves
/// along its normal and follows the tangential motion of the edge's two
/// junctions, interpolated by its turning fraction.
fn point_dofs(p: &Polyline, k: usize) -> Vec<(usize, Vector2<f64>)> {
    let Some((e, s)) = p.along[k] else {
        return vec![(2 * k, Vector2::new(1.0, 0.0)), (2 * k + 1, Vector2::new(0.0, 1.0))];
    };
    let n = p.normals[k];
    let t = v2(p.tangent(k));
    let idx = &p.edge_points[e];
    let (a, b) = (idx[0], idx[idx.len() - 1]);
    vec![
        (p.junctions + k, Vector2::new(n.x, n.y)),
        (2 * a, t * ((1.0 - s) * t.x)),
        (2 * a + 1, t * ((1.0 - s) * t.y)),
        (2 * b, t * (s * t.x)),
        (2 * b + 1, t * (s * t.y)),
    ]
}

fn v2(p: P2) -> Vector2<f64> {
    Vector2::new(p.x, p.y)
}

/// Second-order model of `perimeter - sum p_i A_i` on a polyline in reduced
/// coordinates.
pub(crate) struct Quadratic {
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
    /// Rows: interior regions `1..=n`.
    pub area_jacobian: DMatrix<f64>,
    /// Lumped point masses pulled back to reduced coordinates.
    pub mass: DMatrix<f64>,
    pub rigid: Vec<DVector<f64>>,
}

pub(crate) fn quadratic(p: &Polyline, press: &[f64]) -> Quadratic {
    let dim = p.junctions + p.points.len();
    let mut g = DVector::zeros(dim);
    let mut h = DMatrix::zeros(dim, dim);
    let mut da = DMatrix::zeros(p.regions, dim);
    let mut mass_pt = vec![0.0; p.points.len()];
    let s = Matrix2::new(0.0, 1.0, -1.0, 0.0);

    for (a, b, e) in p.segments() {
        let (pa, pb) = (v2(p.points[a]), v2(p.points[b]));
        let d = pb - pa;
        let len = d.norm();
        let u = d / len;
        mass_pt[a] += 0.5 * len;
        mass_pt[b] += 0.5 * len;
        let (left, right) = p.sides[e];
        let w = press[left] - press[right];
        // d cross(a, b) / da and / db
        let ca = Vector2::new(pb.y, -pb.x);
        let cb = Vector2::new(-pa.y, pa.x);
        let ga = -u - ca * (0.5 * w);
        let gb = u - cb * (0.5 * w);
        let k = (Matrix2::identity() - u * u.transpose()) / len;
        let hab = -k - s * (0.5 * w);
        let (da_dofs, db_dofs) = (point_dofs(p, a), point_dofs(p, b));
        for &(i, vi) in &da_dofs {
            g[i] += vi.dot(&ga);
            for &(j, vj) in &da_dofs {
                h[(i, j)] += (vi.transpose() * k * vj)[0];
            }
            for &(j, vj) in &db_dofs {
                let x = (vi.transpose() * hab * vj)[0];
                h[(i, j)] += x;
                h[(j, i)] += x;
            }
        }
        for &(i, vi) in &db_dofs {
            g[i] += vi.dot(&gb);
            for &(j, vj) in &db_dofs {
                h[(i, j)] += (vi.transpose() * k * vj)[0];
            }
        }
        for (region, sign) in [(left, 0.5), (right, -0.5)] {
            if region == EXTERIOR {
                continue;
            }
            for &(i, vi) in &da_dofs {
                da[(region - 1, i)] += sign * vi.dot(&ca);
            }
            for &(i, vi) in &db_dofs {
                da[(region - 1, i)] += sign * vi.dot(&cb);
            }
        }
    }

    let mut mass = DMatrix::zeros(dim, dim);
    for k in 0..p.points.len() {
        let dofs = point_dofs(p, k);
        for &(i, vi) in &dofs {
            for &(j, vj) in &dofs {
                mass[(i, j)] += mass_pt[k] * vi.dot(&vj);
            }
        }
    }

    let centroid = p.points[..p.junctions].iter().fold(P2::zero(), |acc, q| acc + *q) * (1.0 / p.junctions as f64);
    let mut rigid = vec![DVector::zeros(dim); 3];
    for k in 0..p.points.len() {
        let q = p.points[k] - centroid;
        let motions = [Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(-q.y, q.x)];
        for (r, m) in rigid.iter_mut().zip(motions) {
            if k < p.junctions {
                r[2 * k] = m.x;
                r[2 * k + 1] = m.y;
            } else {
                r[p.junctions + k] = m.dot(&v2(p.normals[k]));
            }
        }
    }
    Quadratic { gradient: g, hessian: h, area_jacobian: da, mass, rigid }
}

/// Eigenvalues of the mass-weighted Hessian restricted to area-preserving
/// directions orthogonal to rigid motions.
pub(crate) fn projected_spectrum(q: &Quadratic) -> Vec<f64> {
    let dim = q.mass.nrows();
    let chol = q.mass.clone().cholesky().expect("lumped masses are positive");
    let l = chol.l();
    // in the variables eta = L^T xi the metric is Euclidean
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    let h = &linv * &q.hessian * linv.transpose();

    let mut cols: Vec<DVector<f64>> =
        (0..q.area_jacobian.nrows()).map(|r| &linv * q.area_jacobian.row(r).transpose()).collect();
    cols.extend(q.rigid.iter().map(|r| l.transpose() * r));
    let basis = crate::linalg::orthonormalize(&cols, 1e-10);
    let qm = DMatrix::from_columns(&basis);
    let proj = DMatrix::identity(dim, dim) - &qm * qm.transpose();

    let sigma = h.norm() + 1.0;
    let shifted = &proj * &h * &proj + &qm * qm.transpose() * sigma;
    let shifted = (&shifted + shifted.transpose()) * 0.5;
    let mut ev: Vec<f64> = shifted.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(dim - basis.len());
    ev
}

/// Spectrum of the second variation at discretization `m`, with the
/// diameter-squared scaling applied.
/// Also returns the Euclidean norm of the Lagrangian gradient.
pub fn discrete_spectrum(c: &Cluster, m: usize, policy: &TolerancePolicy) -> Result<(Vec<f64>, f64)> {
    let press = pressures(c, policy)?;
    let poly = discretize(c, m)?;
    let q = quadratic(&poly, &press);
    let ev = projected_spectrum(&q);
    let l2 = c.diameter().powi(2);
    Ok((ev.into_iter().map(|x| x * l2).collect(), q.gradient.norm()))
}

/// Ceiling for a candidate zero mode, relative to the largest eigenvalue.
pub const ZERO_MODE_REL: f64 = 1e-4;
/// A candidate zero mode must shrink at least by this factor when the
/// discretization is refined from `m` to `2m`.
pub const REFINE_RATIO: f64 = 0.5;
/// Candidates shrinking less than `REFINE_RATIO` but more than this are
/// counted as zero modes and flagged ambiguous.
pub const AMBIGUOUS_RATIO: f64 = 0.9;
/// Below this (relative to the largest eigenvalue) a mode is zero outright.
const NUMERICAL_ZERO: f64 = 1e-10;

/// Second-variation stability at `m` points per edge, with zero modes
/// confirmed at `2m`.
///
/// Eigenvalues at both resolutions are ordered by magnitude and matched by
/// rank. A mode counts as zero when it lies below `ZERO_MODE_REL * max|lambda|`
/// at `m` and shrinks by `REFINE_RATIO` at `2m`, so that genuine small
/// eigenvalues, which converge to a nonzero limit, are not mistaken for
/// discretization artifacts of a flat direction.
pub fn stability_report(c: &Cluster, m: usize, policy: &TolerancePolicy) -> Result<HessianReport> {
    let (ev, grad) = discrete_spectrum(c, m, policy)?;
    let (fine, _) = discrete_spectrum(c, 2 * m, policy)?;
    let by_size = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        s
    };
    let (coarse_abs, fine_abs) = (by_size(&ev), by_size(&fine));
    let top = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let threshold = ZERO_MODE_REL * top;
    let mut zero_mode_count = 0usize;
    let mut ambiguous = false;
    for (a, b) in coarse_abs.iter().zip(&fine_abs) {
        let exact = a.abs() <= NUMERICAL_ZERO * top;
        let under = a.abs() <= threshold;
        if exact || (under && b.abs() <= REFINE_RATIO * a.abs()) {
            zero_mode_count += 1;
        } else if under && b.abs() <= AMBIGUOUS_RATIO * a.abs() {
            zero_mode_count += 1;
            ambiguous = true;
        } else {
            break;
        }
    }
    let zero_cut = coarse_abs.get(zero_mode_count.wrapping_sub(1)).map_or(-1.0, |x| x.abs());
    let negative_count = ev.iter().filter(|&&x| x < 0.0 && x.abs() > zero_cut).count();
    let classification = if negative_count > 0 {
        Stability::Unstable(negative_count)
    } else if zero_mode_count > 0 {
        Stability::Degenerate(zero_mode_count)
    } else {
        Stability::StrictlyStable
    };
    Ok(HessianReport {
        eigenvalues: ev,
        zero_mode_count,
        negative_count,
        classification,
        ambiguous,
        m,
        refined_low: fine_abs.into_iter().take(8).collect(),
        threshold,
        gradient_norm: grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::*;

    fn report(c: &Cluster, m: usize) -> HessianReport {
        stability_report(c, m, &TolerancePolicy::default()).unwrap()
    }

    #[test]
    fn circle_arc_polyline_is_nearly_critical() {
        let c = double_bubble(1.0, 0.8).unwrap();
        let p = TolerancePolicy::default();
        let (_, g1) = discrete_spectrum(&c, 16, &p).unwrap();
        let (_, g2) = discrete_spectrum(&c, 32, &p).unwrap();
        let slope = (g1 / g2).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn analytic_hessian_matches_differences() {
        let c = four_bubble(1.0, 0.9, 0.2, 0.25).unwrap();
        let press = pressures(&c, &TolerancePolicy::default()).unwrap();
        let poly = discretize(&c, 8).unwrap();
        let q = quadratic(&poly, &press);
        // perturb reduced coordinates and rebuild the point positions
        let energy = |x: &DVector<f64>| {
            let mut moved = poly.clone();
            for k in 0..poly.points.len() {
                let mut d = Vector2::zeros();
                for (i, v) in point_dofs(&poly, k) {
                    d += v * x[i];
                }
                moved.points[k] = poly.points[k] + P2::new(d.x, d.y);
            }
            let areas = moved.region_areas();
            moved.perimeter() - areas.iter().zip(&press).map(|(a, p)| a * p).sum::<f64>()
        };
        let dim = q.gradient.len();
        let mut rng = 0x2545f4914f6cdd1du64;
        let mut rand = || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let v = DVector::from_fn(dim, |_, _| rand());
        let w = DVector::from_fn(dim, |_, _| rand());
        let h = 1e-6;
        let fd_grad = (energy(&(&v * h)) - energy(&(&v * -h))) / (2.0 * h);
        assert!((fd_grad - q.gradient.dot(&v)).abs() < 1e-6 * (1.0 + fd_grad.abs()), "{fd_grad} vs {}", q.gradient.dot(&v));
        let h = 1e-4;
        let fd_hess = (energy(&((&v + &w) * h)) - energy(&((&v - &w) * h)) - energy(&((&w - &v) * h))
            + energy(&((-&v - &w) * h)))
            / (4.0 * h * h);
        let exact = (v.transpose() * &q.hessian * &w)[0];
        assert!((fd_hess - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{fd_hess} vs {exact}");
    }

    #[test]
    fn area_rows_match_shoelace() {
        let c = symmetric_triple_bubble(1.0).unwrap();
        let poly = discretize(&c, 8).unwrap();
        let q = quadratic(&poly, &[0.0; 4]);
        for r in 0..3 {
            let row = q.area_jacobian.row(r);
            for i in [0, 5, 7, 20] {
                let h = 1e-6;
                let shift = |sgn: f64| {
                    let mut moved = poly.clone();
                    for k in 0..poly.points.len() {
                        for (j, v) in point_dofs(&poly, k) {
                            if j == i {
                                moved.points[k] += P2::new(v.x, v.y) * (sgn * h);
                            }
                        }
                    }
                    moved.region_areas()[r + 1]
                };
                let fd = (shift(1.0) - shift(-1.0)) / (2.0 * h);
                assert!((fd - row[i]).abs() < 1e-8, "region {r} dof {i}: {fd} vs {}", row[i]);
            }
        }
    }

    #[test]
    fn double_bubble_is_strictly_stable() {
        let c = double_bubble(1.0, 0.7).unwrap();
        let r = report(&c, 32);
        assert_eq!(r.classification, Stability::StrictlyStable, "{:?}", &r.eigenvalues[..4]);
        assert!(r.eigenvalues[0] > 0.0);
    }

    #[test]
    fn two_lens_has_one_flat_direction() {
        let r = report(&two_lens(1.0, 0.3).unwrap(), 16);
        assert_eq!(r.classification, Stability::Degenerate(1), "{:?}", &r.eigenvalues[..4]);
    }

    #[test]
    fn near_equal_flower_is_strictly_stable() {
        let r = report(&flower(1.0, 0.95, 0.05).unwrap(), 16);
        assert_eq!(r.classification, Stability::StrictlyStable, "{:?}", &r.eigenvalues[..4]);
        assert!(!r.ambiguous);
    }

    #[test]
    fn triple_bubble_is_strictly_stable() {
        let r = report(&symmetric_triple_bubble(1.0).unwrap(), 16);
        assert_eq!(r.classification, Stability::StrictlyStable);
    }
}
