//! Local dimension of the equilibrium variety and second-variation
//! stability.

mod continuation;
mod discretize;
mod hessian;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::cluster::Cluster;
use crate::equilibrium::{edge_geometry, half_start_data};
use crate::error::Result;
use crate::linalg::{central_jacobian, orthonormalize, rank_info};
use crate::tolerance::TolerancePolicy;

pub use continuation::{continue_family, PartialPath};
pub use discretize::{discretize, Polyline};
pub use hessian::{discrete_spectrum, stability_report, HessianReport, Stability, ZERO_MODE_REL};

/// Orthonormal infinitesimal rigid motions in chart coordinates:
/// x-translation, y-translation, rotation about the vertex centroid.
/// Bulge components are zero.
pub fn rigid_motion_basis(c: &Cluster) -> Vec<DVector<f64>> {
    let dim = c.chart_dim();
    let nv = c.vertex_count();
    let g = c.centroid();
    let mut tx = DVector::zeros(dim);
    let mut ty = DVector::zeros(dim);
    let mut rot = DVector::zeros(dim);
    for (i, p) in c.vertices().iter().enumerate() {
        tx[2 * i] = 1.0;
        ty[2 * i + 1] = 1.0;
        rot[2 * i] = -(p.y - g.y);
        rot[2 * i + 1] = p.x - g.x;
    }
    let _ = nv;
    orthonormalize(&[tx, ty, rot], 1e-12)
}

/// Local length scales: per vertex the shortest incident chord, per edge
/// its chord.
pub(crate) struct LocalScales {
    pub vertex: Vec<f64>,
    pub edge: Vec<f64>,
    pub area: Vec<f64>,
}

impl LocalScales {
    pub fn of(c: &Cluster) -> Result<Self> {
        let edge: Vec<f64> = (0..c.edge_count()).map(|e| c.arc(e).chord_length()).collect();
        let mut vertex = vec![f64::INFINITY; c.vertex_count()];
        for (e, r) in c.edges().iter().enumerate() {
            vertex[r.tail] = vertex[r.tail].min(edge[e]);
            vertex[r.head] = vertex[r.head].min(edge[e]);
        }
        let area = c.region_areas()?.iter().map(|a| a.abs().max(1e-300)).collect();
        Ok(Self { vertex, edge, area })
    }

    /// Scale of each chart coordinate: vertex coordinates by the vertex
    /// scale, bulges by chord squared.
    pub fn columns(&self) -> Vec<f64> {
        self.vertex.iter().flat_map(|&s| [s, s]).chain(self.edge.iter().map(|c| c * c)).collect()
    }
}

/// Junction residuals made dimensionless with local scales: angle sums,
/// curvature sums times the vertex scale, and (optionally) areas relative
/// to their reference values.
pub(crate) fn constraint_vector(c: &Cluster, s: &LocalScales, with_areas: bool) -> Result<Vec<f64>> {
    let g = edge_geometry(c)?;
    let mut out = Vec::with_capacity(3 * c.vertex_count() + c.region_count());
    let mut coc = Vec::with_capacity(c.vertex_count());
    for v in 0..c.vertex_count() {
        let mut t = crate::cluster::P2::zero();
        let mut k = 0.0;
        for h in c.outgoing(v) {
            let (tan, kap) = half_start_data(&g, h);
            t += tan;
            k += kap;
        }
        out.extend([t.x, t.y]);
        coc.push(k * s.vertex[v]);
    }
    out.extend(coc);
    if with_areas {
        out.extend(c.region_areas()?.iter().zip(&s.area).map(|(a, r)| a / r));
    }
    Ok(out)
}

/// Jacobian of [`constraint_vector`] with respect to the locally scaled
/// chart (each coordinate divided by its entry in [`LocalScales::columns`]).
pub(crate) fn constraint_jacobian(c: &Cluster, with_areas: bool, policy: &TolerancePolicy) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let s = LocalScales::of(c)?;
    let col = s.columns();
    let steps: Vec<f64> = col.iter().map(|x| x * policy.fd_step).collect();
    let mut j = central_jacobian(&c.state(), &steps, |x| constraint_vector(&c.with_state(x), &s, with_areas))?;
    for (k, x) in col.iter().enumerate() {
        j.column_mut(k).scale_mut(*x);
    }
    Ok((j, col))
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentReport {
    pub singular_values: Vec<f64>,
    pub nullity: usize,
    pub gap_ratio: f64,
    /// Set when the spectral gap at the rank cut is below the policy's
    /// required factor.
    pub ambiguous: bool,
    /// Null-space vectors in chart coordinates (columns).
    #[serde(skip)]
    pub mode_basis: DMatrix<f64>,
}

/// Local dimension of the equilibrium variety modulo rigid motions (with
/// the areas held fixed when `fix_areas` is set).
pub fn tangent_dimension(c: &Cluster, fix_areas: bool, policy: &TolerancePolicy) -> Result<TangentReport> {
    let (j, col) = constraint_jacobian(c, fix_areas, policy)?;
    // rigid motions in the scaled chart
    let rigid: Vec<DVector<f64>> =
        rigid_motion_basis(c).into_iter().map(|v| DVector::from_fn(v.len(), |i, _| v[i] / col[i])).collect();
    let rigid = orthonormalize(&rigid, 1e-12);
    let mut m = DMatrix::zeros(j.nrows() + rigid.len(), j.ncols());
    m.view_mut((0, 0), (j.nrows(), j.ncols())).copy_from(&j);
    for (k, r) in rigid.iter().enumerate() {
        m.row_mut(j.nrows() + k).copy_from(&r.transpose());
    }
    let info = rank_info(&m, policy.rank_rel);
    let mut basis = info.null_basis.clone();
    for (i, s) in col.iter().enumerate() {
        basis.row_mut(i).scale_mut(*s);
    }
    Ok(TangentReport {
        singular_values: info.singular_values,
        nullity: info.nullity,
        gap_ratio: info.gap_ratio,
        ambiguous: info.gap_ratio < policy.gap_factor,
        mode_basis: basis,
    })
}
