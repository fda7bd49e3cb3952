use nalgebra::DMatrix;

use super::{BoundaryWalk, Cluster, EXTERIOR};
use crate::error::Result;
use crate::linalg::central_jacobian;
use crate::tolerance::TolerancePolicy;

impl Cluster {
    /// Signed area enclosed by a boundary walk: shoelace area of the walk's
    /// vertex polygon plus the bulges (an edge bulging toward the region on
    /// the left of the walk removes area from it).
    pub fn walk_area(&self, walk: &BoundaryWalk) -> f64 {
        let mut shoelace = 0.0;
        let mut bulges = 0.0;
        for &h in &walk.steps {
            let a = self.vertices[self.half_start(h)];
            let b = self.vertices[self.half_end(h)];
            shoelace += a.cross(b);
            let bulge = self.edges[h.edge].bulge;
            bulges += if h.forward { -bulge } else { bulge };
        }
        0.5 * shoelace + bulges
    }

    /// Areas `A_1..A_n` of the interior regions.
    pub fn region_areas(&self) -> Result<Vec<f64>> {
        let walks = self.boundary_walks()?;
        Ok(walks.iter().filter(|w| w.region != EXTERIOR).map(|w| self.walk_area(w)).collect())
    }

    /// Total length of all edges.
    pub fn perimeter(&self) -> Result<f64> {
        (0..self.edges.len()).map(|e| self.arc(e).length()).sum()
    }

    /// Chart step sizes: `h * diameter` for coordinates, `h * diameter^2` for bulges.
    pub fn fd_steps(&self, policy: &TolerancePolicy) -> Vec<f64> {
        let d = self.diameter();
        let mut s = vec![policy.fd_step * d; 2 * self.vertices.len()];
        s.extend(std::iter::repeat_n(policy.fd_step * d * d, self.edges.len()));
        s
    }

    /// `dA_i / d(x_1, y_1, ..., b_1, ...)` by central differences.
    pub fn area_jacobian(&self, policy: &TolerancePolicy) -> Result<DMatrix<f64>> {
        let x0 = self.state();
        let steps = self.fd_steps(policy);
        central_jacobian(&x0, &steps, |x| self.with_state(x).region_areas())
    }

    /// Exact area Jacobian (the areas are a quadratic polynomial in the
    /// vertex coordinates and linear in the bulges).
    pub fn area_jacobian_analytic(&self) -> Result<DMatrix<f64>> {
        let walks = self.boundary_walks()?;
        let n = self.region_count();
        let nv = self.vertices.len();
        let mut j = DMatrix::zeros(n, self.chart_dim());
        for w in walks.iter().filter(|w| w.region != EXTERIOR) {
            let row = w.region - 1;
            let k = w.steps.len();
            for (i, &h) in w.steps.iter().enumerate() {
                let prev = self.vertices[self.half_start(w.steps[(i + k - 1) % k])];
                let next = self.vertices[self.half_end(h)];
                let v = self.half_start(h);
                j[(row, 2 * v)] += 0.5 * (next.y - prev.y);
                j[(row, 2 * v + 1)] += 0.5 * (prev.x - next.x);
                j[(row, 2 * nv + h.edge)] += if h.forward { -1.0 } else { 1.0 };
            }
        }
        Ok(j)
    }
}
