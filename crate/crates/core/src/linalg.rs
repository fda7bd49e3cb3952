//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Central-difference Jacobian of `f` at `x0` with per-coordinate steps.
pub fn central_jacobian<F>(x0: &[f64], steps: &[f64], mut f: F) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    debug_assert_eq!(x0.len(), steps.len());
    let mut x = x0.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(x0.len());
    let mut rows = 0;
    for j in 0..x0.len() {
        let h = steps[j];
        x[j] = x0[j] + h;
        let fp = f(&x)?;
        x[j] = x0[j] - h;
        let fm = f(&x)?;
        x[j] = x0[j];
        rows = fp.len();
        cols.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    Ok(DMatrix::from_fn(rows, x0.len(), |i, j| cols[j][i]))
}

/// Singular values (descending) plus an orthonormal basis of the numerical
/// null space of `m` (columns), using the cut `rel * sigma_max`.
#[derive(Debug, Clone)]
pub struct RankInfo {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub nullity: usize,
    /// Smallest kept over largest dropped singular value (infinite when
    /// nothing numerical was dropped).
    pub gap_ratio: f64,
    pub null_basis: DMatrix<f64>,
}

pub fn rank_info(m: &DMatrix<f64>, rel: f64) -> RankInfo {
    let ncols = m.ncols();
    // pad to at least square so V is complete
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = rel * smax;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let nullity = ncols - rank;
    let gap_ratio = if rank == 0 {
        0.0
    } else if rank < sv.len() && sv[rank] > 0.0 {
        sv[rank - 1] / sv[rank]
    } else {
        f64::INFINITY
    };
    let null_basis = DMatrix::from_fn(ncols, nullity, |i, k| v_t[(order[rank + k], i)]);
    // only report the genuine singular values of the unpadded matrix
    let keep = m.nrows().min(ncols);
    RankInfo { singular_values: sv[..keep].to_vec(), rank, nullity, gap_ratio, null_basis }
}

/// Orthonormal basis (columns) of the span of the given columns, dropping
/// directions below `tol` after Gram-Schmidt (applied twice).
pub fn orthonormalize(cols: &[DVector<f64>], tol: f64) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let d = q.dot(&v);
                v -= q * d;
            }
        }
        let n = v.norm();
        if n > tol * c.norm().max(1e-300) {
            out.push(v / n);
        }
    }
    out
}
