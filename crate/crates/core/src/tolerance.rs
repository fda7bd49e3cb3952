//! Shared numerical thresholds.
//!
//! Finite-difference steps, rank cuts and residual tolerances all live here so
//! the checker, the solver and the dimension counts agree on what "zero" means.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Central-difference step relative to the cluster diameter (vertex
    /// coordinates) or diameter squared (bulge areas).
    pub fd_step: f64,
    /// Singular values below `rank_rel * sigma_max` count as zero.
    pub rank_rel: f64,
    /// Required ratio between the smallest kept and the largest dropped
    /// singular value; smaller gaps are reported as ambiguous.
    pub gap_factor: f64,
    /// Residual blocks (dimensionless) below this are considered satisfied.
    pub residual: f64,
    /// Dimensionless defect allowed when intersecting carriers.
    pub concurrency: f64,
    /// Allowed cross-path pressure disagreement, relative to the curvature scale.
    pub pressure_defect: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            fd_step: 1e-6,
            rank_rel: 1e-6,
            gap_factor: 100.0,
            residual: 1e-9,
            concurrency: 1e-6,
            pressure_defect: 1e-6,
        }
    }
}

impl TolerancePolicy {
    pub fn strict() -> Self {
        Self { residual: 1e-11, concurrency: 1e-8, pressure_defect: 1e-9, rank_rel: 1e-7, ..Self::default() }
    }

    pub fn loose() -> Self {
        Self { residual: 1e-6, concurrency: 1e-4, pressure_defect: 1e-4, rank_rel: 1e-5, ..Self::default() }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "strict" => Some(Self::strict()),
            "default" => Some(Self::default()),
            "loose" => Some(Self::loose()),
            _ => None,
        }
    }
}
