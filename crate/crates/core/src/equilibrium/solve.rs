use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{edge_geometry, half_start_data};
use crate::cluster::Cluster;
use crate::error::{Error, Result};
use crate::geometry::MAX_TURN_MARGIN;
use crate::linalg::central_jacobian;

/// Levenberg-Marquardt settings. All residuals are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Stop once every residual component is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping relative to `trace(J^T J) / dim`.
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    /// Finite-difference step relative to the diameter.
    pub fd_step: f64,
    /// Chords shorter than this times the diameter count as collapsed.
    pub min_chord: f64,
    /// Half-angles within this of pi count as a breakdown.
    pub max_turn_margin: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            lambda_init: 1e-3,
            lambda_up: 2.0,
            lambda_down: 0.5,
            fd_step: 1e-6,
            min_chord: 1e-8,
            max_turn_margin: 1e-3,
        }
    }
}

impl SolveOptions {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut o = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {k}: {e}", n + 1)));
            match k {
                "tol" => o.tol = num(v)?,
                "max_iter" => {
                    o.max_iter = v.parse().map_err(|e| Error::Parse(format!("line {}: {k}: {e}", n + 1)))?
                }
                "lambda_init" => o.lambda_init = num(v)?,
                "lambda_up" => o.lambda_up = num(v)?,
                "lambda_down" => o.lambda_down = num(v)?,
                "fd_step" => o.fd_step = num(v)?,
                "min_chord" => o.min_chord = num(v)?,
                "max_turn_margin" => o.max_turn_margin = num(v)?,
                _ => return Err(Error::Parse(format!("line {}: unknown key {k}", n + 1))),
            }
        }
        Ok(o)
    }

    pub fn to_kv(&self) -> String {
        format!(
            "tol = {:e}\nmax_iter = {}\nlambda_init = {:e}\nlambda_up = {}\nlambda_down = {}\nfd_step = {:e}\nmin_chord = {:e}\nmax_turn_margin = {:e}\n",
            self.tol, self.max_iter, self.lambda_init, self.lambda_up, self.lambda_down, self.fd_step, self.min_chord, self.max_turn_margin
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub cluster: Cluster,
    pub iterations: usize,
    /// Max-norm of the residual vector at each accepted iterate.
    pub history: Vec<f64>,
}

struct Problem<'a> {
    base: &'a Cluster,
    target: &'a [f64],
    scale: f64,
    anchor: (f64, f64),
    anchor_angle: f64,
    opts: SolveOptions,
}

impl Problem<'_> {
    fn degenerate(&self, c: &Cluster) -> Option<String> {
        for e in 0..c.edge_count() {
            let a = c.arc(e);
            if a.chord_length() < self.opts.min_chord * self.scale {
                return Some(format!("edge {e} collapsed"));
            }
            match a.half_angle() {
                Ok(phi) if phi.abs() <= std::f64::consts::PI - self.opts.max_turn_margin.max(MAX_TURN_MARGIN) => {}
                _ => return Some(format!("edge {e} turned past a full circle")),
            }
        }
        None
    }

    fn first_tangent_angle(c: &Cluster) -> Result<f64> {
        let h = c.outgoing(0)[0];
        let g = edge_geometry(c)?;
        Ok(half_start_data(&g, h).0.angle())
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let c = self.base.with_state(x);
        let l = self.scale;
        let g = edge_geometry(&c)?;
        let mut r = Vec::new();
        let mut coc = Vec::new();
        for v in 0..c.vertex_count() {
            let mut t = crate::cluster::P2::zero();
            let mut k = 0.0;
            for h in c.outgoing(v) {
                let (tan, kap) = half_start_data(&g, h);
                t += tan;
                k += kap;
            }
            r.extend([t.x, t.y]);
            coc.push(k * l);
        }
        r.extend(coc);
        let areas = c.region_areas()?;
        r.extend(areas.iter().zip(self.target).map(|(a, t)| (a - t) / (l * l)));
        let p0 = c.vertices()[0];
        r.push((p0.x - self.anchor.0) / l);
        r.push((p0.y - self.anchor.1) / l);
        let d = Self::first_tangent_angle(&c)? - self.anchor_angle;
        r.push(d.sin().atan2(d.cos()));
        Ok(r)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Moves `initial` to an equilibrium with the given region areas.
///
/// Damped Gauss-Newton on the stacked residual (junction angles, curvature
/// sums, area mismatch, and three gauge rows pinning vertex 0 and the
/// direction of its first outgoing edge).
pub fn solve(initial: &Cluster, target: &[f64], opts: &SolveOptions) -> Result<SolveOutcome> {
    if target.len() != initial.region_count() {
        return Err(Error::Domain(format!("expected {} target areas, got {}", initial.region_count(), target.len())));
    }
    if target.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::Domain("target areas must be positive".into()));
    }
    let report = initial.validate();
    if !report.is_valid() {
        let msg: Vec<String> = report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Error::Structural(msg.join("; ")));
    }
    let scale = initial.diameter();
    let p0 = initial.vertices()[0];
    let problem = Problem {
        base: initial,
        target,
        scale,
        anchor: (p0.x, p0.y),
        anchor_angle: Problem::first_tangent_angle(initial)?,
        opts: *opts,
    };
    let nv = initial.vertex_count();
    let dim = initial.chart_dim();
    // unknowns are scaled to be dimensionless
    let col_scale: Vec<f64> = (0..dim).map(|j| if j < 2 * nv { scale } else { scale * scale }).collect();
    let steps: Vec<f64> = col_scale.iter().map(|s| s * opts.fd_step).collect();

    let mut x = initial.state();
    let mut r = problem.residual(&x)?;
    let mut history = vec![max_abs(&r)];
    let mut lambda = f64::NAN;
    let mut last_reject: Option<String> = None;

    for iter in 0..opts.max_iter {
        if max_abs(&r) < opts.tol {
            return Ok(SolveOutcome { cluster: initial.with_state(&x), iterations: iter, history });
        }
        let mut j = central_jacobian(&x, &steps, |y| problem.residual(y))?;
        for (col, s) in col_scale.iter().enumerate() {
            j.column_mut(col).scale_mut(*s);
        }
        let jt = j.transpose();
        let jtj = &jt * &j;
        let rv = DVector::from_column_slice(&r);
        let g = &jt * &rv;
        if lambda.is_nan() {
            lambda = opts.lambda_init * jtj.trace() / dim as f64;
        }
        let cost = rv.norm_squared();
        let mut accepted = false;
        while lambda < 1e20 * (1.0 + jtj.trace()) {
            let a = &jtj + DMatrix::identity(dim, dim) * lambda;
            let Some(chol) = a.cholesky() else {
                lambda *= opts.lambda_up;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let trial: Vec<f64> = x.iter().zip(delta.iter()).zip(&col_scale).map(|((xi, d), s)| xi + d * s).collect();
            let trial_cluster = initial.with_state(&trial);
            if let Some(why) = problem.degenerate(&trial_cluster) {
                last_reject = Some(why);
                lambda *= opts.lambda_up;
                continue;
            }
            match problem.residual(&trial) {
                Ok(rt) if rt.iter().map(|v| v * v).sum::<f64>() < cost => {
                    x = trial;
                    r = rt;
                    lambda *= opts.lambda_down;
                    accepted = true;
                    last_reject = None;
                    break;
                }
                Ok(_) => {
                    last_reject = None;
                    lambda *= opts.lambda_up;
                }
                Err(e) => {
                    last_reject = Some(e.to_string());
                    lambda *= opts.lambda_up;
                }
            }
        }
        if !accepted {
            if let Some(why) = last_reject {
                return Err(Error::TopologyBreakdown(why));
            }
            return Err(Error::NonConvergence { history });
        }
        history.push(max_abs(&r));
    }
    if max_abs(&r) < opts.tol {
        return Ok(SolveOutcome { cluster: initial.with_state(&x), iterations: opts.max_iter, history });
    }
    Err(Error::NonConvergence { history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::fixtures::equal_double_bubble;
    use crate::equilibrium::{pressures, residuals};
    use crate::tolerance::TolerancePolicy;

    #[test]
    fn fixed_point_is_returned_unchanged() {
        let c = equal_double_bubble();
        let a = c.region_areas().unwrap();
        let out = solve(&c, &a, &SolveOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.cluster, c);
    }

    #[test]
    fn scaled_areas_scale_pressures() {
        let c = equal_double_bubble().transformed(1.0, 0.3, crate::cluster::P2::new(0.2, 0.1));
        let a: Vec<f64> = c.region_areas().unwrap().iter().map(|x| x * 1.1).collect();
        let out = solve(&c, &a, &SolveOptions::default()).unwrap();
        let r = residuals(&out.cluster).unwrap();
        assert!(r.angle_sup < 1e-9 && r.cocycle_sup < 1e-9);
        let p = pressures(&out.cluster, &TolerancePolicy::default()).unwrap();
        for pi in &p[1..] {
            assert!((pi - 1.0 / 1.1f64.sqrt()).abs() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn unequal_targets_from_equal_start() {
        let c = equal_double_bubble();
        let a = c.region_areas().unwrap();
        let t = [a[0] * 1.4, a[1] * 0.8];
        let out = solve(&c, &t, &SolveOptions::default()).unwrap();
        let got = out.cluster.region_areas().unwrap();
        assert!((got[0] - t[0]).abs() < 1e-8 && (got[1] - t[1]).abs() < 1e-8);
        assert!(out.cluster.validate().is_valid());
    }

    #[test]
    fn deterministic() {
        let c = equal_double_bubble();
        let a = c.region_areas().unwrap();
        let t = [a[0] * 0.9, a[1] * 1.2];
        let x = solve(&c, &t, &SolveOptions::default()).unwrap();
        let y = solve(&c, &t, &SolveOptions::default()).unwrap();
        assert_eq!(x.cluster, y.cluster);
        assert_eq!(x.history, y.history);
    }

    #[test]
    fn iteration_cap_reports_history() {
        let c = equal_double_bubble();
        let a = c.region_areas().unwrap();
        let opts = SolveOptions { max_iter: 1, ..Default::default() };
        match solve(&c, &[a[0] * 3.0, a[1]], &opts) {
            Err(Error::NonConvergence { history }) => assert!(!history.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn options_parse() {
        let o = SolveOptions::from_kv("# demo\ntol = 1e-8\nmax_iter=12\n").unwrap();
        assert_eq!(o.tol, 1e-8);
        assert_eq!(o.max_iter, 12);
        assert_eq!(SolveOptions::from_kv(&SolveOptions::default().to_kv()).unwrap(), SolveOptions::default());
        assert!(SolveOptions::from_kv("bogus = 1").is_err());
        assert!(SolveOptions::from_kv("tol 1").is_err());
    }

    #[test]
    fn bad_targets_rejected() {
        let c = equal_double_bubble();
        assert!(matches!(solve(&c, &[1.0], &SolveOptions::default()), Err(Error::Domain(_))));
        assert!(matches!(solve(&c, &[1.0, -1.0], &SolveOptions::default()), Err(Error::Domain(_))));
    }
}
