use thiserror::Error;

use crate::cluster::Cluster;
use crate::equilibrium::{solve, SolveOptions};
use crate::error::Error;

/// A continuation that stopped early; `path` holds every cluster reached,
/// starting with the initial one.
#[derive(Debug, Error)]
#[error("continuation stopped after {} of its steps: {source}", .path.len().saturating_sub(1))]
pub struct PartialPath {
    pub path: Vec<Cluster>,
    #[source]
    pub source: Error,
}

/// Follows the equilibrium family from `start` to the area vector `target`
/// in `steps` equal increments.
///
/// Each step is predicted by secant extrapolation of the last two clusters
/// (or the last cluster alone) and corrected by [`solve`].
pub fn continue_family(
    start: &Cluster,
    target: &[f64],
    steps: usize,
    opts: &SolveOptions,
) -> std::result::Result<Vec<Cluster>, PartialPath> {
    let mut path = vec![start.clone()];
    if steps == 0 {
        return Ok(path);
    }
    let a0 = match start.region_areas() {
        Ok(a) => a,
        Err(source) => return Err(PartialPath { path, source }),
    };
    if target.len() != a0.len() {
        let source = Error::Domain(format!("expected {} target areas, got {}", a0.len(), target.len()));
        return Err(PartialPath { path, source });
    }
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let goal: Vec<f64> = a0.iter().zip(target).map(|(a, b)| a + (b - a) * t).collect();
        let seed = predict(&path);
        let solved = solve(&seed, &goal, opts).or_else(|_| solve(&path[path.len() - 1], &goal, opts));
        match solved {
            Ok(out) => path.push(out.cluster),
            Err(source) => return Err(PartialPath { path, source }),
        }
    }
    Ok(path)
}

fn predict(path: &[Cluster]) -> Cluster {
    let last = &path[path.len() - 1];
    if path.len() < 2 {
        return last.clone();
    }
    let (x1, x0) = (last.state(), path[path.len() - 2].state());
    let guess: Vec<f64> = x1.iter().zip(&x0).map(|(a, b)| 2.0 * a - b).collect();
    let c = last.with_state(&guess);
    if c.validate().is_valid() {
        c
    } else {
        last.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{double_bubble, symmetric_triple_bubble};
    use crate::equilibrium::pressures;
    use crate::tolerance::TolerancePolicy;

    #[test]
    fn zero_steps_is_the_start() {
        let c = double_bubble(1.0, 1.0).unwrap();
        let path = continue_family(&c, &[9.0, 9.0], 0, &SolveOptions::default()).unwrap();
        assert_eq!(path, vec![c]);
    }

    #[test]
    fn double_bubble_grows_one_side() {
        let c = double_bubble(1.0, 1.0).unwrap();
        let a = c.region_areas().unwrap();
        let target = [a[0], 2.0 * a[1]];
        let path = continue_family(&c, &target, 10, &SolveOptions::default()).unwrap();
        assert_eq!(path.len(), 11);
        let end = path.last().unwrap();
        let got = end.region_areas().unwrap();
        assert!((got[0] - target[0]).abs() < 1e-8 && (got[1] - target[1]).abs() < 1e-8);
        let p = pressures(end, &TolerancePolicy::default()).unwrap();
        assert!(p[2] < p[1], "{p:?}");
        // consecutive clusters stay close
        for w in path.windows(2) {
            let moved = w[0].vertices().iter().zip(w[1].vertices()).map(|(a, b)| a.distance(*b)).fold(0.0, f64::max);
            assert!(moved < 0.2, "{moved}");
        }
    }

    #[test]
    fn triple_bubble_reaches_perturbed_areas() {
        let c = symmetric_triple_bubble(1.0).unwrap();
        let a = c.region_areas().unwrap();
        let target: Vec<f64> = a.iter().zip([1.05, 0.96, 1.02]).map(|(x, f)| x * f).collect();
        let path = continue_family(&c, &target, 5, &SolveOptions::default()).unwrap();
        let got = path.last().unwrap().region_areas().unwrap();
        for (g, t) in got.iter().zip(&target) {
            assert!((g - t).abs() < 1e-8);
        }
    }

    #[test]
    fn failure_keeps_the_partial_path() {
        let c = double_bubble(1.0, 1.0).unwrap();
        let opts = SolveOptions { max_iter: 1, ..SolveOptions::default() };
        let err = continue_family(&c, &[5.0, 0.5], 4, &opts).unwrap_err();
        assert!(!err.path.is_empty() && err.path[0] == c);
        assert!(err.path.len() <= 4);
    }
}
