//! Iterated approximation: each round approximates the previous union.

use std::sync::Arc;

use super::{classify, statistics_from, StatOptions, StatisticVector};
use crate::error::{PvError, Result};
use crate::geometry::build_voronoi;
use crate::pointprocess::{sample_poisson_cube, IntensityField, SeedPath};
use crate::shapes::{polytopal_union_from_cells, Shape};

/// Runs `n` rounds; round `k` samples intensity `kλκ` and classifies its
/// generators by the union produced in round `k - 1` (by `shape` for the
/// first round). Errors are always measured against `shape`.
///
/// Round 1 uses `seed` itself, so `n = 1` reproduces the plain pipeline;
/// later rounds use `seed.derive("iteration/{k}")`.
pub fn iterate_pv(
    shape: &Shape,
    kappa: &IntensityField,
    lambda: f64,
    n: usize,
    seed: &SeedPath,
    opts: &StatOptions,
) -> Result<Vec<StatisticVector>> {
    if n == 0 {
        return Err(PvError::Usage("iteration depth must be at least 1".into()));
    }
    let d = shape.dim();
    let mut current = shape.clone();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let s = if k == 1 {
            seed.clone()
        } else {
            seed.derive(format!("iteration/{k}"))
        };
        let sample = sample_poisson_cube(k as f64 * lambda, kappa, d, &s)?;
        let diagram = Arc::new(build_voronoi(&sample)?);
        let cls = classify(&diagram, &current);
        out.push(statistics_from(&diagram, &cls, shape, opts, &s)?);
        if k < n {
            current = polytopal_union_from_cells(diagram.clone(), &cls.inside_indices())?;
        }
    }
    Ok(out)
}
