//! Half-space reference model.
//!
//! Unit-intensity Poisson points on a laterally periodic slab are split by the
//! hyperplane `x_d = 0`; the approximating union is made of the cells whose
//! generators have `x_d <= 0`. Summing a score over the cells and dividing by
//! the lateral area estimates the per-area constant multiplying the weighted
//! surface content in the large-λ limits.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PvError, Result};
use crate::geometry::{build_voronoi, VoronoiDiagram};
use crate::pointprocess::{sample_poisson_slab, IntensityField, SeedPath};
use crate::shapes::Shape;
use crate::statistics::exact_intersection;

/// Score summed over the cells of the half-space approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreKind {
    SignedVolume,
    SymdiffVolume,
    Surface,
    /// `1/(d-l)`-weighted measure of the boundary `l`-faces.
    Skeleton(usize),
    /// Number of boundary `l`-faces.
    FaceCount(usize),
    /// Faces of all dimensions below `d` of the cells meeting the hyperplane.
    ZoneComplexity,
}

impl ScoreKind {
    /// Homogeneity order of the score under dilation.
    pub fn gamma(&self, d: usize) -> f64 {
        match *self {
            ScoreKind::SignedVolume | ScoreKind::SymdiffVolume => d as f64,
            ScoreKind::Surface => d as f64 - 1.0,
            ScoreKind::Skeleton(l) => l as f64,
            ScoreKind::FaceCount(_) | ScoreKind::ZoneComplexity => 0.0,
        }
    }

    pub fn check(&self, d: usize) -> Result<()> {
        match *self {
            ScoreKind::Skeleton(l) | ScoreKind::FaceCount(l) if l >= d => Err(PvError::Config(
                format!("face dimension {l} out of range for d = {d}"),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreKind::SignedVolume => write!(f, "signed_volume"),
            ScoreKind::SymdiffVolume => write!(f, "symdiff_volume"),
            ScoreKind::Surface => write!(f, "surface"),
            ScoreKind::Skeleton(l) => write!(f, "skeleton_{l}"),
            ScoreKind::FaceCount(l) => write!(f, "face_count_{l}"),
            ScoreKind::ZoneComplexity => write!(f, "zone_complexity"),
        }
    }
}

impl FromStr for ScoreKind {
    type Err = PvError;

    fn from_str(s: &str) -> Result<Self> {
        let idx = |p: &str| s.strip_prefix(p).and_then(|t| t.parse::<usize>().ok());
        Ok(match s {
            "signed_volume" => ScoreKind::SignedVolume,
            "symdiff_volume" => ScoreKind::SymdiffVolume,
            "surface" => ScoreKind::Surface,
            "zone_complexity" => ScoreKind::ZoneComplexity,
            _ => {
                if let Some(l) = idx("skeleton_") {
                    ScoreKind::Skeleton(l)
                } else if let Some(l) = idx("face_count_") {
                    ScoreKind::FaceCount(l)
                } else {
                    return Err(PvError::Config(format!(
                        "unknown score `{s}` (expected signed_volume, symdiff_volume, surface, \
                         skeleton_<l>, face_count_<l> or zone_complexity)"
                    )));
                }
            }
        })
    }
}

impl Serialize for ScoreKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScoreKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Slab geometry and replication, in units of the unit-intensity process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlabParams {
    pub dim: usize,
    /// Lateral period `L`.
    pub lateral: f64,
    /// Half-height `h`; the slab is `[0, L]^{d-1} x [-h, h]`.
    pub half_height: f64,
    pub replicates: usize,
    /// Intensity of the simulated process; estimates are rescaled to unit
    /// intensity.
    pub intensity: f64,
    /// Also run at `2h` and compare.
    pub check_doubling: bool,
}

impl Default for SlabParams {
    fn default() -> Self {
        SlabParams {
            dim: 2,
            lateral: 20.0,
            half_height: 8.0,
            replicates: 2000,
            intensity: 1.0,
            check_doubling: true,
        }
    }
}

impl SlabParams {
    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(PvError::Config(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(PvError::Config(format!("intensity must be positive, got {}", self.intensity)));
        }
        let cell = self.intensity.powf(-1.0 / self.dim as f64);
        if !(self.lateral >= 10.0 * cell) {
            return Err(PvError::Config(format!(
                "lateral period {} is below 10 expected cell diameters ({})",
                self.lateral,
                10.0 * cell
            )));
        }
        if !(self.half_height >= 5.0 * cell) {
            return Err(PvError::Config(format!(
                "half-height {} is below 5 expected cell diameters ({})",
                self.half_height,
                5.0 * cell
            )));
        }
        if self.replicates < 2 {
            return Err(PvError::Config("at least 2 replicates are needed".into()));
        }
        Ok(())
    }
}

/// Mean and standard error of one slab run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabRun {
    pub half_height: f64,
    pub value: f64,
    pub std_error: f64,
    pub replicates_used: usize,
    pub discarded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceEstimate {
    pub score_kind: ScoreKind,
    pub dim: usize,
    /// Per unit (d-1)-area at unit intensity.
    pub value: f64,
    pub std_error: f64,
    pub params: SlabParams,
    pub seed_path: String,
    pub replicates_used: usize,
    /// Replicates dropped because a contributing cell touched a cap.
    pub discarded: usize,
    /// Run at twice the half-height, when requested.
    pub doubled: Option<SlabRun>,
    /// The doubled run agrees within two combined standard errors.
    pub convergence_flag: bool,
    pub warning: Option<String>,
}

/// Score totals of one slab diagram, `None` where a contributing cell or one
/// of its facet neighbours touches a cap `|x_d| = h`.
///
/// Each score is attributed to single cells so that the periodic ghost copies
/// of a face are never counted twice: boundary facets and skeleton faces to
/// their inside cells, face counts split evenly among the inside (or zone)
/// cells containing the face.
pub fn replicate_scores(dg: &VoronoiDiagram, kinds: &[ScoreKind], h: f64) -> Vec<Option<f64>> {
    let d = dg.dim;
    let n = dg.n_cells();
    let inside: Vec<bool> = (0..n).map(|i| dg.generators[i][d - 1] <= 0.0).collect();
    let range = |i: usize| {
        dg.cell_vertices(i).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[d - 1]), hi.max(p[d - 1]))
        })
    };
    let ranges: Vec<(f64, f64)> = (0..n).map(range).collect();
    let zone: Vec<bool> = ranges.iter().map(|&(lo, hi)| lo <= 0.0 && hi >= 0.0).collect();
    // A cell or one of its facet neighbours clipped by a cap.
    let cap = h * (1.0 - 1e-12);
    let near_cap = |i: usize| {
        let reach = |j: usize| ranges[j].0 <= -cap || ranges[j].1 >= cap;
        reach(i) || dg.cells[i].neighbors.iter().any(|&e| reach(dg.cell_of(e)))
    };
    let half = Shape::half_space(d);
    let mixed = |f: u32| {
        let c = &dg.face(f).cells;
        c.iter().any(|&g| inside[dg.cell_of(g)]) && c.iter().any(|&g| !inside[dg.cell_of(g)])
    };
    let count = |f: u32, flags: &[bool]| dg.face(f).cells.iter().filter(|&&g| flags[dg.cell_of(g)]).count();

    kinds
        .iter()
        .map(|kind| {
            let mut total = 0.0;
            for i in 0..n {
                let cell = &dg.cells[i];
                let score = match *kind {
                    ScoreKind::SignedVolume | ScoreKind::SymdiffVolume => {
                        let (lo, hi) = ranges[i];
                        let below = if hi <= 0.0 {
                            cell.volume
                        } else if lo >= 0.0 {
                            0.0
                        } else {
                            exact_intersection(dg, i, &half).expect("half-space is exact")
                        };
                        match (inside[i], *kind) {
                            (true, _) => cell.volume - below,
                            (false, ScoreKind::SignedVolume) => -below,
                            (false, _) => below,
                        }
                    }
                    _ if !inside[i] && *kind != ScoreKind::ZoneComplexity => 0.0,
                    ScoreKind::Surface => cell.faces[d - 1]
                        .iter()
                        .filter(|&&f| mixed(f))
                        .map(|&f| dg.face(f).measure)
                        .sum(),
                    ScoreKind::Skeleton(l) => {
                        cell.faces[l].iter().filter(|&&f| mixed(f)).map(|&f| dg.face(f).measure).sum::<f64>()
                            / (d - l) as f64
                    }
                    ScoreKind::FaceCount(l) => cell.faces[l]
                        .iter()
                        .filter(|&&f| mixed(f))
                        .map(|&f| 1.0 / count(f, &inside) as f64)
                        .sum(),
                    ScoreKind::ZoneComplexity => {
                        if !zone[i] {
                            0.0
                        } else {
                            (0..d)
                                .flat_map(|l| cell.faces[l].iter())
                                .map(|&f| 1.0 / count(f, &zone) as f64)
                                .sum()
                        }
                    }
                };
                if score != 0.0 {
                    if near_cap(i) {
                        return None;
                    }
                    total += score;
                }
            }
            Some(total)
        })
        .collect()
}

fn slab_runs(
    kinds: &[ScoreKind],
    p: &SlabParams,
    h: f64,
    seed: &SeedPath,
) -> Result<Vec<SlabRun>> {
    let d = p.dim;
    let area = p.lateral.powi(d as i32 - 1);
    let rows: Vec<Vec<Option<f64>>> = (0..p.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<Option<f64>>> {
            let s = seed.derive(format!("slab/h={h}/rep/{r}"));
            let sample = sample_poisson_slab(p.intensity, p.lateral, h, d, &s)?;
            let dg = build_voronoi(&sample)?;
            Ok(replicate_scores(&dg, kinds, h))
        })
        .collect::<Result<_>>()?;
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            // Rescale to unit intensity: per-area totals grow like
            // τ^{(d-1-γ)/d}.
            let scale = p.intensity.powf((d as f64 - 1.0 - kind.gamma(d)) / d as f64);
            let vals: Vec<f64> = rows.iter().filter_map(|r| r[k]).map(|v| v / area / scale).collect();
            let m = vals.len();
            let mean = vals.iter().sum::<f64>() / m.max(1) as f64;
            let var = if m > 1 {
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64
            } else {
                f64::NAN
            };
            SlabRun {
                half_height: h,
                value: mean,
                std_error: (var / m as f64).sqrt(),
                replicates_used: m,
                discarded: p.replicates - m,
            }
        })
        .collect())
}

/// Estimates several constants from the same slab replicates.
pub fn estimate_constants(
    kinds: &[ScoreKind],
    params: &SlabParams,
    seed: &SeedPath,
) -> Result<Vec<HalfSpaceEstimate>> {
    params.validate()?;
    for k in kinds {
        k.check(params.dim)?;
    }
    let base = slab_runs(kinds, params, params.half_height, seed)?;
    let doubled = if params.check_doubling {
        Some(slab_runs(kinds, params, 2.0 * params.half_height, seed)?)
    } else {
        None
    };
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(k, kind)| {
            let run = base[k];
            let dbl = doubled.as_ref().map(|v| v[k]);
            let convergence_flag = dbl.is_some_and(|o| {
                (run.value - o.value).abs() <= 2.0 * (run.std_error.powi(2) + o.std_error.powi(2)).sqrt()
            });
            let warning = if run.replicates_used < 2 {
                Some(format!("only {} uncontaminated replicates", run.replicates_used))
            } else if dbl.is_some() && !convergence_flag {
                Some(format!(
                    "estimate moved from {} to {} when the half-height was doubled",
                    run.value,
                    dbl.unwrap().value
                ))
            } else {
                None
            };
            HalfSpaceEstimate {
                score_kind: *kind,
                dim: params.dim,
                value: run.value,
                std_error: run.std_error,
                params: *params,
                seed_path: seed.path.clone(),
                replicates_used: run.replicates_used,
                discarded: run.discarded,
                doubled: dbl,
                convergence_flag,
                warning,
            }
        })
        .collect())
}

pub fn estimate_constant(kind: ScoreKind, params: &SlabParams, seed: &SeedPath) -> Result<HalfSpaceEstimate> {
    Ok(estimate_constants(&[kind], params, seed)?.remove(0))
}

/// First-order prediction `value · H^{d-1}_{κ,γ}(∂A) · λ^{(d-1-γ)/d}`.
pub fn predict_mean(
    estimate: &HalfSpaceEstimate,
    shape: &Shape,
    kappa: &IntensityField,
    gamma: f64,
    lambda: f64,
) -> Result<f64> {
    let d = estimate.dim;
    if shape.dim() != d {
        return Err(PvError::Usage(format!(
            "estimate is for d = {d} but the shape has d = {}",
            shape.dim()
        )));
    }
    let expected = estimate.score_kind.gamma(d);
    if gamma != expected {
        return Err(PvError::Usage(format!(
            "score {} is homogeneous of order {expected}, not {gamma}",
            estimate.score_kind
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PvError::Usage(format!("lambda must be positive, got {lambda}")));
    }
    let content = shape.weighted_surface_content(kappa, gamma, 1)?;
    Ok(estimate.value * content * lambda.powf(exponent(d, gamma)))
}

/// Growth exponent `(d - 1 - γ)/d` of the mean of a score of order γ.
pub fn exponent(d: usize, gamma: f64) -> f64 {
    (d as f64 - 1.0 - gamma) / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_names_round_trip() {
        for k in [
            ScoreKind::SignedVolume,
            ScoreKind::SymdiffVolume,
            ScoreKind::Surface,
            ScoreKind::Skeleton(1),
            ScoreKind::FaceCount(0),
            ScoreKind::ZoneComplexity,
        ] {
            assert_eq!(k.to_string().parse::<ScoreKind>().unwrap(), k);
        }
        assert!("surfac".parse::<ScoreKind>().unwrap_err().is_config());
        assert!("face_count_x".parse::<ScoreKind>().is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(exponent(2, ScoreKind::Surface.gamma(2)), 0.0);
        assert_eq!(exponent(2, ScoreKind::SymdiffVolume.gamma(2)), -0.5);
        assert_eq!(exponent(3, ScoreKind::FaceCount(1).gamma(3)), 2.0 / 3.0);
    }

    #[test]
    fn small_slabs_are_rejected() {
        let p = SlabParams {
            lateral: 5.0,
            ..Default::default()
        };
        assert!(p.validate().unwrap_err().is_config());
        let p = SlabParams {
            half_height: 2.0,
            ..Default::default()
        };
        assert!(p.validate().unwrap_err().is_config());
        let seed = SeedPath::root_from_u64(1);
        let p = SlabParams::default();
        assert!(estimate_constant(ScoreKind::Skeleton(2), &p, &seed).unwrap_err().is_config());
    }
}
