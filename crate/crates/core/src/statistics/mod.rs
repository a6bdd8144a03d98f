//! Statistics of the Poisson–Voronoi approximation of a shape.

pub mod exact;
mod iterate;
mod maxima;
mod volume;
mod zone;

use serde::{Deserialize, Serialize};

use crate::error::{PvError, Result};
use crate::geometry::{FaceId, VoronoiDiagram};
use crate::pointprocess::SeedPath;
use crate::shapes::{PatchSpec, Shape};

pub use iterate::iterate_pv;
pub use maxima::{maximal_mask, maximal_points};
pub use volume::{
    cell_polygon, cell_polyhedron, cell_radius, volume_statistics, VolumeOptions, VolumeStats,
};
pub use zone::{zone_statistics, ZoneStats};

pub(crate) use volume::exact_intersection;

/// Which cells form the approximation and which faces bound it.
#[derive(Debug, Clone)]
pub struct CellClassification {
    /// Per original cell: is its generator in A.
    pub inside: Vec<bool>,
    /// Facets with exactly one inside incident cell and one outside.
    pub boundary_facets: Vec<FaceId>,
    /// Faces of every dimension below `d` lying on the boundary of the
    /// approximation; index `d - 1` equals `boundary_facets`.
    pub boundary_faces_by_dim: Vec<Vec<FaceId>>,
    /// Some inside cell reaches the clip boundary.
    pub boundary_touch: bool,
}

impl CellClassification {
    pub fn inside_indices(&self) -> Vec<usize> {
        (0..self.inside.len()).filter(|&i| self.inside[i]).collect()
    }

    pub fn n_inside(&self) -> usize {
        self.inside.iter().filter(|&&x| x).count()
    }
}

/// Classifies generators by membership and collects the boundary faces.
pub fn classify(diagram: &VoronoiDiagram, shape: &Shape) -> CellClassification {
    let inside: Vec<bool> = (0..diagram.n_cells())
        .map(|i| shape.contains(&diagram.generators[i]))
        .collect();
    classify_flags(diagram, inside)
}

/// Classification from precomputed membership flags.
pub fn classify_flags(diagram: &VoronoiDiagram, inside: Vec<bool>) -> CellClassification {
    let d = diagram.dim;
    let mut boundary_facets = Vec::new();
    for (id, f) in diagram.faces.iter().enumerate() {
        if f.dim != d - 1 || f.cells.len() != 2 {
            continue;
        }
        let a = inside[diagram.cell_of(f.cells[0])];
        let b = inside[diagram.cell_of(f.cells[1])];
        if a != b {
            boundary_facets.push(id as FaceId);
        }
    }
    let mut by_dim = vec![Vec::new(); d];
    by_dim[d - 1] = boundary_facets.clone();
    for l in (0..d - 1).rev() {
        let mut next: Vec<FaceId> = by_dim[l + 1]
            .iter()
            .flat_map(|&f| diagram.face(f).subfaces.iter().copied())
            .collect();
        next.sort_unstable();
        next.dedup();
        by_dim[l] = next;
    }
    let boundary_touch = (0..diagram.n_cells()).any(|i| {
        inside[i]
            && diagram.cells[i].faces[d - 1]
                .iter()
                .any(|&f| diagram.face(f).on_clip_boundary)
    });
    CellClassification {
        inside,
        boundary_facets,
        boundary_faces_by_dim: by_dim,
        boundary_touch,
    }
}

/// `S_λ(A)`: total measure of the boundary facets.
pub fn surface_statistic(diagram: &VoronoiDiagram, cls: &CellClassification) -> f64 {
    cls.boundary_facets
        .iter()
        .map(|&f| diagram.face(f).measure)
        .sum()
}

/// Skeleton statistics in dimension `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStats {
    /// Sum over inside cells of their boundary `l`-faces, weighted `1/(d-l)`.
    pub weighted_sum: f64,
    /// Each boundary `l`-face counted once.
    pub distinct_sum: f64,
    pub face_count: u64,
}

pub fn skeleton_statistics(
    diagram: &VoronoiDiagram,
    cls: &CellClassification,
    l: usize,
) -> Result<SkeletonStats> {
    let d = diagram.dim;
    if l >= d {
        return Err(PvError::Usage(format!(
            "skeleton dimension {l} out of range for d = {d}"
        )));
    }
    let mut weighted = 0.0;
    let mut distinct = 0.0;
    for &f in &cls.boundary_faces_by_dim[l] {
        let face = diagram.face(f);
        let m = face
            .cells
            .iter()
            .filter(|&&g| cls.inside[diagram.cell_of(g)])
            .count();
        weighted += m as f64 * face.measure;
        distinct += face.measure;
    }
    Ok(SkeletonStats {
        weighted_sum: weighted / (d - l) as f64,
        distinct_sum: distinct,
        face_count: cls.boundary_faces_by_dim[l].len() as u64,
    })
}

/// Optional parts of the statistic vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneOptions {
    #[serde(default)]
    pub patch: PatchSpec,
    /// Node spacing as a fraction of the typical cell diameter.
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    0.1
}

impl Default for ZoneOptions {
    fn default() -> Self {
        ZoneOptions {
            patch: PatchSpec::Whole,
            eps: default_eps(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatOptions {
    pub volume: VolumeOptions,
    pub zone: Option<ZoneOptions>,
    /// Count maximal points among the generators lying in A.
    pub maxima: bool,
}

/// Every statistic of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticVector {
    pub dim: usize,
    pub n_points: usize,
    pub n_inside: usize,
    pub volume: f64,
    pub signed_volume_error: f64,
    pub symdiff_volume: f64,
    pub symdiff_se: f64,
    pub symdiff_warning: bool,
    pub surface: f64,
    /// Indexed by skeleton dimension `0..d`.
    pub skeleton_measure: Vec<f64>,
    pub skeleton_measure_distinct: Vec<f64>,
    pub face_count: Vec<u64>,
    pub zone_complexity: Option<u64>,
    pub zone_cells: Option<u64>,
    pub zone_chord_tolerance: Option<f64>,
    pub maximal_points: Option<u64>,
    pub boundary_touch: bool,
}

impl StatisticVector {
    /// Column names in CSV order.
    pub fn columns(dim: usize) -> Vec<String> {
        let mut c: Vec<String> = [
            "dim",
            "n_points",
            "n_inside",
            "volume",
            "signed_volume_error",
            "symdiff_volume",
            "symdiff_se",
            "symdiff_warning",
            "surface",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for l in 0..dim {
            c.push(format!("skeleton_{l}"));
        }
        for l in 0..dim {
            c.push(format!("skeleton_distinct_{l}"));
        }
        for l in 0..dim {
            c.push(format!("face_count_{l}"));
        }
        for s in [
            "zone_complexity",
            "zone_cells",
            "zone_chord_tolerance",
            "maximal_points",
            "boundary_touch",
        ] {
            c.push(s.to_string());
        }
        c
    }

    /// Values in the order of [`StatisticVector::columns`]; absent optional
    /// values are empty fields.
    pub fn values(&self) -> Vec<String> {
        let opt = |x: Option<String>| x.unwrap_or_default();
        let mut v = vec![
            self.dim.to_string(),
            self.n_points.to_string(),
            self.n_inside.to_string(),
            self.volume.to_string(),
            self.signed_volume_error.to_string(),
            self.symdiff_volume.to_string(),
            self.symdiff_se.to_string(),
            self.symdiff_warning.to_string(),
            self.surface.to_string(),
        ];
        v.extend(self.skeleton_measure.iter().map(f64::to_string));
        v.extend(self.skeleton_measure_distinct.iter().map(f64::to_string));
        v.extend(self.face_count.iter().map(u64::to_string));
        v.push(opt(self.zone_complexity.map(|x| x.to_string())));
        v.push(opt(self.zone_cells.map(|x| x.to_string())));
        v.push(opt(self.zone_chord_tolerance.map(|x| x.to_string())));
        v.push(opt(self.maximal_points.map(|x| x.to_string())));
        v.push(self.boundary_touch.to_string());
        v
    }

    /// Named numeric value, as used by the fitting code. Skeleton and count
    /// columns use the CSV names (`skeleton_0`, `face_count_1`, ...).
    pub fn get(&self, name: &str) -> Option<f64> {
        let idx = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
        Some(match name {
            "n_points" => self.n_points as f64,
            "n_inside" => self.n_inside as f64,
            "volume" => self.volume,
            "signed_volume_error" => self.signed_volume_error,
            "symdiff_volume" => self.symdiff_volume,
            "surface" => self.surface,
            "zone_complexity" => self.zone_complexity? as f64,
            "zone_cells" => self.zone_cells? as f64,
            "maximal_points" => self.maximal_points? as f64,
            _ => {
                if let Some(l) = idx("skeleton_distinct_") {
                    *self.skeleton_measure_distinct.get(l)?
                } else if let Some(l) = idx("skeleton_") {
                    *self.skeleton_measure.get(l)?
                } else if let Some(l) = idx("face_count_") {
                    *self.face_count.get(l)? as f64
                } else {
                    return None;
                }
            }
        })
    }
}

/// Computes the statistic vector of one diagram against `shape`.
///
/// `reference` is the set the volume errors are measured against; it differs
/// from `shape` only for iterated approximations.
pub fn compute_statistics(
    diagram: &VoronoiDiagram,
    shape: &Shape,
    reference: &Shape,
    opts: &StatOptions,
    seed: &SeedPath,
) -> Result<StatisticVector> {
    let cls = classify(diagram, shape);
    statistics_from(diagram, &cls, reference, opts, seed)
}

pub(crate) fn statistics_from(
    diagram: &VoronoiDiagram,
    cls: &CellClassification,
    reference: &Shape,
    opts: &StatOptions,
    seed: &SeedPath,
) -> Result<StatisticVector> {
    let d = diagram.dim;
    let vol = volume_statistics(diagram, cls, reference, &opts.volume, &seed.derive("symdiff"))?;
    let mut skel = Vec::with_capacity(d);
    let mut distinct = Vec::with_capacity(d);
    let mut counts = Vec::with_capacity(d);
    for l in 0..d {
        let s = skeleton_statistics(diagram, cls, l)?;
        skel.push(s.weighted_sum);
        distinct.push(s.distinct_sum);
        counts.push(s.face_count);
    }
    let zone = match &opts.zone {
        Some(z) => {
            let spacing = z.eps * typical_spacing(diagram);
            let patch = reference.boundary_patch_spaced(&z.patch, 0.1 * spacing, spacing)?;
            Some(zone_statistics(diagram, &patch, z.eps)?)
        }
        None => None,
    };
    let maxima = opts.maxima.then(|| {
        let pts: Vec<_> = diagram.generators[..diagram.n_cells()]
            .iter()
            .filter(|p| reference.contains(p))
            .copied()
            .collect();
        maximal_points(&pts, d) as u64
    });
    Ok(StatisticVector {
        dim: d,
        n_points: diagram.n_cells(),
        n_inside: cls.n_inside(),
        volume: vol.volume,
        signed_volume_error: vol.signed_volume_error,
        symdiff_volume: vol.symdiff_volume,
        symdiff_se: vol.symdiff_se,
        symdiff_warning: vol.precision_warning,
        surface: surface_statistic(diagram, cls),
        skeleton_measure: skel,
        skeleton_measure_distinct: distinct,
        face_count: counts,
        zone_complexity: zone.as_ref().map(|z| z.complexity),
        zone_cells: zone.as_ref().map(|z| z.cells.len() as u64),
        zone_chord_tolerance: zone.as_ref().map(|z| z.chord_tolerance),
        maximal_points: maxima,
        boundary_touch: cls.boundary_touch,
    })
}

/// `(Vol(domain) / n)^{1/d}`, the typical cell diameter scale.
pub fn typical_spacing(diagram: &VoronoiDiagram) -> f64 {
    (diagram.domain.volume() / diagram.n_cells() as f64).powf(1.0 / diagram.dim as f64)
}
