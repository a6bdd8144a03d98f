//! Volume, signed error and symmetric difference of the approximation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::exact::{
    clip_polyhedron, polygon_box_area, polygon_disk_area, polyhedron_box_volume,
    polyhedron_volume, Polyhedron,
};
use super::CellClassification;
use crate::domain::{dist2, Point};
use crate::error::{PvError, Result};
use crate::geometry::clip::{clip_axis, polygon_area2};
use crate::geometry::VoronoiDiagram;
use crate::pointprocess::SeedPath;
use crate::shapes::{Shape, ShapeKind};

/// Monte Carlo settings for cells that straddle a curved boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolumeOptions {
    /// Samples per straddling cell.
    pub mc_budget: usize,
    /// Largest acceptable standard error of the symmetric difference,
    /// relative to V(A).
    pub se_cap: f64,
    /// Budget doublings tried before the cap is reported as exceeded.
    pub max_doublings: u32,
}

impl Default for VolumeOptions {
    fn default() -> Self {
        VolumeOptions {
            mc_budget: 4096,
            se_cap: 1e-3,
            max_doublings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeStats {
    pub volume: f64,
    pub signed_volume_error: f64,
    pub symdiff_volume: f64,
    /// Monte Carlo standard error of `symdiff_volume` (0 when exact).
    pub symdiff_se: f64,
    /// Set when the standard error stayed above the cap.
    pub precision_warning: bool,
    /// Cells whose intersection with A was estimated by sampling.
    pub sampled_cells: usize,
}

/// Counter-clockwise vertex ring of a 2D cell.
pub fn cell_polygon(diagram: &VoronoiDiagram, i: usize) -> Vec<Point> {
    diagram.cell_vertices(i).copied().collect()
}

/// Facet polygons of a 3D cell.
pub fn cell_polyhedron(diagram: &VoronoiDiagram, i: usize) -> Polyhedron {
    diagram.cells[i].faces[2]
        .iter()
        .map(|&f| diagram.face(f).points.clone())
        .collect()
}

/// Largest distance from the generator to a vertex of its cell.
pub fn cell_radius(diagram: &VoronoiDiagram, i: usize) -> f64 {
    let g = &diagram.generators[i];
    diagram
        .cell_vertices(i)
        .map(|v| dist2(v, g))
        .fold(0.0, f64::max)
        .sqrt()
}

/// Where a cell lies relative to the shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Placement {
    Inside,
    Outside,
    Straddles,
}

pub(crate) fn placement(diagram: &VoronoiDiagram, i: usize, shape: &Shape) -> Placement {
    let r = cell_radius(diagram, i);
    let sd = shape.signed_distance(&diagram.generators[i]);
    if sd < -r {
        Placement::Inside
    } else if sd > r {
        Placement::Outside
    } else {
        Placement::Straddles
    }
}

/// `Vol(cell ∩ A)` in closed form, when the shape allows it.
pub(crate) fn exact_intersection(diagram: &VoronoiDiagram, i: usize, shape: &Shape) -> Option<f64> {
    let d = diagram.dim;
    match (shape.kind(), d) {
        (ShapeKind::Ball { center, radius }, 2) => {
            Some(polygon_disk_area(&cell_polygon(diagram, i), center, *radius))
        }
        (ShapeKind::Box { lo, hi }, 2) => Some(polygon_box_area(&cell_polygon(diagram, i), lo, hi)),
        (ShapeKind::Box { lo, hi }, 3) => {
            Some(polyhedron_box_volume(&cell_polyhedron(diagram, i), lo, hi))
        }
        (ShapeKind::HalfSpace, 2) => {
            let p = clip_axis(&cell_polygon(diagram, i), 1, 0.0, true);
            Some(if p.len() < 3 { 0.0 } else { polygon_area2(&p).abs() })
        }
        (ShapeKind::HalfSpace, 3) => {
            let p = clip_polyhedron(&cell_polyhedron(diagram, i), &[0.0, 0.0, 1.0], 0.0);
            Some(polyhedron_volume(&p))
        }
        _ => None,
    }
}

/// Fan decomposition of a cell into simplices from its vertex centroid.
fn strata(diagram: &VoronoiDiagram, i: usize) -> Vec<([Point; 4], f64)> {
    let mut ctr = [0.0; 3];
    let mut m = 0.0;
    for v in diagram.cell_vertices(i) {
        for k in 0..3 {
            ctr[k] += v[k];
        }
        m += 1.0;
    }
    for c in &mut ctr {
        *c /= m;
    }
    let mut out = Vec::new();
    if diagram.dim == 2 {
        let poly = cell_polygon(diagram, i);
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            let area = 0.5
                * ((a[0] - ctr[0]) * (b[1] - ctr[1]) - (a[1] - ctr[1]) * (b[0] - ctr[0])).abs();
            if area > 0.0 {
                out.push(([ctr, a, b, b], area));
            }
        }
    } else {
        for f in cell_polyhedron(diagram, i) {
            for k in 1..f.len() - 1 {
                let (a, b, c) = (f[0], f[k], f[k + 1]);
                let u = crate::domain::sub(&a, &ctr);
                let v = crate::domain::sub(&b, &ctr);
                let w = crate::domain::sub(&c, &ctr);
                let vol = crate::domain::dot(&u, &crate::domain::cross(&v, &w)).abs() / 6.0;
                if vol > 0.0 {
                    out.push(([ctr, a, b, c], vol));
                }
            }
        }
    }
    out
}

fn sample_simplex<R: Rng>(s: &[Point; 4], dim: usize, rng: &mut R) -> Point {
    let mut p = [0.0; 3];
    if dim == 2 {
        let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        for k in 0..2 {
            p[k] = s[0][k] + u * (s[1][k] - s[0][k]) + v * (s[2][k] - s[0][k]);
        }
    } else {
        let (mut a, mut b, mut c): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        if a + b > 1.0 {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        if b + c > 1.0 {
            let t = c;
            c = 1.0 - a - b;
            b = 1.0 - t;
        } else if a + b + c > 1.0 {
            let t = c;
            c = a + b + c - 1.0;
            a = 1.0 - b - t;
        }
        for k in 0..3 {
            p[k] = s[0][k]
                + a * (s[1][k] - s[0][k])
                + b * (s[2][k] - s[0][k])
                + c * (s[3][k] - s[0][k]);
        }
    }
    p
}

/// Stratified estimate of `Vol(cell ∩ A)` and its variance.
pub(crate) fn sampled_intersection(
    diagram: &VoronoiDiagram,
    i: usize,
    shape: &Shape,
    budget: usize,
    seed: &SeedPath,
) -> (f64, f64) {
    let parts = strata(diagram, i);
    let total: f64 = parts.iter().map(|p| p.1).sum();
    let mut rng = seed.rng();
    let (mut est, mut var) = (0.0, 0.0);
    for (s, vol) in &parts {
        let n = ((budget as f64 * vol / total).ceil() as usize).max(2);
        let mut hits = 0usize;
        for _ in 0..n {
            if shape.contains(&sample_simplex(s, diagram.dim, &mut rng)) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        est += vol * p;
        var += vol * vol * p * (1.0 - p) / (n - 1) as f64;
    }
    (est, var)
}

/// `V_λ(A)`, `V_λ(A) - V(A)` and `Vol(A Δ PV_λ(A))`.
pub fn volume_statistics(
    diagram: &VoronoiDiagram,
    cls: &CellClassification,
    shape: &Shape,
    opts: &VolumeOptions,
    seed: &SeedPath,
) -> Result<VolumeStats> {
    let va = shape
        .volume()
        .ok_or_else(|| PvError::Usage(format!("{} has no finite volume", shape.name())))?;
    let n = diagram.n_cells();
    let volume: f64 = (0..n)
        .filter(|&i| cls.inside[i])
        .map(|i| diagram.cells[i].volume)
        .sum();
    let mut symdiff = 0.0;
    let mut pending = Vec::new();
    for i in 0..n {
        let vol = diagram.cells[i].volume;
        let inter = match placement(diagram, i, shape) {
            Placement::Inside => vol,
            Placement::Outside => 0.0,
            Placement::Straddles => match exact_intersection(diagram, i, shape) {
                Some(v) => v.min(vol),
                None => {
                    pending.push(i);
                    continue;
                }
            },
        };
        symdiff += if cls.inside[i] { vol - inter } else { inter };
    }
    let mut budget = opts.mc_budget.max(2);
    let mut sampled = 0.0;
    let mut var = 0.0;
    let mut warning = false;
    for round in 0..=opts.max_doublings {
        sampled = 0.0;
        var = 0.0;
        for &i in &pending {
            let vol = diagram.cells[i].volume;
            let s = seed.derive(format!("mc/{budget}/{i}"));
            let (inter, v) = sampled_intersection(diagram, i, shape, budget, &s);
            sampled += if cls.inside[i] { vol - inter } else { inter };
            var += v;
        }
        warning = var.sqrt() > opts.se_cap * va;
        if !warning || round == opts.max_doublings {
            break;
        }
        budget *= 2;
    }
    Ok(VolumeStats {
        volume,
        signed_volume_error: volume - va,
        symdiff_volume: symdiff + sampled,
        symdiff_se: var.sqrt(),
        precision_warning: warning,
        sampled_cells: pending.len(),
    })
}
