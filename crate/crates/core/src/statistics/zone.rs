//! Zone of a boundary patch: the cells it meets and their face complexity.

use serde::{Deserialize, Serialize};

use super::typical_spacing;
use crate::domain::{dot, Point};
use crate::error::{PvError, Result};
use crate::geometry::clip::clip_with;
use crate::geometry::VoronoiDiagram;
use crate::shapes::BoundaryPatch;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneStats {
    /// Sorted indices of the cells meeting the patch.
    pub cells: Vec<usize>,
    /// Distinct faces of the zone cells by dimension.
    pub counts: Vec<u64>,
    /// Sum of `counts`.
    pub complexity: u64,
    pub spacing: f64,
    pub chord_tolerance: f64,
}

/// Affine constraints `f(x) >= 0` describing cell `i`.
fn cell_constraints(diagram: &VoronoiDiagram, i: usize) -> Vec<(Point, f64)> {
    let d = diagram.dim;
    let mut out = Vec::new();
    for k in 0..d {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        out.push((n, -diagram.clip.lo[k]));
        n[k] = -1.0;
        out.push((n, diagram.clip.hi[k]));
    }
    let a = diagram.generators[i];
    for &j in &diagram.cells[i].neighbors {
        let b = diagram.generators[j as usize];
        // (a - b).(2x - a - b) >= 0
        let mut n = [0.0; 3];
        let mut c = 0.0;
        for k in 0..d {
            n[k] = 2.0 * (a[k] - b[k]);
            c -= (a[k] - b[k]) * (a[k] + b[k]);
        }
        out.push((n, c));
    }
    out
}

fn segment_meets(cons: &[(Point, f64)], a: &Point, b: &Point) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (n, c) in cons {
        let fa = dot(n, a) + c;
        let fb = dot(n, b) + c;
        if fa < 0.0 && fb < 0.0 {
            return false;
        }
        if fa >= 0.0 && fb >= 0.0 {
            continue;
        }
        let t = fa / (fa - fb);
        if fa < 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return false;
        }
    }
    true
}

fn triangle_meets(cons: &[(Point, f64)], tri: &[Point; 3]) -> bool {
    let mut poly = tri.to_vec();
    for (n, c) in cons {
        poly = clip_with(&poly, |x| dot(n, x) + c);
        if poly.is_empty() {
            return false;
        }
    }
    true
}

/// Cells meeting the patch elements and the number of their faces.
///
/// Nodes and element vertices are located directly; every neighbour of a zone
/// cell is then tested against the elements touching that cell, repeating
/// until no grazed cell is added.
pub fn zone_statistics(diagram: &VoronoiDiagram, patch: &BoundaryPatch, eps: f64) -> Result<ZoneStats> {
    let limit = eps * typical_spacing(diagram);
    if patch.spacing > limit * (1.0 + 1e-9) {
        return Err(PvError::Config(format!(
            "patch spacing {:.3e} exceeds {eps} x typical cell diameter ({limit:.3e})",
            patch.spacing
        )));
    }
    let n = diagram.n_cells();
    let mut in_zone = vec![false; n];
    let d = diagram.dim;
    let n_elems = if d == 2 {
        patch.segments.len()
    } else {
        patch.triangles.len()
    };
    let elem_points = |e: usize| -> Vec<Point> {
        if d == 2 {
            patch.segments[e].to_vec()
        } else {
            patch.triangles[e].to_vec()
        }
    };
    let meets = |e: usize, cell: usize| -> bool {
        let cons = cell_constraints(diagram, cell);
        if d == 2 {
            segment_meets(&cons, &patch.segments[e][0], &patch.segments[e][1])
        } else {
            triangle_meets(&cons, &patch.triangles[e])
        }
    };
    for p in &patch.points {
        in_zone[diagram.locate_cell(p)?] = true;
    }
    for e in 0..n_elems {
        let mut mine: Vec<usize> = Vec::new();
        for p in elem_points(e) {
            let c = diagram.locate_cell(&p)?;
            in_zone[c] = true;
            if !mine.contains(&c) {
                mine.push(c);
            }
        }
        let mut k = 0;
        while k < mine.len() {
            let c = mine[k];
            k += 1;
            for &j in &diagram.cells[c].neighbors {
                let j = diagram.cell_of(j);
                if mine.contains(&j) {
                    continue;
                }
                if meets(e, j) {
                    in_zone[j] = true;
                    mine.push(j);
                }
            }
        }
    }
    let cells: Vec<usize> = (0..n).filter(|&i| in_zone[i]).collect();
    let mut counts = Vec::with_capacity(d);
    for l in 0..d {
        let mut fs: Vec<u32> = cells
            .iter()
            .flat_map(|&i| diagram.cells[i].faces[l].iter().copied())
            .collect();
        fs.sort_unstable();
        fs.dedup();
        counts.push(fs.len() as u64);
    }
    Ok(ZoneStats {
        complexity: counts.iter().sum(),
        cells,
        counts,
        spacing: patch.spacing,
        chord_tolerance: patch.chord_tolerance,
    })
}
