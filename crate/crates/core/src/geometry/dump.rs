//! JSON debug dump of a diagram.

use serde::Serialize;

use super::diagram::{Cell, Face, VoronoiDiagram};
use crate::domain::{Aabb, Domain, Point};

#[derive(Serialize)]
struct Dump<'a> {
    dim: usize,
    domain: &'a Domain,
    clip: &'a Aabb,
    n_original: usize,
    generators: &'a [Point],
    origin: &'a [u32],
    cells: &'a [Cell],
    faces: &'a [Face],
}

/// Serializes generators, cells and the full face registry.
pub fn to_json(d: &VoronoiDiagram) -> serde_json::Result<String> {
    serde_json::to_string_pretty(&Dump {
        dim: d.dim,
        domain: &d.domain,
        clip: &d.clip,
        n_original: d.n_original,
        generators: &d.generators,
        origin: &d.origin,
        cells: &d.cells,
        faces: &d.faces,
    })
}
