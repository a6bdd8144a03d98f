//! Clipped Voronoi diagrams by Delaunay duality.

use std::cmp::Ordering;
use rustc_hash::FxHashMap as HashMap;

use serde::Serialize;

use super::clip::{newell, polygon_area2, polygon_area3, ClipContext, Constraint, LVertex};
use super::delaunay2::Delaunay2;
use super::delaunay3::Delaunay3;
use super::label::Label;
use super::predicates::cmp_dist;
use crate::domain::{dist2, dot, sub, Aabb, Domain, Point};
use crate::error::{PvError, Result};
use crate::pointprocess::PointSample;

pub type FaceId = u32;

#[derive(Debug, Clone, Serialize)]
pub struct Face {
    pub dim: usize,
    pub key: Label,
    /// Length, area or (for vertices) 1.
    pub measure: f64,
    /// Vertex coordinates; polygon order for facets in 3D.
    pub points: Vec<Point>,
    /// Generators (extended indices) whose cells contain the face.
    pub cells: Vec<u32>,
    /// Bounding faces one dimension down.
    pub subfaces: Vec<FaceId>,
    pub on_clip_boundary: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub generator: u32,
    pub volume: f64,
    /// Face ids by dimension. In 2D `faces[0]` and `faces[1]` follow the
    /// counter-clockwise boundary, edge `k` joining vertex `k` and `k + 1`.
    pub faces: [Vec<FaceId>; 3],
    /// Extended indices of generators sharing a facet with this cell.
    pub neighbors: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    pub dim: usize,
    pub domain: Domain,
    /// Box the cells are clipped to. Equal to the domain for the cube; for a
    /// slab it is widened laterally by the ghost range.
    pub clip: Aabb,
    /// Sample points followed by periodic ghost copies (slabs only).
    pub generators: Vec<Point>,
    pub n_original: usize,
    /// Original index of every extended generator.
    pub origin: Vec<u32>,
    pub cells: Vec<Cell>,
    pub faces: Vec<Face>,
    pub ghost_range: Option<f64>,
    registry: HashMap<Label, FaceId>,
    grid: Grid,
}

#[derive(Debug, Clone)]
struct Grid {
    lo: Point,
    h: f64,
    dims: [usize; 3],
    start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn new(pts: &[Point], b: &Aabb) -> Self {
        let d = b.dim;
        let n = pts.len().max(1);
        let vol = b.volume().max(f64::MIN_POSITIVE);
        let h = (2.0 * vol / n as f64).powf(1.0 / d as f64);
        let mut dims = [1usize; 3];
        for k in 0..d {
            dims[k] = (((b.hi[k] - b.lo[k]) / h).ceil() as usize).clamp(1, 1 << 12);
        }
        let total = dims[0] * dims[1] * dims[2];
        let mut counts = vec![0u32; total + 1];
        let mut grid = Grid {
            lo: b.lo,
            h,
            dims,
            start: Vec::new(),
            items: Vec::new(),
        };
        let keys: Vec<usize> = pts.iter().map(|p| grid.flat(&grid.bucket(p))).collect();
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; pts.len()];
        for (i, &k) in keys.iter().enumerate() {
            items[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        grid.start = counts;
        grid.items = items;
        grid
    }

    fn bucket(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for k in 0..3 {
            if self.dims[k] > 1 {
                let t = ((p[k] - self.lo[k]) / self.h).floor();
                c[k] = (t.max(0.0) as usize).min(self.dims[k] - 1);
            }
        }
        c
    }

    fn flat(&self, c: &[usize; 3]) -> usize {
        (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0]
    }

    /// Nearest point, ties to the lowest index, under exact comparison.
    fn nearest(&self, pts: &[Point], q: &Point) -> u32 {
        let c = self.bucket(q);
        let mut best: Option<u32> = None;
        let mut best_d = f64::INFINITY;
        let max_r = self.dims.iter().copied().max().unwrap_or(1);
        for r in 0..=max_r {
            self.for_shell(&c, r, |i| {
                let better = match best {
                    None => true,
                    Some(b) => match cmp_dist(q, &pts[i as usize], &pts[b as usize]) {
                        Ordering::Less => true,
                        Ordering::Equal => i < b,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some(i);
                    best_d = dist2(q, &pts[i as usize]).sqrt();
                }
            });
            // Points in later shells are at least r*h away.
            if best.is_some() && best_d < r as f64 * self.h * (1.0 - 1e-12) {
                break;
            }
        }
        best.expect("grid holds at least one point")
    }

    fn for_shell<F: FnMut(u32)>(&self, c: &[usize; 3], r: usize, mut f: F) {
        let r = r as isize;
        let rng = |k: usize| -> (isize, isize) {
            if self.dims[k] == 1 {
                (0, 0)
            } else {
                (
                    (c[k] as isize - r).max(0),
                    (c[k] as isize + r).min(self.dims[k] as isize - 1),
                )
            }
        };
        let (x0, x1) = rng(0);
        let (y0, y1) = rng(1);
        let (z0, z1) = rng(2);
        for z in z0..=z1 {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let on_shell = (x - c[0] as isize).abs() == r
                        || (y - c[1] as isize).abs() == r
                        || (z - c[2] as isize).abs() == r
                        || r == 0;
                    if !on_shell {
                        continue;
                    }
                    let k = self.flat(&[x as usize, y as usize, z as usize]);
                    for &i in &self.items[self.start[k] as usize..self.start[k + 1] as usize] {
                        f(i);
                    }
                }
            }
        }
    }
}

struct Builder<'a> {
    dim: usize,
    pts: &'a [Point],
    clip: &'a Aabb,
    faces: Vec<Face>,
    registry: HashMap<Label, FaceId>,
}

impl<'a> Builder<'a> {
    fn vertex(&mut self, v: &LVertex) -> FaceId {
        if let Some(&id) = self.registry.get(&v.label) {
            return id;
        }
        self.push(Face {
            dim: 0,
            key: v.label,
            measure: 1.0,
            points: vec![v.p],
            cells: v.label.gens().to_vec(),
            subfaces: Vec::new(),
            on_clip_boundary: v.label.on_clip_boundary(),
        })
    }

    fn edge(&mut self, a: &LVertex, b: &LVertex) -> FaceId {
        let key = a.label.intersect(&b.label);
        if let Some(&id) = self.registry.get(&key) {
            return id;
        }
        let va = self.vertex(a);
        let vb = self.vertex(b);
        self.push(Face {
            dim: 1,
            key,
            measure: dist2(&a.p, &b.p).sqrt(),
            points: vec![a.p, b.p],
            cells: key.gens().to_vec(),
            subfaces: vec![va, vb],
            on_clip_boundary: key.on_clip_boundary(),
        })
    }

    fn push(&mut self, face: Face) -> FaceId {
        let id = self.faces.len() as FaceId;
        self.registry.insert(face.key, id);
        self.faces.push(face);
        id
    }

    fn ctx(&self) -> ClipContext<'_> {
        ClipContext {
            dim: self.dim,
            pts: self.pts,
            clip: self.clip,
        }
    }
}

fn sort_dedup(v: &mut Vec<u32>) {
    v.sort_unstable();
    v.dedup();
}

/// Builds the diagram of a sample, clipped to its domain.
pub fn build_voronoi(sample: &PointSample) -> Result<VoronoiDiagram> {
    if sample.points.is_empty() {
        return Err(PvError::Data("cannot build a diagram of an empty sample".into()));
    }
    match sample.domain {
        Domain::Cube { dim } => {
            let clip = sample.domain.bounds();
            let origin: Vec<u32> = (0..sample.points.len() as u32).collect();
            let (cells, faces, registry) = build_cells(dim, &sample.points, sample.points.len(), &clip)?;
            Ok(VoronoiDiagram {
                dim,
                domain: sample.domain,
                clip,
                grid: Grid::new(&sample.points, &clip),
                generators: sample.points.clone(),
                n_original: sample.points.len(),
                origin,
                cells,
                faces,
                ghost_range: None,
                registry,
            })
        }
        Domain::Slab {
            dim,
            lateral,
            half_height,
        } => build_slab(sample, dim, lateral, half_height),
    }
}

fn build_slab(sample: &PointSample, dim: usize, lateral: f64, half_height: f64) -> Result<VoronoiDiagram> {
    let n = sample.points.len();
    let spacing = (sample.domain.volume() / n as f64).powf(1.0 / dim as f64);
    let mut g = (3.0 * spacing).min(lateral);
    loop {
        let (ext, origin) = ghost_points(&sample.points, dim, lateral, g);
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for k in 0..dim - 1 {
            lo[k] = -g;
            hi[k] = lateral + g;
        }
        lo[dim - 1] = -half_height;
        hi[dim - 1] = half_height;
        let clip = Aabb::new(dim, lo, hi);
        let (cells, faces, registry) = build_cells(dim, &ext, n, &clip)?;
        // A cell is trustworthy when every generator that could shape it is
        // present, i.e. twice its radius stays within the ghost band.
        let ok = cells.iter().all(|c| {
            let p = &ext[c.generator as usize];
            let r = c.faces[0]
                .iter()
                .map(|&v| dist2(&faces[v as usize].points[0], p))
                .fold(0.0, f64::max)
                .sqrt();
            (0..dim - 1).all(|k| p[k] - 2.0 * r >= -g && p[k] + 2.0 * r <= lateral + g)
        });
        if ok {
            return Ok(VoronoiDiagram {
                dim,
                domain: sample.domain,
                clip,
                grid: Grid::new(&ext, &clip),
                generators: ext,
                n_original: n,
                origin,
                cells,
                faces,
                ghost_range: Some(g),
                registry,
            });
        }
        if g >= lateral {
            return Err(PvError::Degenerate(format!(
                "periodic ghost range cannot exceed the lateral period {lateral}; sample too sparse"
            )));
        }
        g = (2.0 * g).min(lateral);
    }
}

fn ghost_points(points: &[Point], dim: usize, lateral: f64, g: f64) -> (Vec<Point>, Vec<u32>) {
    let mut ext = points.to_vec();
    let mut origin: Vec<u32> = (0..points.len() as u32).collect();
    let shifts: &[i32] = &[-1, 0, 1];
    let combos: Vec<[i32; 2]> = if dim == 2 {
        shifts.iter().map(|&a| [a, 0]).collect()
    } else {
        shifts
            .iter()
            .flat_map(|&a| shifts.iter().map(move |&b| [a, b]))
            .collect()
    };
    for c in combos {
        if c == [0, 0] {
            continue;
        }
        for (i, p) in points.iter().enumerate() {
            let mut q = *p;
            let mut inside = true;
            for k in 0..dim - 1 {
                q[k] += c[k] as f64 * lateral;
                inside &= q[k] >= -g && q[k] <= lateral + g;
            }
            if inside {
                ext.push(q);
                origin.push(i as u32);
            }
        }
    }
    (ext, origin)
}

type Built = (Vec<Cell>, Vec<Face>, HashMap<Label, FaceId>);

/// Cells of the first `n_cells` points of `pts`, clipped to `clip`.
fn build_cells(dim: usize, pts: &[Point], n_cells: usize, clip: &Aabb) -> Result<Built> {
    if dim == 2 {
        build_cells2(pts, n_cells, clip)
    } else {
        build_cells3(pts, n_cells, clip)
    }
}

fn build_cells2(pts: &[Point], n_cells: usize, clip: &Aabb) -> Result<Built> {
    let dt = Delaunay2::build(pts, clip)?;
    let mut b = Builder {
        dim: 2,
        pts: &dt.pts,
        clip,
        faces: Vec::new(),
        registry: HashMap::default(),
    };
    let mut circ: Vec<Option<LVertex>> = vec![None; dt.tris.len()];
    let mut cells = Vec::with_capacity(n_cells);
    for i in 0..n_cells as u32 {
        let mut poly: Vec<LVertex> = Vec::new();
        for t in dt.ring(i) {
            let v = match circ[t as usize] {
                Some(v) => v,
                None => {
                    let label = Label::from_gens(&dt.tris[t as usize].v);
                    let v = b.ctx().vertex(label).ok_or_else(|| {
                        PvError::Degenerate(format!("degenerate triangle {:?}", dt.tris[t as usize].v))
                    })?;
                    circ[t as usize] = Some(v);
                    v
                }
            };
            poly.push(v);
        }
        for s in 0..4 {
            poly = b.ctx().clip(poly, &Constraint::Side(s));
        }
        if poly.len() < 3 {
            return Err(PvError::Degenerate(format!("cell {i} vanished after clipping")));
        }
        let pp: Vec<Point> = poly.iter().map(|v| v.p).collect();
        let volume = polygon_area2(&pp);
        let mut verts = Vec::with_capacity(poly.len());
        let mut edges = Vec::with_capacity(poly.len());
        let mut neighbors = Vec::new();
        for k in 0..poly.len() {
            verts.push(b.vertex(&poly[k]));
            let e = b.edge(&poly[k], &poly[(k + 1) % poly.len()]);
            let key = b.faces[e as usize].key;
            if !key.on_clip_boundary() && key.gens().len() == 2 {
                neighbors.extend(key.gens().iter().copied().filter(|&g| g != i));
            }
            edges.push(e);
        }
        sort_dedup(&mut neighbors);
        cells.push(Cell {
            generator: i,
            volume,
            faces: [verts, edges, Vec::new()],
            neighbors,
        });
    }
    Ok((cells, b.faces, b.registry))
}

fn outward_side_normal(s: usize) -> Point {
    let mut n = [0.0; 3];
    n[s / 2] = if s % 2 == 0 { -1.0 } else { 1.0 };
    n
}

fn build_cells3(pts: &[Point], n_cells: usize, clip: &Aabb) -> Result<Built> {
    let dt = Delaunay3::build(pts, clip)?;
    let n_cells_u = n_cells as u32;
    let mut edge_tet: HashMap<(u32, u32), u32> = HashMap::default();
    for (t, tet) in dt.live() {
        for i in 0..4 {
            for j in i + 1..4 {
                let (a, b) = (tet.v[i].min(tet.v[j]), tet.v[i].max(tet.v[j]));
                if a < n_cells_u || b < n_cells_u {
                    edge_tet.entry((a, b)).or_insert(t);
                }
            }
        }
    }
    let mut edges: Vec<((u32, u32), u32)> = edge_tet.into_iter().collect();
    edges.sort_unstable();

    let mut b = Builder {
        dim: 3,
        pts: &dt.pts,
        clip,
        faces: Vec::new(),
        registry: HashMap::default(),
    };
    let mut circ: Vec<Option<LVertex>> = vec![None; dt.tets.len()];
    let mut ext_lo = vec![[f64::INFINITY; 3]; n_cells];
    let mut ext_hi = vec![[f64::NEG_INFINITY; 3]; n_cells];
    let mut facets: Vec<Vec<u32>> = vec![Vec::new(); n_cells];
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n_cells];
    let mut dnbrs: Vec<Vec<u32>> = vec![Vec::new(); n_cells];

    for &((a, bb), t) in &edges {
        let mut poly = Vec::new();
        for tt in dt.edge_ring(a, bb, t) {
            let v = match circ[tt as usize] {
                Some(v) => v,
                None => {
                    let label = Label::from_gens(&dt.tets[tt as usize].v);
                    let v = b.ctx().vertex(label).ok_or_else(|| {
                        PvError::Degenerate(format!("degenerate tetrahedron {:?}", dt.tets[tt as usize].v))
                    })?;
                    circ[tt as usize] = Some(v);
                    v
                }
            };
            poly.push(v);
        }
        for g in [a, bb] {
            if g < n_cells_u {
                let (lo, hi) = (&mut ext_lo[g as usize], &mut ext_hi[g as usize]);
                for v in &poly {
                    for k in 0..3 {
                        lo[k] = lo[k].min(v.p[k]);
                        hi[k] = hi[k].max(v.p[k]);
                    }
                }
                let other = if g == a { bb } else { a };
                if !dt.is_super(other) {
                    dnbrs[g as usize].push(other);
                }
            }
        }
        for s in 0..6 {
            poly = b.ctx().clip(poly, &Constraint::Side(s));
            if poly.is_empty() {
                break;
            }
        }
        if poly.len() < 3 {
            continue;
        }
        let pp: Vec<Point> = poly.iter().map(|v| v.p).collect();
        if dot(&newell(&pp), &sub(&dt.pts[bb as usize], &dt.pts[a as usize])) < 0.0 {
            poly.reverse();
        }
        let id = register_facet(&mut b, &poly);
        for (g, other) in [(a, bb), (bb, a)] {
            if g < n_cells_u {
                facets[g as usize].push(id);
                nbrs[g as usize].push(other);
            }
        }
    }

    for a in 0..n_cells {
        for s in 0..6 {
            let axis = s / 2;
            let bound = clip.side_bound(s);
            let reaches = if s % 2 == 0 {
                ext_lo[a][axis] <= bound
            } else {
                ext_hi[a][axis] >= bound
            };
            if !reaches {
                continue;
            }
            let (u, w) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let base = Label::from_gens(&[a as u32]).with_side(s);
            let corner = |su: usize, sw: usize| base.with_side(su).with_side(sw);
            let mut poly: Vec<LVertex> = [
                corner(2 * u, 2 * w),
                corner(2 * u + 1, 2 * w),
                corner(2 * u + 1, 2 * w + 1),
                corner(2 * u, 2 * w + 1),
            ]
            .iter()
            .map(|&l| b.ctx().vertex(l).expect("box corner"))
            .collect();
            for &j in &dnbrs[a] {
                poly = b.ctx().clip(
                    poly,
                    &Constraint::Gen {
                        cell: a as u32,
                        other: j,
                    },
                );
                if poly.is_empty() {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let pp: Vec<Point> = poly.iter().map(|v| v.p).collect();
            if dot(&newell(&pp), &outward_side_normal(s)) < 0.0 {
                poly.reverse();
            }
            let id = register_facet(&mut b, &poly);
            facets[a].push(id);
        }
    }

    let mut cells = Vec::with_capacity(n_cells);
    for a in 0..n_cells {
        let p = dt.pts[a];
        let mut volume = 0.0;
        let mut es = Vec::new();
        let mut vs = Vec::new();
        for &f in &facets[a] {
            let face = &b.faces[f as usize];
            let nv = newell(&face.points);
            let len = dot(&nv, &nv).sqrt();
            if len > 0.0 {
                let h = dot(&nv, &sub(&face.points[0], &p)).abs() / len;
                volume += face.measure * h / 3.0;
            }
            for &e in &face.subfaces {
                es.push(e);
                vs.extend_from_slice(&b.faces[e as usize].subfaces);
            }
        }
        sort_dedup(&mut es);
        sort_dedup(&mut vs);
        let mut fs = facets[a].clone();
        sort_dedup(&mut fs);
        let mut nb = std::mem::take(&mut nbrs[a]);
        sort_dedup(&mut nb);
        cells.push(Cell {
            generator: a as u32,
            volume,
            faces: [vs, es, fs],
            neighbors: nb,
        });
    }
    Ok((cells, b.faces, b.registry))
}

fn register_facet(b: &mut Builder<'_>, poly: &[LVertex]) -> FaceId {
    let mut key = poly[0].label;
    for v in &poly[1..] {
        key = key.intersect(&v.label);
    }
    if let Some(&id) = b.registry.get(&key) {
        return id;
    }
    let mut edges = Vec::with_capacity(poly.len());
    for k in 0..poly.len() {
        edges.push(b.edge(&poly[k], &poly[(k + 1) % poly.len()]));
    }
    let pts: Vec<Point> = poly.iter().map(|v| v.p).collect();
    b.push(Face {
        dim: 2,
        key,
        measure: polygon_area3(&pts),
        points: pts,
        cells: key.gens().to_vec(),
        subfaces: edges,
        on_clip_boundary: key.on_clip_boundary(),
    })
}

impl VoronoiDiagram {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn face(&self, id: FaceId) -> &Face {
        &self.faces[id as usize]
    }

    pub fn face_by_key(&self, key: &Label) -> Option<FaceId> {
        self.registry.get(key).copied()
    }

    /// Deduplicated faces of dimension `l`.
    pub fn faces_of_dim(&self, l: usize) -> Result<Vec<&Face>> {
        if l >= self.dim {
            return Err(PvError::Usage(format!(
                "face dimension {l} out of range for a {}-dimensional diagram",
                self.dim
            )));
        }
        Ok(self.faces.iter().filter(|f| f.dim == l).collect())
    }

    /// Original cell index owning an extended generator.
    pub fn cell_of(&self, ext: u32) -> usize {
        self.origin[ext as usize] as usize
    }

    /// Translation taking the original of `ext` onto `ext` (zero unless ghost).
    pub fn ghost_shift(&self, ext: u32) -> Point {
        let o = self.origin[ext as usize] as usize;
        sub(&self.generators[ext as usize], &self.generators[o])
    }

    pub fn cell_vertices(&self, i: usize) -> impl Iterator<Item = &Point> + '_ {
        self.cells[i]
            .faces[0]
            .iter()
            .map(move |&v| &self.faces[v as usize].points[0])
    }

    /// Vertices of the cell of an extended generator, translated for ghosts.
    pub fn ext_cell_vertices(&self, ext: u32) -> Vec<Point> {
        let s = self.ghost_shift(ext);
        self.cell_vertices(self.cell_of(ext))
            .map(|p| [p[0] + s[0], p[1] + s[1], p[2] + s[2]])
            .collect()
    }

    /// Diameter of the union of a cell and all cells sharing a facet with it.
    pub fn neighborhood_diameter(&self, i: usize) -> f64 {
        let mut pts: Vec<Point> = self.cell_vertices(i).copied().collect();
        for &j in &self.cells[i].neighbors {
            pts.extend(self.ext_cell_vertices(j));
        }
        let mut best = 0.0f64;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                best = best.max(dist2(&pts[a], &pts[b]));
            }
        }
        best.sqrt()
    }

    /// Nearest generator, ties to the lowest index. For slabs the result is
    /// the original index of the nearest (possibly ghost) generator.
    pub fn locate_cell(&self, q: &Point) -> Result<usize> {
        if !self.domain.contains(q) {
            return Err(PvError::Usage(format!("query {q:?} lies outside the domain")));
        }
        Ok(self.locate_unchecked(q))
    }

    pub(crate) fn locate_unchecked(&self, q: &Point) -> usize {
        let e = self.grid.nearest(&self.generators, q);
        self.cell_of(e)
    }

    /// Half-space description of a cell: clip box plus bisectors.
    pub fn cell_contains(&self, i: usize, q: &Point) -> bool {
        if !self.clip.contains(q) {
            return false;
        }
        let pi = &self.generators[i];
        self.cells[i].neighbors.iter().all(|&j| {
            cmp_dist(q, pi, &self.generators[j as usize]) != Ordering::Greater
        })
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }
}
