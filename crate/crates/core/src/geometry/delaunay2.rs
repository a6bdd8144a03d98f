//! Incremental Delaunay triangulation in the plane.

use rustc_hash::FxHashMap as HashMap;

use super::predicates::{incircle_sos, orient2d};
use crate::domain::{Aabb, Point};
use crate::error::{PvError, Result};

pub const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub struct Tri {
    /// Counter-clockwise vertices.
    pub v: [u32; 3],
    /// `n[k]` is the neighbour across the edge opposite `v[k]`.
    pub n: [u32; 3],
    pub alive: bool,
}

/// Triangulation of the input points plus three far-away enclosing vertices
/// with indices `n_real..n_real + 3`.
#[derive(Debug, Clone)]
pub struct Delaunay2 {
    pub pts: Vec<Point>,
    pub n_real: usize,
    pub tris: Vec<Tri>,
    /// One incident live triangle per vertex.
    pub vert_tri: Vec<u32>,
}

/// Spatial sort key: Hilbert index on a 2^16 grid.
fn hilbert_key(p: &Point, b: &Aabb) -> u64 {
    const N: u64 = 1 << 16;
    let q = |k: usize| {
        let t = (p[k] - b.lo[k]) / (b.hi[k] - b.lo[k]).max(f64::MIN_POSITIVE);
        ((t.clamp(0.0, 1.0) * (N - 1) as f64) as u64).min(N - 1)
    };
    let (mut x, mut y) = (q(0), q(1));
    let mut d = 0u64;
    let mut s = N / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = N - 1 - x;
                y = N - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}

pub(crate) fn bbox_of(points: &[Point], dim: usize) -> Aabb {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for k in 0..dim {
        lo[k] = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        hi[k] = points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
    }
    Aabb::new(dim, lo, hi)
}

impl Delaunay2 {
    /// `reach` is a box the result must be valid for: the enclosing vertices
    /// are placed so that their Voronoi cells do not meet it.
    pub fn build(points: &[Point], reach: &Aabb) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(PvError::Data("cannot triangulate an empty point set".into()));
        }
        let c = reach.center();
        let r = 10.0 * reach.diameter().max(1e-9);
        let mut pts = points.to_vec();
        // Angles with no special relationship to the axes.
        for k in 0..3 {
            let a = 0.7297 + k as f64 * std::f64::consts::TAU / 3.0;
            pts.push([c[0] + r * a.cos(), c[1] + r * a.sin(), 0.0]);
        }
        let s = n as u32;
        let mut tris = vec![Tri {
            v: [s, s + 1, s + 2],
            n: [NONE; 3],
            alive: true,
        }];
        debug_assert_eq!(orient2d(&pts[n], &pts[n + 1], &pts[n + 2]), 1);

        let sort_box = bbox_of(points, 2);
        let mut order: Vec<u32> = (0..s).collect();
        order.sort_by_cached_key(|&i| (hilbert_key(&points[i as usize], &sort_box), i));

        let mut dt = Delaunay2 {
            pts,
            n_real: n,
            tris: Vec::new(),
            vert_tri: Vec::new(),
        };
        let mut free: Vec<u32> = Vec::new();
        let mut bad_mark: Vec<u32> = vec![0];
        let mut seen: Vec<u32> = vec![0];
        let mut last = 0u32;
        let mut walk_state = 0x2545_f491u32;
        let mut bad: Vec<u32> = Vec::new();
        let mut stack: Vec<u32> = Vec::new();
        let mut boundary: Vec<(u32, u32, u32)> = Vec::new();
        let mut new_ids: Vec<u32> = Vec::new();

        for (step, &pi) in order.iter().enumerate() {
            let epoch = step as u32 + 1;
            let p = dt.pts[pi as usize];
            let t0 = locate(&dt.pts, &tris, last, &p, &mut walk_state);
            for &v in &tris[t0 as usize].v {
                if dt.pts[v as usize] == p {
                    return Err(PvError::Data(format!(
                        "duplicate points {v} and {pi} at {:?}",
                        &p[..2]
                    )));
                }
            }
            bad.clear();
            stack.clear();
            bad.push(t0);
            stack.push(t0);
            bad_mark[t0 as usize] = epoch;
            seen[t0 as usize] = epoch;
            while let Some(t) = stack.pop() {
                for k in 0..3 {
                    let nb = tris[t as usize].n[k];
                    if nb == NONE || seen[nb as usize] == epoch {
                        continue;
                    }
                    seen[nb as usize] = epoch;
                    let v = tris[nb as usize].v;
                    let pa = &dt.pts[v[0] as usize];
                    let pb = &dt.pts[v[1] as usize];
                    let pc = &dt.pts[v[2] as usize];
                    if incircle_sos([pa, pb, pc, &p], [v[0], v[1], v[2], pi]) > 0 {
                        bad_mark[nb as usize] = epoch;
                        bad.push(nb);
                        stack.push(nb);
                    }
                }
            }
            boundary.clear();
            for &t in &bad {
                let tr = tris[t as usize];
                for e in 0..3 {
                    let nb = tr.n[e];
                    if nb == NONE || bad_mark[nb as usize] != epoch {
                        boundary.push((tr.v[(e + 1) % 3], tr.v[(e + 2) % 3], nb));
                    }
                }
            }
            for &t in &bad {
                tris[t as usize].alive = false;
                free.push(t);
            }
            new_ids.clear();
            for &(a, b, nb) in &boundary {
                let tri = Tri {
                    v: [a, b, pi],
                    n: [NONE, NONE, nb],
                    alive: true,
                };
                let id = match free.pop() {
                    Some(id) => {
                        tris[id as usize] = tri;
                        id
                    }
                    None => {
                        tris.push(tri);
                        bad_mark.push(0);
                        seen.push(0);
                        (tris.len() - 1) as u32
                    }
                };
                if nb != NONE {
                    let nt = &mut tris[nb as usize];
                    for k in 0..3 {
                        let (x, y) = (nt.v[(k + 1) % 3], nt.v[(k + 2) % 3]);
                        if x == b && y == a {
                            nt.n[k] = id;
                        }
                    }
                }
                new_ids.push(id);
            }
            link_fan(&mut tris, &new_ids);
            last = new_ids[0];
        }
        dt.tris = tris;
        dt.vert_tri = vec![NONE; dt.pts.len()];
        for (t, tr) in dt.tris.iter().enumerate() {
            if tr.alive {
                for &v in &tr.v {
                    dt.vert_tri[v as usize] = t as u32;
                }
            }
        }
        Ok(dt)
    }

    /// Live triangles around vertex `i`, counter-clockwise.
    pub fn ring(&self, i: u32) -> Vec<u32> {
        let start = self.vert_tri[i as usize];
        let mut out = Vec::with_capacity(8);
        let mut t = start;
        loop {
            out.push(t);
            let tr = &self.tris[t as usize];
            let k = tr.v.iter().position(|&v| v == i).expect("vertex in ring");
            t = tr.n[(k + 1) % 3];
            if t == start || t == NONE {
                break;
            }
        }
        out
    }

    pub fn live(&self) -> impl Iterator<Item = (u32, &Tri)> {
        self.tris
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive)
            .map(|(i, t)| (i as u32, t))
    }

    pub fn is_super(&self, v: u32) -> bool {
        v as usize >= self.n_real
    }
}

/// Links the new triangles `(a, b, p)` of a star-shaped cavity to each other.
fn link_fan(tris: &mut [Tri], ids: &[u32]) {
    if ids.len() > 24 {
        let by_first: HashMap<u32, u32> =
            ids.iter().map(|&t| (tris[t as usize].v[0], t)).collect();
        let by_second: HashMap<u32, u32> =
            ids.iter().map(|&t| (tris[t as usize].v[1], t)).collect();
        for &t in ids {
            let [a, b, _] = tris[t as usize].v;
            tris[t as usize].n[0] = by_first[&b];
            tris[t as usize].n[1] = by_second[&a];
        }
        return;
    }
    for &t in ids {
        let [a, b, _] = tris[t as usize].v;
        for &u in ids {
            let v = tris[u as usize].v;
            if v[0] == b {
                tris[t as usize].n[0] = u;
            }
            if v[1] == a {
                tris[t as usize].n[1] = u;
            }
        }
    }
}

fn locate(pts: &[Point], tris: &[Tri], start: u32, p: &Point, state: &mut u32) -> u32 {
    let mut t = start;
    loop {
        let tr = &tris[t as usize];
        // xorshift for the starting edge; avoids cycling on degenerate walks
        *state ^= *state << 13;
        *state ^= *state >> 17;
        *state ^= *state << 5;
        let r = (*state % 3) as usize;
        let mut moved = false;
        for k in 0..3 {
            let e = (r + k) % 3;
            let a = &pts[tr.v[(e + 1) % 3] as usize];
            let b = &pts[tr.v[(e + 2) % 3] as usize];
            if orient2d(a, b, p) < 0 {
                t = tr.n[e];
                moved = true;
                break;
            }
        }
        if !moved {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::predicates::incircle;

    fn check_delaunay(dt: &Delaunay2) {
        for (_, t) in dt.live() {
            let [a, b, c] = t.v;
            assert_eq!(
                orient2d(&dt.pts[a as usize], &dt.pts[b as usize], &dt.pts[c as usize]),
                1
            );
            for q in 0..dt.n_real {
                if t.v.contains(&(q as u32)) {
                    continue;
                }
                let s = incircle(
                    &dt.pts[a as usize],
                    &dt.pts[b as usize],
                    &dt.pts[c as usize],
                    &dt.pts[q],
                );
                assert!(s <= 0, "point {q} inside circumcircle of {:?}", t.v);
            }
            for k in 0..3 {
                let nb = t.n[k];
                if nb != NONE {
                    assert!(dt.tris[nb as usize].alive);
                }
            }
        }
    }

    #[test]
    fn random_points_are_delaunay() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..300)
            .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, 0.0])
            .collect();
        let b = Aabb::new(2, [-0.5, -0.5, 0.0], [0.5, 0.5, 0.0]);
        let dt = Delaunay2::build(&pts, &b).unwrap();
        check_delaunay(&dt);
        // Euler: with 3 hull vertices, T = 2V - 5.
        assert_eq!(dt.live().count(), 2 * (300 + 3) - 5);
    }

    #[test]
    fn lattice_and_collinear_inputs() {
        let mut pts = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                pts.push([i as f64 / 8.0 - 0.45, j as f64 / 8.0 - 0.45, 0.0]);
            }
        }
        let b = Aabb::new(2, [-0.5, -0.5, 0.0], [0.5, 0.5, 0.0]);
        let dt = Delaunay2::build(&pts, &b).unwrap();
        check_delaunay(&dt);
        let line: Vec<Point> = (0..20).map(|i| [i as f64 / 40.0 - 0.25, 0.1, 0.0]).collect();
        let dt = Delaunay2::build(&line, &b).unwrap();
        check_delaunay(&dt);
        assert_eq!(dt.live().count(), 2 * 23 - 5);
    }

    #[test]
    fn duplicates_rejected() {
        let b = Aabb::new(2, [-0.5, -0.5, 0.0], [0.5, 0.5, 0.0]);
        let pts = vec![[0.1, 0.2, 0.0], [0.3, 0.1, 0.0], [0.1, 0.2, 0.0]];
        assert!(matches!(Delaunay2::build(&pts, &b), Err(PvError::Data(_))));
    }
}
