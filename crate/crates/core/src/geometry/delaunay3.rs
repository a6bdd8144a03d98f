//! Incremental Delaunay tetrahedralization.

use rustc_hash::FxHashMap as HashMap;

use super::delaunay2::{bbox_of, NONE};
use super::predicates::{insphere_sos, orient3d};
use crate::domain::{Aabb, Point};
use crate::error::{PvError, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tet {
    /// Positively oriented: `orient3d(v0, v1, v2, v3) > 0`.
    pub v: [u32; 4],
    /// `n[k]` is the neighbour across the face opposite `v[k]`.
    pub n: [u32; 4],
    pub alive: bool,
}

#[derive(Debug, Clone)]
pub struct Delaunay3 {
    pub pts: Vec<Point>,
    pub n_real: usize,
    pub tets: Vec<Tet>,
}

fn morton_key(p: &Point, b: &Aabb) -> u64 {
    let mut key = 0u64;
    let q: [u64; 3] = std::array::from_fn(|k| {
        let t = (p[k] - b.lo[k]) / (b.hi[k] - b.lo[k]).max(f64::MIN_POSITIVE);
        ((t.clamp(0.0, 1.0) * 2_097_151.0) as u64).min(2_097_151)
    });
    for bit in (0..21).rev() {
        for c in &q {
            key = (key << 1) | ((c >> bit) & 1);
        }
    }
    key
}

impl Delaunay3 {
    pub fn build(points: &[Point], reach: &Aabb) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(PvError::Data("cannot triangulate an empty point set".into()));
        }
        let c = reach.center();
        let r = 20.0 * reach.diameter().max(1e-9);
        let mut pts = points.to_vec();
        // Regular tetrahedron, slightly rotated off the axes.
        let raw = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let (sa, ca) = 0.3371f64.sin_cos();
        let (sb, cb) = 0.5183f64.sin_cos();
        for v in raw {
            let x = ca * v[0] - sa * v[1];
            let y = sa * v[0] + ca * v[1];
            let y2 = cb * y - sb * v[2];
            let z2 = sb * y + cb * v[2];
            let s = r / 3f64.sqrt();
            pts.push([c[0] + s * x, c[1] + s * y2, c[2] + s * z2]);
        }
        let s = n as u32;
        let mut first = [s, s + 1, s + 2, s + 3];
        if orient3d(&pts[n], &pts[n + 1], &pts[n + 2], &pts[n + 3]) < 0 {
            first.swap(0, 1);
        }
        let mut tets = vec![Tet {
            v: first,
            n: [NONE; 4],
            alive: true,
        }];

        let sort_box = bbox_of(points, 3);
        let mut order: Vec<u32> = (0..s).collect();
        order.sort_by_cached_key(|&i| (morton_key(&points[i as usize], &sort_box), i));

        let mut free: Vec<u32> = Vec::new();
        let mut bad_mark: Vec<u32> = vec![0];
        let mut seen: Vec<u32> = vec![0];
        let mut last = 0u32;
        let mut walk_state = 0x9e37_79b9u32;
        let mut bad: Vec<u32> = Vec::new();
        let mut stack: Vec<u32> = Vec::new();
        let mut faces: HashMap<(u32, u32), (u32, usize)> = HashMap::default();

        for (step, &pi) in order.iter().enumerate() {
            let epoch = step as u32 + 1;
            let p = pts[pi as usize];
            let t0 = locate(&pts, &tets, last, &p, &mut walk_state);
            for &v in &tets[t0 as usize].v {
                if pts[v as usize] == p {
                    return Err(PvError::Data(format!("duplicate points {v} and {pi} at {p:?}")));
                }
            }
            bad.clear();
            stack.clear();
            bad.push(t0);
            stack.push(t0);
            bad_mark[t0 as usize] = epoch;
            seen[t0 as usize] = epoch;
            while let Some(t) = stack.pop() {
                for k in 0..4 {
                    let nb = tets[t as usize].n[k];
                    if nb == NONE || seen[nb as usize] == epoch {
                        continue;
                    }
                    seen[nb as usize] = epoch;
                    let v = tets[nb as usize].v;
                    let q = [
                        &pts[v[0] as usize],
                        &pts[v[1] as usize],
                        &pts[v[2] as usize],
                        &pts[v[3] as usize],
                        &p,
                    ];
                    if insphere_sos(q, [v[0], v[1], v[2], v[3], pi]) > 0 {
                        bad_mark[nb as usize] = epoch;
                        bad.push(nb);
                        stack.push(nb);
                    }
                }
            }
            let mut created: Vec<Tet> = Vec::new();
            for &t in &bad {
                let tt = tets[t as usize];
                for e in 0..4 {
                    let nb = tt.n[e];
                    if nb == NONE || bad_mark[nb as usize] != epoch {
                        let mut v = tt.v;
                        v[e] = pi;
                        let mut nn = [NONE; 4];
                        nn[e] = nb;
                        created.push(Tet {
                            v,
                            n: nn,
                            alive: true,
                        });
                    }
                }
            }
            for &t in &bad {
                tets[t as usize].alive = false;
                free.push(t);
            }
            faces.clear();
            let mut ids = Vec::with_capacity(created.len());
            for tet in created {
                let id = match free.pop() {
                    Some(id) => {
                        tets[id as usize] = tet;
                        id
                    }
                    None => {
                        tets.push(tet);
                        bad_mark.push(0);
                        seen.push(0);
                        (tets.len() - 1) as u32
                    }
                };
                let e = tet.v.iter().position(|&x| x == pi).expect("new vertex");
                let nb = tet.n[e];
                if nb != NONE {
                    // The outer tet's vertex opposite the shared face is the
                    // one missing from the new tet. Matching on ids would be
                    // wrong because slots are recycled within a step.
                    let k = (0..4)
                        .find(|&k| !tet.v.contains(&tets[nb as usize].v[k]))
                        .expect("outer tet shares a face");
                    tets[nb as usize].n[k] = id;
                }
                for m in 0..4 {
                    if m == e {
                        continue;
                    }
                    let mut edge = [NONE; 2];
                    let mut c = 0;
                    for j in 0..4 {
                        if j != m && j != e {
                            edge[c] = tet.v[j];
                            c += 1;
                        }
                    }
                    let key = (edge[0].min(edge[1]), edge[0].max(edge[1]));
                    if let Some((other, slot)) = faces.remove(&key) {
                        tets[id as usize].n[m] = other;
                        tets[other as usize].n[slot] = id;
                    } else {
                        faces.insert(key, (id, m));
                    }
                }
                ids.push(id);
            }
            debug_assert!(faces.is_empty(), "cavity boundary is not closed");
            last = ids[0];
        }
        Ok(Delaunay3 {
            pts,
            n_real: n,
            tets,
        })
    }

    pub fn live(&self) -> impl Iterator<Item = (u32, &Tet)> {
        self.tets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.alive)
            .map(|(i, t)| (i as u32, t))
    }

    pub fn is_super(&self, v: u32) -> bool {
        v as usize >= self.n_real
    }

    /// Tets around the edge `(a, b)` starting at `start`, in rotational order.
    pub fn edge_ring(&self, a: u32, b: u32, start: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(8);
        let t0 = &self.tets[start as usize];
        let mut from = *t0
            .v
            .iter()
            .find(|&&x| x != a && x != b)
            .expect("tet has four vertices");
        let mut t = start;
        loop {
            out.push(t);
            let tt = &self.tets[t as usize];
            let k = tt.v.iter().position(|&x| x == from).expect("ring vertex");
            let next = tt.n[k];
            // The vertex shared with the next tet becomes the one we leave by.
            from = *tt
                .v
                .iter()
                .find(|&&x| x != a && x != b && x != from)
                .expect("tet has four vertices");
            if next == start || next == NONE {
                break;
            }
            t = next;
        }
        out
    }
}

fn locate(pts: &[Point], tets: &[Tet], start: u32, p: &Point, state: &mut u32) -> u32 {
    let mut t = start;
    loop {
        let tt = &tets[t as usize];
        *state ^= *state << 13;
        *state ^= *state >> 17;
        *state ^= *state << 5;
        let r = (*state % 4) as usize;
        let mut moved = false;
        for k in 0..4 {
            let e = (r + k) % 4;
            let mut q = [
                &pts[tt.v[0] as usize],
                &pts[tt.v[1] as usize],
                &pts[tt.v[2] as usize],
                &pts[tt.v[3] as usize],
            ];
            q[e] = p;
            if orient3d(q[0], q[1], q[2], q[3]) < 0 {
                t = tt.n[e];
                moved = true;
                break;
            }
        }
        if !moved {
            return t;
        }
    }
}
