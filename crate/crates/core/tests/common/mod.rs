//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use pvlab::geometry::clip::{clip_with, polygon_area2};
use std::collections::BTreeMap;

use pvlab::pointprocess::{sample_poisson_cube, IntensityField, PointSample, SeedPath};
use pvlab::shapes::Shape;
use pvlab::{Domain, Point};
use rand::{Rng, SeedableRng};

pub fn p2(x: f64, y: f64) -> Point {
    [x, y, 0.0]
}

pub fn uniform_sample(n: usize, d: usize, seed: u64) -> PointSample {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..n)
        .map(|_| {
            let mut p = [0.0; 3];
            for c in p.iter_mut().take(d) {
                *c = rng.random::<f64>() - 0.5;
            }
            p
        })
        .collect();
    PointSample::from_points(pts, Domain::cube(d).unwrap(), SeedPath::root_from_u64(seed)).unwrap()
}

pub fn poisson(lambda: f64, d: usize, seed: &str) -> PointSample {
    let root = SeedPath::root_from_hex("0a").unwrap();
    sample_poisson_cube(lambda, &IntensityField::unit(), d, &root.derive(seed)).unwrap()
}

/// Cell of `i` as Q clipped by every bisector half-plane (O(n) per cell).
pub fn brute_cell(pts: &[Point], i: usize) -> Vec<Point> {
    let mut poly = vec![p2(-0.5, -0.5), p2(0.5, -0.5), p2(0.5, 0.5), p2(-0.5, 0.5)];
    let a = pts[i];
    for (j, b) in pts.iter().enumerate() {
        if j == i {
            continue;
        }
        let b = *b;
        poly = clip_with(&poly, |z| {
            (a[0] - b[0]) * (2.0 * z[0] - a[0] - b[0]) + (a[1] - b[1]) * (2.0 * z[1] - a[1] - b[1])
        });
    }
    poly
}

pub fn brute_area(pts: &[Point], i: usize) -> f64 {
    polygon_area2(&brute_cell(pts, i))
}

/// Cell areas from nearest-generator rasterization on an `m x m` grid.
pub fn raster_areas(pts: &[Point], m: usize) -> Vec<f64> {
    let mut counts = vec![0usize; pts.len()];
    let h = 1.0 / m as f64;
    for ix in 0..m {
        let x = -0.5 + (ix as f64 + 0.5) * h;
        for iy in 0..m {
            let y = -0.5 + (iy as f64 + 0.5) * h;
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (k, p) in pts.iter().enumerate() {
                let d = (p[0] - x).powi(2) + (p[1] - y).powi(2);
                if d < bd {
                    bd = d;
                    best = k;
                }
            }
            counts[best] += 1;
        }
    }
    counts.iter().map(|&c| c as f64 * h * h).collect()
}

/// Total length of the bisector pieces that survive all other half-planes.
pub fn brute_interior_edge_length(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (pts[i], pts[j]);
            let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let dir = [-(b[1] - a[1]), b[0] - a[0]];
            let (mut t0, mut t1) = (-1e9f64, 1e9f64);
            let mut clip = |nx: f64, ny: f64, c: f64| {
                // keep n . z <= c along z = m + t dir
                let base = nx * m[0] + ny * m[1];
                let slope = nx * dir[0] + ny * dir[1];
                if slope.abs() < 1e-300 {
                    if base > c {
                        t0 = 1.0;
                        t1 = 0.0;
                    }
                } else {
                    let t = (c - base) / slope;
                    if slope > 0.0 {
                        t1 = t1.min(t);
                    } else {
                        t0 = t0.max(t);
                    }
                }
            };
            clip(1.0, 0.0, 0.5);
            clip(-1.0, 0.0, 0.5);
            clip(0.0, 1.0, 0.5);
            clip(0.0, -1.0, 0.5);
            for (k, c) in pts.iter().enumerate() {
                if k == i || k == j {
                    continue;
                }
                // closer to a than to c: 2 (c - a) . z <= |c|^2 - |a|^2
                clip(
                    2.0 * (c[0] - a[0]),
                    2.0 * (c[1] - a[1]),
                    c[0] * c[0] + c[1] * c[1] - a[0] * a[0] - a[1] * a[1],
                );
            }
            if t1 > t0 {
                total += (t1 - t0) * (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
            }
        }
    }
    total
}

/// Triples whose circumcircle is empty and whose centre lies strictly inside Q.
pub fn empty_circle_vertices(pts: &[Point]) -> usize {
    let n = pts.len();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
                if d.abs() < 1e-14 {
                    continue;
                }
                let sa = a[0] * a[0] + a[1] * a[1];
                let sb = b[0] * b[0] + b[1] * b[1];
                let sc = c[0] * c[0] + c[1] * c[1];
                let ux = (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d;
                let uy = (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d;
                if ux.abs() >= 0.5 || uy.abs() >= 0.5 {
                    continue;
                }
                let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
                let empty = (0..n).all(|m| {
                    m == i || m == j || m == k || (pts[m][0] - ux).powi(2) + (pts[m][1] - uy).powi(2) > r2
                });
                if empty {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn brute_maxima(pts: &[Point], d: usize) -> usize {
    (0..pts.len())
        .filter(|&i| {
            !(0..pts.len()).any(|j| {
                j != i && (0..d).all(|k| pts[j][k] >= pts[i][k]) && (0..d).any(|k| pts[j][k] != pts[i][k])
            })
        })
        .count()
}

pub fn nearest(pts: &[Point], x: &Point) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (k, p) in pts.iter().enumerate() {
        let d = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2) + (p[2] - x[2]).powi(2);
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// Edges between inside and outside cells, keyed by generator pair, from
/// cells built by brute-force half-plane clipping.
pub fn brute_boundary_edges(pts: &[Point], inside: &[bool]) -> BTreeMap<(usize, usize), (f64, [Point; 2])> {
    let mut out = BTreeMap::new();
    for i in (0..pts.len()).filter(|&i| inside[i]) {
        let poly = brute_cell(pts, i);
        for k in 0..poly.len() {
            let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
            let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            if len < 1e-12 {
                continue;
            }
            let m = p2((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0);
            if m[0].abs() > 0.5 - 1e-12 || m[1].abs() > 0.5 - 1e-12 {
                continue;
            }
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, p) in pts.iter().enumerate() {
                let d = (p[0] - m[0]).powi(2) + (p[1] - m[1]).powi(2);
                if j != i && d < best.0 {
                    best = (d, j);
                }
            }
            let j = best.1;
            if !inside[j] {
                out.insert((i.min(j), i.max(j)), (len, [a, b]));
            }
        }
    }
    out
}

/// Cells the circle |x - c| = r meets: the nearest point of the polygon is
/// within r and the farthest vertex is at least r away.
pub fn circle_meets(poly: &[Point], c: &Point, r: f64) -> bool {
    let far = poly
        .iter()
        .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let inside = (0..poly.len()).all(|k| {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) >= 0.0
    });
    let near = if inside {
        0.0
    } else {
        (0..poly.len())
            .map(|k| {
                let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let t = (((c[0] - a[0]) * dx + (c[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
                ((a[0] + t * dx - c[0]).powi(2) + (a[1] + t * dy - c[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    near <= r && r <= far
}

/// Symmetric-difference area by rasterization: pixels whose corners and
/// centre agree take that value, mixed pixels are subsampled 16 x 16.
pub fn raster_symdiff(pts: &[Point], inside: &[bool], shape: &Shape, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let ind = |x: f64, y: f64| -> bool {
        let p = p2(x, y);
        shape.contains(&p) != inside[nearest(pts, &p)]
    };
    let corners: Vec<Vec<bool>> = (0..=m)
        .map(|ix| (0..=m).map(|iy| ind(-0.5 + ix as f64 * h, -0.5 + iy as f64 * h)).collect())
        .collect();
    let mut mixed = vec![vec![false; m]; m];
    let mut full = vec![vec![false; m]; m];
    for ix in 0..m {
        for iy in 0..m {
            let (x0, y0) = (-0.5 + ix as f64 * h, -0.5 + iy as f64 * h);
            let c = [
                corners[ix][iy],
                corners[ix + 1][iy],
                corners[ix][iy + 1],
                corners[ix + 1][iy + 1],
                ind(x0 + 0.5 * h, y0 + 0.5 * h),
            ];
            mixed[ix][iy] = !c.iter().all(|&v| v == c[0]);
            full[ix][iy] = c[0];
        }
    }
    // Thin slivers can slip between probes; refine a one-pixel band around
    // every pixel seen to straddle the boundary.
    let mut area = 0.0;
    for ix in 0..m {
        for iy in 0..m {
            let near = (ix.saturating_sub(1)..=(ix + 1).min(m - 1))
                .any(|a| (iy.saturating_sub(1)..=(iy + 1).min(m - 1)).any(|b| mixed[a][b]));
            if !near {
                if full[ix][iy] {
                    area += h * h;
                }
                continue;
            }
            let (x0, y0) = (-0.5 + ix as f64 * h, -0.5 + iy as f64 * h);
            let k = 16;
            let mut hits = 0;
            for a in 0..k {
                for b in 0..k {
                    let x = x0 + (a as f64 + 0.5) * h / k as f64;
                    let y = y0 + (b as f64 + 0.5) * h / k as f64;
                    if ind(x, y) {
                        hits += 1;
                    }
                }
            }
            area += h * h * hits as f64 / (k * k) as f64;
        }
    }
    area
}
