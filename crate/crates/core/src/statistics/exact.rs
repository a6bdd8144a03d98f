//! Exact intersection volumes of convex cells with simple sets.

use crate::domain::{dot, norm, sub, Point};
use crate::geometry::clip::{clip_axis, clip_with, newell, polygon_area2, polygon_area3};

/// Signed area of `disk(0, r) ∩ triangle(0, a, b)`.
fn disk_triangle(a: &Point, b: &Point, r: f64) -> f64 {
    let r2 = r * r;
    let cross = |u: &Point, v: &Point| u[0] * v[1] - u[1] * v[0];
    let sector = |u: &Point, v: &Point| 0.5 * r2 * cross(u, v).atan2(u[0] * v[0] + u[1] * v[1]);
    let (da, db) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1]);
    if da <= r2 && db <= r2 {
        return 0.5 * cross(a, b);
    }
    let d = [b[0] - a[0], b[1] - a[1], 0.0];
    let qa = d[0] * d[0] + d[1] * d[1];
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * (a[0] * d[0] + a[1] * d[1]);
    let qc = da - r2;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return sector(a, b);
    }
    let s = disc.sqrt();
    let (t1, t2) = ((-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa));
    if t1 >= 1.0 || t2 <= 0.0 {
        return sector(a, b);
    }
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1], 0.0];
    let p1 = at(t1.max(0.0));
    let p2 = at(t2.min(1.0));
    sector(a, &p1) + 0.5 * cross(&p1, &p2) + sector(&p2, b)
}

/// Area of a counter-clockwise polygon intersected with a disk.
pub fn polygon_disk_area(poly: &[Point], c: &Point, r: f64) -> f64 {
    let n = poly.len();
    let rel: Vec<Point> = poly.iter().map(|p| [p[0] - c[0], p[1] - c[1], 0.0]).collect();
    let mut a = 0.0;
    for i in 0..n {
        a += disk_triangle(&rel[i], &rel[(i + 1) % n], r);
    }
    a.max(0.0)
}

/// Area of a polygon intersected with the box `[lo, hi]`.
pub fn polygon_box_area(poly: &[Point], lo: &Point, hi: &Point) -> f64 {
    let mut p = poly.to_vec();
    for k in 0..2 {
        p = clip_axis(&p, k, hi[k], true);
        p = clip_axis(&p, k, lo[k], false);
        if p.len() < 3 {
            return 0.0;
        }
    }
    polygon_area2(&p).abs()
}

/// Closed convex polyhedron as a list of planar polygons.
pub type Polyhedron = Vec<Vec<Point>>;

/// Intersection of a convex polyhedron with `{x : n.x <= b}`, capped.
pub fn clip_polyhedron(poly: &Polyhedron, n: &Point, b: f64) -> Polyhedron {
    let scale = poly
        .iter()
        .flatten()
        .map(|p| norm(p))
        .fold(1.0, f64::max)
        * norm(n);
    let tol = 1e-12 * scale;
    let f = |x: &Point| b - dot(n, x);
    if poly.iter().flatten().all(|x| f(x) >= 0.0) {
        return poly.clone();
    }
    let mut out = Vec::with_capacity(poly.len() + 1);
    let mut cap: Vec<Point> = Vec::new();
    for facet in poly {
        let c = clip_with(facet, f);
        if c.len() < 3 {
            for p in &c {
                if f(p).abs() <= tol {
                    cap.push(*p);
                }
            }
            continue;
        }
        for p in &c {
            if f(p).abs() <= tol {
                cap.push(*p);
            }
        }
        out.push(c);
    }
    if out.is_empty() {
        return out;
    }
    if cap.len() >= 3 {
        // Order the cut points by angle in the plane.
        let m = cap.len() as f64;
        let mut ctr = [0.0; 3];
        for p in &cap {
            for k in 0..3 {
                ctr[k] += p[k] / m;
            }
        }
        let nn = norm(n);
        let nh = [n[0] / nn, n[1] / nn, n[2] / nn];
        let helper = if nh[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let u = crate::domain::cross(&nh, &helper);
        let u = [u[0] / norm(&u), u[1] / norm(&u), u[2] / norm(&u)];
        let v = crate::domain::cross(&nh, &u);
        let mut keyed: Vec<(f64, Point)> = cap
            .into_iter()
            .map(|p| {
                let q = sub(&p, &ctr);
                (dot(&q, &v).atan2(dot(&q, &u)), p)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut ring: Vec<Point> = Vec::with_capacity(keyed.len());
        for (_, p) in keyed {
            if ring.last().is_none_or(|q| norm(&sub(q, &p)) > tol) {
                ring.push(p);
            }
        }
        if ring.len() > 1 && norm(&sub(&ring[0], ring.last().unwrap())) <= tol {
            ring.pop();
        }
        if ring.len() >= 3 {
            out.push(ring);
        }
    }
    out
}

/// Volume of a closed convex polyhedron.
pub fn polyhedron_volume(poly: &Polyhedron) -> f64 {
    let mut ctr = [0.0; 3];
    let mut m = 0.0;
    for p in poly.iter().flatten() {
        for k in 0..3 {
            ctr[k] += p[k];
        }
        m += 1.0;
    }
    if m == 0.0 {
        return 0.0;
    }
    for c in &mut ctr {
        *c /= m;
    }
    let mut v = 0.0;
    for f in poly {
        let nv = newell(f);
        let len = norm(&nv);
        if len > 0.0 {
            v += polygon_area3(f) * dot(&nv, &sub(&f[0], &ctr)).abs() / len / 3.0;
        }
    }
    v
}

/// Volume of a convex polyhedron inside the box `[lo, hi]`.
pub fn polyhedron_box_volume(poly: &Polyhedron, lo: &Point, hi: &Point) -> f64 {
    let mut p = poly.clone();
    for k in 0..3 {
        let mut e = [0.0; 3];
        e[k] = 1.0;
        p = clip_polyhedron(&p, &e, hi[k]);
        e[k] = -1.0;
        p = clip_polyhedron(&p, &e, -lo[k]);
        if p.is_empty() {
            return 0.0;
        }
    }
    polyhedron_volume(&p)
}
