//! Sutherland–Hodgman clipping that tracks face labels.

use super::label::Label;
use super::linalg::solve_vertex;
use crate::domain::{Aabb, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LVertex {
    pub p: Point,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// Stay inside the clip box with respect to side `s`.
    Side(usize),
    /// Stay at least as close to `cell` as to `other`.
    Gen { cell: u32, other: u32 },
}

pub struct ClipContext<'a> {
    pub dim: usize,
    pub pts: &'a [Point],
    pub clip: &'a Aabb,
}

impl<'a> ClipContext<'a> {
    /// Non-negative inside the constraint, zero on its boundary.
    pub fn value(&self, c: &Constraint, z: &Point) -> f64 {
        match *c {
            Constraint::Side(s) => {
                let axis = s / 2;
                if s % 2 == 0 {
                    z[axis] - self.clip.lo[axis]
                } else {
                    self.clip.hi[axis] - z[axis]
                }
            }
            Constraint::Gen { cell, other } => {
                let a = &self.pts[cell as usize];
                let j = &self.pts[other as usize];
                let mut v = 0.0;
                for k in 0..self.dim {
                    v += (a[k] - j[k]) * (2.0 * z[k] - a[k] - j[k]);
                }
                v
            }
        }
    }

    fn extend(c: &Constraint, carrier: Label) -> Label {
        match *c {
            Constraint::Side(s) => carrier.with_side(s),
            Constraint::Gen { other, .. } => carrier.with_gen(other),
        }
    }

    pub fn vertex(&self, label: Label) -> Option<LVertex> {
        solve_vertex(self.dim, &label, self.pts, self.clip).map(|p| LVertex { p, label })
    }

    pub fn clip(&self, poly: Vec<LVertex>, c: &Constraint) -> Vec<LVertex> {
        let n = poly.len();
        let mut any_out = false;
        let mut any_in = false;
        for v in &poly {
            let x = self.value(c, &v.p);
            any_out |= x < 0.0;
            any_in |= x > 0.0;
        }
        if !any_out {
            return poly;
        }
        if !any_in {
            // What survives lies on the line and has no area.
            return Vec::new();
        }
        let vals: Vec<f64> = poly.iter().map(|v| self.value(c, &v.p)).collect();
        let mut out = Vec::with_capacity(n + 2);
        for i in 0..n {
            let u = &poly[i];
            let v = &poly[(i + 1) % n];
            let (cu, cv) = (vals[i], vals[(i + 1) % n]);
            if cu >= 0.0 {
                out.push(*u);
            }
            if (cu > 0.0 && cv < 0.0) || (cu < 0.0 && cv > 0.0) {
                let label = Self::extend(c, u.label.intersect(&v.label));
                let x = self.vertex(label).unwrap_or_else(|| {
                    let t = cu / (cu - cv);
                    let mut p = [0.0; 3];
                    for k in 0..3 {
                        p[k] = u.p[k] + t * (v.p[k] - u.p[k]);
                    }
                    LVertex { p, label }
                });
                out.push(x);
            }
        }
        out.dedup_by(|a, b| a.label == b.label);
        if out.len() > 1 && out[0].label == out[out.len() - 1].label {
            out.pop();
        }
        out
    }
}

/// Clips a planar polygon (unlabelled) to `{z : sign * (z[axis] - bound) <= 0}`.
pub fn clip_axis(poly: &[Point], axis: usize, bound: f64, keep_below: bool) -> Vec<Point> {
    let f = |z: &Point| {
        if keep_below {
            bound - z[axis]
        } else {
            z[axis] - bound
        }
    };
    clip_with(poly, f)
}

/// Clips a polygon to `{z : f(z) >= 0}` for an affine `f`.
pub fn clip_with<F: Fn(&Point) -> f64>(poly: &[Point], f: F) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let u = poly[i];
        let v = poly[(i + 1) % n];
        let (fu, fv) = (f(&u), f(&v));
        if fu >= 0.0 {
            out.push(u);
        }
        if (fu > 0.0 && fv < 0.0) || (fu < 0.0 && fv > 0.0) {
            let t = fu / (fu - fv);
            let mut p = [0.0; 3];
            for k in 0..3 {
                p[k] = u[k] + t * (v[k] - u[k]);
            }
            out.push(p);
        }
    }
    out
}

pub fn polygon_area2(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        a += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * a
}

/// Newell normal (twice the vector area) of a planar polygon in 3D.
pub fn newell(poly: &[Point]) -> Point {
    let n = poly.len();
    let mut v = [0.0; 3];
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        v[0] += (p[1] - q[1]) * (p[2] + q[2]);
        v[1] += (p[2] - q[2]) * (p[0] + q[0]);
        v[2] += (p[0] - q[0]) * (p[1] + q[1]);
    }
    v
}

pub fn polygon_area3(poly: &[Point]) -> f64 {
    let v = newell(poly);
    0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
