//! Boundary discretization and κ-weighted surface contents.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{poly2, Shape, ShapeKind};
use crate::domain::{cross, dot, norm, sub, Point};
use crate::error::{PvError, Result};
use crate::pointprocess::IntensityField;

/// Which part of the boundary to discretize.
///
/// Angles are measured about the shape center. The parameter of a ball or blob
/// is the polar angle; of a 2D box the perimeter coordinate in `[0, 4)` with
/// side `k` occupying `[k, k + 1]` counter-clockwise from the bottom side; of
/// a 3D box the face coordinate in `[0, 6)`; of a subgraph the abscissa `u`
/// along the graph of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchSpec {
    #[default]
    Whole,
    AngularWindow { from: f64, to: f64 },
    ParameterWindow { from: f64, to: f64 },
}

/// Quadrature of a boundary subset together with its flat elements.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPatch {
    pub dim: usize,
    pub points: Vec<Point>,
    /// Hausdorff measure carried by each node.
    pub weights: Vec<f64>,
    /// Chords approximating the curve (2D).
    pub segments: Vec<[Point; 2]>,
    /// Flat triangles approximating the surface (3D).
    pub triangles: Vec<[Point; 3]>,
    /// Largest distance between an element and the true boundary.
    pub chord_tolerance: f64,
    /// Largest element diameter.
    pub spacing: f64,
}

impl BoundaryPatch {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn new(dim: usize) -> Self {
        BoundaryPatch {
            dim,
            points: Vec::new(),
            weights: Vec::new(),
            segments: Vec::new(),
            triangles: Vec::new(),
            chord_tolerance: 0.0,
            spacing: 0.0,
        }
    }
}

#[derive(Clone, Copy)]
enum Curve {
    Arc { c: Point, r: f64 },
    Line { a: Point, b: Point },
    Blob,
    Graph { u0: f64 },
}

#[derive(Clone, Copy)]
struct Piece {
    curve: Curve,
    t0: f64,
    t1: f64,
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

fn lerp(a: &Point, b: &Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

impl Shape {
    fn curve_point(&self, c: &Curve, t: f64) -> Point {
        match *c {
            Curve::Arc { c, r } => [c[0] + r * t.cos(), c[1] + r * t.sin(), 0.0],
            Curve::Line { a, b } => lerp(&a, &b, t),
            Curve::Blob => {
                let ShapeKind::SmoothBlob { center, .. } = &self.kind else {
                    unreachable!()
                };
                let rho = self.blob_rho(t);
                [center[0] + rho * t.cos(), center[1] + rho * t.sin(), 0.0]
            }
            Curve::Graph { u0 } => {
                let ShapeKind::Subgraph { coeffs, .. } = &self.kind else {
                    unreachable!()
                };
                [t, poly2(coeffs, t - u0), 0.0]
            }
        }
    }

    fn curve_speed(&self, c: &Curve, t: f64) -> f64 {
        match *c {
            Curve::Arc { r, .. } => r,
            Curve::Line { a, b } => norm(&sub(&b, &a)),
            Curve::Blob => {
                let ShapeKind::SmoothBlob {
                    amplitude,
                    frequency,
                    phase,
                    ..
                } = &self.kind
                else {
                    unreachable!()
                };
                let k = *frequency as f64;
                let drho = -amplitude * k * (k * t + phase).sin();
                self.blob_rho(t).hypot(drho)
            }
            Curve::Graph { u0 } => {
                let ShapeKind::Subgraph { coeffs, .. } = &self.kind else {
                    unreachable!()
                };
                (1.0 + (coeffs[1] + 2.0 * coeffs[2] * (t - u0)).powi(2)).sqrt()
            }
        }
    }

    /// Boundary pieces of a 2D shape restricted to `subset`.
    fn pieces(&self, subset: &PatchSpec) -> Result<Vec<Piece>> {
        let unsupported = || {
            PvError::Usage(format!(
                "{subset:?} is not available for a {} boundary",
                self.name()
            ))
        };
        let window = |from: f64, to: f64, period: f64| -> Result<(f64, f64)> {
            if !(from.is_finite() && to.is_finite() && to > from) || to - from > period + 1e-12 {
                return Err(PvError::Usage(format!(
                    "degenerate boundary window [{from}, {to}]"
                )));
            }
            Ok((from, to.min(from + period)))
        };
        let mut out = Vec::new();
        match (&self.kind, subset) {
            (ShapeKind::Ball { center, radius }, s) => {
                let (a, b) = match *s {
                    PatchSpec::Whole => (0.0, 2.0 * PI),
                    PatchSpec::AngularWindow { from, to }
                    | PatchSpec::ParameterWindow { from, to } => window(from, to, 2.0 * PI)?,
                };
                out.push(Piece {
                    curve: Curve::Arc {
                        c: *center,
                        r: *radius,
                    },
                    t0: a,
                    t1: b,
                });
            }
            (ShapeKind::SmoothBlob { .. }, s) => {
                let (a, b) = match *s {
                    PatchSpec::Whole => (0.0, 2.0 * PI),
                    PatchSpec::AngularWindow { from, to }
                    | PatchSpec::ParameterWindow { from, to } => window(from, to, 2.0 * PI)?,
                };
                out.push(Piece {
                    curve: Curve::Blob,
                    t0: a,
                    t1: b,
                });
            }
            (ShapeKind::Box { lo, hi }, s) => {
                let corners = [
                    [lo[0], lo[1], 0.0],
                    [hi[0], lo[1], 0.0],
                    [hi[0], hi[1], 0.0],
                    [lo[0], hi[1], 0.0],
                ];
                let side = |k: usize| Curve::Line {
                    a: corners[k % 4],
                    b: corners[(k + 1) % 4],
                };
                match *s {
                    PatchSpec::Whole => {
                        for k in 0..4 {
                            out.push(Piece {
                                curve: side(k),
                                t0: 0.0,
                                t1: 1.0,
                            });
                        }
                    }
                    PatchSpec::ParameterWindow { from, to } => {
                        let (a, b) = window(from, to, 4.0)?;
                        let first = a.floor() as i64;
                        let mut k = first;
                        while (k as f64) < b {
                            let t0 = (a - k as f64).max(0.0);
                            let t1 = (b - k as f64).min(1.0);
                            if t1 > t0 {
                                out.push(Piece {
                                    curve: side(k.rem_euclid(4) as usize),
                                    t0,
                                    t1,
                                });
                            }
                            k += 1;
                        }
                    }
                    PatchSpec::AngularWindow { from, to } => {
                        let (a, b) = window(from, to, 2.0 * PI)?;
                        let c = lerp(lo, hi, 0.5);
                        let h = [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])];
                        let on_ray = |t: f64| {
                            let (cs, sn) = (t.cos(), t.sin());
                            let s = (h[0] / cs.abs()).min(h[1] / sn.abs());
                            [c[0] + s * cs, c[1] + s * sn, 0.0]
                        };
                        let base = a.div_euclid(2.0 * PI) * 2.0 * PI;
                        let mut breaks: Vec<f64> = Vec::new();
                        for turn in 0..2 {
                            for q in &corners {
                                let t = (q[1] - c[1]).atan2(q[0] - c[0]).rem_euclid(2.0 * PI)
                                    + base
                                    + turn as f64 * 2.0 * PI;
                                if t > a && t < b {
                                    breaks.push(t);
                                }
                            }
                        }
                        breaks.sort_by(f64::total_cmp);
                        let mut ts = vec![a];
                        ts.extend(breaks);
                        ts.push(b);
                        for w in ts.windows(2) {
                            out.push(Piece {
                                curve: Curve::Line {
                                    a: on_ray(w[0]),
                                    b: on_ray(w[1]),
                                },
                                t0: 0.0,
                                t1: 1.0,
                            });
                        }
                    }
                }
            }
            (ShapeKind::BallUnion { centers, radii, arcs }, PatchSpec::Whole) => {
                for ((c, &r), list) in centers.iter().zip(radii).zip(arcs) {
                    for &(a, b) in list {
                        out.push(Piece {
                            curve: Curve::Arc { c: *c, r },
                            t0: a,
                            t1: b,
                        });
                    }
                }
            }
            (ShapeKind::Subgraph { u0, u1, v0, coeffs }, s) => {
                let graph = |a: f64, b: f64| Piece {
                    curve: Curve::Graph { u0: *u0 },
                    t0: a,
                    t1: b,
                };
                match *s {
                    PatchSpec::Whole => {
                        let f0 = coeffs[0];
                        let f1 = poly2(coeffs, u1 - u0);
                        let pts = [
                            [*u0, f0, 0.0],
                            [*u0, *v0, 0.0],
                            [*u1, *v0, 0.0],
                            [*u1, f1, 0.0],
                        ];
                        for w in pts.windows(2) {
                            out.push(Piece {
                                curve: Curve::Line { a: w[0], b: w[1] },
                                t0: 0.0,
                                t1: 1.0,
                            });
                        }
                        out.push(graph(*u0, *u1));
                    }
                    PatchSpec::ParameterWindow { from, to } => {
                        let (a, b) = window(from, to, f64::INFINITY)?;
                        let (a, b) = (a.max(*u0), b.min(*u1));
                        if b <= a {
                            return Err(PvError::Usage(format!(
                                "window [{from}, {to}] misses the graph [{u0}, {u1}]"
                            )));
                        }
                        out.push(graph(a, b));
                    }
                    PatchSpec::AngularWindow { .. } => return Err(unsupported()),
                }
            }
            _ => return Err(unsupported()),
        }
        Ok(out)
    }

    /// Discretizes a 2D boundary subset with element length at most `h`.
    fn patch_2d(&self, pieces: &[Piece], h: f64) -> BoundaryPatch {
        let mut patch = BoundaryPatch::new(2);
        for pc in pieces {
            let approx_len = {
                let m = 16;
                let dt = (pc.t1 - pc.t0) / m as f64;
                (0..m)
                    .map(|i| self.curve_speed(&pc.curve, pc.t0 + (i as f64 + 0.5) * dt) * dt)
                    .sum::<f64>()
            };
            let m = ((approx_len / h).ceil() as usize).max(1);
            let dt = (pc.t1 - pc.t0) / m as f64;
            for i in 0..m {
                let ta = pc.t0 + i as f64 * dt;
                let tb = if i + 1 == m { pc.t1 } else { ta + dt };
                let mid = 0.5 * (ta + tb);
                let half = 0.5 * (tb - ta);
                let pa = self.curve_point(&pc.curve, ta);
                let pb = self.curve_point(&pc.curve, tb);
                let w = match pc.curve {
                    Curve::Arc { r, .. } => r * (tb - ta),
                    Curve::Line { .. } => norm(&sub(&pb, &pa)),
                    _ => {
                        GL5.iter()
                            .map(|(x, wt)| wt * self.curve_speed(&pc.curve, mid + half * x))
                            .sum::<f64>()
                            * half
                    }
                };
                let dev = match pc.curve {
                    Curve::Arc { r, .. } => r * (1.0 - half.cos()),
                    Curve::Line { .. } => 0.0,
                    _ => [0.25, 0.5, 0.75]
                        .iter()
                        .map(|&f| {
                            let q = self.curve_point(&pc.curve, ta + f * (tb - ta));
                            seg_dist(&q, &pa, &pb)
                        })
                        .fold(0.0, f64::max)
                        * 1.05,
                };
                patch.points.push(self.curve_point(&pc.curve, mid));
                patch.weights.push(w);
                patch.segments.push([pa, pb]);
                patch.chord_tolerance = patch.chord_tolerance.max(dev);
                patch.spacing = patch.spacing.max(norm(&sub(&pb, &pa)).max(w));
            }
        }
        patch
    }

    fn patch_3d(&self, subset: &PatchSpec, h: f64) -> Result<BoundaryPatch> {
        let mut patch = BoundaryPatch::new(3);
        match (&self.kind, subset) {
            (ShapeKind::Ball { center, radius }, s) => {
                let azimuth = match *s {
                    PatchSpec::Whole => None,
                    PatchSpec::AngularWindow { from, to } => {
                        if !(to > from && from.is_finite() && to.is_finite()) {
                            return Err(PvError::Usage(format!(
                                "degenerate boundary window [{from}, {to}]"
                            )));
                        }
                        Some((from, to))
                    }
                    PatchSpec::ParameterWindow { .. } => {
                        return Err(PvError::Usage(
                            "parameter windows are not defined on a sphere".into(),
                        ))
                    }
                };
                // Icosahedron edge is about 1.05 r; each level halves it.
                let mut level = 0;
                while 1.05 * radius / (1u64 << level) as f64 > h && level < 12 {
                    level += 1;
                }
                for [a, b, c] in icosphere(level) {
                    let cen = unit(&[a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]]);
                    if let Some((from, to)) = azimuth {
                        let phi = cen[1].atan2(cen[0]);
                        let lifted = from + (phi - from).rem_euclid(2.0 * PI);
                        if lifted > to {
                            continue;
                        }
                    }
                    let place = |u: &Point| {
                        [
                            center[0] + radius * u[0],
                            center[1] + radius * u[1],
                            center[2] + radius * u[2],
                        ]
                    };
                    let tri = [place(&a), place(&b), place(&c)];
                    let n = cross(&sub(&b, &a), &sub(&c, &a));
                    let plane = dot(&unit(&n), &a).abs();
                    patch.points.push(place(&cen));
                    patch.weights.push(radius * radius * spherical_area(&a, &b, &c));
                    patch.chord_tolerance = patch.chord_tolerance.max(radius * (1.0 - plane));
                    patch.spacing = patch.spacing.max(
                        norm(&sub(&tri[0], &tri[1]))
                            .max(norm(&sub(&tri[1], &tri[2])))
                            .max(norm(&sub(&tri[0], &tri[2]))),
                    );
                    patch.triangles.push(tri);
                }
            }
            (ShapeKind::Box { lo, hi }, s) => {
                let (a, b) = match *s {
                    PatchSpec::Whole => (0.0, 6.0),
                    PatchSpec::ParameterWindow { from, to } => {
                        if !(to > from && from >= 0.0 && to <= 6.0) {
                            return Err(PvError::Usage(format!(
                                "box face window [{from}, {to}] must lie in [0, 6]"
                            )));
                        }
                        (from, to)
                    }
                    PatchSpec::AngularWindow { .. } => {
                        return Err(PvError::Usage(
                            "angular windows are not defined on a 3D box".into(),
                        ))
                    }
                };
                for face in 0..6usize {
                    let (f0, f1) = ((a - face as f64).max(0.0), (b - face as f64).min(1.0));
                    if f1 <= f0 {
                        continue;
                    }
                    let axis = face / 2;
                    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                    let level = if face % 2 == 0 { lo[axis] } else { hi[axis] };
                    let (u0, u1) = (lo[u] + f0 * (hi[u] - lo[u]), lo[u] + f1 * (hi[u] - lo[u]));
                    let nu = (((u1 - u0) / h).ceil() as usize).max(1);
                    let nv = (((hi[v] - lo[v]) / h).ceil() as usize).max(1);
                    let (du, dv) = ((u1 - u0) / nu as f64, (hi[v] - lo[v]) / nv as f64);
                    for i in 0..nu {
                        for j in 0..nv {
                            let corner = |di: usize, dj: usize| {
                                let mut p = [0.0; 3];
                                p[axis] = level;
                                p[u] = if i + di == nu { u1 } else { u0 + (i + di) as f64 * du };
                                p[v] = if j + dj == nv {
                                    hi[v]
                                } else {
                                    lo[v] + (j + dj) as f64 * dv
                                };
                                p
                            };
                            let (p00, p10, p11, p01) =
                                (corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1));
                            patch.points.push(lerp(&p00, &p11, 0.5));
                            patch.weights.push((p10[u] - p00[u]) * (p01[v] - p00[v]));
                            patch.triangles.push([p00, p10, p11]);
                            patch.triangles.push([p00, p11, p01]);
                            patch.spacing = patch.spacing.max(norm(&sub(&p11, &p00)));
                        }
                    }
                }
            }
            _ => {
                return Err(PvError::Usage(format!(
                    "no boundary quadrature for a 3D {}",
                    self.name()
                )))
            }
        }
        Ok(patch)
    }

    fn patch_with_spacing(&self, subset: &PatchSpec, h: f64) -> Result<BoundaryPatch> {
        if self.dim == 2 {
            let pieces = self.pieces(subset)?;
            Ok(self.patch_2d(&pieces, h))
        } else {
            self.patch_3d(subset, h)
        }
    }

    fn length_scale(&self) -> f64 {
        match &self.kind {
            ShapeKind::Ball { radius, .. } => *radius,
            ShapeKind::SmoothBlob { r0, .. } => *r0,
            ShapeKind::Box { lo, hi } => (0..self.dim)
                .map(|k| hi[k] - lo[k])
                .fold(f64::INFINITY, f64::min),
            ShapeKind::BallUnion { radii, .. } => {
                radii.iter().copied().fold(f64::INFINITY, f64::min)
            }
            ShapeKind::Subgraph { u0, u1, .. } => u1 - u0,
            _ => 1.0,
        }
    }

    /// Discretization of a boundary subset with chord tolerance at most
    /// `target_tolerance`.
    pub fn boundary_patch(&self, subset: &PatchSpec, target_tolerance: f64) -> Result<BoundaryPatch> {
        self.boundary_patch_spaced(subset, target_tolerance, f64::INFINITY)
    }

    /// As [`Shape::boundary_patch`], additionally refining until no element is
    /// longer than `max_spacing`.
    pub fn boundary_patch_spaced(
        &self,
        subset: &PatchSpec,
        target_tolerance: f64,
        max_spacing: f64,
    ) -> Result<BoundaryPatch> {
        if !(target_tolerance > 0.0) || !(max_spacing > 0.0) {
            return Err(PvError::Usage(
                "boundary tolerance and spacing must be positive".into(),
            ));
        }
        let mut h = (0.25 * self.length_scale()).min(max_spacing);
        for _ in 0..40 {
            let patch = self.patch_with_spacing(subset, h)?;
            if patch.weights.is_empty() {
                return Err(PvError::Usage(format!("boundary subset {subset:?} is empty")));
            }
            if patch.chord_tolerance <= target_tolerance && patch.spacing <= max_spacing {
                return Ok(patch);
            }
            h *= 0.5;
        }
        Err(PvError::Precision(format!(
            "could not reach chord tolerance {target_tolerance:e} on {subset:?}"
        )))
    }

    /// `∫_{∂A} κ^{power (1 - γ/d)} dH^{d-1}`.
    ///
    /// Uses the closed-form surface content when the integrand is constant,
    /// otherwise the boundary quadrature at two resolutions, failing when they
    /// disagree beyond 1e-3 relative.
    pub fn weighted_surface_content(
        &self,
        kappa: &IntensityField,
        gamma: f64,
        power: u32,
    ) -> Result<f64> {
        if power != 1 && power != 2 {
            return Err(PvError::Usage(format!("power must be 1 or 2, got {power}")));
        }
        let e = power as f64 * (1.0 - gamma / self.dim as f64);
        let c = kappa.is_constant().then(|| kappa.eval(&[0.0; 3]));
        if e == 0.0 || c.is_some() {
            let factor = c.map_or(1.0, |v| v.powf(e));
            if let Some(s) = self.surface_content() {
                return Ok(factor * s);
            }
        }
        let quad = |p: &BoundaryPatch| -> Result<f64> {
            let mut acc = 0.0;
            for (x, w) in p.points.iter().zip(&p.weights) {
                let k = kappa.eval(x);
                if !(k >= 0.0) {
                    return Err(PvError::Data(format!("kappa({x:?}) = {k} is not non-negative")));
                }
                acc += w * k.powf(e);
            }
            Ok(acc)
        };
        let tol = 1e-5 * self.length_scale();
        let coarse = self.boundary_patch(&PatchSpec::Whole, tol)?;
        let fine = self.patch_with_spacing(&PatchSpec::Whole, 0.5 * coarse.spacing)?;
        let (q1, q2) = (quad(&coarse)?, quad(&fine)?);
        if (q1 - q2).abs() > 1e-3 * q2.abs() {
            return Err(PvError::Precision(format!(
                "surface quadrature unstable: {q1} at spacing {:.3e}, {q2} at {:.3e}",
                coarse.spacing, fine.spacing
            )));
        }
        Ok(q2)
    }
}

fn seg_dist(q: &Point, a: &Point, b: &Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(&ab, &ab);
    let t = if l2 > 0.0 {
        (dot(&sub(q, a), &ab) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(&sub(q, &lerp(a, b, t)))
}

fn unit(v: &Point) -> Point {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Area of the spherical triangle spanned by three unit vectors.
fn spherical_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let num = dot(a, &cross(b, c)).abs();
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Subdivided icosahedron on the unit sphere.
fn icosphere(level: u32) -> Vec<[Point; 3]> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v: Vec<Point> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(unit)
    .collect();
    let idx: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let mut tris: Vec<[Point; 3]> = idx.iter().map(|f| [v[f[0]], v[f[1]], v[f[2]]]).collect();
    for _ in 0..level {
        let mut next = Vec::with_capacity(tris.len() * 4);
        for [a, b, c] in tris {
            let ab = unit(&lerp(&a, &b, 0.5));
            let bc = unit(&lerp(&b, &c, 0.5));
            let ca = unit(&lerp(&c, &a, 0.5));
            next.push([a, ab, ca]);
            next.push([ab, b, bc]);
            next.push([ca, bc, c]);
            next.push([ab, bc, ca]);
        }
        tris = next;
    }
    tris
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_weights_are_exact() {
        let s = Shape::ball(3, [0.0; 3], 0.25).unwrap();
        let p = s.boundary_patch(&PatchSpec::Whole, 1e-3).unwrap();
        let exact = 4.0 * PI * 0.0625;
        assert!((p.total_weight() - exact).abs() / exact < 1e-12);
        assert!(p.chord_tolerance <= 1e-3);
    }

    #[test]
    fn box_faces_in_3d() {
        let s = Shape::cuboid(3, [-0.1, -0.2, -0.3], [0.1, 0.2, 0.3]).unwrap();
        let p = s.boundary_patch(&PatchSpec::Whole, 1e-6).unwrap();
        assert!((p.total_weight() - s.surface_content().unwrap()).abs() < 1e-14);
        let one = s
            .boundary_patch(&PatchSpec::ParameterWindow { from: 0.0, to: 1.0 }, 1e-6)
            .unwrap();
        assert!((one.total_weight() - 0.4 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn degenerate_windows_rejected() {
        let s = Shape::ball(2, [0.0; 3], 0.25).unwrap();
        let w = PatchSpec::AngularWindow { from: 1.0, to: 1.0 };
        assert!(matches!(s.boundary_patch(&w, 1e-4), Err(PvError::Usage(_))));
        let u = Shape::ball_union(2, vec![[0.0; 3]], vec![0.2]).unwrap();
        let w = PatchSpec::ParameterWindow { from: 0.0, to: 1.0 };
        assert!(u.boundary_patch(&w, 1e-4).is_err());
    }
}
