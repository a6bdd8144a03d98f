//! Catalog of target sets: membership, conservative signed distance, exact
//! contents where they exist, and boundary quadrature.

mod patch;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::domain::{check_dim, dist2, Point};
use crate::error::{PvError, Result};
use crate::geometry::predicates::rat;
use crate::geometry::VoronoiDiagram;

pub use patch::{BoundaryPatch, PatchSpec};

/// Config-file description of a shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        center: Vec<f64>,
        half_widths: Vec<f64>,
    },
    BallUnion {
        balls: Vec<BallSpec>,
    },
    /// Star-shaped set `r <= r0 + amplitude * cos(frequency * theta + phase)`.
    SmoothBlob {
        center: Vec<f64>,
        r0: f64,
        amplitude: f64,
        frequency: u32,
        #[serde(default)]
        phase: f64,
    },
    /// `{(u, v) : u0 <= u <= u1, v0 <= v <= f(u)}` with
    /// `f(u) = c0 + c1 (u - u0) + c2 (u - u0)^2`.
    Subgraph {
        u0: f64,
        u1: f64,
        v0: f64,
        coeffs: [f64; 3],
    },
    /// `{x : x_d <= 0}` in slab coordinates.
    HalfSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone)]
pub enum ShapeKind {
    Ball {
        center: Point,
        radius: f64,
    },
    Box {
        lo: Point,
        hi: Point,
    },
    BallUnion {
        centers: Vec<Point>,
        radii: Vec<f64>,
        /// Counter-clockwise angular intervals of each circle not covered by
        /// the other disks.
        arcs: Vec<Vec<(f64, f64)>>,
    },
    SmoothBlob {
        center: Point,
        r0: f64,
        amplitude: f64,
        frequency: u32,
        phase: f64,
    },
    Subgraph {
        u0: f64,
        u1: f64,
        v0: f64,
        coeffs: [f64; 3],
    },
    PolytopalUnion {
        diagram: Arc<VoronoiDiagram>,
        inside: Arc<Vec<bool>>,
    },
    HalfSpace,
}

/// An immutable target set.
#[derive(Clone)]
pub struct Shape {
    dim: usize,
    kind: ShapeKind,
    margin: f64,
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Shape")
            .field("dim", &self.dim)
            .field("kind", &self.name())
            .field("margin", &self.margin)
            .finish()
    }
}

fn point_from(v: &[f64], dim: usize, what: &str) -> Result<Point> {
    if v.len() != dim {
        return Err(PvError::Config(format!(
            "{what} has {} components, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(PvError::Config(format!("{what} must be finite")));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(v);
    Ok(p)
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(PvError::Config(format!("{what} must be positive, got {x}")))
    }
}

fn need_2d(dim: usize, what: &str) -> Result<()> {
    if dim == 2 {
        Ok(())
    } else {
        Err(PvError::Config(format!("{what} shapes are only available in 2D")))
    }
}

impl Shape {
    pub fn from_spec(spec: &ShapeSpec, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        match spec {
            ShapeSpec::Ball { center, radius } => {
                Shape::ball(dim, point_from(center, dim, "ball center")?, *radius)
            }
            ShapeSpec::Box {
                center,
                half_widths,
            } => {
                let c = point_from(center, dim, "box center")?;
                let h = point_from(half_widths, dim, "box half_widths")?;
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for k in 0..dim {
                    lo[k] = c[k] - h[k];
                    hi[k] = c[k] + h[k];
                }
                Shape::cuboid(dim, lo, hi)
            }
            ShapeSpec::BallUnion { balls } => {
                let mut cs = Vec::with_capacity(balls.len());
                let mut rs = Vec::with_capacity(balls.len());
                for b in balls {
                    cs.push(point_from(&b.center, dim, "ball_union center")?);
                    rs.push(b.radius);
                }
                Shape::ball_union(dim, cs, rs)
            }
            ShapeSpec::SmoothBlob {
                center,
                r0,
                amplitude,
                frequency,
                phase,
            } => Shape::smooth_blob(
                dim,
                point_from(center, dim, "blob center")?,
                *r0,
                *amplitude,
                *frequency,
                *phase,
            ),
            ShapeSpec::Subgraph { u0, u1, v0, coeffs } => {
                Shape::subgraph(dim, *u0, *u1, *v0, *coeffs)
            }
            ShapeSpec::HalfSpace => Ok(Shape::half_space(dim)),
        }
    }

    fn checked(dim: usize, kind: ShapeKind) -> Result<Self> {
        let mut s = Shape {
            dim,
            kind,
            margin: 0.0,
        };
        s.margin = s.compute_margin();
        if !(s.margin > 0.0) {
            return Err(PvError::Config(format!(
                "{} must lie strictly inside Q (margin {:.3e})",
                s.name(),
                s.margin
            )));
        }
        Ok(s)
    }

    pub fn ball(dim: usize, center: Point, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        positive(radius, "ball radius")?;
        Shape::checked(dim, ShapeKind::Ball { center, radius })
    }

    /// Axis-parallel box `[lo, hi]`.
    pub fn cuboid(dim: usize, lo: Point, hi: Point) -> Result<Self> {
        check_dim(dim)?;
        for k in 0..dim {
            positive(hi[k] - lo[k], "box width")?;
        }
        Shape::checked(dim, ShapeKind::Box { lo, hi })
    }

    /// Union of disks. Tangent circles are rejected so that the boundary
    /// never has two normals on a set of positive length.
    pub fn ball_union(dim: usize, centers: Vec<Point>, radii: Vec<f64>) -> Result<Self> {
        need_2d(dim, "ball_union")?;
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(PvError::Config(
                "ball_union needs at least one ball, each with a radius".into(),
            ));
        }
        for &r in &radii {
            positive(r, "ball_union radius")?;
        }
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let d = dist2(&centers[i], &centers[j]).sqrt();
                let scale = radii[i].max(radii[j]);
                let outer = (d - (radii[i] + radii[j])).abs();
                let inner = (d - (radii[i] - radii[j]).abs()).abs();
                if outer < 1e-9 * scale || inner < 1e-9 * scale {
                    return Err(PvError::Config(format!(
                        "balls {i} and {j} of ball_union are tangent"
                    )));
                }
            }
        }
        let arcs = exposed_arcs(&centers, &radii);
        Shape::checked(
            dim,
            ShapeKind::BallUnion {
                centers,
                radii,
                arcs,
            },
        )
    }

    pub fn smooth_blob(
        dim: usize,
        center: Point,
        r0: f64,
        amplitude: f64,
        frequency: u32,
        phase: f64,
    ) -> Result<Self> {
        need_2d(dim, "smooth_blob")?;
        positive(r0, "blob r0")?;
        if !(amplitude.is_finite() && amplitude >= 0.0 && amplitude < r0) {
            return Err(PvError::Config(format!(
                "blob amplitude must lie in [0, r0), got {amplitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(PvError::Config("blob phase must be finite".into()));
        }
        Shape::checked(
            dim,
            ShapeKind::SmoothBlob {
                center,
                r0,
                amplitude,
                frequency,
                phase,
            },
        )
    }

    pub fn subgraph(dim: usize, u0: f64, u1: f64, v0: f64, coeffs: [f64; 3]) -> Result<Self> {
        need_2d(dim, "subgraph")?;
        positive(u1 - u0, "subgraph width u1 - u0")?;
        if coeffs.iter().any(|c| !c.is_finite()) || !v0.is_finite() {
            return Err(PvError::Config("subgraph parameters must be finite".into()));
        }
        let s = ShapeKind::Subgraph { u0, u1, v0, coeffs };
        let (fmin, _) = graph_range(u0, u1, &coeffs);
        if fmin <= v0 {
            return Err(PvError::Config(format!(
                "subgraph f must stay above v0 = {v0} on [u0, u1] (min {fmin})"
            )));
        }
        Shape::checked(dim, s)
    }

    pub fn half_space(dim: usize) -> Self {
        Shape {
            dim,
            kind: ShapeKind::HalfSpace,
            margin: f64::INFINITY,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ShapeKind {
        &self.kind
    }

    /// Distance from the shape to the boundary of Q.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ShapeKind::Ball { .. } => "ball",
            ShapeKind::Box { .. } => "box",
            ShapeKind::BallUnion { .. } => "ball_union",
            ShapeKind::SmoothBlob { .. } => "smooth_blob",
            ShapeKind::Subgraph { .. } => "subgraph",
            ShapeKind::PolytopalUnion { .. } => "polytopal_union",
            ShapeKind::HalfSpace => "half_space",
        }
    }

    fn compute_margin(&self) -> f64 {
        let d = self.dim;
        let reach = |c: &Point, r: f64| {
            (0..d).map(|k| 0.5 - c[k].abs() - r).fold(f64::INFINITY, f64::min)
        };
        match &self.kind {
            ShapeKind::Ball { center, radius } => reach(center, *radius),
            ShapeKind::Box { lo, hi } => (0..d)
                .map(|k| (0.5 + lo[k]).min(0.5 - hi[k]))
                .fold(f64::INFINITY, f64::min),
            ShapeKind::BallUnion { centers, radii, .. } => centers
                .iter()
                .zip(radii)
                .map(|(c, &r)| reach(c, r))
                .fold(f64::INFINITY, f64::min),
            ShapeKind::SmoothBlob {
                center,
                r0,
                amplitude,
                ..
            } => reach(center, r0 + amplitude),
            ShapeKind::Subgraph { u0, u1, v0, coeffs } => {
                let (_, fmax) = graph_range(*u0, *u1, coeffs);
                [0.5 + u0, 0.5 - u1, 0.5 + v0, 0.5 - fmax]
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
            }
            ShapeKind::PolytopalUnion { diagram, inside } => {
                let b = diagram.domain.bounds();
                let mut m = f64::INFINITY;
                for (i, _) in inside.iter().enumerate().filter(|(_, &x)| x) {
                    for p in diagram.cell_vertices(i) {
                        for k in 0..d {
                            m = m.min(p[k] - b.lo[k]).min(b.hi[k] - p[k]);
                        }
                    }
                }
                m
            }
            ShapeKind::HalfSpace => f64::INFINITY,
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &Point) -> bool {
        match &self.kind {
            ShapeKind::Ball { center, radius } => in_ball(x, center, *radius, self.dim),
            ShapeKind::Box { lo, hi } => (0..self.dim).all(|k| lo[k] <= x[k] && x[k] <= hi[k]),
            ShapeKind::BallUnion { centers, radii, .. } => centers
                .iter()
                .zip(radii)
                .any(|(c, &r)| in_ball(x, c, r, 2)),
            ShapeKind::SmoothBlob { .. } => {
                let (r, rho) = self.blob_polar(x);
                r <= rho
            }
            ShapeKind::Subgraph { u0, u1, v0, coeffs } => {
                *u0 <= x[0] && x[0] <= *u1 && *v0 <= x[1] && x[1] <= poly2(coeffs, x[0] - u0)
            }
            ShapeKind::PolytopalUnion { diagram, inside } => {
                diagram.domain.contains(x) && inside[diagram.locate_unchecked(x)]
            }
            ShapeKind::HalfSpace => x[self.dim - 1] <= 0.0,
        }
    }

    /// Lower bound on the distance to the boundary, negative inside.
    ///
    /// `|sd(x)| <= dist(x, boundary)` always and the sign agrees with
    /// [`Shape::contains`] away from the boundary. Polytopal unions return 0
    /// (no information).
    pub fn signed_distance(&self, x: &Point) -> f64 {
        let d = self.dim;
        match &self.kind {
            ShapeKind::Ball { center, radius } => dist2(x, center).sqrt() - radius,
            ShapeKind::Box { lo, hi } => {
                let mut out2 = 0.0;
                let mut inner = f64::INFINITY;
                for k in 0..d {
                    let e = (lo[k] - x[k]).max(x[k] - hi[k]);
                    if e > 0.0 {
                        out2 += e * e;
                    }
                    inner = inner.min(-e);
                }
                if out2 > 0.0 {
                    out2.sqrt()
                } else {
                    -inner
                }
            }
            ShapeKind::BallUnion { centers, radii, .. } => centers
                .iter()
                .zip(radii)
                .map(|(c, &r)| dist2(x, c).sqrt() - r)
                .fold(f64::INFINITY, f64::min),
            ShapeKind::SmoothBlob {
                r0,
                amplitude,
                frequency,
                ..
            } => {
                let (r, rho) = self.blob_polar(x);
                let rmin = r0 - amplitude;
                // |grad (r - rho(theta))| <= lip on {r >= rmin / 2}.
                let lip = (1.0 + (2.0 * amplitude * *frequency as f64 / rmin).powi(2)).sqrt();
                let g = r - rho;
                if g > 0.0 {
                    g / lip
                } else {
                    let lipschitz = (-g / lip).min(r - 0.5 * rmin);
                    -(rmin - r).max(lipschitz).max(0.0)
                }
            }
            ShapeKind::Subgraph { u0, u1, v0, coeffs } => {
                // Slope of f bounded on |u| <= 2, which covers every ball of
                // radius 1 around a point of Q.
                let slope = |u: f64| (coeffs[1] + 2.0 * coeffs[2] * (u - u0)).abs();
                let lip = (1.0 + slope(-2.0).max(slope(2.0)).powi(2)).sqrt();
                let g = (x[1] - poly2(coeffs, x[0] - u0)) / lip;
                let g = g.clamp(-1.0, 1.0);
                // Intersection of four sets: the max of their bounds.
                [u0 - x[0], x[0] - u1, v0 - x[1], g]
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            ShapeKind::PolytopalUnion { .. } => 0.0,
            ShapeKind::HalfSpace => x[d - 1],
        }
    }

    fn blob_polar(&self, x: &Point) -> (f64, f64) {
        match &self.kind {
            ShapeKind::SmoothBlob { center, .. } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                (dx.hypot(dy), self.blob_rho(dy.atan2(dx)))
            }
            _ => unreachable!(),
        }
    }

    pub(crate) fn blob_rho(&self, theta: f64) -> f64 {
        match &self.kind {
            ShapeKind::SmoothBlob {
                r0,
                amplitude,
                frequency,
                phase,
                ..
            } => r0 + amplitude * (*frequency as f64 * theta + phase).cos(),
            _ => unreachable!(),
        }
    }

    /// Lebesgue measure, closed form where available.
    pub fn volume(&self) -> Option<f64> {
        let d = self.dim;
        Some(match &self.kind {
            ShapeKind::Ball { radius, .. } => {
                if d == 2 {
                    PI * radius * radius
                } else {
                    4.0 / 3.0 * PI * radius.powi(3)
                }
            }
            ShapeKind::Box { lo, hi } => (0..d).map(|k| hi[k] - lo[k]).product(),
            ShapeKind::BallUnion {
                centers,
                radii,
                arcs,
            } => {
                // Green's theorem over the exposed arcs.
                let mut a = 0.0;
                for ((c, &r), list) in centers.iter().zip(radii).zip(arcs) {
                    for &(t0, t1) in list {
                        a += 0.5
                            * (r * r * (t1 - t0) + r * c[0] * (t1.sin() - t0.sin())
                                - r * c[1] * (t1.cos() - t0.cos()));
                    }
                }
                a
            }
            ShapeKind::SmoothBlob {
                r0,
                amplitude,
                frequency,
                ..
            } => {
                if *frequency == 0 {
                    PI * self.blob_rho(0.0).powi(2)
                } else {
                    PI * r0 * r0 + 0.5 * PI * amplitude * amplitude
                }
            }
            ShapeKind::Subgraph { u0, u1, v0, coeffs } => {
                let w = u1 - u0;
                coeffs[0] * w + coeffs[1] * w * w / 2.0 + coeffs[2] * w.powi(3) / 3.0 - v0 * w
            }
            ShapeKind::PolytopalUnion { diagram, inside } => diagram
                .cells
                .iter()
                .zip(inside.iter())
                .filter(|(_, &x)| x)
                .map(|(c, _)| c.volume)
                .sum(),
            ShapeKind::HalfSpace => return None,
        })
    }

    /// Closed-form boundary measure where available.
    pub fn surface_content(&self) -> Option<f64> {
        let d = self.dim;
        match &self.kind {
            ShapeKind::Ball { radius, .. } => Some(if d == 2 {
                2.0 * PI * radius
            } else {
                4.0 * PI * radius * radius
            }),
            ShapeKind::Box { lo, hi } => {
                let w: Vec<f64> = (0..d).map(|k| hi[k] - lo[k]).collect();
                Some(if d == 2 {
                    2.0 * (w[0] + w[1])
                } else {
                    2.0 * (w[0] * w[1] + w[1] * w[2] + w[0] * w[2])
                })
            }
            ShapeKind::BallUnion { radii, arcs, .. } => Some(
                radii
                    .iter()
                    .zip(arcs)
                    .map(|(&r, list)| list.iter().map(|(a, b)| r * (b - a)).sum::<f64>())
                    .sum(),
            ),
            ShapeKind::Subgraph { u0, u1, v0, coeffs } => {
                let w = u1 - u0;
                let f0 = coeffs[0];
                let f1 = poly2(coeffs, w);
                Some(w + (f0 - v0) + (f1 - v0) + parabola_length(coeffs, w))
            }
            ShapeKind::SmoothBlob { amplitude, .. } if *amplitude == 0.0 => {
                Some(2.0 * PI * self.blob_rho(0.0))
            }
            _ => None,
        }
    }
}

/// Shape whose membership is "nearest generator of `diagram` is selected".
pub fn polytopal_union_from_cells(diagram: Arc<VoronoiDiagram>, inside: &[usize]) -> Result<Shape> {
    let n = diagram.n_cells();
    let mut flags = vec![false; n];
    for &i in inside {
        if i >= n {
            return Err(PvError::Usage(format!(
                "cell index {i} out of range for a diagram with {n} cells"
            )));
        }
        flags[i] = true;
    }
    let dim = diagram.dim;
    let mut s = Shape {
        dim,
        kind: ShapeKind::PolytopalUnion {
            diagram,
            inside: Arc::new(flags),
        },
        margin: 0.0,
    };
    s.margin = s.compute_margin();
    Ok(s)
}

fn in_ball(x: &Point, c: &Point, r: f64, dim: usize) -> bool {
    let mut s = 0.0;
    let mut mag = 0.0;
    for k in 0..dim {
        let t = x[k] - c[k];
        s += t * t;
        mag += x[k].abs() + c[k].abs();
    }
    let diff = s - r * r;
    // Generous bound on the rounding of the expression above.
    let err = 8.0 * f64::EPSILON * (mag * mag + r * r);
    if diff.abs() > err {
        return diff < 0.0;
    }
    let mut acc = -(rat(r) * rat(r));
    for k in 0..dim {
        let t = rat(x[k]) - rat(c[k]);
        acc += &t * &t;
    }
    !acc.is_positive()
}

#[inline]
fn poly2(c: &[f64; 3], t: f64) -> f64 {
    c[0] + t * (c[1] + t * c[2])
}

/// Extrema of the graph function on `[u0, u1]`.
fn graph_range(u0: f64, u1: f64, c: &[f64; 3]) -> (f64, f64) {
    let w = u1 - u0;
    let mut vals = vec![poly2(c, 0.0), poly2(c, w)];
    if c[2] != 0.0 {
        let t = -c[1] / (2.0 * c[2]);
        if t > 0.0 && t < w {
            vals.push(poly2(c, t));
        }
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Length of the graph of `c0 + c1 t + c2 t^2` over `t in [0, w]`.
fn parabola_length(c: &[f64; 3], w: f64) -> f64 {
    if c[2].abs() < 1e-14 {
        return w * (1.0 + c[1] * c[1]).sqrt();
    }
    let prim = |t: f64| {
        let s = c[1] + 2.0 * c[2] * t;
        (s * (1.0 + s * s).sqrt() + s.asinh()) / (4.0 * c[2])
    };
    prim(w) - prim(0.0)
}

/// For every circle, the sorted angular intervals (in `[a, a + 2 pi]` form)
/// that lie outside all other disks.
fn exposed_arcs(centers: &[Point], radii: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let two_pi = 2.0 * PI;
    let mut out = Vec::with_capacity(centers.len());
    for i in 0..centers.len() {
        let mut covered: Vec<(f64, f64)> = Vec::new();
        let mut whole = false;
        for j in 0..centers.len() {
            if i == j {
                continue;
            }
            let (ri, rj) = (radii[i], radii[j]);
            let dx = centers[j][0] - centers[i][0];
            let dy = centers[j][1] - centers[i][1];
            let d = dx.hypot(dy);
            if d >= ri + rj || d + rj <= ri {
                continue;
            }
            if d + ri <= rj {
                whole = true;
                break;
            }
            let phi = dy.atan2(dx).rem_euclid(two_pi);
            let alpha = ((ri * ri + d * d - rj * rj) / (2.0 * ri * d)).clamp(-1.0, 1.0).acos();
            let (a, b) = (phi - alpha, phi + alpha);
            // Split at the 0 / 2 pi seam.
            if a < 0.0 {
                covered.push((a + two_pi, two_pi));
                covered.push((0.0, b));
            } else if b > two_pi {
                covered.push((a, two_pi));
                covered.push((0.0, b - two_pi));
            } else {
                covered.push((a, b));
            }
        }
        if whole {
            out.push(Vec::new());
            continue;
        }
        covered.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut free = Vec::new();
        let mut cursor = 0.0;
        for (a, b) in covered {
            if a > cursor {
                free.push((cursor, a));
            }
            cursor = f64::max(cursor, b);
        }
        if cursor < two_pi {
            free.push((cursor, two_pi));
        }
        // Merge the arc crossing the seam.
        if free.len() > 1 && free[0].0 == 0.0 && free[free.len() - 1].1 == two_pi {
            let last = free.pop().unwrap();
            free[0] = (last.0 - two_pi, free[0].1);
        }
        out.push(free);
    }
    out
}
