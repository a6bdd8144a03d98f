//! Simulation domains: the centred unit cube and the laterally periodic slab.

use serde::{Deserialize, Serialize};

use crate::error::{PvError, Result};

pub type Point = [f64; 3];

/// Axis-aligned box in the first `dim` coordinates. Unused coordinates are 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub dim: usize,
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn new(dim: usize, lo: Point, hi: Point) -> Self {
        Aabb { dim, lo, hi }
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|k| self.hi[k] - self.lo[k]).product()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim)
            .map(|k| (self.hi[k] - self.lo[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Bound of side `s`: sides `2k` and `2k+1` are the low and high faces of axis `k`.
    pub fn side_bound(&self, side: usize) -> f64 {
        let axis = side / 2;
        if side % 2 == 0 {
            self.lo[axis]
        } else {
            self.hi[axis]
        }
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for k in 0..self.dim {
            c[k] = 0.5 * (self.lo[k] + self.hi[k]);
        }
        c
    }
}

/// Where a point sample lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Q = [-1/2, 1/2]^d.
    Cube { dim: usize },
    /// [0, L]^{d-1} x [-h, h] with the first d-1 coordinates periodic.
    Slab {
        dim: usize,
        lateral: f64,
        half_height: f64,
    },
}

impl Domain {
    pub fn cube(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Domain::Cube { dim })
    }

    pub fn slab(dim: usize, lateral: f64, half_height: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(lateral.is_finite() && lateral > 0.0) {
            return Err(PvError::Config(format!(
                "slab lateral extent must be positive and finite, got {lateral}"
            )));
        }
        if !(half_height.is_finite() && half_height > 0.0) {
            return Err(PvError::Config(format!(
                "slab half-height must be positive and finite, got {half_height}"
            )));
        }
        Ok(Domain::Slab {
            dim,
            lateral,
            half_height,
        })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Cube { dim } | Domain::Slab { dim, .. } => dim,
        }
    }

    pub fn bounds(&self) -> Aabb {
        match *self {
            Domain::Cube { dim } => {
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for k in 0..dim {
                    lo[k] = -0.5;
                    hi[k] = 0.5;
                }
                Aabb::new(dim, lo, hi)
            }
            Domain::Slab {
                dim,
                lateral,
                half_height,
            } => {
                let mut lo = [0.0; 3];
                let mut hi = [0.0; 3];
                for k in 0..dim - 1 {
                    hi[k] = lateral;
                }
                lo[dim - 1] = -half_height;
                hi[dim - 1] = half_height;
                Aabb::new(dim, lo, hi)
            }
        }
    }

    pub fn volume(&self) -> f64 {
        self.bounds().volume()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.bounds().contains(p)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Domain::Slab { .. })
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(PvError::Config(format!("dimension must be 2 or 3, got {dim}")))
    }
}

#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}
