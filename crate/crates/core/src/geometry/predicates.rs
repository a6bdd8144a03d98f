//! Filtered exact predicates.
//!
//! Each predicate first evaluates in `f64` together with a forward error bound
//! proportional to the permanent of the matrix. If the sign is not certified,
//! the same determinant is evaluated in exact rational arithmetic (every `f64`
//! is a dyadic rational, so conversion is lossless).
//!
//! Sign conventions:
//! - `orient2d(a,b,c) > 0` iff `a,b,c` is counter-clockwise.
//! - `orient3d(a,b,c,d) = det[b-a; c-a; d-a]`, positive for a right-handed tet.
//! - `incircle(a,b,c,d) > 0` iff `d` is inside the circle of ccw `a,b,c`.
//! - `insphere(a,b,c,d,e) > 0` iff `e` is inside the sphere of `a,b,c,d`
//!   when `orient3d(a,b,c,d) > 0`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::domain::Point;

pub type Rational = Ratio<BigInt>;

const EPS: f64 = f64::EPSILON * 0.5;

#[inline]
pub fn rat(x: f64) -> Rational {
    Rational::from_float(x).expect("finite coordinate")
}

fn sign_of(x: &Rational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[inline]
fn fsign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn rdet2(a: &Rational, b: &Rational, c: &Rational, d: &Rational) -> Rational {
    a * d - b * c
}

fn rdet3(m: &[[Rational; 3]; 3]) -> Rational {
    &m[0][0] * rdet2(&m[1][1], &m[1][2], &m[2][1], &m[2][2])
        - &m[0][1] * rdet2(&m[1][0], &m[1][2], &m[2][0], &m[2][2])
        + &m[0][2] * rdet2(&m[1][0], &m[1][1], &m[2][0], &m[2][1])
}

fn rdet4(m: &[[Rational; 4]; 4]) -> Rational {
    let mut acc = Rational::zero();
    for col in 0..4 {
        let mut minor: [[Rational; 3]; 3] = Default::default();
        for (r, row) in m.iter().enumerate().skip(1) {
            let mut k = 0;
            for (c, v) in row.iter().enumerate() {
                if c != col {
                    minor[r - 1][k] = v.clone();
                    k += 1;
                }
            }
        }
        let term = &m[0][col] * rdet3(&minor);
        if col % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Determinant and permanent of a 3x3 matrix.
#[inline]
fn fdet3(m: &[[f64; 3]; 3]) -> (f64, f64) {
    let c0 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c1 = m[1][0] * m[2][2] - m[1][2] * m[2][0];
    let c2 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let p0 = (m[1][1] * m[2][2]).abs() + (m[1][2] * m[2][1]).abs();
    let p1 = (m[1][0] * m[2][2]).abs() + (m[1][2] * m[2][0]).abs();
    let p2 = (m[1][0] * m[2][1]).abs() + (m[1][1] * m[2][0]).abs();
    let det = m[0][0] * c0 - m[0][1] * c1 + m[0][2] * c2;
    let per = m[0][0].abs() * p0 + m[0][1].abs() * p1 + m[0][2].abs() * p2;
    (det, per)
}

#[inline]
fn fdet4(m: &[[f64; 4]; 4]) -> (f64, f64) {
    let mut det = 0.0;
    let mut per = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut k = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][k] = m[r][c];
                    k += 1;
                }
            }
        }
        let (d, p) = fdet3(&minor);
        if col % 2 == 0 {
            det += m[0][col] * d;
        } else {
            det -= m[0][col] * d;
        }
        per += m[0][col].abs() * p;
    }
    (det, per)
}

pub fn orient2d(a: &Point, b: &Point, c: &Point) -> i8 {
    let l = (b[0] - a[0]) * (c[1] - a[1]);
    let r = (b[1] - a[1]) * (c[0] - a[0]);
    let det = l - r;
    let bound = 8.0 * EPS * (l.abs() + r.abs());
    if det.abs() > bound {
        return fsign(det);
    }
    let (ax, ay) = (rat(a[0]), rat(a[1]));
    let d = rdet2(
        &(rat(b[0]) - &ax),
        &(rat(b[1]) - &ay),
        &(rat(c[0]) - &ax),
        &(rat(c[1]) - &ay),
    );
    sign_of(&d)
}

pub fn orient3d(a: &Point, b: &Point, c: &Point, d: &Point) -> i8 {
    let m = [
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]],
        [c[0] - a[0], c[1] - a[1], c[2] - a[2]],
        [d[0] - a[0], d[1] - a[1], d[2] - a[2]],
    ];
    let (det, per) = fdet3(&m);
    if det.abs() > 16.0 * EPS * per {
        return fsign(det);
    }
    let ra: [Rational; 3] = [rat(a[0]), rat(a[1]), rat(a[2])];
    let row = |p: &Point| -> [Rational; 3] {
        [rat(p[0]) - &ra[0], rat(p[1]) - &ra[1], rat(p[2]) - &ra[2]]
    };
    sign_of(&rdet3(&[row(b), row(c), row(d)]))
}

pub fn incircle(a: &Point, b: &Point, c: &Point, d: &Point) -> i8 {
    let row = |p: &Point| {
        let x = p[0] - d[0];
        let y = p[1] - d[1];
        [x, y, x * x + y * y]
    };
    let m = [row(a), row(b), row(c)];
    let (det, per) = fdet3(&m);
    if det.abs() > 32.0 * EPS * per {
        return fsign(det);
    }
    let (dx, dy) = (rat(d[0]), rat(d[1]));
    let rrow = |p: &Point| -> [Rational; 3] {
        let x = rat(p[0]) - &dx;
        let y = rat(p[1]) - &dy;
        let w = &x * &x + &y * &y;
        [x, y, w]
    };
    sign_of(&rdet3(&[rrow(a), rrow(b), rrow(c)]))
}

pub fn insphere(a: &Point, b: &Point, c: &Point, d: &Point, e: &Point) -> i8 {
    let row = |p: &Point| {
        let x = p[0] - e[0];
        let y = p[1] - e[1];
        let z = p[2] - e[2];
        [x, y, z, x * x + y * y + z * z]
    };
    let m = [row(a), row(b), row(c), row(d)];
    let (det, per) = fdet4(&m);
    if det.abs() > 64.0 * EPS * per {
        return -fsign(det);
    }
    let re: [Rational; 3] = [rat(e[0]), rat(e[1]), rat(e[2])];
    let rrow = |p: &Point| -> [Rational; 4] {
        let x = rat(p[0]) - &re[0];
        let y = rat(p[1]) - &re[1];
        let z = rat(p[2]) - &re[2];
        let w = &x * &x + &y * &y + &z * &z;
        [x, y, z, w]
    };
    -sign_of(&rdet4(&[rrow(a), rrow(b), rrow(c), rrow(d)]))
}

/// `incircle` with ties broken by perturbing each lifted coordinate, the
/// perturbation decreasing with the global index.
pub fn incircle_sos(p: [&Point; 4], idx: [u32; 4]) -> i8 {
    let s = incircle(p[0], p[1], p[2], p[3]);
    if s != 0 {
        return s;
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by_key(|&r| idx[r]);
    for &r in &order {
        let o: Vec<&Point> = (0..4).filter(|&k| k != r).map(|k| p[k]).collect();
        let c = orient2d(o[0], o[1], o[2]);
        if c != 0 {
            return if r % 2 == 0 { c } else { -c };
        }
    }
    0
}

/// `insphere` with the same lifting perturbation as [`incircle_sos`].
pub fn insphere_sos(p: [&Point; 5], idx: [u32; 5]) -> i8 {
    let s = insphere(p[0], p[1], p[2], p[3], p[4]);
    if s != 0 {
        return s;
    }
    let mut order = [0usize, 1, 2, 3, 4];
    order.sort_by_key(|&r| idx[r]);
    for &r in &order {
        let o: Vec<&Point> = (0..5).filter(|&k| k != r).map(|k| p[k]).collect();
        // Cofactor of the lifted column is (-1)^(r+3) * (-orient3d(others)),
        // and insphere is minus the lifted determinant.
        let m = -orient3d(o[0], o[1], o[2], o[3]);
        if m != 0 {
            let cof = if (r + 3) % 2 == 0 { m } else { -m };
            return -cof;
        }
    }
    0
}

/// Exact comparison of |q-a|^2 against |q-b|^2.
pub fn cmp_dist(q: &Point, a: &Point, b: &Point) -> Ordering {
    let mut da = 0.0;
    let mut db = 0.0;
    let mut mag = 0.0;
    for k in 0..3 {
        let u = q[k] - a[k];
        let v = q[k] - b[k];
        da += u * u;
        db += v * v;
        mag += u * u + v * v;
    }
    let diff = da - db;
    if diff.abs() > 8.0 * EPS * mag {
        return diff.partial_cmp(&0.0).expect("finite");
    }
    let mut ea = Rational::zero();
    let mut eb = Rational::zero();
    for k in 0..3 {
        let rq = rat(q[k]);
        let u = &rq - rat(a[k]);
        let v = &rq - rat(b[k]);
        ea += &u * &u;
        eb += &v * &v;
    }
    ea.cmp(&eb)
}
