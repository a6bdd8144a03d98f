//! Canonical vertex positions from labels.

use num_traits::{ToPrimitive, Zero};

use super::label::Label;
use super::predicates::{rat, Rational};
use crate::domain::{Aabb, Point};

/// Solves the bisector and side equations of `label` for a point.
///
/// The system is written relative to the smallest generator, which keeps it
/// well conditioned; it falls back to exact arithmetic when Cramer's rule is
/// not certified. Returns `None` if the label does not determine a point.
pub fn solve_vertex(dim: usize, label: &Label, pts: &[Point], clip: &Aabb) -> Option<Point> {
    if label.codim() != dim || label.gens().is_empty() {
        return None;
    }
    let g = label.gens();
    let base = pts[g[0] as usize];
    let mut rows = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    let mut r = 0;
    for &gm in &g[1..] {
        let q = pts[gm as usize];
        let mut n2 = 0.0;
        for k in 0..dim {
            let v = q[k] - base[k];
            rows[r][k] = 2.0 * v;
            n2 += v * v;
        }
        rhs[r] = n2;
        r += 1;
    }
    for s in label.side_list() {
        let axis = s / 2;
        rows[r][axis] = 1.0;
        rhs[r] = clip.side_bound(s) - base[axis];
        r += 1;
    }
    let y = if dim == 2 {
        cramer2(&rows, &rhs)
    } else {
        cramer3(&rows, &rhs)
    };
    let y = match y {
        Some(y) => y,
        None => exact_solve(dim, label, pts, clip)?,
    };
    let mut out = [0.0; 3];
    for k in 0..dim {
        out[k] = base[k] + y[k];
    }
    // Side coordinates are exact by construction.
    for s in label.side_list() {
        out[s / 2] = clip.side_bound(s);
    }
    Some(out)
}

const FILTER: f64 = 1e-10;

fn cramer2(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<Point> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let per = (m[0][0] * m[1][1]).abs() + (m[0][1] * m[1][0]).abs();
    if !(det.abs() > FILTER * per) {
        return None;
    }
    let x = (b[0] * m[1][1] - m[0][1] * b[1]) / det;
    let y = (m[0][0] * b[1] - b[0] * m[1][0]) / det;
    Some([x, y, 0.0])
}

fn det3(m: &[[f64; 3]; 3]) -> (f64, f64) {
    let c0 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c1 = m[1][0] * m[2][2] - m[1][2] * m[2][0];
    let c2 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let per = m[0][0].abs() * ((m[1][1] * m[2][2]).abs() + (m[1][2] * m[2][1]).abs())
        + m[0][1].abs() * ((m[1][0] * m[2][2]).abs() + (m[1][2] * m[2][0]).abs())
        + m[0][2].abs() * ((m[1][0] * m[2][1]).abs() + (m[1][1] * m[2][0]).abs());
    (m[0][0] * c0 - m[0][1] * c1 + m[0][2] * c2, per)
}

fn cramer3(m: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<Point> {
    let (det, per) = det3(m);
    if !(det.abs() > FILTER * per) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut mk = *m;
        for r in 0..3 {
            mk[r][k] = b[r];
        }
        *o = det3(&mk).0 / det;
    }
    Some(out)
}

fn exact_solve(dim: usize, label: &Label, pts: &[Point], clip: &Aabb) -> Option<Point> {
    let g = label.gens();
    let base: Vec<Rational> = (0..dim).map(|k| rat(pts[g[0] as usize][k])).collect();
    let mut a: Vec<Vec<Rational>> = Vec::new();
    for &gm in &g[1..] {
        let q = pts[gm as usize];
        let v: Vec<Rational> = (0..dim).map(|k| rat(q[k]) - &base[k]).collect();
        let n2 = v.iter().fold(Rational::zero(), |acc, x| acc + x * x);
        let mut row: Vec<Rational> = v.iter().map(|x| x * Rational::from_integer(2.into())).collect();
        row.push(n2);
        a.push(row);
    }
    for s in label.side_list() {
        let axis = s / 2;
        let mut row = vec![Rational::zero(); dim + 1];
        row[axis] = Rational::from_integer(1.into());
        row[dim] = rat(clip.side_bound(s)) - &base[axis];
        a.push(row);
    }
    // Gauss-Jordan elimination over the rationals.
    for col in 0..dim {
        let piv = (col..dim).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..dim {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..=dim {
                    let t = &a[col][c] * &f;
                    a[r][c] -= t;
                }
            }
        }
    }
    let mut out = [0.0; 3];
    for k in 0..dim {
        out[k] = a[k][dim].to_f64()?;
    }
    Some(out)
}
