//! Maximal points under the coordinatewise partial order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::domain::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Flags the points not dominated by any other point.
///
/// `y` dominates `x` when `y >= x` in every coordinate and `y` is a different
/// sample point; coincident points therefore dominate each other.
pub fn maximal_mask(points: &[Point], dim: usize) -> Vec<bool> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Lexicographically decreasing: every potential dominator comes first.
    order.sort_by(|&a, &b| {
        (0..dim)
            .map(|k| points[b][k].total_cmp(&points[a][k]))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });
    let mut mask = vec![false; n];
    let same = |a: usize, b: usize| (0..dim).all(|k| points[a][k] == points[b][k]);
    if dim == 2 {
        let mut best = f64::NEG_INFINITY;
        for (pos, &i) in order.iter().enumerate() {
            let y = points[i][1];
            let dup = (pos > 0 && same(order[pos - 1], i)) || (pos + 1 < n && same(order[pos + 1], i));
            mask[i] = y > best && !dup;
            best = best.max(y);
        }
    } else {
        // Staircase of the (y, z) projections seen so far: y increasing, z
        // decreasing.
        let mut stair: BTreeMap<Key, f64> = BTreeMap::new();
        for (pos, &i) in order.iter().enumerate() {
            let (y, z) = (points[i][1], points[i][2]);
            let dup = (pos > 0 && same(order[pos - 1], i)) || (pos + 1 < n && same(order[pos + 1], i));
            let dominated = stair
                .range(Key(y)..)
                .next()
                .is_some_and(|(_, &zz)| zz >= z);
            mask[i] = !dominated && !dup;
            if dominated {
                continue;
            }
            let drop: Vec<Key> = stair
                .range(..=Key(y))
                .rev()
                .take_while(|(_, &zz)| zz <= z)
                .map(|(k, _)| *k)
                .collect();
            for k in drop {
                stair.remove(&k);
            }
            stair.insert(Key(y), z);
        }
    }
    mask
}

pub fn maximal_points(points: &[Point], dim: usize) -> usize {
    maximal_mask(points, dim).iter().filter(|&&m| m).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn brute(points: &[Point], dim: usize) -> usize {
        (0..points.len())
            .filter(|&i| {
                !(0..points.len()).any(|j| j != i && (0..dim).all(|k| points[j][k] >= points[i][k]))
            })
            .count()
    }

    #[test]
    fn small_examples() {
        assert_eq!(maximal_points(&[[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]], 2), 1);
        assert_eq!(maximal_points(&[[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]], 2), 2);
        assert_eq!(maximal_points(&[[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]], 2), 0);
        assert_eq!(maximal_points(&[], 3), 0);
        assert_eq!(maximal_points(&[[0.0, 1.0, 0.0], [0.0, 0.5, 0.0]], 2), 1);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            for trial in 0..20 {
                let n = if trial == 0 { 1000 } else { rng.random_range(1..200) };
                // Coarse grid coordinates force ties.
                let grid = trial % 2 == 1;
                let pts: Vec<Point> = (0..n)
                    .map(|_| {
                        let mut p = [0.0; 3];
                        for c in p.iter_mut().take(dim) {
                            let u: f64 = rng.random();
                            *c = if grid { (u * 6.0).floor() } else { u };
                        }
                        p
                    })
                    .collect();
                assert_eq!(maximal_points(&pts, dim), brute(&pts, dim), "dim {dim} trial {trial}");
            }
        }
    }
}
