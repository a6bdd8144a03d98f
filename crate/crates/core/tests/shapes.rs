mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::{p2, poisson};
use proptest::prelude::*;
use pvlab::geometry::build_voronoi;
use pvlab::pointprocess::IntensityField;
use pvlab::shapes::{polytopal_union_from_cells, PatchSpec, Shape, ShapeSpec};
use pvlab::{Point, PvError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blob() -> Shape {
    Shape::smooth_blob(2, [0.0; 3], 0.25, 0.05, 3, 0.0).unwrap()
}

fn catalog_2d() -> Vec<Shape> {
    vec![
        Shape::ball(2, p2(0.05, -0.02), 0.25).unwrap(),
        Shape::cuboid(2, p2(-0.2, -0.3), p2(0.25, 0.1)).unwrap(),
        Shape::ball_union(
            2,
            vec![p2(-0.1, 0.0), p2(0.12, 0.05), p2(0.0, -0.25)],
            vec![0.2, 0.15, 0.1],
        )
        .unwrap(),
        Shape::smooth_blob(2, p2(0.02, 0.01), 0.25, 0.07, 5, 0.3).unwrap(),
        Shape::subgraph(2, -0.4, 0.4, -0.4, [0.3, -0.5, -0.3]).unwrap(),
    ]
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> Point {
    let mut p = [0.0; 3];
    for c in p.iter_mut().take(d) {
        *c = rng.random::<f64>() - 0.5;
    }
    p
}

/// Closed polygon through `n` points of the blob boundary.
fn blob_polygon(n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            let r = 0.25 + 0.05 * (3.0 * t).cos();
            p2(r * t.cos(), r * t.sin())
        })
        .collect()
}

/// Membership in a polygon that is star-shaped about the origin: the polar ray
/// of `q` meets exactly one edge, found by angle.
fn inside_star_polygon(poly: &[Point], q: &Point) -> bool {
    let n = poly.len();
    let t = q[1].atan2(q[0]).rem_euclid(2.0 * PI);
    let i = ((t / (2.0 * PI)) * n as f64).floor() as usize % n;
    // The ray from the origin through q crosses edge i (or a neighbour).
    for k in [i + n - 1, i, i + 1] {
        let a = poly[k % n];
        let b = poly[(k + 1) % n];
        // Solve origin + s q = a + u (b - a).
        let m = [[q[0], a[0] - b[0]], [q[1], a[1] - b[1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 {
            continue;
        }
        let s = (a[0] * m[1][1] - m[0][1] * a[1]) / det;
        let u = (m[0][0] * a[1] - m[1][0] * a[0]) / det;
        if (0.0..=1.0).contains(&u) && s > 0.0 {
            return s >= 1.0;
        }
    }
    unreachable!("ray missed the polygon")
}

#[test]
fn blob_membership_matches_fine_polygon() {
    let s = blob();
    let poly = blob_polygon(1_000_000);
    let tol = s.boundary_patch(&PatchSpec::Whole, 1e-4).unwrap().chord_tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..100_000 {
        let q = p2(rng.random::<f64>() * 0.7 - 0.35, rng.random::<f64>() * 0.7 - 0.35);
        let r = q[0].hypot(q[1]);
        let rho = 0.25 + 0.05 * (3.0 * q[1].atan2(q[0])).cos();
        if (r - rho).abs() <= tol.max(1e-9) {
            continue;
        }
        assert_eq!(s.contains(&q), inside_star_polygon(&poly, &q), "{q:?}");
        checked += 1;
    }
    assert!(checked > 99_000);
}

#[test]
fn signed_distance_agrees_with_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut shapes = catalog_2d();
    shapes.push(Shape::ball(3, [0.0, 0.1, 0.0], 0.3).unwrap());
    shapes.push(Shape::cuboid(3, [-0.2, -0.1, -0.3], [0.1, 0.2, 0.3]).unwrap());
    for s in &shapes {
        for _ in 0..100_000 {
            let q = random_point(&mut rng, s.dim());
            let sd = s.signed_distance(&q);
            if sd < 0.0 {
                assert!(s.contains(&q), "{} {q:?} sd {sd}", s.name());
            } else if sd > 0.0 {
                assert!(!s.contains(&q), "{} {q:?} sd {sd}", s.name());
            }
        }
    }
}

#[test]
fn signed_distance_is_conservative() {
    // Moving by less than |sd| never changes membership.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for s in catalog_2d() {
        for _ in 0..20_000 {
            let q = random_point(&mut rng, 2);
            let sd = s.signed_distance(&q);
            let inside = s.contains(&q);
            for _ in 0..8 {
                let t = rng.random::<f64>() * 2.0 * PI;
                let r = 0.999 * sd.abs() * rng.random::<f64>().sqrt();
                let z = p2(q[0] + r * t.cos(), q[1] + r * t.sin());
                if sd != 0.0 {
                    assert_eq!(s.contains(&z), inside, "{} {q:?} -> {z:?}", s.name());
                }
            }
        }
    }
}

#[test]
fn circle_and_box_quadrature() {
    let b = Shape::ball(2, [0.0; 3], 0.25).unwrap();
    let p = b.boundary_patch(&PatchSpec::Whole, 1e-4).unwrap();
    assert!(p.chord_tolerance <= 1e-4);
    assert!((p.total_weight() - 2.0 * PI * 0.25).abs() / (2.0 * PI * 0.25) < 1e-12);

    let q = Shape::cuboid(2, p2(-0.2, -0.1), p2(0.2, 0.3)).unwrap();
    let side = PatchSpec::ParameterWindow { from: 1.0, to: 2.0 };
    let p = q.boundary_patch(&side, 1e-4).unwrap();
    assert_eq!(p.total_weight(), 0.4);
    let whole = q.boundary_patch(&PatchSpec::Whole, 1e-4).unwrap();
    assert!((whole.total_weight() - 1.6).abs() < 1e-15);
    // An angular window of a quarter turn about the center of a square box
    // starting at a corner covers exactly one side.
    let sq = Shape::cuboid(2, p2(-0.2, -0.2), p2(0.2, 0.2)).unwrap();
    let w = PatchSpec::AngularWindow {
        from: -PI / 4.0,
        to: PI / 4.0,
    };
    let p = sq.boundary_patch(&w, 1e-4).unwrap();
    assert!((p.total_weight() - 0.4).abs() < 1e-15);
}

#[test]
fn surface_contents_match_quadrature() {
    for s in catalog_2d() {
        if let Some(exact) = s.surface_content() {
            let p = s.boundary_patch(&PatchSpec::Whole, 1e-6).unwrap();
            let rel = (p.total_weight() - exact).abs() / exact;
            assert!(rel < 1e-6, "{}: {rel}", s.name());
        }
    }
}

#[test]
fn blob_window_matches_arclength_oracle() {
    let s = blob();
    let w = PatchSpec::AngularWindow { from: 0.0, to: PI };
    let p = s.boundary_patch(&w, 1e-4).unwrap();
    let n = 1_000_000;
    let mut len = 0.0;
    let pt = |t: f64| {
        let r = 0.25 + 0.05 * (3.0 * t).cos();
        (r * t.cos(), r * t.sin())
    };
    let mut prev = pt(0.0);
    for i in 1..=n {
        let cur = pt(PI * i as f64 / n as f64);
        len += (cur.0 - prev.0).hypot(cur.1 - prev.1);
        prev = cur;
    }
    assert!((p.total_weight() - len).abs() / len < 1e-4);
    assert!(p.points.iter().all(|q| q[1] >= -1e-12));
}

#[test]
fn refinement_is_monotone_within_tolerance() {
    for s in catalog_2d() {
        let mut prev: Option<f64> = None;
        for e in 3..8 {
            let tol = 10f64.powi(-e);
            let w = s.boundary_patch(&PatchSpec::Whole, tol).unwrap().total_weight();
            if let Some(p) = prev {
                assert!((w - p).abs() <= 10.0 * tol, "{} at {tol}", s.name());
            }
            prev = Some(w);
        }
    }
}

#[test]
fn dilation_scales_surface() {
    for d in [2, 3] {
        let base = Shape::ball(d, [0.0; 3], 0.1).unwrap();
        let a = base.boundary_patch(&PatchSpec::Whole, 1e-6).unwrap().total_weight();
        for t in [1.5, 2.0, 3.7] {
            let s = Shape::ball(d, [0.0; 3], 0.1 * t).unwrap();
            let b = s.boundary_patch(&PatchSpec::Whole, 1e-6).unwrap().total_weight();
            let want = a * f64::powi(t, d as i32 - 1);
            assert!((b - want).abs() / want < 1e-9);
        }
    }
}

#[test]
fn weighted_content_examples() {
    let b = Shape::ball(2, [0.0; 3], 0.25).unwrap();
    let one = IntensityField::unit();
    for gamma in [0.0, 1.0, 2.0] {
        let v = b.weighted_surface_content(&one, gamma, 1).unwrap();
        assert!((v - 2.0 * PI * 0.25).abs() < 1e-15);
    }
    let kappa = IntensityField::affine(1.0, [1.0, 0.0, 0.0], 2).unwrap();
    for s in catalog_2d() {
        let v = s.weighted_surface_content(&kappa, 2.0, 1).unwrap();
        let plain = s.boundary_patch(&PatchSpec::Whole, 1e-7).unwrap().total_weight();
        assert!((v - plain).abs() / plain < 1e-6, "{}", s.name());
    }
    // Riemann sum with 10^6 nodes for kappa = 1 + x1, gamma = 0.
    let v = b.weighted_surface_content(&kappa, 0.0, 1).unwrap();
    let n = 1_000_000;
    let mut acc = 0.0;
    for i in 0..n {
        let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        acc += 1.0 + 0.25 * t.cos();
    }
    acc *= 2.0 * PI * 0.25 / n as f64;
    assert!((v - acc).abs() / acc < 1e-9);
    let v2 = b.weighted_surface_content(&kappa, 0.0, 2).unwrap();
    let mut acc2 = 0.0;
    for i in 0..n {
        let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
        acc2 += (1.0 + 0.25 * t.cos()).powi(2);
    }
    acc2 *= 2.0 * PI * 0.25 / n as f64;
    assert!((v2 - acc2).abs() / acc2 < 1e-9);
    assert!(matches!(b.weighted_surface_content(&kappa, 0.0, 3), Err(PvError::Usage(_))));
}

#[test]
fn spec_round_trip_and_errors() {
    let spec: ShapeSpec = serde_json::from_str(
        r#"{"kind":"smooth_blob","center":[0,0],"r0":0.25,"amplitude":0.05,"frequency":3}"#,
    )
    .unwrap();
    let s = Shape::from_spec(&spec, 2).unwrap();
    assert_eq!(s.name(), "smooth_blob");
    let back: ShapeSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(spec, back);
    let bad = serde_json::from_str::<ShapeSpec>(r#"{"kind":"ball","center":[0,0],"radius":0.2,"x":1}"#);
    assert!(bad.is_err());
    let wrong_dim = ShapeSpec::Ball {
        center: vec![0.0, 0.0, 0.0],
        radius: 0.2,
    };
    assert!(Shape::from_spec(&wrong_dim, 2).unwrap_err().is_config());
}

#[test]
fn polytopal_union_membership() {
    let sample = poisson(300.0, 2, "shapes/poly");
    let diagram = Arc::new(build_voronoi(&sample).unwrap());
    let n = diagram.n_cells();
    let all: Vec<usize> = (0..n).collect();
    let full = polytopal_union_from_cells(diagram.clone(), &all).unwrap();
    let empty = polytopal_union_from_cells(diagram.clone(), &[]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let pick: Vec<usize> = (0..n).filter(|_| rng.random::<bool>()).collect();
    let mut chosen = vec![false; n];
    for &i in &pick {
        chosen[i] = true;
    }
    let half = polytopal_union_from_cells(diagram.clone(), &pick).unwrap();
    for _ in 0..10_000 {
        let q = random_point(&mut rng, 2);
        assert!(full.contains(&q));
        assert!(!empty.contains(&q));
        // Oracle: the query lies in some selected cell's half-space polytope.
        let owner = (0..n).find(|&i| diagram.cell_contains(i, &q)).unwrap();
        let in_selected = (0..n).any(|i| chosen[i] && diagram.cell_contains(i, &q));
        assert_eq!(half.contains(&q), in_selected, "{q:?} owner {owner}");
    }
    assert!(!full.contains(&p2(0.6, 0.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn union_area_matches_monte_carlo(
        cx in -0.15f64..0.15, cy in -0.15f64..0.15, r1 in 0.05f64..0.2, r2 in 0.05f64..0.2
    ) {
        let s = Shape::ball_union(2, vec![p2(0.0, 0.0), p2(cx, cy)], vec![r1, r2]);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let m = 400;
        let mut hits = 0usize;
        for i in 0..m {
            for j in 0..m {
                let q = p2(-0.5 + (i as f64 + 0.5) / m as f64, -0.5 + (j as f64 + 0.5) / m as f64);
                if s.contains(&q) {
                    hits += 1;
                }
            }
        }
        let raster = hits as f64 / (m * m) as f64;
        let exact = s.volume().unwrap();
        // A pixel band along the boundary bounds the raster error.
        let band = s.surface_content().unwrap() / m as f64;
        prop_assert!((raster - exact).abs() <= band, "{raster} vs {exact}");
    }
}
