mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use common::{brute_boundary_edges, circle_meets, nearest, p2, poisson, raster_symdiff, uniform_sample};
use pvlab::geometry::{build_voronoi, VoronoiDiagram};
use pvlab::pointprocess::{sample_poisson_cube, IntensityField, PointSample, SeedPath};
use pvlab::shapes::{polytopal_union_from_cells, PatchSpec, Shape};
use pvlab::statistics::exact::polygon_disk_area;
use pvlab::statistics::{
    cell_polygon, classify, compute_statistics, iterate_pv, maximal_points, skeleton_statistics,
    surface_statistic, typical_spacing, volume_statistics, zone_statistics, StatOptions,
    VolumeOptions, ZoneOptions,
};
use pvlab::{Domain, Point};

fn diagram_of(points: Vec<Point>, d: usize) -> VoronoiDiagram {
    let s = PointSample::from_points(points, Domain::cube(d).unwrap(), SeedPath::root_from_u64(0)).unwrap();
    build_voronoi(&s).unwrap()
}

fn seed(label: &str) -> SeedPath {
    SeedPath::root_from_hex("5eed").unwrap().derive(label)
}

fn ball() -> Shape {
    Shape::ball(2, [0.0; 3], 0.25).unwrap()
}

#[test]
fn all_inside_and_none_inside() {
    let mut s = uniform_sample(200, 2, 4);
    for p in &mut s.points {
        p[0] *= 0.8;
        p[1] *= 0.8;
    }
    let dg = build_voronoi(&s).unwrap();
    let boxed = Shape::cuboid(2, p2(-0.45, -0.45), p2(0.45, 0.45)).unwrap();
    let v = compute_statistics(&dg, &boxed, &boxed, &StatOptions::default(), &seed("a")).unwrap();
    assert_eq!(v.n_inside, 200);
    assert_eq!(v.surface, 0.0);
    assert!(v.face_count.iter().all(|&c| c == 0));
    assert!((v.volume - 1.0).abs() < 1e-12);
    assert!((v.signed_volume_error - (1.0 - 0.81)).abs() < 1e-12);
    assert!((v.symdiff_volume - 0.19).abs() < 1e-12);
    assert!(v.boundary_touch);

    let empty = polytopal_union_from_cells(dg.clone().into(), &[]).unwrap();
    let v = compute_statistics(&dg, &empty, &ball(), &StatOptions::default(), &seed("b")).unwrap();
    assert_eq!(v.n_inside, 0);
    assert_eq!(v.volume, 0.0);
    assert!((v.symdiff_volume - PI / 16.0).abs() < 1e-12);
    assert!((v.signed_volume_error + PI / 16.0).abs() < 1e-12);
}

#[test]
fn boundary_facets_match_exhaustive_scan() {
    let s = uniform_sample(500, 2, 11);
    let dg = build_voronoi(&s).unwrap();
    let cls = classify(&dg, &ball());
    let brute = brute_boundary_edges(&s.points, &cls.inside);
    let mine: BTreeMap<(usize, usize), f64> = cls
        .boundary_facets
        .iter()
        .map(|&f| {
            let face = dg.face(f);
            let (a, b) = (dg.cell_of(face.cells[0]), dg.cell_of(face.cells[1]));
            ((a.min(b), a.max(b)), face.measure)
        })
        .collect();
    assert_eq!(mine.keys().collect::<Vec<_>>(), brute.keys().collect::<Vec<_>>());
    for (k, len) in &mine {
        assert!((len - brute[k].0).abs() < 1e-9 * len.max(1.0), "{k:?}");
    }

    // Boundary walk: distinct endpoints of the boundary polyline.
    let mut verts: Vec<Point> = brute.values().flat_map(|(_, e)| e.iter().copied()).collect();
    verts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut distinct: Vec<Point> = Vec::new();
    for v in verts {
        if !distinct
            .iter()
            .rev()
            .take(8)
            .any(|w| (w[0] - v[0]).abs() < 1e-9 && (w[1] - v[1]).abs() < 1e-9)
        {
            distinct.push(v);
        }
    }
    let sk = skeleton_statistics(&dg, &cls, 0).unwrap();
    assert_eq!(sk.face_count as usize, distinct.len());
    assert_eq!(sk.distinct_sum, sk.face_count as f64);
    // A closed polyline has as many vertices as edges.
    assert_eq!(sk.face_count as usize, cls.boundary_facets.len());
}

#[test]
fn surface_matches_per_cell_accounting() {
    for (d, n) in [(2, 500), (3, 300)] {
        let s = uniform_sample(n, d, 5);
        let dg = build_voronoi(&s).unwrap();
        let shape = Shape::ball(d, p2(0.02, 0.0), 0.3).unwrap();
        let cls = classify(&dg, &shape);
        let mut acc = 0.0;
        for i in (0..dg.n_cells()).filter(|&i| cls.inside[i]) {
            for &f in &dg.cells[i].faces[d - 1] {
                let face = dg.face(f);
                if face.cells.len() == 2 {
                    let other = face.cells.iter().map(|&g| dg.cell_of(g)).find(|&g| g != i).unwrap();
                    if !cls.inside[other] {
                        acc += face.measure;
                    }
                }
            }
        }
        let sv = surface_statistic(&dg, &cls);
        assert!((sv - acc).abs() < 1e-12 * acc, "d = {d}");
        let top = skeleton_statistics(&dg, &cls, d - 1).unwrap();
        assert!((top.weighted_sum - sv).abs() < 1e-12 * sv);
        assert!((top.distinct_sum - sv).abs() < 1e-12 * sv);
        let v0 = skeleton_statistics(&dg, &cls, 0).unwrap();
        assert_eq!(v0.distinct_sum, v0.face_count as f64);
        assert!(skeleton_statistics(&dg, &cls, d).is_err());
    }
}

#[test]
fn two_cell_split() {
    let dg = diagram_of(vec![p2(-0.25, 0.0), p2(0.25, 0.0)], 2);
    let left = Shape::ball(2, p2(-0.25, 0.0), 0.1).unwrap();
    let cls = classify(&dg, &left);
    assert_eq!(cls.inside, vec![true, false]);
    assert!((surface_statistic(&dg, &cls) - 1.0).abs() < 1e-15);
    let sk = skeleton_statistics(&dg, &cls, 0).unwrap();
    assert_eq!(sk.face_count, 2);
    assert_eq!(sk.distinct_sum, 2.0);
    assert_eq!(sk.weighted_sum, 1.0);

    let patch = left.boundary_patch_spaced(&PatchSpec::Whole, 1e-4, 0.05).unwrap();
    let z = zone_statistics(&dg, &patch, 0.1).unwrap();
    assert_eq!(z.cells, vec![0]);
    assert_eq!(z.counts, vec![4, 4]);
    assert_eq!(z.complexity, 8);
}

#[test]
fn isolated_cell_vertices_weighted_by_half() {
    let s = uniform_sample(100, 2, 8);
    let dg = build_voronoi(&s).unwrap();
    // An interior cell well away from the square's edges.
    let i = (0..dg.n_cells())
        .find(|&i| {
            dg.cells[i].faces[1].iter().all(|&f| !dg.face(f).on_clip_boundary)
                && dg.cell_vertices(i).all(|v| v[0].abs() < 0.45 && v[1].abs() < 0.45)
        })
        .unwrap();
    let g = dg.generators[i];
    let gap = s
        .points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| ((p[0] - g[0]).powi(2) + (p[1] - g[1]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    let shape = Shape::ball(2, g, 0.5 * gap.min(0.05)).unwrap();
    let cls = classify(&dg, &shape);
    assert_eq!(cls.inside_indices(), vec![i]);
    let k = dg.cell_vertices(i).count();
    let sk = skeleton_statistics(&dg, &cls, 0).unwrap();
    assert_eq!(sk.face_count as usize, k);
    assert_eq!(sk.distinct_sum, k as f64);
    assert_eq!(sk.weighted_sum, k as f64 / 2.0);
}

#[test]
fn single_cell_zone_is_the_square() {
    let dg = diagram_of(vec![p2(0.1, -0.05)], 2);
    let patch = ball().boundary_patch_spaced(&PatchSpec::Whole, 1e-4, 0.1).unwrap();
    let z = zone_statistics(&dg, &patch, 0.1).unwrap();
    assert_eq!(z.cells, vec![0]);
    assert_eq!(z.complexity, 8);
    // A patch coarser than eps times the cell scale is a configuration error.
    let eps = 0.5 * patch.spacing;
    assert!(zone_statistics(&dg, &patch, eps).unwrap_err().is_config());
}

#[test]
fn zone_matches_exact_arc_oracle() {
    let s = uniform_sample(500, 2, 21);
    let dg = build_voronoi(&s).unwrap();
    let shape = ball();
    let spacing = 0.1 * typical_spacing(&dg);
    let patch = shape.boundary_patch_spaced(&PatchSpec::Whole, 0.1 * spacing, spacing).unwrap();
    let z = zone_statistics(&dg, &patch, 0.1).unwrap();
    let exact: Vec<usize> = (0..dg.n_cells())
        .filter(|&i| circle_meets(&cell_polygon(&dg, i), &[0.0; 3], 0.25))
        .collect();
    assert_eq!(z.cells, exact);

    // Ten times denser sampling of the circle by linear scan finds nothing new.
    let m = (10.0 * 2.0 * PI * 0.25 / spacing).ceil() as usize;
    let sampled: BTreeSet<usize> = (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            nearest(&s.points, &p2(0.25 * t.cos(), 0.25 * t.sin()))
        })
        .collect();
    assert!(sampled.iter().all(|c| z.cells.binary_search(c).is_ok()));

    // Two cells sharing a boundary facet form a connected set holding points
    // of A and of its complement, so at least one of them meets the boundary.
    let cls = classify(&dg, &shape);
    for &f in &cls.boundary_facets {
        assert!(dg.face(f).cells.iter().any(|&g| z.cells.binary_search(&dg.cell_of(g)).is_ok()));
    }
    // Complexity counts faces of the zone cells, each once.
    let mut faces: Vec<u32> = z.cells.iter().flat_map(|&i| dg.cells[i].faces[0].iter().copied()).collect();
    faces.sort_unstable();
    faces.dedup();
    assert_eq!(z.counts[0] as usize, faces.len());
}

#[test]
fn zone_in_three_dimensions_contains_boundary_cells() {
    let s = uniform_sample(300, 3, 2);
    let dg = build_voronoi(&s).unwrap();
    let shape = Shape::ball(3, [0.0; 3], 0.25).unwrap();
    let opts = StatOptions {
        zone: Some(ZoneOptions::default()),
        ..Default::default()
    };
    let v = compute_statistics(&dg, &shape, &shape, &opts, &seed("z3")).unwrap();
    let cls = classify(&dg, &shape);
    let spacing = 0.1 * typical_spacing(&dg);
    let patch = shape.boundary_patch_spaced(&PatchSpec::Whole, 0.1 * spacing, spacing).unwrap();
    let z = zone_statistics(&dg, &patch, 0.1).unwrap();
    assert_eq!(v.zone_complexity, Some(z.complexity));
    for &f in &cls.boundary_facets {
        assert!(dg.face(f).cells.iter().any(|&g| z.cells.binary_search(&dg.cell_of(g)).is_ok()));
    }
    // Cells whose every vertex lies strictly on one side of the sphere by more
    // than the chord sagitta are not in the zone.
    for i in 0..dg.n_cells() {
        let r: Vec<f64> = dg
            .cell_vertices(i)
            .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            .collect();
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = r.iter().cloned().fold(0.0, f64::max);
        if hi < 0.25 - 1e-3 && !dg.cell_contains(i, &[0.0; 3]) {
            assert!(z.cells.binary_search(&i).is_err(), "cell {i} inside the ball");
        }
        if lo > 0.25 + 1e-3 {
            // The farthest point from the origin is a vertex but the nearest
            // may be on a facet, so only check cells far from the sphere.
            if lo > 0.25 + 0.2 {
                assert!(z.cells.binary_search(&i).is_err(), "cell {i} outside the ball");
            }
        }
    }
}

#[test]
fn symdiff_matches_raster_oracle() {
    let s = uniform_sample(100, 2, 13);
    let dg = build_voronoi(&s).unwrap();
    let shape = ball();
    let cls = classify(&dg, &shape);
    let v = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &seed("r")).unwrap();
    assert_eq!(v.symdiff_se, 0.0);
    let m = 4096;
    let oracle = raster_symdiff(&s.points, &cls.inside, &shape, m);
    let pixel = 1.0 / (m * m) as f64;
    assert!(
        (v.symdiff_volume - oracle).abs() <= 3.0 * pixel,
        "{} vs {oracle} ({} pixels)",
        v.symdiff_volume,
        (v.symdiff_volume - oracle).abs() / pixel
    );
}

#[test]
fn sampled_symdiff_agrees_with_raster() {
    // A blob has no closed-form cell intersection, so sampling is used.
    let s = uniform_sample(150, 2, 17);
    let dg = build_voronoi(&s).unwrap();
    let shape = Shape::smooth_blob(2, p2(0.01, 0.02), 0.25, 0.05, 3, 0.4).unwrap();
    let cls = classify(&dg, &shape);
    let v = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &seed("b")).unwrap();
    assert!(v.sampled_cells > 0 && v.symdiff_se > 0.0);
    let oracle = raster_symdiff(&s.points, &cls.inside, &shape, 1024);
    let slack = 4.0 * v.symdiff_se + 20.0 / (1024.0 * 1024.0);
    assert!((v.symdiff_volume - oracle).abs() <= slack, "{} vs {oracle}", v.symdiff_volume);
    assert!(!v.precision_warning);
    // Fixed seed, fixed answer.
    let again = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &seed("b")).unwrap();
    assert_eq!(v, again);
}

#[test]
fn signed_error_is_sum_of_cell_scores() {
    let s = poisson(800.0, 2, "xi1");
    let dg = build_voronoi(&s).unwrap();
    let shape = Shape::ball(2, p2(0.03, -0.01), 0.27).unwrap();
    let cls = classify(&dg, &shape);
    let v = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &seed("x")).unwrap();
    let (mut plus, mut minus) = (0.0, 0.0);
    for i in 0..dg.n_cells() {
        let inter = polygon_disk_area(&cell_polygon(&dg, i), &p2(0.03, -0.01), 0.27);
        if cls.inside[i] {
            plus += dg.cells[i].volume - inter;
        } else {
            minus += inter;
        }
    }
    assert!((v.signed_volume_error - (plus - minus)).abs() < 1e-12);
    assert!((v.symdiff_volume - (plus + minus)).abs() < 1e-12);
    assert!(v.symdiff_volume >= v.signed_volume_error.abs());
}

#[test]
fn box_symdiff_in_three_dimensions() {
    let s = uniform_sample(400, 3, 6);
    let dg = build_voronoi(&s).unwrap();
    let lo = [-0.2, -0.15, -0.25];
    let hi = [0.22, 0.2, 0.1];
    let shape = Shape::cuboid(3, lo, hi).unwrap();
    let cls = classify(&dg, &shape);
    let v = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &seed("c")).unwrap();
    assert_eq!(v.sampled_cells, 0);
    // Monte Carlo over Q with the nearest generator found by linear scan.
    let mut rng = SeedPath::root_from_u64(9).rng();
    use rand::Rng;
    let n = 200_000;
    let mut hits = 0;
    for _ in 0..n {
        let p = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        if shape.contains(&p) != cls.inside[nearest(&s.points, &p)] {
            hits += 1;
        }
    }
    let est = hits as f64 / n as f64;
    let se = (est * (1.0 - est) / n as f64).sqrt();
    assert!((v.symdiff_volume - est).abs() < 4.0 * se, "{} vs {est}", v.symdiff_volume);
}

#[test]
fn enlarging_the_ball_only_adds_cells() {
    let s = uniform_sample(400, 2, 30);
    let dg = build_voronoi(&s).unwrap();
    let mut prev = vec![false; dg.n_cells()];
    for k in 1..=8 {
        let cls = classify(&dg, &Shape::ball(2, p2(0.01, 0.0), 0.05 * k as f64).unwrap());
        assert!(prev.iter().zip(&cls.inside).all(|(&a, &b)| !a || b));
        prev = cls.inside;
    }
}

#[test]
fn iteration_one_is_the_plain_pipeline() {
    let shape = ball();
    let kappa = IntensityField::unit();
    let s = seed("it1");
    let opts = StatOptions::default();
    let it = iterate_pv(&shape, &kappa, 300.0, 1, &s, &opts).unwrap();
    let sample = sample_poisson_cube(300.0, &kappa, 2, &s).unwrap();
    let dg = build_voronoi(&sample).unwrap();
    let plain = compute_statistics(&dg, &shape, &shape, &opts, &s).unwrap();
    assert_eq!(it, vec![plain]);
    assert!(iterate_pv(&shape, &kappa, 300.0, 0, &s, &opts).is_err());
}

#[test]
fn second_iteration_matches_manual_composition() {
    let shape = ball();
    let kappa = IntensityField::unit();
    let s = seed("it2");
    let it = iterate_pv(&shape, &kappa, 150.0, 2, &s, &StatOptions::default()).unwrap();
    let first = sample_poisson_cube(150.0, &kappa, 2, &s).unwrap();
    let second = sample_poisson_cube(300.0, &kappa, 2, &s.derive("iteration/2")).unwrap();
    let dg2 = build_voronoi(&second).unwrap();
    let mut v2 = 0.0;
    let mut n2 = 0;
    for (i, p) in second.points.iter().enumerate() {
        if shape.contains(&first.points[nearest(&first.points, p)]) {
            v2 += dg2.cells[i].volume;
            n2 += 1;
        }
    }
    assert_eq!(it[1].n_inside, n2);
    assert!((it[1].volume - v2).abs() < 1e-12);
    assert!((it[1].signed_volume_error - (v2 - PI / 16.0)).abs() < 1e-12);
}

#[test]
fn full_square_is_absorbing() {
    let big = Shape::cuboid(2, p2(-0.499, -0.499), p2(0.499, 0.499)).unwrap();
    let kappa = IntensityField::unit();
    let s = (0..)
        .map(|k| seed(&format!("abs{k}")))
        .find(|s| {
            let p = sample_poisson_cube(10.0, &kappa, 2, s).unwrap();
            !p.is_empty() && p.points.iter().all(|x| big.contains(x))
        })
        .unwrap();
    let it = iterate_pv(&big, &kappa, 10.0, 3, &s, &StatOptions::default()).unwrap();
    for v in &it {
        assert!((v.volume - 1.0).abs() < 1e-12);
        assert_eq!(v.n_inside, v.n_points);
    }
}

#[test]
fn maxima_counted_inside_reference() {
    let s = uniform_sample(1000, 2, 40);
    let dg = build_voronoi(&s).unwrap();
    let shape = Shape::subgraph(2, -0.4, 0.4, -0.4, [0.3, -0.5, -0.3]).unwrap();
    let opts = StatOptions {
        maxima: true,
        ..Default::default()
    };
    let v = compute_statistics(&dg, &shape, &shape, &opts, &seed("m")).unwrap();
    let pts: Vec<Point> = s.points.iter().filter(|p| shape.contains(p)).copied().collect();
    let brute = (0..pts.len())
        .filter(|&i| !(0..pts.len()).any(|j| j != i && pts[j][0] >= pts[i][0] && pts[j][1] >= pts[i][1]))
        .count();
    assert_eq!(v.maximal_points, Some(brute as u64));
    assert_eq!(maximal_points(&pts, 2), brute);
}

#[test]
fn statistic_vector_columns_and_values_align() {
    let s = uniform_sample(300, 2, 3);
    let dg = build_voronoi(&s).unwrap();
    let opts = StatOptions {
        zone: Some(ZoneOptions::default()),
        maxima: true,
        ..Default::default()
    };
    let v = compute_statistics(&dg, &ball(), &ball(), &opts, &seed("cols")).unwrap();
    let cols = pvlab::statistics::StatisticVector::columns(2);
    let vals = v.values();
    assert_eq!(cols.len(), vals.len());
    for (c, x) in cols.iter().zip(&vals) {
        if let Some(g) = v.get(c) {
            assert_eq!(x.parse::<f64>().unwrap(), g, "{c}");
        }
    }
    assert_eq!(v.get("skeleton_1"), Some(v.surface));
    assert_eq!(v.get("face_count_0"), Some(v.skeleton_measure_distinct[0]));
    let back: pvlab::statistics::StatisticVector =
        serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(back, v);
}

#[test]
fn signed_volume_error_is_unbiased() {
    let shape = ball();
    let kappa = IntensityField::unit();
    for lambda in [500.0, 2000.0] {
        let n = 400;
        let errs: Vec<f64> = (0..n)
            .map(|r| {
                let s = seed(&format!("unbiased/{lambda}/{r}"));
                let sample = sample_poisson_cube(lambda, &kappa, 2, &s).unwrap();
                let dg = build_voronoi(&sample).unwrap();
                let cls = classify(&dg, &shape);
                let vol: f64 = cls.inside_indices().iter().map(|&i| dg.cells[i].volume).sum();
                vol - PI / 16.0
            })
            .collect();
        let mean = errs.iter().sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(mean.abs() < 4.0 * se, "lambda {lambda}: mean {mean}, se {se}");
    }
}
