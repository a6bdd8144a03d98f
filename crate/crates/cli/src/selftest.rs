//! Quick oracle checks of the installed build: exact geometry against brute
//! force, the symmetric difference against a raster, and a mirror symmetry.

use pvlab::geometry::build_voronoi;
use pvlab::geometry::clip::{clip_with, polygon_area2};
use pvlab::pointprocess::{sample_poisson_cube, IntensityField, PointSample, SeedPath};
use pvlab::shapes::Shape;
use pvlab::statistics::{classify, maximal_points, volume_statistics, VolumeOptions};
use pvlab::{Domain, Point, PvError};

struct Check {
    name: &'static str,
    value: f64,
    oracle: f64,
    tol: f64,
}

impl Check {
    fn ok(&self) -> bool {
        (self.value - self.oracle).abs() <= self.tol
    }
}

fn brute_area(pts: &[Point], i: usize) -> f64 {
    let mut poly = vec![[-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0]];
    let a = pts[i];
    for (j, b) in pts.iter().enumerate() {
        if j != i {
            poly = clip_with(&poly, |z| {
                (a[0] - b[0]) * (2.0 * z[0] - a[0] - b[0]) + (a[1] - b[1]) * (2.0 * z[1] - a[1] - b[1])
            });
        }
    }
    polygon_area2(&poly)
}

fn empty_circle_vertices(pts: &[Point]) -> usize {
    let n = pts.len();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (pts[i], pts[j], pts[k]);
                let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
                if d.abs() < 1e-14 {
                    continue;
                }
                let (sa, sb, sc) = (a[0] * a[0] + a[1] * a[1], b[0] * b[0] + b[1] * b[1], c[0] * c[0] + c[1] * c[1]);
                let ux = (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d;
                let uy = (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d;
                if ux.abs() >= 0.5 || uy.abs() >= 0.5 {
                    continue;
                }
                let r2 = (a[0] - ux).powi(2) + (a[1] - uy).powi(2);
                if (0..n).all(|m| m == i || m == j || m == k || (pts[m][0] - ux).powi(2) + (pts[m][1] - uy).powi(2) > r2) {
                    count += 1;
                }
            }
        }
    }
    count
}

fn brute_maxima(pts: &[Point]) -> usize {
    (0..pts.len())
        .filter(|&i| {
            !(0..pts.len())
                .any(|j| j != i && pts[j][0] >= pts[i][0] && pts[j][1] >= pts[i][1] && pts[j] != pts[i])
        })
        .count()
}

fn nearest(pts: &[Point], x: f64, y: f64) -> usize {
    let d = |p: &Point| (p[0] - x).powi(2) + (p[1] - y).powi(2);
    (0..pts.len()).min_by(|&a, &b| d(&pts[a]).total_cmp(&d(&pts[b]))).unwrap()
}

/// Symmetric difference by pixel centres, with pixels that straddle the
/// boundary refined `sub x sub`.
fn raster_symdiff(pts: &[Point], inside: &[bool], shape: &Shape, m: usize, sub: usize) -> f64 {
    let h = 1.0 / m as f64;
    let ind = |x: f64, y: f64| shape.contains(&[x, y, 0.0]) != inside[nearest(pts, x, y)];
    let mut area = 0.0;
    for ix in 0..m {
        for iy in 0..m {
            let (x0, y0) = (-0.5 + ix as f64 * h, -0.5 + iy as f64 * h);
            let probes = [(0.0, 0.0), (h, 0.0), (0.0, h), (h, h), (0.5 * h, 0.5 * h)].map(|(a, b)| ind(x0 + a, y0 + b));
            if probes.iter().all(|&v| v == probes[0]) {
                area += if probes[0] { h * h } else { 0.0 };
                continue;
            }
            let s = h / sub as f64;
            let hits = (0..sub * sub)
                .filter(|k| ind(x0 + (k / sub) as f64 * s + 0.5 * s, y0 + (k % sub) as f64 * s + 0.5 * s))
                .count();
            area += h * h * hits as f64 / (sub * sub) as f64;
        }
    }
    area
}

fn checks() -> Result<Vec<Check>, PvError> {
    let root = SeedPath::root_from_hex(&hex::encode("pvlab-selftest"))?;
    let s = sample_poisson_cube(120.0, &IntensityField::unit(), 2, &root.derive("points"))?;
    let pts = s.points.clone();
    let dg = build_voronoi(&s)?;
    let shape = Shape::ball(2, [0.03, -0.02, 0.0], 0.27)?;
    let cls = classify(&dg, &shape);
    let mut out = Vec::new();

    let worst = (0..pts.len())
        .map(|i| (dg.cells[i].volume - brute_area(&pts, i)).abs())
        .fold(0.0, f64::max);
    out.push(Check { name: "max cell area error vs half-plane clipping", value: worst, oracle: 0.0, tol: 1e-9 });
    let total: f64 = dg.cells.iter().map(|c| c.volume).sum();
    out.push(Check { name: "cell areas sum to |Q|", value: total, oracle: 1.0, tol: 1e-9 });
    let vertices = dg.faces_of_dim(0)?.iter().filter(|v| !v.on_clip_boundary).count();
    out.push(Check {
        name: "Voronoi vertices vs empty circumcircles",
        value: vertices as f64,
        oracle: empty_circle_vertices(&pts) as f64,
        tol: 0.0,
    });

    let inside_pts: Vec<Point> = pts.iter().filter(|p| shape.contains(p)).copied().collect();
    out.push(Check {
        name: "maximal points vs pairwise dominance",
        value: maximal_points(&inside_pts, 2) as f64,
        oracle: brute_maxima(&inside_pts) as f64,
        tol: 0.0,
    });

    let (m, sub) = (512, 16);
    let v = volume_statistics(&dg, &cls, &shape, &VolumeOptions::default(), &root.derive("volume"))?;
    let raster = raster_symdiff(&pts, &cls.inside, &shape, m, sub);
    out.push(Check {
        name: "symmetric difference vs raster (4 px)",
        value: v.symdiff_volume,
        oracle: raster,
        tol: 4.0 / (m * m) as f64,
    });

    // Mirroring the sample and the shape in x = 0 must not change anything.
    let mirrored: Vec<Point> = pts.iter().map(|p| [-p[0], p[1], 0.0]).collect();
    let ms = PointSample::from_points(mirrored, Domain::cube(2)?, root.derive("mirror"))?;
    let mdg = build_voronoi(&ms)?;
    let mshape = Shape::ball(2, [-0.03, -0.02, 0.0], 0.27)?;
    let mcls = classify(&mdg, &mshape);
    let mv = volume_statistics(&mdg, &mcls, &mshape, &VolumeOptions::default(), &root.derive("volume"))?;
    out.push(Check {
        name: "symmetric difference under reflection",
        value: mv.symdiff_volume,
        oracle: v.symdiff_volume,
        tol: 1e-12,
    });
    let surface = |dg: &pvlab::geometry::VoronoiDiagram, f: &[pvlab::geometry::FaceId]| f.iter().map(|&i| dg.face(i).measure).sum::<f64>();
    out.push(Check {
        name: "boundary length under reflection",
        value: surface(&mdg, &mcls.boundary_facets),
        oracle: surface(&dg, &cls.boundary_facets),
        tol: 1e-12,
    });
    Ok(out)
}

/// Prints one line per check; returns whether all passed.
pub fn run() -> Result<bool, PvError> {
    let mut all = true;
    for c in checks()? {
        all &= c.ok();
        println!(
            "{} {}: {:.12e} vs {:.12e} (tolerance {:.1e})",
            if c.ok() { "ok  " } else { "FAIL" },
            c.name,
            c.value,
            c.oracle,
            c.tol
        );
    }
    Ok(all)
}
