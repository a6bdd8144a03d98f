//! Replicated runs and their CSV form.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{PvError, Result};
use crate::geometry::build_voronoi;
use crate::pointprocess::{sample_poisson_cube, KappaSpec, PointSample};
use crate::shapes::ShapeSpec;
use crate::statistics::{compute_statistics, iterate_pv, StatisticVector};

/// Fraction of replicates with `boundary_touch` above which a run is tainted.
pub const TAINT_THRESHOLD: f64 = 0.01;

const META_PREFIX: &str = "# pvlab-table ";

/// Provenance carried in the first line of every replicate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub name: String,
    pub config_hash: String,
    pub seed_root: String,
    pub dim: usize,
    pub shape: ShapeSpec,
    pub kappa: KappaSpec,
    pub restrict_to_shape: bool,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRow {
    pub lambda: f64,
    pub replicate: usize,
    /// 1 for plain runs.
    pub iteration: usize,
    pub stats: StatisticVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateTable {
    pub meta: TableMeta,
    /// Sorted by (λ, replicate, iteration).
    pub rows: Vec<ReplicateRow>,
}

impl ReplicateTable {
    pub fn lambdas(&self) -> Vec<f64> {
        let mut l: Vec<f64> = self.rows.iter().map(|r| r.lambda).collect();
        l.dedup();
        l
    }

    pub fn boundary_touch_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.stats.boundary_touch).count() as f64 / self.rows.len() as f64
    }

    pub fn tainted(&self) -> bool {
        self.boundary_touch_fraction() > TAINT_THRESHOLD
    }

    /// Values of `statistic` at `lambda` and `iteration`, in replicate order.
    pub fn values(&self, statistic: &str, lambda: f64, iteration: usize) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .filter(|r| r.lambda == lambda && r.iteration == iteration)
            .map(|r| {
                r.stats.get(statistic).ok_or_else(|| {
                    PvError::Usage(format!("statistic `{statistic}` is not present in the table"))
                })
            })
            .collect()
    }

    pub fn columns(&self) -> Vec<String> {
        let mut c = vec!["lambda".to_string(), "replicate".into(), "iteration".into()];
        c.extend(StatisticVector::columns(self.meta.dim));
        c
    }

    /// Writes the metadata line followed by the CSV header and rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{META_PREFIX}{}", serde_json::to_string(&self.meta)?)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(self.columns())?;
        for r in &self.rows {
            let mut rec = vec![r.lambda.to_string(), r.replicate.to_string(), r.iteration.to_string()];
            rec.extend(r.stats.values());
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let mut first = String::new();
        r.read_line(&mut first)?;
        let meta: TableMeta = serde_json::from_str(
            first
                .trim_end()
                .strip_prefix(META_PREFIX)
                .ok_or_else(|| PvError::Data("replicate CSV lacks the `# pvlab-table` metadata line".into()))?,
        )?;
        let mut csv = csv::Reader::from_reader(r);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let table = ReplicateTable { meta, rows: Vec::new() };
        if header != table.columns() {
            return Err(PvError::Data(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for (line, rec) in csv.records().enumerate() {
            let rec = rec?;
            let f: Vec<&str> = rec.iter().collect();
            let bad = |what: &str| PvError::Data(format!("row {}: bad {what}", line + 1));
            rows.push(ReplicateRow {
                lambda: f[0].parse().map_err(|_| bad("lambda"))?,
                replicate: f[1].parse().map_err(|_| bad("replicate"))?,
                iteration: f[2].parse().map_err(|_| bad("iteration"))?,
                stats: parse_stats(table.meta.dim, &f[3..]).map_err(|e| bad(&e))?,
            });
        }
        Ok(ReplicateTable { rows, ..table })
    }
}

fn parse_stats(d: usize, f: &[&str]) -> std::result::Result<StatisticVector, String> {
    fn num<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("{what} `{s}`"))
    }
    fn opt<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<Option<T>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, what).map(Some)
        }
    }
    if f.len() != 14 + 3 * d {
        return Err(format!("field count {}", f.len()));
    }
    let block = |k: usize| &f[9 + k * d..9 + (k + 1) * d];
    let z = 9 + 3 * d;
    Ok(StatisticVector {
        dim: num(f[0], "dim")?,
        n_points: num(f[1], "n_points")?,
        n_inside: num(f[2], "n_inside")?,
        volume: num(f[3], "volume")?,
        signed_volume_error: num(f[4], "signed_volume_error")?,
        symdiff_volume: num(f[5], "symdiff_volume")?,
        symdiff_se: num(f[6], "symdiff_se")?,
        symdiff_warning: num(f[7], "symdiff_warning")?,
        surface: num(f[8], "surface")?,
        skeleton_measure: block(0).iter().map(|s| num(s, "skeleton")).collect::<std::result::Result<_, _>>()?,
        skeleton_measure_distinct: block(1)
            .iter()
            .map(|s| num(s, "skeleton_distinct"))
            .collect::<std::result::Result<_, _>>()?,
        face_count: block(2).iter().map(|s| num(s, "face_count")).collect::<std::result::Result<_, _>>()?,
        zone_complexity: opt(f[z], "zone_complexity")?,
        zone_cells: opt(f[z + 1], "zone_cells")?,
        zone_chord_tolerance: opt(f[z + 2], "zone_chord_tolerance")?,
        maximal_points: opt(f[z + 3], "maximal_points")?,
        boundary_touch: num(f[z + 4], "boundary_touch")?,
    })
}

/// Runs every (λ, replicate) of `config` on `threads` workers (rayon's global
/// pool when `None`). The table does not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ReplicateTable> {
    config.validate()?;
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PvError::Usage(format!("cannot build thread pool: {e}")))?
            .install(|| run_inner(config)),
        None => run_inner(config),
    }
}

fn run_inner(config: &ExperimentConfig) -> Result<ReplicateTable> {
    let shape = config.shape()?;
    let kappa = config.kappa()?;
    kappa.require_theorem_mode()?;
    let root = config.seed_root()?;
    let jobs: Vec<(f64, usize)> = config
        .lambda_grid
        .iter()
        .flat_map(|&l| (0..config.replicates).map(move |r| (l, r)))
        .collect();
    let results: Vec<Result<Vec<ReplicateRow>>> = jobs
        .par_iter()
        .map(|&(lambda, replicate)| {
            let seed = root.derive(format!("lambda={lambda}/rep={replicate}"));
            let row = |iteration, stats| ReplicateRow {
                lambda,
                replicate,
                iteration,
                stats,
            };
            if let Some(n) = config.iterations {
                let v = iterate_pv(&shape, &kappa, lambda, n, &seed, &config.stats)?;
                return Ok(v.into_iter().enumerate().map(|(k, s)| row(k + 1, s)).collect());
            }
            let mut sample = sample_poisson_cube(lambda, &kappa, config.dim, &seed)?;
            if config.restrict_to_shape {
                let pts = sample.points.into_iter().filter(|p| shape.contains(p)).collect();
                sample = PointSample::from_points(pts, sample.domain, seed.clone())?;
            }
            let dg = build_voronoi(&sample)?;
            let stats = compute_statistics(&dg, &shape, &shape, &config.stats, &seed)?;
            Ok(vec![row(1, stats)])
        })
        .collect();
    let mut rows = Vec::with_capacity(jobs.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(ReplicateTable {
        meta: TableMeta {
            name: config.name.clone(),
            config_hash: config.config_hash(),
            seed_root: root.path.clone(),
            dim: config.dim,
            shape: config.shape.clone(),
            kappa: config.kappa.clone(),
            restrict_to_shape: config.restrict_to_shape,
            iterations: config.iterations,
        },
        rows,
    })
}

/// Mean, variance and standard error of one column at one (λ, iteration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub statistic: String,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    pub iteration: usize,
    pub replicates: usize,
    pub boundary_touch: usize,
    pub columns: Vec<ColumnSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableSummary {
    pub meta: TableMeta,
    pub tainted: bool,
    pub boundary_touch_fraction: f64,
    pub groups: Vec<LambdaSummary>,
}

/// Sample mean and unbiased variance (0 for fewer than two values).
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

pub fn summarize(table: &ReplicateTable) -> TableSummary {
    let numeric: Vec<String> = StatisticVector::columns(table.meta.dim)
        .into_iter()
        .filter(|c| c != "dim" && !c.ends_with("warning") && c != "boundary_touch")
        .collect();
    let mut keys: Vec<(f64, usize)> = table.rows.iter().map(|r| (r.lambda, r.iteration)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    let groups = keys
        .into_iter()
        .map(|(lambda, iteration)| {
            let rows: Vec<&ReplicateRow> =
                table.rows.iter().filter(|r| r.lambda == lambda && r.iteration == iteration).collect();
            let columns = numeric
                .iter()
                .filter_map(|c| {
                    let x: Option<Vec<f64>> = rows.iter().map(|r| r.stats.get(c)).collect();
                    let x = x?;
                    let (mean, variance) = mean_var(&x);
                    Some(ColumnSummary {
                        statistic: c.clone(),
                        mean,
                        variance,
                        std_error: (variance / x.len() as f64).sqrt(),
                    })
                })
                .collect();
            LambdaSummary {
                lambda,
                iteration,
                replicates: rows.len(),
                boundary_touch: rows.iter().filter(|r| r.stats.boundary_touch).count(),
                columns,
            }
        })
        .collect();
    TableSummary {
        meta: table.meta.clone(),
        tainted: table.tainted(),
        boundary_touch_fraction: table.boundary_touch_fraction(),
        groups,
    }
}
