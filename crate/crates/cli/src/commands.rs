use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use pvlab::experiments::{
    fit_scaling, iterated_prediction_test, loglog_svg, run_experiment, summarize, Centering, ExperimentConfig,
    FitOptions, FitRequest, Moment, ReplicateTable, ScalingFit,
};
use pvlab::halfspace::{estimate_constants, HalfSpaceEstimate, ScoreKind, SlabParams};
use pvlab::pointprocess::SeedPath;
use pvlab::PvError;

use crate::load::read_config;
use crate::output::{now, read_json, ExperimentStatus, OutputDir, RunManifest, MANIFEST};
use crate::RunArgs;

/// What a command produced, for the exit code.
pub struct Outcome {
    pub tainted: bool,
}

fn manifest(command: &str, seed_root: &str, threads: Option<usize>) -> RunManifest {
    RunManifest {
        command: command.into(),
        config_hash: String::new(),
        seed_root: seed_root.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        started: now(),
        finished: String::new(),
        threads,
        experiments: Vec::new(),
        files: Vec::new(),
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, PvError> {
    let spec = args
        .config
        .as_deref()
        .ok_or_else(|| PvError::Config("--config is required (a path or a bundled name)".into()))?;
    let (_, mut cfg) = read_config(spec)?;
    if let Some(s) = &args.seed {
        cfg.seed = s.clone();
    }
    if let Some(g) = &args.lambda_grid {
        cfg.lambda_grid = g.clone();
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(o) = &args.out {
        cfg.output.dir = o.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn slug(f: &FitRequest) -> String {
    let m = match f.moment {
        Moment::Mean => "mean",
        Moment::Variance => "variance",
    };
    format!("{}_{m}", f.statistic)
}

fn write_fit(out: &mut OutputDir, fit: &ScalingFit, name: &str) -> Result<(), PvError> {
    out.write_json(&format!("fit_{name}.json"), "fit", fit)?;
    let hash = out.config_hash.clone();
    out.write(&format!("plot_{name}.svg"), "plot", loglog_svg(fit, &hash).as_bytes())?;
    Ok(())
}

fn status(table: &ReplicateTable) -> ExperimentStatus {
    ExperimentStatus {
        name: table.meta.name.clone(),
        tainted: table.tainted(),
        boundary_touch_fraction: table.boundary_touch_fraction(),
        discarded: 0,
    }
}

/// Runs a config, writes the table, summary and fits.
pub fn simulate(args: &RunArgs, command: &str, adjust: impl FnOnce(&mut ExperimentConfig)) -> Result<Outcome, PvError> {
    let mut cfg = load(args)?;
    adjust(&mut cfg);
    cfg.validate()?;
    let mut m = manifest(command, &cfg.seed, args.threads);
    let mut out = OutputDir::create(Path::new(&cfg.output.dir), &cfg.config_hash())?;
    out.write("config.toml", "config", crate::load::emit_config(&cfg).as_bytes())?;
    let table = run_experiment(&cfg, args.threads)?;
    out.write("replicates.csv", "replicates", table.to_csv_string().as_bytes())?;
    out.write_json("summary.json", "summary", &summarize(&table))?;
    let opts = FitOptions::default();
    for f in &cfg.fits {
        if cfg.replicates < opts.min_replicates {
            eprintln!(
                "note: skipping fit of {} ({} replicates, fits need {})",
                slug(f),
                cfg.replicates,
                opts.min_replicates
            );
            continue;
        }
        match fit_scaling(&table, f, &opts) {
            Ok(fit) => {
                eprintln!(
                    "{}: slope {:.4} [{:.4}, {:.4}]",
                    slug(f),
                    fit.slope,
                    fit.slope_ci.0,
                    fit.slope_ci.1
                );
                write_fit(&mut out, &fit, &slug(f))?;
            }
            Err(e @ PvError::Degenerate(_)) => eprintln!("note: fit of {} refused: {e}", slug(f)),
            Err(e) => return Err(e),
        }
    }
    let st = status(&table);
    let tainted = st.tainted;
    m.experiments.push(st);
    let dir = out.root().to_path_buf();
    out.finish(m)?;
    eprintln!("wrote {}", dir.display());
    Ok(Outcome { tainted })
}

pub fn zone(args: &RunArgs) -> Result<Outcome, PvError> {
    simulate(args, "zone", |c| {
        if c.stats.zone.is_none() {
            c.stats.zone = Some(Default::default());
        }
        if !c.fits.iter().any(|f| f.statistic == "zone_complexity") && c.lambda_grid.len() >= 4 {
            c.fits.push(FitRequest {
                statistic: "zone_complexity".into(),
                moment: Moment::Mean,
                centering: Centering::None,
            });
        }
    })
}

pub fn maxima(args: &RunArgs) -> Result<Outcome, PvError> {
    simulate(args, "maxima", |c| {
        c.stats.maxima = true;
        if !c.fits.iter().any(|f| f.statistic == "maximal_points") && c.lambda_grid.len() >= 4 {
            c.fits.push(FitRequest {
                statistic: "maximal_points".into(),
                moment: Moment::Mean,
                centering: Centering::None,
            });
        }
    })
}

pub struct FitArgs {
    pub table: PathBuf,
    pub statistic: String,
    pub moment: Moment,
    pub centering: Centering,
    pub out: Option<PathBuf>,
    pub min_replicates: usize,
    pub bootstrap: usize,
}

pub fn fit(a: &FitArgs) -> Result<Outcome, PvError> {
    let file = std::fs::File::open(&a.table)
        .map_err(|e| PvError::Io(format!("cannot open {}: {e}", a.table.display())))?;
    let table = ReplicateTable::read_csv(std::io::BufReader::new(file))?;
    let req = FitRequest {
        statistic: a.statistic.clone(),
        moment: a.moment,
        centering: a.centering,
    };
    let opts = FitOptions {
        bootstrap: a.bootstrap,
        min_replicates: a.min_replicates,
        ..Default::default()
    };
    let fit = fit_scaling(&table, &req, &opts)?;
    println!("{}", serde_json::to_string_pretty(&FitLine::from(&fit))?);
    let dir = a
        .out
        .clone()
        .unwrap_or_else(|| a.table.parent().map(Path::to_path_buf).unwrap_or_default());
    let mut m = manifest("fit", &table.meta.seed_root, None);
    let mut out = OutputDir::create(&dir, &table.meta.config_hash)?;
    write_fit(&mut out, &fit, &slug(&req))?;
    let st = status(&table);
    let tainted = st.tainted;
    m.experiments.push(st);
    out.finish(m)?;
    Ok(Outcome { tainted })
}

/// The headline numbers of a fit, for the terminal.
#[derive(Serialize)]
struct FitLine<'a> {
    statistic: &'a str,
    moment: Moment,
    slope: f64,
    slope_ci: (f64, f64),
    intercept: f64,
    intercept_ci: (f64, f64),
    r_squared: f64,
}

impl<'a> From<&'a ScalingFit> for FitLine<'a> {
    fn from(f: &'a ScalingFit) -> Self {
        FitLine {
            statistic: &f.statistic,
            moment: f.moment,
            slope: f.slope,
            slope_ci: f.slope_ci,
            intercept: f.intercept,
            intercept_ci: f.intercept_ci,
            r_squared: f.r_squared,
        }
    }
}

pub struct ConstantsArgs {
    pub scores: Vec<String>,
    pub params: SlabParams,
    pub seed: String,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

fn constants_hash(kinds: &[ScoreKind], params: &SlabParams, seed: &str) -> String {
    let v = serde_json::json!({ "scores": kinds, "params": params, "seed": seed });
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PvError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PvError::Usage(format!("cannot build thread pool: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

pub fn compute_constants(
    kinds: &[ScoreKind],
    params: &SlabParams,
    seed: &str,
    threads: Option<usize>,
) -> Result<Vec<HalfSpaceEstimate>, PvError> {
    let root = SeedPath::root_from_hex(seed)?;
    in_pool(threads, || estimate_constants(kinds, params, &root))?
}

pub fn constants(a: &ConstantsArgs) -> Result<Outcome, PvError> {
    let kinds = a
        .scores
        .iter()
        .map(|s| s.parse::<ScoreKind>())
        .collect::<Result<Vec<_>, _>>()?;
    a.params.validate()?;
    let est = compute_constants(&kinds, &a.params, &a.seed, a.threads)?;
    if est.len() == 1 {
        println!("{}", serde_json::to_string_pretty(&est[0])?);
    } else {
        println!("{}", serde_json::to_string_pretty(&est)?);
    }
    if let Some(dir) = &a.out {
        let hash = constants_hash(&kinds, &a.params, &a.seed);
        let mut m = manifest("constants", &a.seed, a.threads);
        m.experiments = est
            .iter()
            .map(|e| ExperimentStatus {
                name: format!("constant/{}", e.score_kind),
                tainted: e.warning.is_some(),
                boundary_touch_fraction: 0.0,
                discarded: e.discarded,
            })
            .collect();
        let mut out = OutputDir::create(dir, &hash)?;
        out.write_json("constants.json", "constants", &est)?;
        out.finish(m)?;
    }
    Ok(Outcome { tainted: false })
}

pub struct IterateArgs {
    pub run: RunArgs,
    pub depth: Option<usize>,
    pub constants: Option<PathBuf>,
    pub c2: Option<(f64, f64)>,
}

pub fn iterate(a: &IterateArgs) -> Result<Outcome, PvError> {
    let mut cfg = load(&a.run)?;
    if let Some(n) = a.depth {
        cfg.iterations = Some(n);
    }
    if cfg.iterations.is_none() {
        return Err(PvError::Config("iterate needs `iterations` in the config or --depth".into()));
    }
    cfg.validate()?;
    let (c2, c2_se) = match (&a.constants, a.c2) {
        (_, Some(c)) => c,
        (Some(p), None) => {
            let (_, est): (String, Vec<HalfSpaceEstimate>) = read_json(p)?;
            let e = est
                .iter()
                .find(|e| e.score_kind == ScoreKind::Surface && e.dim == cfg.dim)
                .ok_or_else(|| PvError::Usage(format!("{} has no d = {} surface constant", p.display(), cfg.dim)))?;
            (e.value, e.std_error)
        }
        (None, None) => {
            eprintln!("note: estimating the surface constant on slabs (pass --constants or --c2 to skip)");
            let params = SlabParams { dim: cfg.dim, ..Default::default() };
            let e = compute_constants(&[ScoreKind::Surface], &params, &cfg.seed, a.run.threads)?;
            (e[0].value, e[0].std_error)
        }
    };
    let mut m = manifest("iterate", &cfg.seed, a.run.threads);
    let mut out = OutputDir::create(Path::new(&cfg.output.dir), &cfg.config_hash())?;
    out.write("config.toml", "config", crate::load::emit_config(&cfg).as_bytes())?;
    let table = run_experiment(&cfg, a.run.threads)?;
    out.write("replicates.csv", "replicates", table.to_csv_string().as_bytes())?;
    out.write_json("summary.json", "summary", &summarize(&table))?;
    let shape = cfg.shape()?;
    let st = status(&table);
    let tainted = st.tainted;
    if !tainted {
        let surface = shape.surface_content().unwrap_or(f64::NAN);
        for (stat, center) in [("surface", surface), ("symdiff_volume", 0.0)] {
            if !center.is_finite() {
                continue;
            }
            match iterated_prediction_test(&table, stat, center, c2, c2_se) {
                Ok(r) => {
                    for e in &r.entries {
                        eprintln!(
                            "{stat} n={}: ratio {:.4} [{:.4}, {:.4}] vs {:.4}{}",
                            e.n,
                            e.ratio,
                            e.ratio_ci.0,
                            e.ratio_ci.1,
                            e.predicted,
                            if e.consistent { "" } else { " (inconsistent)" }
                        );
                    }
                    out.write_json(&format!("iterated_{stat}.json"), "iterated", &r)?;
                }
                Err(e @ PvError::Usage(_)) => eprintln!("note: {stat}: {e}"),
                Err(e) => return Err(e),
            }
        }
    }
    m.experiments.push(st);
    out.finish(m)?;
    Ok(Outcome { tainted })
}

/// Bundles the fits of a finished run into `report.md` and `report.json`.
pub fn report(dir: &Path) -> Result<Outcome, PvError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST))
        .map_err(|e| PvError::Io(format!("cannot read {}: {e}", dir.join(MANIFEST).display())))?;
    let prev: RunManifest = serde_json::from_str(&text)?;
    let mut fits = Vec::new();
    for f in prev.files.iter().filter(|f| f.kind == "fit") {
        let (hash, fit): (String, ScalingFit) = read_json(&dir.join(&f.path))?;
        if hash != prev.config_hash {
            return Err(PvError::Data(format!("{} belongs to config {hash}, not {}", f.path, prev.config_hash)));
        }
        fits.push(fit);
    }
    let tainted = prev.experiments.iter().any(|e| e.tainted);
    let mut md = format!(
        "# Run report\n\ncommand `{}`, config `{}`, seed `{}`, version {}\n\nstarted {}, finished {}\n\n",
        prev.command, prev.config_hash, prev.seed_root, prev.code_version, prev.started, prev.finished
    );
    for e in &prev.experiments {
        md += &format!(
            "- {}: tainted {}, boundary contact {:.4}, discarded {}\n",
            e.name, e.tainted, e.boundary_touch_fraction, e.discarded
        );
    }
    if !fits.is_empty() {
        md += "\n| statistic | moment | slope | 95% CI | intercept | R² |\n|---|---|---|---|---|---|\n";
        for f in &fits {
            md += &format!(
                "| {} | {:?} | {:.4} | [{:.4}, {:.4}] | {:.4} | {:.4} |\n",
                f.statistic, f.moment, f.slope, f.slope_ci.0, f.slope_ci.1, f.intercept, f.r_squared
            );
        }
    }
    let plots: Vec<&str> = prev.files.iter().filter(|f| f.kind == "plot").map(|f| f.path.as_str()).collect();
    for p in &plots {
        md += &format!("\n![{p}]({p})\n");
    }
    md += &format!("\n<!-- config_hash {} -->\n", prev.config_hash);
    print!("{md}");

    let hash = prev.config_hash.clone();
    let mut out = OutputDir::resume(dir, &hash, prev.files.clone());
    out.write("report.md", "report", md.as_bytes())?;
    out.write_json("report.json", "report", &serde_json::json!({ "run": &prev, "fits": fits }))?;
    let m = RunManifest {
        command: format!("{} + report", prev.command),
        ..prev
    };
    out.finish(m)?;
    Ok(Outcome { tainted })
}
