//! Invariance, CLT and iterated-approximation checks built on fits and tables.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::fit::{percentile_ci, PrefactorFit, ScalingFit};
use super::table::{mean_var, ReplicateTable};
use crate::error::{PvError, Result};
use crate::halfspace::ScoreKind;
use crate::pointprocess::{IntensityField, SeedPath};
use crate::shapes::Shape;

/// Surface-content exponent γ of a statistic column, if it has one.
pub fn gamma_of(statistic: &str, d: usize) -> Option<f64> {
    let name = if statistic == "signed_volume_error" { "signed_volume" } else { statistic };
    let kind: ScoreKind = name.parse().ok()?;
    kind.check(d).ok()?;
    Some(kind.gamma(d))
}

/// `∫_{∂A} κ^{1-γ/d}` for the mean of `statistic`.
pub fn mean_content(shape: &Shape, kappa: &IntensityField, statistic: &str) -> Result<f64> {
    let g = gamma_of(statistic, shape.dim())
        .ok_or_else(|| PvError::Usage(format!("`{statistic}` has no surface-content scaling")))?;
    shape.weighted_surface_content(kappa, g, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub statistic: String,
    /// λ at which the fitted levels are compared; `None` when the asymptotic
    /// prefactors of two-term fits are compared.
    pub lambda_ref: Option<f64>,
    /// Level (or prefactor) of A over that of B.
    pub level_ratio: f64,
    pub level_ratio_ci: (f64, f64),
    pub content_a: f64,
    pub content_b: f64,
    pub content_ratio: f64,
    /// Level ratio divided by content ratio; 1 under invariance.
    pub ratio_of_ratios: f64,
    pub ratio_of_ratios_ci: (f64, f64),
}

impl InvarianceReport {
    pub fn ratio_ci_contains(&self, v: f64) -> bool {
        self.level_ratio_ci.0 <= v && v <= self.level_ratio_ci.1
    }

    pub fn ratio_of_ratios_ci_contains(&self, v: f64) -> bool {
        self.ratio_of_ratios_ci.0 <= v && v <= self.ratio_of_ratios_ci.1
    }
}

/// Compares the prefactors of two fits of the same statistic.
///
/// Levels are read off the fitted lines at a common λ (the geometric mean of
/// the two reference points), which equals the intercept comparison when the
/// slopes agree and is far better conditioned when they are only estimated.
pub fn invariance_test(
    a: &ScalingFit,
    content_a: f64,
    b: &ScalingFit,
    content_b: f64,
    level: f64,
) -> Result<InvarianceReport> {
    let usage = |m: String| Err(PvError::Usage(m));
    if a.statistic != b.statistic || a.moment != b.moment {
        return usage(format!(
            "fits are of different statistics: `{}` {:?} vs `{}` {:?}",
            a.statistic, a.moment, b.statistic, b.moment
        ));
    }
    if a.dim != b.dim {
        return usage(format!("fits are in different dimensions: {:?} vs {:?}", a.dim, b.dim));
    }
    if a.kappa != b.kappa {
        return usage(format!("fits use different intensities: {:?} vs {:?}", a.kappa, b.kappa));
    }
    if a.tainted || b.tainted {
        return usage("invariance needs untainted fits".into());
    }
    if !(content_a > 0.0 && content_b > 0.0) {
        return usage(format!("surface contents must be positive: {content_a}, {content_b}"));
    }
    let lr = (a.lambda_ref * b.lambda_ref).sqrt().ln();
    let log_ratio = |sa: f64, ia: f64, sb: f64, ib: f64| (ia + sa * lr) - (ib + sb * lr);
    let point = log_ratio(a.slope, a.intercept, b.slope, b.intercept).exp();
    let draws: Vec<f64> = a
        .bootstrap
        .iter()
        .zip(&b.bootstrap)
        .map(|(da, db)| log_ratio(da.0, da.1, db.0, db.1).exp())
        .collect();
    let content_ratio = content_a / content_b;
    let rr: Vec<f64> = draws.iter().map(|v| v / content_ratio).collect();
    Ok(InvarianceReport {
        statistic: a.statistic.clone(),
        lambda_ref: Some(lr.exp()),
        level_ratio: point,
        level_ratio_ci: percentile_ci(&draws, level, point),
        content_a,
        content_b,
        content_ratio,
        ratio_of_ratios: point / content_ratio,
        ratio_of_ratios_ci: percentile_ci(&rr, level, point / content_ratio),
    })
}

/// Compares the asymptotic prefactors of two [`PrefactorFit`]s, pairing
/// bootstrap draws by index.
pub fn prefactor_invariance(
    a: &PrefactorFit,
    content_a: f64,
    b: &PrefactorFit,
    content_b: f64,
    level: f64,
) -> Result<InvarianceReport> {
    let usage = |m: String| Err(PvError::Usage(m));
    if a.statistic != b.statistic || a.exponent != b.exponent {
        return usage(format!(
            "fits differ: `{}` at exponent {} vs `{}` at exponent {}",
            a.statistic, a.exponent, b.statistic, b.exponent
        ));
    }
    if a.dim != b.dim || a.kappa != b.kappa {
        return usage("fits differ in dimension or intensity".into());
    }
    if a.tainted || b.tainted {
        return usage("invariance needs untainted fits".into());
    }
    if !(content_a > 0.0 && content_b > 0.0) {
        return usage(format!("surface contents must be positive: {content_a}, {content_b}"));
    }
    if !(a.prefactor > 0.0 && b.prefactor > 0.0) {
        return Err(PvError::Degenerate(format!(
            "prefactors must be positive: {}, {}",
            a.prefactor, b.prefactor
        )));
    }
    let point = a.prefactor / b.prefactor;
    let draws: Vec<f64> = a.bootstrap.iter().zip(&b.bootstrap).map(|(x, y)| x / y).collect();
    let content_ratio = content_a / content_b;
    let rr: Vec<f64> = draws.iter().map(|v| v / content_ratio).collect();
    Ok(InvarianceReport {
        statistic: a.statistic.clone(),
        lambda_ref: None,
        level_ratio: point,
        level_ratio_ci: percentile_ci(&draws, level, point),
        content_a,
        content_b,
        content_ratio,
        ratio_of_ratios: point / content_ratio,
        ratio_of_ratios_ci: percentile_ci(&rr, level, point / content_ratio),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub statistic: String,
    pub lambda: f64,
    pub replicates: usize,
    pub ks_distance: f64,
    /// 1% critical value of the one-sample KS statistic, `1.628 / √n`.
    pub pass_threshold: f64,
}

impl CltReport {
    pub fn passes(&self) -> bool {
        self.ks_distance < self.pass_threshold
    }
}

/// KS distance between the standardized sample and N(0, 1).
pub fn ks_to_normal(x: &[f64]) -> Result<f64> {
    let (m, v) = mean_var(x);
    if !(v > 0.0) {
        return Err(PvError::Degenerate(format!(
            "sample of {} values has zero variance",
            x.len()
        )));
    }
    let sd = v.sqrt();
    let mut z: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    let phi = Normal::standard();
    let mut d: f64 = 0.0;
    for (i, zi) in z.iter().enumerate() {
        let f = phi.cdf(*zi);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

pub const CLT_MIN_REPLICATES: usize = 400;

pub fn clt_from_samples(statistic: &str, lambda: f64, x: &[f64]) -> Result<CltReport> {
    if x.len() < CLT_MIN_REPLICATES {
        return Err(PvError::Usage(format!(
            "CLT diagnostic needs at least {CLT_MIN_REPLICATES} replicates, got {}",
            x.len()
        )));
    }
    Ok(CltReport {
        statistic: statistic.to_string(),
        lambda,
        replicates: x.len(),
        ks_distance: ks_to_normal(x)?,
        pass_threshold: 1.628 / (x.len() as f64).sqrt(),
    })
}

pub fn clt_diagnostic(table: &ReplicateTable, lambda: f64, statistic: &str) -> Result<CltReport> {
    clt_from_samples(statistic, lambda, &table.values(statistic, lambda, 1)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedEntry {
    pub n: usize,
    pub mean_error: f64,
    pub std_error: f64,
    /// Mean error at n over mean error at 1.
    pub ratio: f64,
    pub ratio_ci: (f64, f64),
    pub ratio_se: f64,
    /// `1 + c₂ + … + c₂^{n-1}`.
    pub predicted: f64,
    pub predicted_se: f64,
    /// |ratio − predicted| within 1.96 combined standard errors.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IteratedReport {
    pub statistic: String,
    pub lambda: f64,
    pub center: f64,
    pub c2: f64,
    pub c2_se: f64,
    pub entries: Vec<IteratedEntry>,
}

impl IteratedReport {
    pub fn all_consistent(&self) -> bool {
        self.entries.iter().all(|e| e.consistent)
    }
}

/// Geometric sum `1 + c + … + c^{n-1}` and its derivative in `c`.
pub fn geometric_sum(c: f64, n: usize) -> (f64, f64) {
    let mut s = 0.0;
    let mut ds = 0.0;
    for k in 0..n {
        s += c.powi(k as i32);
        if k > 0 {
            ds += k as f64 * c.powi(k as i32 - 1);
        }
    }
    (s, ds)
}

/// `errors[k][r]` is replicate `r` of depth `k + 1`; resampling keeps the
/// replicates paired across depths.
#[allow(clippy::too_many_arguments)]
pub fn iterated_from_samples(
    statistic: &str,
    lambda: f64,
    center: f64,
    errors: &[Vec<f64>],
    c2: f64,
    c2_se: f64,
    bootstrap: usize,
    seed: &SeedPath,
) -> Result<IteratedReport> {
    let reps = errors.first().map_or(0, Vec::len);
    if errors.is_empty() || errors.iter().any(|e| e.len() != reps) || reps < 2 {
        return Err(PvError::Usage("iterated samples must be non-empty and paired across depths".into()));
    }
    let means: Vec<f64> = errors.iter().map(|e| mean_var(e).0 - center).collect();
    if !(means[0].abs() > 0.0) {
        return Err(PvError::Degenerate(format!("mean error of `{statistic}` at depth 1 is zero")));
    }
    let mut rng = seed.derive(format!("iterated/{statistic}")).rng();
    let mut draws = vec![Vec::with_capacity(bootstrap); errors.len()];
    let mut idx = vec![0usize; reps];
    for _ in 0..bootstrap {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..reps));
        let m: Vec<f64> =
            errors.iter().map(|e| idx.iter().map(|&i| e[i]).sum::<f64>() / reps as f64 - center).collect();
        for k in 0..errors.len() {
            draws[k].push(m[k] / m[0]);
        }
    }
    let entries = errors
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let n = k + 1;
            let ratio = means[k] / means[0];
            let (_, rv) = mean_var(&draws[k]);
            let (pred, dpred) = geometric_sum(c2, n);
            let pse = dpred * c2_se;
            let comb = (rv + pse * pse).sqrt();
            IteratedEntry {
                n,
                mean_error: means[k],
                std_error: (mean_var(e).1 / reps as f64).sqrt(),
                ratio,
                ratio_ci: percentile_ci(&draws[k], 0.95, ratio),
                ratio_se: rv.sqrt(),
                predicted: pred,
                predicted_se: pse,
                consistent: (ratio - pred).abs() <= 1.96 * comb + 1e-12,
            }
        })
        .collect();
    Ok(IteratedReport {
        statistic: statistic.to_string(),
        lambda,
        center,
        c2,
        c2_se,
        entries,
    })
}

pub const ITERATED_MIN_REPLICATES: usize = 200;

/// Iterated-approximation check on a table produced with `iterations` set.
/// Errors are `statistic - center`; use `center = S(A)` for the surface.
pub fn iterated_prediction_test(
    table: &ReplicateTable,
    statistic: &str,
    center: f64,
    c2: f64,
    c2_se: f64,
) -> Result<IteratedReport> {
    let depth = table
        .meta
        .iterations
        .ok_or_else(|| PvError::Usage("table does not come from an iterated run".into()))?;
    if table.tainted() {
        return Err(PvError::Usage("iterated prediction needs an untainted run".into()));
    }
    let lambdas = table.lambdas();
    if lambdas.len() != 1 {
        return Err(PvError::Usage(format!("iterated runs must use one lambda, got {lambdas:?}")));
    }
    let errors = (1..=depth)
        .map(|n| table.values(statistic, lambdas[0], n))
        .collect::<Result<Vec<_>>>()?;
    if errors[0].len() < ITERATED_MIN_REPLICATES {
        return Err(PvError::Usage(format!(
            "iterated prediction needs at least {ITERATED_MIN_REPLICATES} replicates, got {}",
            errors[0].len()
        )));
    }
    let seed = SeedPath::root_from_hex(&table.meta.config_hash)?;
    iterated_from_samples(statistic, lambdas[0], center, &errors, c2, c2_se, 1000, &seed)
}
