//! Power-law fits with replicate-level bootstrap intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{known_limit, Centering, FitRequest, Moment};
use super::table::{mean_var, ReplicateTable};
use crate::error::{PvError, Result};
use crate::pointprocess::{KappaSpec, SeedPath};
use crate::shapes::Shape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub bootstrap: usize,
    pub min_replicates: usize,
    /// Two-sided coverage of the reported intervals.
    pub level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bootstrap: 1000,
            min_replicates: 100,
            level: 0.95,
        }
    }
}

/// `log(level) = intercept + slope log λ` fitted over a λ-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub statistic: String,
    pub moment: Moment,
    pub centering: Centering,
    /// Value subtracted before taking the moment (0 without centering).
    pub center_value: f64,
    pub slope: f64,
    pub slope_ci: (f64, f64),
    pub intercept: f64,
    pub intercept_ci: (f64, f64),
    pub r_squared: f64,
    pub lambdas: Vec<f64>,
    pub levels: Vec<f64>,
    /// Bootstrap interval of each level, for plotting and diagnostics.
    pub level_ci: Vec<(f64, f64)>,
    /// `log(level) - fitted` at each grid point.
    pub residuals: Vec<f64>,
    pub replicates: Vec<usize>,
    /// Geometric mean of the grid, where levels of two fits are compared.
    pub lambda_ref: f64,
    /// Bootstrap draws of (slope, intercept).
    pub bootstrap: Vec<(f64, f64)>,
    pub dim: Option<usize>,
    pub kappa: Option<KappaSpec>,
    pub tainted: bool,
    pub config_hash: Option<String>,
}

impl ScalingFit {
    /// Fitted level at `lambda`.
    pub fn level_at(&self, lambda: f64) -> f64 {
        (self.intercept + self.slope * lambda.ln()).exp()
    }

    pub fn slope_half_width(&self) -> f64 {
        0.5 * (self.slope_ci.1 - self.slope_ci.0)
    }
}

/// Least squares `y = a + b x`; returns (b, a, r²).
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).min(1.0) } else { 1.0 };
    (b, a, r2)
}

/// Empirical quantile by linear interpolation of the sorted sample.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, t) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}

/// Percentile interval of `draws`, widened to contain `point`.
pub fn percentile_ci(draws: &[f64], level: f64, point: f64) -> (f64, f64) {
    let mut s: Vec<f64> = draws.iter().copied().filter(|v| v.is_finite()).collect();
    if s.is_empty() {
        return (point, point);
    }
    s.sort_by(f64::total_cmp);
    let a = 0.5 * (1.0 - level);
    (quantile(&s, a).min(point), quantile(&s, 1.0 - a).max(point))
}

fn level_of(x: &[f64], moment: Moment, center: f64) -> f64 {
    let (m, v) = mean_var(x);
    match moment {
        Moment::Mean => m - center,
        Moment::Variance => v,
    }
}

/// Fits `samples` = [(λ, replicate values)] directly.
pub fn fit_samples(
    statistic: &str,
    samples: &[(f64, Vec<f64>)],
    moment: Moment,
    centering: Centering,
    center_value: f64,
    opts: &FitOptions,
    seed: &SeedPath,
) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(PvError::Usage(format!(
            "a scaling fit needs at least 4 lambda values, got {}",
            samples.len()
        )));
    }
    if let Some((l, x)) = samples.iter().find(|(_, x)| x.len() < opts.min_replicates.max(2)) {
        return Err(PvError::Usage(format!(
            "lambda = {l} has {} replicates, the fit needs at least {}",
            x.len(),
            opts.min_replicates.max(2)
        )));
    }
    let center = if centering == Centering::None { 0.0 } else { center_value };
    let lambdas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let levels: Vec<f64> = samples.iter().map(|(_, x)| level_of(x, moment, center)).collect();
    if let Some((l, v)) = lambdas.iter().zip(&levels).find(|(_, v)| !(**v > 0.0)) {
        return Err(PvError::Degenerate(format!(
            "{moment:?} of `{statistic}` (centered by {center}) is {v} at lambda = {l}; a log-log fit needs positive levels"
        )));
    }
    let lx: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ly: Vec<f64> = levels.iter().map(|v| v.ln()).collect();
    let (slope, intercept, r_squared) = ols(&lx, &ly);
    let residuals: Vec<f64> = lx.iter().zip(&ly).map(|(x, y)| y - intercept - slope * x).collect();

    let mut rng = seed.derive(format!("bootstrap/{statistic}/{moment:?}")).rng();
    let mut draws = Vec::with_capacity(opts.bootstrap);
    let mut level_draws = vec![Vec::with_capacity(opts.bootstrap); samples.len()];
    let mut buf = Vec::new();
    for _ in 0..opts.bootstrap {
        let mut by = Vec::with_capacity(samples.len());
        for (k, (_, x)) in samples.iter().enumerate() {
            buf.clear();
            buf.extend((0..x.len()).map(|_| x[rng.random_range(0..x.len())]));
            let v = level_of(&buf, moment, center);
            level_draws[k].push(v);
            by.push(if v > 0.0 { v.ln() } else { f64::NAN });
        }
        if by.iter().all(|v| v.is_finite()) {
            let (b, a, _) = ols(&lx, &by);
            draws.push((b, a));
        }
    }
    if draws.len() < opts.bootstrap / 2 {
        return Err(PvError::Degenerate(format!(
            "`{statistic}`: most bootstrap resamples produce non-positive levels"
        )));
    }
    let bs: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let ba: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let level_ci = level_draws
        .iter()
        .zip(&levels)
        .map(|(d, &v)| percentile_ci(d, opts.level, v))
        .collect();
    Ok(ScalingFit {
        statistic: statistic.to_string(),
        moment,
        centering,
        center_value: center,
        slope,
        slope_ci: percentile_ci(&bs, opts.level, slope),
        intercept,
        intercept_ci: percentile_ci(&ba, opts.level, intercept),
        r_squared,
        lambda_ref: (lx.iter().sum::<f64>() / lx.len() as f64).exp(),
        lambdas,
        levels,
        level_ci,
        residuals,
        replicates: samples.iter().map(|s| s.1.len()).collect(),
        bootstrap: draws,
        dim: None,
        kappa: None,
        tainted: false,
        config_hash: None,
    })
}

/// Fits one requested statistic of a replicate table (iteration 1 rows).
pub fn fit_scaling(table: &ReplicateTable, request: &FitRequest, opts: &FitOptions) -> Result<ScalingFit> {
    let center = match request.centering {
        Centering::None => 0.0,
        Centering::SubtractKnownLimit => {
            let shape = Shape::from_spec(&table.meta.shape, table.meta.dim)?;
            known_limit(&request.statistic, &shape).ok_or_else(|| {
                PvError::Usage(format!("`{}` has no known limit to subtract", request.statistic))
            })?
        }
    };
    let samples = table
        .lambdas()
        .into_iter()
        .map(|l| Ok((l, table.values(&request.statistic, l, 1)?)))
        .collect::<Result<Vec<_>>>()?;
    let seed = SeedPath::root_from_hex(&table.meta.config_hash)?;
    let mut fit = fit_samples(
        &request.statistic,
        &samples,
        request.moment,
        request.centering,
        center,
        opts,
        &seed,
    )?;
    fit.dim = Some(table.meta.dim);
    fit.kappa = Some(table.meta.kappa.clone());
    fit.tainted = table.tainted();
    fit.config_hash = Some(table.meta.config_hash.clone());
    Ok(fit)
}

/// Asymptotic prefactor of a mean with a known growth exponent, from the
/// two-term model `E X_λ = c λ^β + b`. The constant `b` absorbs order-one
/// corrections (corners, curvature) that bias a level read off at finite λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefactorFit {
    pub statistic: String,
    pub exponent: f64,
    pub prefactor: f64,
    pub prefactor_ci: (f64, f64),
    pub offset: f64,
    pub lambdas: Vec<f64>,
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Bootstrap draws of the prefactor.
    pub bootstrap: Vec<f64>,
    pub dim: Option<usize>,
    pub kappa: Option<KappaSpec>,
    pub tainted: bool,
}

/// Weighted least squares of `y` on `(x, 1)`; returns `(slope, intercept)`.
fn wls_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&x, &y), &w) in x.iter().zip(y).zip(w) {
        s11 += w * x * x;
        s12 += w * x;
        s22 += w;
        t1 += w * x * y;
        t2 += w * y;
    }
    let det = s11 * s22 - s12 * s12;
    ((s22 * t1 - s12 * t2) / det, (s11 * t2 - s12 * t1) / det)
}

pub fn fit_prefactor_samples(
    statistic: &str,
    samples: &[(f64, Vec<f64>)],
    exponent: f64,
    opts: &FitOptions,
    seed: &SeedPath,
) -> Result<PrefactorFit> {
    if samples.len() < 3 {
        return Err(PvError::Usage(format!(
            "a prefactor fit needs at least 3 lambda values, got {}",
            samples.len()
        )));
    }
    if let Some((l, x)) = samples.iter().find(|(_, x)| x.len() < opts.min_replicates.max(2)) {
        return Err(PvError::Usage(format!(
            "lambda = {l} has {} replicates, the fit needs at least {}",
            x.len(),
            opts.min_replicates.max(2)
        )));
    }
    let lambdas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let x: Vec<f64> = lambdas.iter().map(|l| l.powf(exponent)).collect();
    let (means, std_errors): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .map(|(_, v)| {
            let (m, var) = mean_var(v);
            (m, (var / v.len() as f64).sqrt())
        })
        .unzip();
    if let Some((l, _)) = lambdas.iter().zip(&std_errors).find(|(_, s)| !(**s > 0.0)) {
        return Err(PvError::Degenerate(format!("`{statistic}` has zero variance at lambda = {l}")));
    }
    // Weights stay fixed at the observed standard errors so that the
    // bootstrap only varies the means.
    let w: Vec<f64> = std_errors.iter().map(|s| 1.0 / (s * s)).collect();
    let (prefactor, offset) = wls_line(&x, &means, &w);

    let mut rng = seed.derive(format!("bootstrap/prefactor/{statistic}")).rng();
    let mut draws = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let y: Vec<f64> = samples
            .iter()
            .map(|(_, v)| (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).sum::<f64>() / v.len() as f64)
            .collect();
        draws.push(wls_line(&x, &y, &w).0);
    }
    Ok(PrefactorFit {
        statistic: statistic.to_string(),
        exponent,
        prefactor,
        prefactor_ci: percentile_ci(&draws, opts.level, prefactor),
        offset,
        lambdas,
        means,
        std_errors,
        bootstrap: draws,
        dim: None,
        kappa: None,
        tainted: false,
    })
}

/// Prefactor of the mean of `statistic`, with the exponent `(d-1-γ)/d` of a
/// statistic of surface order γ unless one is given.
pub fn fit_prefactor(
    table: &ReplicateTable,
    statistic: &str,
    exponent: Option<f64>,
    opts: &FitOptions,
) -> Result<PrefactorFit> {
    let d = table.meta.dim;
    let exponent = match exponent {
        Some(e) => e,
        None => {
            let g = super::diagnostics::gamma_of(statistic, d)
                .ok_or_else(|| PvError::Usage(format!("`{statistic}` has no known growth exponent; pass one")))?;
            (d as f64 - 1.0 - g) / d as f64
        }
    };
    let samples = table
        .lambdas()
        .into_iter()
        .map(|l| Ok((l, table.values(statistic, l, 1)?)))
        .collect::<Result<Vec<_>>>()?;
    let seed = SeedPath::root_from_hex(&table.meta.config_hash)?;
    let mut fit = fit_prefactor_samples(statistic, &samples, exponent, opts, &seed)?;
    fit.dim = Some(d);
    fit.kappa = Some(table.meta.kappa.clone());
    fit.tainted = table.tainted();
    Ok(fit)
}
