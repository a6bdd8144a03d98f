//! Experiment descriptions and their invariants.

use serde::{Deserialize, Serialize};

use crate::error::{PvError, Result};
use crate::pointprocess::{IntensityField, KappaSpec, SeedPath};
use crate::shapes::{Shape, ShapeSpec};
use crate::statistics::{StatOptions, StatisticVector};

/// Which moment of a statistic a fit is made on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    #[default]
    Mean,
    Variance,
}

/// Optional subtraction of the known large-λ limit before a mean fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    #[default]
    None,
    SubtractKnownLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub statistic: String,
    #[serde(default)]
    pub moment: Moment,
    #[serde(default)]
    pub centering: Centering,
}

fn default_seed() -> String {
    "pvlab".as_bytes().iter().map(|b| format!("{b:02x}")).collect()
}

fn default_margin() -> f64 {
    5.0
}

fn default_out() -> String {
    "out".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory receiving the replicate table, fits and plots.
    #[serde(default = "default_out")]
    pub dir: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dim: usize,
    pub shape: ShapeSpec,
    #[serde(default)]
    pub kappa: KappaSpec,
    pub lambda_grid: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub stats: StatOptions,
    #[serde(default)]
    pub fits: Vec<FitRequest>,
    /// Depth of the iterated approximation; absent for plain runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Hex seed root.
    #[serde(default = "default_seed")]
    pub seed: String,
    /// Required shape margin as a multiple of `λ_min^{-1/d}`.
    #[serde(default = "default_margin")]
    pub margin_multiple: f64,
    /// Keep only the points inside the shape, i.e. sample intensity `λκ 1_A`.
    #[serde(default)]
    pub restrict_to_shape: bool,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn shape(&self) -> Result<Shape> {
        Shape::from_spec(&self.shape, self.dim)
    }

    pub fn kappa(&self) -> Result<IntensityField> {
        self.kappa.build(self.dim)
    }

    pub fn seed_root(&self) -> Result<SeedPath> {
        SeedPath::root_from_hex(&self.seed)
    }

    /// Checks every invariant that can be checked before simulating.
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(PvError::Config(m));
        if !(2..=3).contains(&self.dim) {
            return cfg(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.lambda_grid.is_empty() {
            return cfg("lambda_grid is empty".into());
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return cfg(format!("lambda_grid entries must be positive and finite, got {l}"));
        }
        if self.lambda_grid.windows(2).any(|w| w[1] <= w[0]) {
            return cfg(format!("lambda_grid must be strictly increasing: {:?}", self.lambda_grid));
        }
        if !self.fits.is_empty() && self.lambda_grid.len() < 4 {
            return cfg(format!(
                "exponent fits need at least 4 lambda values, the grid has {}",
                self.lambda_grid.len()
            ));
        }
        if self.replicates == 0 {
            return cfg("replicates must be at least 1".into());
        }
        if self.iterations == Some(0) {
            return cfg("iterations must be at least 1".into());
        }
        if self.iterations.is_some() && self.restrict_to_shape {
            return cfg("iterations and restrict_to_shape cannot be combined".into());
        }
        if !(self.margin_multiple.is_finite() && self.margin_multiple >= 0.0) {
            return cfg(format!("margin_multiple must be non-negative, got {}", self.margin_multiple));
        }
        self.seed_root()?;
        let shape = self.shape()?;
        if matches!(self.shape, ShapeSpec::HalfSpace) {
            return cfg("the half-space shape lives on slabs; use the constants command".into());
        }
        self.kappa()?;
        let lmin = self.lambda_grid[0];
        let need = self.margin_multiple * lmin.powf(-1.0 / self.dim as f64);
        if shape.margin() < need {
            return cfg(format!(
                "shape margin {:.4} is below {} x lambda_min^(-1/d) = {need:.4} (lambda_min = {lmin})",
                shape.margin(),
                self.margin_multiple
            ));
        }
        let columns = StatisticVector::columns(self.dim);
        for f in &self.fits {
            if !columns.contains(&f.statistic) || f.statistic == "dim" || f.statistic.ends_with("warning") {
                let near = columns
                    .iter()
                    .max_by(|a, b| {
                        strsim::jaro_winkler(a, &f.statistic).total_cmp(&strsim::jaro_winkler(b, &f.statistic))
                    })
                    .cloned()
                    .unwrap_or_default();
                return cfg(format!("unknown statistic `{}` in fits (did you mean `{near}`?)", f.statistic));
            }
            if f.centering == Centering::SubtractKnownLimit && known_limit(&f.statistic, &shape).is_none() {
                return cfg(format!("statistic `{}` has no known limit to subtract", f.statistic));
            }
            if f.statistic.starts_with("zone") && self.stats.zone.is_none() {
                return cfg(format!("fit on `{}` needs a [stats.zone] section", f.statistic));
            }
            if f.statistic == "maximal_points" && !self.stats.maxima {
                return cfg("fit on `maximal_points` needs stats.maxima = true".into());
            }
        }
        Ok(())
    }
}

/// Large-λ limit of a statistic where it is known in closed form.
pub fn known_limit(statistic: &str, shape: &Shape) -> Option<f64> {
    match statistic {
        "volume" => shape.volume(),
        "signed_volume_error" | "symdiff_volume" => Some(0.0),
        _ => None,
    }
}

impl ExperimentConfig {
    /// SHA-256 of the canonical JSON form, hex encoded. The output location
    /// is left out: it does not change the results.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.output = OutputSpec::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
