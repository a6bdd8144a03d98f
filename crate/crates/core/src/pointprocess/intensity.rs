use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::Point;
use crate::error::{PvError, Result};

type Evaluator = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Serializable description of an intensity density on Q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Constant { value: f64 },
    /// `c0 + grad . x` on Q.
    Affine { c0: f64, grad: Vec<f64> },
}

impl Default for KappaSpec {
    fn default() -> Self {
        KappaSpec::Constant { value: 1.0 }
    }
}

impl KappaSpec {
    pub fn build(&self, dim: usize) -> Result<IntensityField> {
        match self {
            KappaSpec::Constant { value } => IntensityField::constant(*value),
            KappaSpec::Affine { c0, grad } => {
                if grad.len() != dim {
                    return Err(PvError::Config(format!(
                        "affine kappa gradient has {} components, expected {dim}",
                        grad.len()
                    )));
                }
                let mut g = [0.0; 3];
                g[..dim].copy_from_slice(grad);
                IntensityField::affine(*c0, g, dim)
            }
        }
    }
}

/// Density κ on Q together with the bounds needed for thinning.
#[derive(Clone)]
pub struct IntensityField {
    kind: FieldKind,
    sup_bound: f64,
    inf_bound: f64,
    eval: Evaluator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    Constant(f64),
    Callable,
}

impl fmt::Debug for IntensityField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntensityField")
            .field("kind", &self.kind)
            .field("sup_bound", &self.sup_bound)
            .field("inf_bound", &self.inf_bound)
            .finish()
    }
}

impl IntensityField {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(PvError::Config(format!(
                "constant intensity must be finite and non-negative, got {value}"
            )));
        }
        Ok(IntensityField {
            kind: FieldKind::Constant(value),
            sup_bound: value.max(f64::MIN_POSITIVE),
            inf_bound: value,
            eval: Arc::new(move |_| value),
        })
    }

    pub fn unit() -> Self {
        Self::constant(1.0).expect("unit intensity is valid")
    }

    /// `c0 + grad . x`; extrema over Q are attained at corners.
    pub fn affine(c0: f64, grad: Point, dim: usize) -> Result<Self> {
        let spread: f64 = grad[..dim].iter().map(|g| 0.5 * g.abs()).sum();
        let sup = c0 + spread;
        let inf = c0 - spread;
        if !sup.is_finite() || inf < 0.0 {
            return Err(PvError::Config(format!(
                "affine intensity {c0} + g.x takes values in [{inf}, {sup}] on Q; must be finite and non-negative"
            )));
        }
        let g = grad;
        let eval: Evaluator = Arc::new(move |x| c0 + g[0] * x[0] + g[1] * x[1] + g[2] * x[2]);
        Ok(IntensityField {
            kind: FieldKind::Callable,
            sup_bound: sup,
            inf_bound: inf,
            eval,
        })
    }

    /// Arbitrary density with caller-supplied bounds.
    pub fn callable<F>(f: F, sup_bound: f64, inf_bound: f64) -> Result<Self>
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        if !sup_bound.is_finite() || sup_bound <= 0.0 {
            return Err(PvError::Config(format!(
                "intensity sup_bound must be positive and finite, got {sup_bound}"
            )));
        }
        if !(inf_bound >= 0.0 && inf_bound <= sup_bound) {
            return Err(PvError::Config(format!(
                "intensity inf_bound {inf_bound} must lie in [0, sup_bound]"
            )));
        }
        Ok(IntensityField {
            kind: FieldKind::Callable,
            sup_bound,
            inf_bound,
            eval: Arc::new(f),
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn inf_bound(&self) -> f64 {
        self.inf_bound
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.eval)(x)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, FieldKind::Constant(_))
    }

    /// The limit theorems need κ bounded away from zero.
    pub fn require_theorem_mode(&self) -> Result<()> {
        if self.inf_bound <= 0.0 {
            return Err(PvError::Config(format!(
                "intensity must be bounded away from zero for limit-theorem experiments (inf_bound = {})",
                self.inf_bound
            )));
        }
        Ok(())
    }
}
