//! Poisson point processes on the unit cube and on periodic slabs.

mod intensity;
mod seed;

pub use intensity::{FieldKind, IntensityField, KappaSpec};
pub use seed::{derive_seed, SeedPath};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{PvError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub points: Vec<Point>,
    pub domain: Domain,
    pub lambda: f64,
    pub seed_path: SeedPath,
}

impl PointSample {
    /// Wrap an explicit point list, checking containment.
    pub fn from_points(points: Vec<Point>, domain: Domain, seed_path: SeedPath) -> Result<Self> {
        let d = domain.dim();
        for (i, p) in points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) || (d == 2 && p[2] != 0.0) {
                return Err(PvError::Data(format!("point {i} {p:?} is not a valid {d}-vector")));
            }
            if !domain.contains(p) {
                return Err(PvError::Data(format!("point {i} {p:?} lies outside the domain")));
            }
        }
        Ok(PointSample {
            points,
            domain,
            lambda: f64::NAN,
            seed_path,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn poisson_count<R: Rng>(mean: f64, rng: &mut R) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| PvError::Config(format!("invalid Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as usize)
}

/// Poisson process of intensity λκ on Q = [-1/2, 1/2]^d by thinning.
pub fn sample_poisson_cube(
    lambda: f64,
    kappa: &IntensityField,
    d: usize,
    seed_path: &SeedPath,
) -> Result<PointSample> {
    let domain = Domain::cube(d)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PvError::Config(format!("lambda must be positive and finite, got {lambda}")));
    }
    let sup = kappa.sup_bound();
    if !sup.is_finite() {
        return Err(PvError::Config(format!("intensity sup_bound must be finite, got {sup}")));
    }
    let mut rng = seed_path.rng();
    let n = poisson_count(lambda * sup, &mut rng)?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = [0.0; 3];
        for c in x.iter_mut().take(d) {
            *c = rng.random::<f64>() - 0.5;
        }
        let u: f64 = rng.random();
        if kappa.is_constant() {
            if u * sup < kappa.eval(&x) {
                points.push(x);
            }
            continue;
        }
        let k = kappa.eval(&x);
        if !(k >= 0.0) {
            return Err(PvError::Data(format!("intensity is {k} (negative or NaN) at point {x:?}")));
        }
        if k > sup * (1.0 + 1e-12) {
            return Err(PvError::Data(format!(
                "intensity {k} at point {x:?} exceeds declared sup_bound {sup}"
            )));
        }
        if u * sup < k {
            points.push(x);
        }
    }
    Ok(PointSample {
        points,
        domain,
        lambda,
        seed_path: seed_path.clone(),
    })
}

/// Homogeneous process of intensity τ on [0,L]^{d-1} x [-h,h] (laterally periodic).
pub fn sample_poisson_slab(
    tau: f64,
    lateral: f64,
    half_height: f64,
    d: usize,
    seed_path: &SeedPath,
) -> Result<PointSample> {
    let domain = Domain::slab(d, lateral, half_height)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(PvError::Config(format!("slab intensity must be positive and finite, got {tau}")));
    }
    let mut rng = seed_path.rng();
    let n = poisson_count(tau * domain.volume(), &mut rng)?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = [0.0; 3];
        for c in x.iter_mut().take(d - 1) {
            *c = rng.random::<f64>() * lateral;
        }
        x[d - 1] = (2.0 * rng.random::<f64>() - 1.0) * half_height;
        points.push(x);
    }
    Ok(PointSample {
        points,
        domain,
        lambda: tau,
        seed_path: seed_path.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_intensity_gives_empty_sample() {
        let k = IntensityField::callable(|_| 0.0, 1.0, 0.0).unwrap();
        let s = sample_poisson_cube(1000.0, &k, 2, &SeedPath::root_from_u64(1)).unwrap();
        assert!(s.is_empty());
        assert!(k.require_theorem_mode().is_err());
    }

    #[test]
    fn negative_intensity_names_the_point() {
        let k = IntensityField::callable(|x| x[0], 1.0, 0.0).unwrap();
        let err = sample_poisson_cube(100.0, &k, 2, &SeedPath::root_from_u64(1)).unwrap_err();
        assert!(matches!(err, PvError::Data(ref m) if m.contains("point")));
    }

    #[test]
    fn non_finite_sup_rejected() {
        assert!(IntensityField::callable(|_| 1.0, f64::INFINITY, 0.0)
            .unwrap_err()
            .is_config());
        assert!(IntensityField::constant(f64::NAN).unwrap_err().is_config());
    }

    #[test]
    fn degenerate_slab_rejected() {
        let s = SeedPath::root_from_u64(1);
        assert!(sample_poisson_slab(1.0, 0.0, 5.0, 2, &s).unwrap_err().is_config());
        assert!(sample_poisson_slab(1.0, 10.0, -1.0, 2, &s).unwrap_err().is_config());
    }

    #[test]
    fn samples_are_reproducible_and_contained() {
        let k = IntensityField::affine(1.0, [1.0, 0.0, 0.0], 3).unwrap();
        let s = SeedPath::root_from_hex("ab").unwrap().derive("x");
        let a = sample_poisson_cube(500.0, &k, 3, &s).unwrap();
        let b = sample_poisson_cube(500.0, &k, 3, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| a.domain.contains(p)));
        let sl = sample_poisson_slab(1.0, 5.0, 2.0, 3, &s).unwrap();
        assert!(sl.points.iter().all(|p| sl.domain.contains(p)));
        assert!(sl.domain.is_periodic());
    }

    #[test]
    fn affine_bounds() {
        let k = IntensityField::affine(1.0, [1.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(k.sup_bound(), 1.5);
        assert_eq!(k.inf_bound(), 0.5);
        assert!(IntensityField::affine(0.2, [1.0, 0.0, 0.0], 2).is_err());
    }
}
