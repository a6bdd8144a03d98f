//! Poisson–Voronoi approximation laboratory.
//!
//! Samples Poisson processes, builds clipped Voronoi diagrams with exact
//! combinatorics, and measures how well unions of Voronoi cells approximate a
//! target set, together with the half-space reference model and the experiment
//! harness used to fit scaling laws.

pub mod domain;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod halfspace;
pub mod pointprocess;
pub mod shapes;
pub mod statistics;

pub use domain::{Aabb, Domain, Point};
pub use error::{PvError, Result};
