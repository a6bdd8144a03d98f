//! Delaunay triangulation, clipped Voronoi diagrams and their face lattice.

pub mod clip;
pub mod delaunay2;
pub mod delaunay3;
pub mod label;
pub mod linalg;
pub mod predicates;

pub use label::Label;
pub mod diagram;
pub mod dump;

pub use diagram::{build_voronoi, Cell, Face, FaceId, VoronoiDiagram};
