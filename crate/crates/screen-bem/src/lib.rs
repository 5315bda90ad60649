//! Galerkin boundary-element method for Helmholtz scattering by planar
//! prefractal screens.
//!
//! The crate generates Cantor-dust and Sierpinski-family screen geometries,
//! meshes them into triangles, assembles single-layer (`P0`) and
//! hypersingular (`P1`, integration-by-parts form) Galerkin systems with
//! weakly singular quadrature, and drives convergence studies over
//! decreasing (Dirichlet) and increasing (Neumann) sequences of nested
//! screens, including capacity estimates and fractional Sobolev norms
//! evaluated from analytic elementwise Fourier transforms.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod quadrature;
pub mod sequences;
pub mod spaces;

pub use error::{Error, Result};
