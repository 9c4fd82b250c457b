//! Continuous-interior-penalty (CIP) stabilized finite elements for the
//! transient transport equation `u_t + beta . grad u = f`.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod fespace;
pub mod mesh;
pub mod operators;
pub mod quadrature;
pub mod scenarios;
pub mod sparse;
pub mod timestepper;
pub mod verify;
pub mod velocity;

pub use error::{Error, Result};

/// Scalar data `f(x, t)` shared between threads.
pub type ScalarField = std::sync::Arc<dyn Fn(mesh::Point, f64) -> f64 + Send + Sync>;
