//! Seeded generation of PDE benchmark datasets with classical solvers,
//! physics-aware error metrics, and gradient-based estimation of unknown
//! initial conditions.

pub mod error;
pub mod grid;
pub mod initcond;
pub mod inverse;
pub mod dataio;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{Cfl, Field, Grid, TimeAxis, Trajectory};
pub use rng::SeededRng;
