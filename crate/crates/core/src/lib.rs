//! Spectral solvers for solitary traveling waves of a fifth-order Boussinesq
//! system: a stabilized Fourier fixed-point iteration for homogeneous
//! nonlinearities, a cosine-collocation Newton method for general ones, the
//! variational functionals used to verify both, and a theta-scheme time
//! stepper that propagates computed waves.

pub mod cli;
pub mod collocation;
pub mod config;
pub mod error;
pub mod functionals;
pub mod io;
pub mod model;
pub mod nonlinearity;
pub mod petviashvili;
pub mod profile;
pub mod propagator;
pub mod report;
pub mod spectral;

pub use collocation::{CosineExpansion, NewtonConfig};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use functionals::FunctionalReport;
pub use model::{Gaussian, Grid, ModelParams};
pub use nonlinearity::{CustomNonlinearity, Nonlinearity, Slots};
pub use petviashvili::SolveConfig;
pub use profile::WaveProfile;
pub use propagator::PropagationConfig;
pub use report::{IterationRecord, SolveReport, Termination};
pub use spectral::Spectral;
