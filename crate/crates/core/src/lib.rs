pub mod asymptotics;
pub mod error;
pub mod integrator;
pub mod pde;
pub mod reduced;
pub mod singularity;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{FourierField, GridValues, Parity};
