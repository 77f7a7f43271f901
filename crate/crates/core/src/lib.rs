pub mod error;
pub mod stencil;
pub mod weighted_geometry;
pub mod profile_ode;
pub mod flow_pde;
pub mod entropy_diagnostics;
pub mod jacobi_spectral;
pub mod cli;

pub use error::{Error, Result};
