//! Spectral and scattering toolkit for the Novikov–Veselov family.

pub mod cauchy;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod grid;
pub mod io;
pub mod kgrid;
pub mod krylov;
pub mod miura;
pub mod multiplier;
pub mod scattering;
pub mod transform;
pub mod validation;

pub use cauchy::{cauchy_transform, CauchyMode, CauchyOutput, FreeSpaceCauchy, SupportWarning};
pub use error::{Error, Result};
pub use grid::{Field, GridSpec, SpaceTag};
pub use kgrid::{KGrid, Wavenumber};
pub use multiplier::{Calculus, Multiplier};
pub use num_complex::Complex64;
pub use transform::{exp_k, nv_check, nv_hat, nv_hat_grid};
