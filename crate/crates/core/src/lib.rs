//! Simulation of pulsed quantum three-wave mixing (parametric down-conversion
//! and quantum frequency conversion) in χ⁽²⁾ waveguides.
//!
//! The signal and idler fields are discretized on frequency grids and
//! evolved with a Heisenberg-picture propagator assembled as an ordered
//! product of step exponentials. The pieces are:
//!
//! - [`spectral`]: frequency grids, ingested dispersion, walk-off terms.
//! - [`pump`]: the classical undepleted pump, its spectral amplitude
//!   with self-phase modulation and its energy distribution.
//! - [`profile`]: poling patterns, fabrication errors, inhomogeneity and
//!   interaction coefficients.
//! - [`propagator`]: step generators, the ordered-product propagator, losses,
//!   inverse propagators and an independent ODE reference.
//! - [`analysis`]: moments, joint spectral amplitudes, Schmidt decompositions
//!   and figures of merit.

pub mod analysis;
pub mod constants;
pub mod error;
pub mod linalg;
pub mod profile;
pub mod propagator;
pub mod pump;
pub mod quadrature;
pub mod seed;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;
