//! Observables derived from a propagator.

mod input;
mod moments;
mod qfc;
mod report;

pub use input::{transform_nonvacuum_input, transform_through, LadderOp, Term};
pub use moments::{
    jsa_decompose, moment_m, photon_moments, purity, schmidt_number, squeezing_from_moment, trace_real,
    write_state_descriptor, JsaDecomposition, PhaseSensitiveMoment, SqueezerMode, StateDescriptor,
};
pub use qfc::{qfc_decompose, separability, QfcDecomposition};
pub use report::{edge_energy_fraction, figures_of_merit, FiguresOfMerit};
