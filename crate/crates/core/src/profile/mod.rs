//! Structure of the nonlinear medium along the propagation axis.

mod coefficients;
mod inhomogeneity;
mod poling;

pub use coefficients::{overlap_coefficients, Chi2Tensor, Chi3Tensor, InteractionCoefficients, ModeField, ModeFieldGrid};
pub use inhomogeneity::{cumulative_mismatch_phase, generate_inhomogeneity, InhomogeneityProfile};
pub use poling::{apodized_poling, inject_domain_errors, periodic_poling, Domain, DomainErrorModel, PolingPattern};
