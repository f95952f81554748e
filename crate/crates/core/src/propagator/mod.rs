//! Step generators, the ordered-product propagator and its checks.
//!
//! The product is evaluated in a frame co-rotating with the accumulated
//! mismatch phase `φ(z) = ∫ Δβ dz`. In that frame the generator is constant
//! on every step of a clean device, so one exponential per step is exact;
//! the result is transformed back to the laboratory frame at the end.

mod export;
mod inverse;
mod loss;
mod mesh;
mod ode;
mod scenario;
mod step;
mod trotter;

use serde::{Deserialize, Serialize};

pub use export::PropagatorRecord;
pub use inverse::{inverse_propagator, InversePropagator};
pub use loss::{BandLoss, LossModel};
pub use mesh::{build_mesh, uniform_mesh, validate_full_mesh, validate_mesh, MeshOptions};
pub use ode::{ode_reference, ode_reference_with, OdeOptions};
pub use scenario::{pair_frequencies, PulseDrive, PumpDrive, Scenario, ScenarioSpec};
pub use step::{assemble_step, generator_matrix, pump_index, step_exponential, StepGenerator, StepInputs};
pub use trotter::{
    propagator_distance, trotter_propagate, trotter_propagate_segment, trotter_propagate_with, LossKind, Propagator,
    TrotterOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Pdc,
    Qfc,
}

impl ProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::Pdc => "PDC",
            ProcessKind::Qfc => "QFC",
        }
    }
}
