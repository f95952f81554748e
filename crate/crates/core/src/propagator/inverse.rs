use num_complex::Complex64;

use super::trotter::{LossKind, Propagator};
use super::ProcessKind;
use crate::linalg::{self, matmul, symplectic_metric};
use crate::{CMatrix, Error, Result};

/// Backward propagator `K̄` with `U x_m U† = Σ_n K̄_mn x_n`.
///
/// For lossy propagation `K̄` is the minimum-norm right inverse of
/// `[η K | √(1−η²) I]`: `system` holds the rows for the signal and idler
/// inputs and `environment` those for the loss reservoir inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct InversePropagator {
    pub kind: ProcessKind,
    pub system: CMatrix,
    pub environment: Option<CMatrix>,
}

impl InversePropagator {
    fn block(&self, row: usize, col: usize) -> CMatrix {
        let n = self.system.nrows() / 2;
        self.system.view((row * n, col * n), (n, n)).into_owned()
    }

    pub fn k_ss(&self) -> CMatrix {
        self.block(0, 0)
    }

    pub fn k_si(&self) -> CMatrix {
        self.block(0, 1)
    }

    pub fn k_is(&self) -> CMatrix {
        self.block(1, 0)
    }

    pub fn k_ii(&self) -> CMatrix {
        self.block(1, 1)
    }
}

pub fn inverse_propagator(p: &Propagator) -> Result<InversePropagator> {
    let k = p.matrix();
    let exact = match p.kind() {
        ProcessKind::Qfc => k.adjoint(),
        ProcessKind::Pdc => {
            let j = symplectic_metric(p.dim());
            matmul(&matmul(&j, &k.adjoint()), &j)
        }
    };
    match p.loss() {
        LossKind::Lossless => Ok(InversePropagator { kind: p.kind(), system: exact, environment: None }),
        LossKind::Interleaved => Err(Error::InvalidLoss("the right inverse requires band-uniform loss".into())),
        LossKind::Uniform => {
            let eta = p.transmission();
            if eta == 0.0 {
                return Err(Error::DegenerateLoss);
            }
            let dim = k.nrows();
            let leak = (1.0 - eta * eta).max(0.0).sqrt();
            // A = [ηK | leak·I], A⁺ = A†(AA†)⁻¹.
            let gram = matmul(k, &k.adjoint()) * Complex64::new(eta * eta, 0.0)
                + CMatrix::identity(dim, dim) * Complex64::new(leak * leak, 0.0);
            let gram_inv = linalg::solve(&gram, &CMatrix::identity(dim, dim)).map_err(|_| Error::DegenerateLoss)?;
            let system = matmul(&k.adjoint(), &gram_inv) * Complex64::new(eta, 0.0);
            let environment = if leak > 0.0 { Some(gram_inv * Complex64::new(leak, 0.0)) } else { None };
            Ok(InversePropagator { kind: p.kind(), system, environment })
        }
    }
}
