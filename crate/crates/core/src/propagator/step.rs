use std::f64::consts::PI;

use num_complex::Complex64;

use super::ProcessKind;
use crate::linalg;
use crate::profile::InteractionCoefficients;
use crate::{CMatrix, Error, Result};

/// Coefficient blocks of the generator `Q` on one propagation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGenerator {
    pub f: CMatrix,
    pub g: CMatrix,
    pub h: CMatrix,
    pub dz: f64,
}

impl StepGenerator {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `Q = [[G, F], [−F†, −H]]` for down-conversion and
    /// `Q = [[G, F*], [Fᵀ, H]]` for frequency conversion.
    pub fn generator(&self, kind: ProcessKind) -> CMatrix {
        generator_matrix(kind, &self.f, &self.g, &self.h)
    }
}

pub fn generator_matrix(kind: ProcessKind, f: &CMatrix, g: &CMatrix, h: &CMatrix) -> CMatrix {
    let n = g.nrows();
    let mut q = CMatrix::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(g);
    match kind {
        ProcessKind::Pdc => {
            q.view_mut((0, n), (n, n)).copy_from(f);
            q.view_mut((n, 0), (n, n)).copy_from(&(-f.adjoint()));
            q.view_mut((n, n), (n, n)).copy_from(&(-h));
        }
        ProcessKind::Qfc => {
            q.view_mut((0, n), (n, n)).copy_from(&f.map(|c| c.conj()));
            q.view_mut((n, 0), (n, n)).copy_from(&f.transpose());
            q.view_mut((n, n), (n, n)).copy_from(h);
        }
    }
    q
}

/// Index of the pump sample coupling signal `m` to idler `n`.
pub fn pump_index(kind: ProcessKind, n_modes: usize, m: usize, n: usize) -> usize {
    match kind {
        ProcessKind::Pdc => m + n,
        ProcessKind::Qfc => n + n_modes - 1 - m,
    }
}

/// Everything the generator depends on at one position.
#[derive(Debug, Clone, Copy)]
pub struct StepInputs<'a> {
    pub kind: ProcessKind,
    pub walk_off_signal: &'a [f64],
    pub walk_off_idler: &'a [f64],
    /// `𝒜(z, ω_{i,n} ± ω_{s,m})` at the `2N − 1` distinct pair frequencies,
    /// ordered by [`pump_index`].
    pub pump: &'a [Complex64],
    /// `ℰ(kΔω)` for `k = −(N−1) … N−1`.
    pub energy: &'a [Complex64],
    pub coefficients: &'a InteractionCoefficients,
    pub g: f64,
    pub h: f64,
    /// `∫ Δβ_TWM dz` up to this position.
    pub mismatch_phase: f64,
    pub spacing: f64,
    pub dz: f64,
}

pub fn assemble_step(inputs: &StepInputs) -> Result<StepGenerator> {
    let n = inputs.walk_off_signal.len();
    if n == 0 || inputs.walk_off_idler.len() != n {
        return Err(Error::InconsistentBands(format!(
            "signal and idler grids have {} and {} points",
            n,
            inputs.walk_off_idler.len()
        )));
    }
    if inputs.pump.len() != 2 * n - 1 {
        return Err(Error::Coverage(format!("{} pump pair frequencies, {} supplied", 2 * n - 1, inputs.pump.len())));
    }
    if inputs.energy.len() != 2 * n - 1 {
        return Err(Error::Coverage(format!("{} energy offsets, {} supplied", 2 * n - 1, inputs.energy.len())));
    }
    let c = inputs.coefficients;
    let twm = c.twm * inputs.g / (2.0 * PI).sqrt() * Complex64::from_polar(1.0, inputs.mismatch_phase) * inputs.spacing;
    let f = CMatrix::from_fn(n, n, |m, k| twm * inputs.pump[pump_index(inputs.kind, n, m, k)]);
    let xpm = |coef: Complex64, walk: &[f64]| {
        let scale = coef * inputs.h / (2.0 * PI) * inputs.spacing;
        CMatrix::from_fn(n, n, |m, k| {
            let diag = if m == k { walk[m] } else { 0.0 };
            Complex64::new(diag, 0.0) + scale * inputs.energy[m + n - 1 - k]
        })
    };
    Ok(StepGenerator {
        f,
        g: xpm(c.xpm_signal, inputs.walk_off_signal),
        h: xpm(c.xpm_idler, inputs.walk_off_idler),
        dz: inputs.dz,
    })
}

/// `exp(i·Q·Δz)`.
pub fn step_exponential(q: &CMatrix, dz: f64) -> Result<CMatrix> {
    if !dz.is_finite() {
        return Err(Error::Numeric("step length".into()));
    }
    linalg::expm(&(q * Complex64::new(0.0, dz)))
}
