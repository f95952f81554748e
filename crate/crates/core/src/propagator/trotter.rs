use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mesh::{validate_full_mesh, validate_mesh};
use super::step::step_exponential;
use super::{LossModel, ProcessKind, Scenario};
use crate::linalg::{self, frobenius, matmul, symplectic_metric};
use crate::spectral::FrequencyGrid;
use crate::{CMatrix, Error, Result};

/// How loss is represented in a [`Propagator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Lossless,
    /// `matrix` is lossless; the physical propagator is `transmission·matrix`.
    Uniform,
    /// Loss factors are interleaved into `matrix`, which is not pseudo-unitary.
    Interleaved,
}

/// Heisenberg-picture propagator acting on `(a_s, a_i†)` (down-conversion)
/// or `(a_s, a_i)` (frequency conversion).
///
/// For down-conversion the stored matrix is `[[K^ss, K^si], [K^is*, K^ii*]]`;
/// the block accessors return the unconjugated blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    kind: ProcessKind,
    matrix: CMatrix,
    transmission: f64,
    loss: LossKind,
    grids: Option<(FrequencyGrid, FrequencyGrid)>,
}

impl Propagator {
    pub fn new(kind: ProcessKind, matrix: CMatrix, transmission: f64, loss: LossKind) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 || matrix.nrows() == 0 {
            return Err(Error::InvalidInput("propagator must be a non-empty 2N×2N matrix".into()));
        }
        if !(transmission >= 0.0 && transmission <= 1.0) {
            return Err(Error::InvalidLoss(format!("transmission {transmission} outside [0, 1]")));
        }
        Ok(Self { kind, matrix, transmission, loss, grids: None })
    }

    pub fn with_grids(mut self, grids: Option<(FrequencyGrid, FrequencyGrid)>) -> Self {
        self.grids = grids;
        self
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Stored matrix (without the band-uniform transmission factor).
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Accumulated band-uniform amplitude transmission `η_tot`.
    pub fn transmission(&self) -> f64 {
        self.transmission
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn grids(&self) -> Option<&(FrequencyGrid, FrequencyGrid)> {
        self.grids.as_ref()
    }

    pub fn is_pseudo_unitary(&self) -> bool {
        self.loss == LossKind::Lossless || (self.loss == LossKind::Uniform && self.transmission == 1.0)
    }

    /// Physical system propagator including loss.
    pub fn effective(&self) -> CMatrix {
        if self.loss == LossKind::Uniform && self.transmission != 1.0 {
            &self.matrix * Complex64::new(self.transmission, 0.0)
        } else {
            self.matrix.clone()
        }
    }

    fn stored_block(&self, row: usize, col: usize) -> CMatrix {
        let n = self.dim();
        let m = self.effective();
        m.view((row * n, col * n), (n, n)).into_owned()
    }

    fn physical(&self, row: usize, col: usize) -> CMatrix {
        let b = self.stored_block(row, col);
        if self.kind == ProcessKind::Pdc && row == 1 {
            b.map(|c| c.conj())
        } else {
            b
        }
    }

    pub fn k_ss(&self) -> CMatrix {
        self.physical(0, 0)
    }

    pub fn k_si(&self) -> CMatrix {
        self.physical(0, 1)
    }

    pub fn k_is(&self) -> CMatrix {
        self.physical(1, 0)
    }

    pub fn k_ii(&self) -> CMatrix {
        self.physical(1, 1)
    }

    /// `‖K J K† − J‖_F` for down-conversion, `‖K†K − I‖_F` for conversion.
    pub fn commutator_defect(&self) -> f64 {
        let k = self.effective();
        match self.kind {
            ProcessKind::Pdc => {
                let j = symplectic_metric(self.dim());
                frobenius(&(matmul(&matmul(&k, &j), &k.adjoint()) - j))
            }
            ProcessKind::Qfc => frobenius(&(matmul(&k.adjoint(), &k) - CMatrix::identity(k.nrows(), k.nrows()))),
        }
    }

    /// Propagator for `self` followed by `later`.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        if self.kind != later.kind || self.dim() != later.dim() {
            return Err(Error::KindMismatch { expected: self.kind.name(), actual: later.kind.name() });
        }
        let (matrix, transmission, loss) = match (self.loss, later.loss) {
            (LossKind::Interleaved, _) | (_, LossKind::Interleaved) => {
                (matmul(&later.effective(), &self.effective()), 1.0, LossKind::Interleaved)
            }
            (a, b) => {
                let loss = if a == LossKind::Lossless && b == LossKind::Lossless { LossKind::Lossless } else { LossKind::Uniform };
                (matmul(&later.matrix, &self.matrix), self.transmission * later.transmission, loss)
            }
        };
        Ok(Propagator { kind: self.kind, matrix, transmission, loss, grids: self.grids.clone() })
    }
}

/// Trotter options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrotterOptions {
    /// Apply band-uniform loss step by step instead of as one factor.
    pub interleave_uniform_loss: bool,
}

/// Ordered product of step exponentials over a mesh spanning `[0, L]`.
pub fn trotter_propagate(scenario: &Scenario, mesh: &[f64]) -> Result<Propagator> {
    validate_full_mesh(scenario, mesh)?;
    propagate_segment(scenario, mesh, TrotterOptions::default())
}

pub fn trotter_propagate_with(scenario: &Scenario, mesh: &[f64], options: TrotterOptions) -> Result<Propagator> {
    validate_full_mesh(scenario, mesh)?;
    propagate_segment(scenario, mesh, options)
}

/// Propagator over the sub-range spanned by `mesh`.
pub fn trotter_propagate_segment(scenario: &Scenario, mesh: &[f64]) -> Result<Propagator> {
    validate_mesh(scenario, mesh)?;
    propagate_segment(scenario, mesh, TrotterOptions::default())
}

fn quantize(x: f64) -> (i32, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let e = x.abs().log10().floor() as i32;
    (e, (x / 10f64.powi(e) * 1e13).round() as i64)
}

fn propagate_segment(scenario: &Scenario, mesh: &[f64], options: TrotterOptions) -> Result<Propagator> {
    let n = scenario.dim();
    let (a, b) = (mesh[0], mesh[mesh.len() - 1]);

    // Self-phase factor accumulated on the mesh from the device entrance.
    let spm_nodes: Option<Vec<Complex64>> = if scenario.pump_varies() {
        let mut full = Vec::with_capacity(mesh.len() + 1);
        if a > 0.0 {
            full.push(0.0);
        }
        full.extend_from_slice(mesh);
        let evolution = scenario.pump_evolution(&full).expect("pulse-driven scenario");
        let phases = evolution.phase_at_nodes();
        Some(phases[phases.len() - mesh.len()..].to_vec())
    } else {
        None
    };

    let interleave = match &scenario.loss {
        LossModel::Band(_) => true,
        LossModel::Uniform(_) => options.interleave_uniform_loss,
        LossModel::Lossless => false,
    };

    let mut cache: HashMap<(i8, (i32, i64), u64, u64, u64, u64), CMatrix> = HashMap::new();
    let mut product = CMatrix::identity(2 * n, 2 * n);
    for (l, w) in mesh.windows(2).enumerate() {
        let (z0, z1) = (w[0], w[1]);
        let mid = 0.5 * (z0 + z1);
        let dz = z1 - z0;
        let g = scenario.poling.orientation_at(mid);
        let delta_beta = scenario.delta_beta(mid);
        let (rho, spm) = match &spm_nodes {
            Some(nodes) => (scenario.pump_state(mid).0, 0.5 * (nodes[l] + nodes[l + 1])),
            None => (1.0, Complex64::new(0.0, 0.0)),
        };
        let key = (g, quantize(dz), delta_beta.to_bits(), rho.to_bits(), spm.re.to_bits(), spm.im.to_bits());
        if !cache.contains_key(&key) {
            if cache.len() >= 256 {
                cache.clear();
            }
            let (amp, energy) = scenario.pump_samples(rho, spm)?;
            let q = scenario.rotating_generator(f64::from(g), delta_beta, &amp, &energy)?;
            cache.insert(key, step_exponential(&q, dz)?);
        }
        product = matmul(&cache[&key], &product);
        if interleave {
            let eta = scenario.loss.step_factors(n, z0, z1);
            for (r, e) in eta.iter().enumerate() {
                if *e != 1.0 {
                    product.row_mut(r).scale_mut(*e);
                }
            }
        }
    }

    // Back to the laboratory frame: K = D(φ(b))·K'·D(φ(a))⁻¹.
    let (sb, ib) = scenario.frame_phases(scenario.mismatch_phase(b));
    let (sa, ia) = scenario.frame_phases(scenario.mismatch_phase(a));
    let row = |r: usize| if r < n { sb } else { ib };
    let col = |c: usize| if c < n { sa.conj() } else { ia.conj() };
    let matrix = CMatrix::from_fn(2 * n, 2 * n, |r, c| product[(r, c)] * row(r) * col(c));
    if matrix.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numeric("propagator".into()));
    }

    let (transmission, loss) = if interleave {
        (1.0, LossKind::Interleaved)
    } else {
        match scenario.loss.uniform_transmission(a, b) {
            Some(t) if scenario.loss.is_lossless() => (t, LossKind::Lossless),
            Some(t) => (t, LossKind::Uniform),
            None => unreachable!("band loss is always interleaved"),
        }
    };
    Ok(Propagator { kind: scenario.kind, matrix, transmission, loss, grids: scenario.grids.clone() })
}

/// Relative Frobenius distance helper re-exported for callers comparing propagators.
pub fn propagator_distance(a: &Propagator, b: &Propagator) -> f64 {
    linalg::relative_distance(&a.effective(), &b.effective())
}
