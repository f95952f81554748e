use std::path::Path;

use rand_distr::{Distribution, StandardNormal};

use crate::seed;
use crate::{Error, Result};

/// Residual phase mismatch `Δβ_TWM(z)` from fabrication-induced geometry
/// variation.
///
/// Samples live on the nodes of a mesh. Between nodes the mismatch is the
/// average of the two neighbouring samples, so the accumulated phase at the
/// nodes is the trapezoid sum and is linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct InhomogeneityProfile {
    mesh: Vec<f64>,
    values: Vec<f64>,
    range: f64,
    smoothing_length: f64,
    seed: u64,
}

impl InhomogeneityProfile {
    /// No residual mismatch anywhere on `[0, length]`.
    pub fn zero(length: f64) -> Self {
        Self { mesh: vec![0.0, length], values: vec![0.0, 0.0], range: 0.0, smoothing_length: length, seed: 0 }
    }

    pub fn from_samples(mesh: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if mesh.len() < 2 || mesh.len() != values.len() || mesh.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInhomogeneity(
                "needs ≥ 2 strictly increasing mesh points with matching values".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInhomogeneity("non-finite mismatch sample".into()));
        }
        let (lo, hi) = min_max(&values);
        Ok(Self { mesh, values, range: hi - lo, smoothing_length: 0.0, seed: 0 })
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn smoothing_length(&self) -> f64 {
        self.smoothing_length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Mismatch on the interval containing `z` (right-continuous at nodes).
    pub fn value_at(&self, z: f64) -> f64 {
        let n = self.mesh.len();
        let k = self.mesh.partition_point(|&m| m <= z).clamp(1, n - 1) - 1;
        0.5 * (self.values[k] + self.values[k + 1])
    }

    /// `∫₀^z Δβ_TWM` with the profile's own origin at `mesh[0]`.
    pub fn phase_at(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.mesh.len() - 1 {
            let (a, b) = (self.mesh[k], self.mesh[k + 1]);
            if z <= a {
                break;
            }
            acc += 0.5 * (self.values[k] + self.values[k + 1]) * (z.min(b) - a);
        }
        acc
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
        w.write_record(["z_m", "delta_beta_rad_per_m"]).map_err(|e| Error::io(path, e))?;
        for (z, v) in self.mesh.iter().zip(&self.values) {
            w.write_record([format!("{z:e}"), format!("{v:e}")]).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::io(path, e))?;
        let mut mesh = Vec::new();
        let mut values = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::io(path, e))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidInhomogeneity(format!("{s}: {e}")));
            mesh.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        Self::from_samples(mesh, values)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Smoothed random walk with zero mean and peak-to-peak range `range`.
///
/// Standard-normal steps are accumulated over the mesh nodes, smoothed by a
/// centred moving average spanning `smoothing_length`, made zero-mean and
/// rescaled to the requested range.
pub fn generate_inhomogeneity(range: f64, smoothing_length: f64, mesh: &[f64], seed: u64) -> Result<InhomogeneityProfile> {
    if !(range >= 0.0) || !range.is_finite() {
        return Err(Error::InvalidInhomogeneity(format!("range must be non-negative, got {range}")));
    }
    if mesh.len() < 2 || mesh.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInhomogeneity("mesh must have ≥ 2 strictly increasing points".into()));
    }
    let max_spacing = mesh.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if !(smoothing_length >= max_spacing * (1.0 - 1e-9)) {
        return Err(Error::InvalidInhomogeneity(format!(
            "smoothing length {smoothing_length:e} m is shorter than the mesh spacing {max_spacing:e} m"
        )));
    }
    let n = mesh.len();
    if range == 0.0 {
        return Ok(InhomogeneityProfile { mesh: mesh.to_vec(), values: vec![0.0; n], range, smoothing_length, seed });
    }

    let mut rng = seed::rng(seed);
    let mut walk = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        let step: f64 = StandardNormal.sample(&mut rng);
        acc += step;
        walk.push(acc);
    }

    let half = 0.5 * smoothing_length;
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        prefix[k + 1] = prefix[k] + walk[k];
    }
    let mut smooth = Vec::with_capacity(n);
    for k in 0..n {
        let lo = mesh.partition_point(|&z| z < mesh[k] - half);
        let hi = mesh.partition_point(|&z| z <= mesh[k] + half);
        smooth.push((prefix[hi] - prefix[lo]) / (hi - lo) as f64);
    }

    let mean = smooth.iter().sum::<f64>() / n as f64;
    smooth.iter_mut().for_each(|v| *v -= mean);
    let (lo, hi) = min_max(&smooth);
    if !(hi - lo > 0.0) {
        return Err(Error::InvalidInhomogeneity("smoothed walk is flat; refine the mesh".into()));
    }
    let scale = range / (hi - lo);
    smooth.iter_mut().for_each(|v| *v *= scale);
    let mean = smooth.iter().sum::<f64>() / n as f64;
    smooth.iter_mut().for_each(|v| *v -= mean);
    Ok(InhomogeneityProfile { mesh: mesh.to_vec(), values: smooth, range, smoothing_length, seed })
}

/// `∫_{z_0}^{z_l} (Δβ₀ + Δβ_TWM(z)) dz` at every position, with `z_0 = positions[0]`.
pub fn cumulative_mismatch_phase(profile: &InhomogeneityProfile, baseline: f64, positions: &[f64]) -> Vec<f64> {
    let Some(&z0) = positions.first() else {
        return Vec::new();
    };
    let origin = profile.phase_at(z0);
    positions.iter().map(|&z| baseline * (z - z0) + profile.phase_at(z) - origin).collect()
}
