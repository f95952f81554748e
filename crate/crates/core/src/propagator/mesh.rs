use super::Scenario;
use crate::{Error, Result};

/// Controls for automatic mesh construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Upper bound on `‖Q‖∞·Δz`.
    pub max_generator_phase: f64,
    /// Optional absolute step ceiling (m).
    pub max_step: Option<f64>,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { max_generator_phase: 0.1, max_step: None }
    }
}

/// Propagation mesh over `[0, L]` containing every domain wall and every
/// inhomogeneity node, refined so that no step exceeds the configured ceiling.
pub fn build_mesh(scenario: &Scenario, options: &MeshOptions) -> Result<Vec<f64>> {
    let length = scenario.length;
    let mut points = scenario.poling.boundaries();
    let walls = points.len();
    if !scenario.inhomogeneity.is_zero() {
        points.extend(scenario.inhomogeneity.mesh().iter().copied().filter(|&z| z > 0.0 && z < length));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let merge = 1e-12 * length;
    let mut nodes: Vec<f64> = Vec::with_capacity(points.len());
    for z in points {
        match nodes.last() {
            Some(&last) if z - last <= merge => {}
            _ => nodes.push(z),
        }
    }
    *nodes.last_mut().unwrap() = length;
    debug_assert!(nodes.len() >= 2 && walls >= 2);

    let norm = scenario.generator_norm()?;
    let mut ceiling = if norm > 0.0 { options.max_generator_phase / norm } else { f64::INFINITY };
    if let Some(step) = options.max_step {
        if !(step > 0.0) {
            return Err(Error::Mesh(format!("maximum step must be positive, got {step}")));
        }
        ceiling = ceiling.min(step);
    }

    let mut mesh = Vec::with_capacity(nodes.len());
    mesh.push(nodes[0]);
    for w in nodes.windows(2) {
        let pieces = if ceiling.is_finite() { ((w[1] - w[0]) / ceiling).ceil().max(1.0) as usize } else { 1 };
        let h = (w[1] - w[0]) / pieces as f64;
        for k in 1..pieces {
            mesh.push(w[0] + k as f64 * h);
        }
        mesh.push(w[1]);
    }
    Ok(mesh)
}

/// Uniform mesh of `steps` intervals with every domain wall and
/// inhomogeneity node inserted.
pub fn uniform_mesh(scenario: &Scenario, steps: usize) -> Vec<f64> {
    let length = scenario.length;
    let mut points: Vec<f64> = (0..=steps).map(|k| length * k as f64 / steps as f64).collect();
    points.extend(scenario.poling.boundaries());
    if !scenario.inhomogeneity.is_zero() {
        points.extend(scenario.inhomogeneity.mesh().iter().copied().filter(|&z| z > 0.0 && z < length));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * length);
    *points.last_mut().unwrap() = length;
    points
}

/// Checks that `mesh` is strictly increasing inside `[0, L]` and that no
/// step straddles a domain wall.
pub fn validate_mesh(scenario: &Scenario, mesh: &[f64]) -> Result<()> {
    let length = scenario.length;
    let tol = 1e-12 * length;
    if mesh.len() < 2 {
        return Err(Error::Mesh("mesh needs at least two points".into()));
    }
    if mesh.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Mesh("mesh must be strictly increasing".into()));
    }
    let (a, b) = (mesh[0], mesh[mesh.len() - 1]);
    if a < -tol || b > length + tol {
        return Err(Error::Mesh(format!("mesh [{a:e}, {b:e}] leaves the device [0, {length:e}]")));
    }
    for wall in scenario.poling.boundaries() {
        if wall <= a + tol || wall >= b - tol {
            continue;
        }
        let k = mesh.partition_point(|&z| z < wall - tol);
        if k >= mesh.len() || (mesh[k] - wall).abs() > tol {
            return Err(Error::Mesh(format!("domain wall at {wall:e} m is not a mesh point")));
        }
    }
    Ok(())
}

/// Checks that `mesh` spans the whole device.
pub fn validate_full_mesh(scenario: &Scenario, mesh: &[f64]) -> Result<()> {
    validate_mesh(scenario, mesh)?;
    let tol = 1e-12 * scenario.length;
    if mesh[0].abs() > tol || (mesh[mesh.len() - 1] - scenario.length).abs() > tol {
        return Err(Error::Mesh("mesh must start at 0 and end at the device length".into()));
    }
    Ok(())
}
