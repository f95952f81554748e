//! Scenario configuration files.
//!
//! A config is a single TOML document. Relative paths inside it resolve
//! against the directory holding the file. Sweeps rewrite one dotted key of
//! the parsed document and re-validate the result, so any key accepted here
//! can be swept.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diag::{HarnessError, HarnessResult};
use qtwm_core::propagator::ProcessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pdc,
    Qfc,
}

impl From<Kind> for ProcessKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Pdc => ProcessKind::Pdc,
            Kind::Qfc => ProcessKind::Qfc,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: Kind,
    pub waveguide: Waveguide,
    pub dispersion: Dispersion,
    pub grid: Grid,
    pub pump: Pump,
    pub coefficients: Coefficients,
    pub poling: Poling,
    #[serde(default)]
    pub errors: Errors,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub mesh: Mesh,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub spm_scan: SpmScan,
    /// Default value lists for `sweep`, keyed by dotted parameter path.
    #[serde(default)]
    pub presets: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub combined: Combined,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waveguide {
    /// Device length (m).
    pub length: f64,
}

/// Effective-index tables (`lambda_m,n_eff` or `omega_rad_s,n_eff`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dispersion {
    pub pump: PathBuf,
    pub signal: PathBuf,
    pub idler: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Centre of the signal band (m).
    pub signal_wavelength: f64,
    /// Centre of the idler band (m). Derived from energy conservation when
    /// absent; checked against it when given.
    #[serde(default)]
    pub idler_wavelength: Option<f64>,
    pub modes: usize,
    /// Angular frequency spacing shared by both bands (rad/s).
    pub spacing: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pump {
    pub wavelength: f64,
    /// Intensity FWHM of the Gaussian pulse (s).
    pub fwhm: f64,
    pub photons: f64,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Real(f64),
    Complex([f64; 2]),
}

impl Coefficient {
    pub fn value(self) -> Complex64 {
        match self {
            Coefficient::Real(r) => Complex64::new(r, 0.0),
            Coefficient::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default)]
    pub twm: Option<Coefficient>,
    #[serde(default)]
    pub xpm_signal: Option<Coefficient>,
    #[serde(default)]
    pub xpm_idler: Option<Coefficient>,
    #[serde(default)]
    pub spm: Option<Coefficient>,
    /// Transverse mode fields; replaces the direct values when present.
    #[serde(default)]
    pub mode_fields: Option<ModeFields>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeFields {
    pub pump: PathBuf,
    pub signal: PathBuf,
    pub idler: PathBuf,
    /// `[j, k, l]` with x, y, z = 0, 1, 2.
    pub chi2_component: [usize; 3],
    /// m/V.
    pub chi2: f64,
    #[serde(default)]
    pub chi3_component: Option<[usize; 4]>,
    /// m²/V².
    #[serde(default)]
    pub chi3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolingKind {
    Unpoled,
    Periodic,
    Apodized,
    File,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Poling {
    pub kind: PolingKind,
    /// Poling period (m); `2π/|Δβ0|` at the band centres when absent.
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default = "half")]
    pub duty: f64,
    /// 1/e half-width of the Gaussian apodization target, in device lengths.
    #[serde(default = "quarter")]
    pub apodization_width: f64,
    /// Domain table for `kind = "file"`.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Errors {
    /// Signal and idler propagation loss (dB/cm).
    #[serde(default)]
    pub loss_db_per_cm: f64,
    /// Pump loss (dB/cm); follows `loss_db_per_cm` when absent.
    #[serde(default)]
    pub pump_loss_db_per_cm: Option<f64>,
    /// Outward shift of inverted-domain walls (m).
    #[serde(default)]
    pub domain_shift: f64,
    #[serde(default)]
    pub missing_probability: f64,
    /// Peak-to-peak range of the residual mismatch profile (rad/m).
    #[serde(default)]
    pub inhomogeneity_range: f64,
    /// Moving-average length of the mismatch profile (m); one node spacing when absent.
    #[serde(default)]
    pub smoothing_length: Option<f64>,
    #[serde(default = "default_nodes")]
    pub inhomogeneity_nodes: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    #[serde(default)]
    pub master: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    /// Upper bound on `‖Q‖∞·Δz` per step.
    #[serde(default = "default_phase")]
    pub max_generator_phase: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
}

impl Default for Mesh {
    fn default() -> Self {
        Self { max_generator_phase: default_phase(), max_step: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropagatorFormat {
    Json,
    Binary,
    Both,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "default_format")]
    pub propagator: PropagatorFormat,
}

impl Default for Output {
    fn default() -> Self {
        Self { dir: default_out(), propagator: default_format() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpmScan {
    /// FOM boundaries between near-zero, weak and strong self-phase modulation.
    #[serde(default = "default_thresholds")]
    pub thresholds: [f64; 2],
    /// Loss applied to all fields during the scan (dB/cm).
    #[serde(default = "default_scan_loss")]
    pub loss_db_per_cm: f64,
}

impl Default for SpmScan {
    fn default() -> Self {
        Self { thresholds: default_thresholds(), loss_db_per_cm: default_scan_loss() }
    }
}

/// Joint sweep: step `t ∈ [0, 1]` sets every listed key to `t·maximum`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Combined {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub maxima: BTreeMap<String, f64>,
}

impl Default for Combined {
    fn default() -> Self {
        Self { steps: default_steps(), maxima: BTreeMap::new() }
    }
}

fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn default_nodes() -> usize {
    64
}
fn default_phase() -> f64 {
    0.1
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_format() -> PropagatorFormat {
    PropagatorFormat::Json
}
fn default_thresholds() -> [f64; 2] {
    [0.99, 0.9]
}
fn default_scan_loss() -> f64 {
    0.5
}
fn default_steps() -> usize {
    4
}

/// A parsed config with the context needed to resolve and re-derive it.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub raw: toml::Value,
    pub base_dir: PathBuf,
    /// Hex SHA-256 of the file bytes.
    pub sha256: String,
}

pub fn load(path: &Path) -> HarnessResult<LoadedConfig> {
    let bytes = std::fs::read(path).map_err(|e| HarnessError::config("load", path.display().to_string(), e))?;
    let sha256 = hex(&Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| HarnessError::config("load", path.display().to_string(), e))?;
    let raw: toml::Value = toml::from_str(&text).map_err(|e| HarnessError::config("parse", path.display().to_string(), e))?;
    let config = decode(&raw)?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let loaded = LoadedConfig { config, raw, base_dir, sha256 };
    loaded.validate()?;
    Ok(loaded)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn decode(raw: &toml::Value) -> HarnessResult<ScenarioConfig> {
    raw.clone().try_into().map_err(|e: toml::de::Error| {
        let message = e.message().to_string();
        let key = unknown_key(&message).unwrap_or_else(|| "config".into());
        HarnessError::config("parse", key, message)
    })
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

impl LoadedConfig {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Copy of this config with `key` (dotted path) set to `value`.
    pub fn with_value(&self, key: &str, value: f64) -> HarnessResult<LoadedConfig> {
        let mut raw = self.raw.clone();
        set_path(&mut raw, key, value)?;
        let config = decode(&raw).map_err(|e| match e {
            HarnessError::Config { message, .. } => HarnessError::config("override", key, message),
            other => other,
        })?;
        let next = LoadedConfig { config, raw, base_dir: self.base_dir.clone(), sha256: self.sha256.clone() };
        next.validate().map_err(|e| match e {
            HarnessError::Config { key: inner, message, .. } => {
                HarnessError::config("override", key, format!("{inner}: {message}"))
            }
            other => other,
        })?;
        Ok(next)
    }

    /// Copy with every key of the combined preset scaled by `fraction`.
    pub fn with_combined(&self, fraction: f64) -> HarnessResult<LoadedConfig> {
        if self.config.combined.maxima.is_empty() {
            return Err(HarnessError::config("override", "combined.maxima", "no keys listed for the combined sweep"));
        }
        let mut next = self.clone();
        for (key, max) in &self.config.combined.maxima {
            next = next.with_value(key, fraction * max)?;
        }
        Ok(next)
    }

    pub fn validate(&self) -> HarnessResult<()> {
        let c = &self.config;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(HarnessError::config("validate", key, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(HarnessError::config("validate", key, format!("must be non-negative, got {v}")))
            }
        };
        positive("waveguide.length", c.waveguide.length)?;
        positive("grid.signal_wavelength", c.grid.signal_wavelength)?;
        if let Some(w) = c.grid.idler_wavelength {
            positive("grid.idler_wavelength", w)?;
        }
        positive("grid.spacing", c.grid.spacing)?;
        if c.grid.modes < 2 {
            return Err(HarnessError::config("validate", "grid.modes", format!("need at least 2 modes, got {}", c.grid.modes)));
        }
        positive("pump.wavelength", c.pump.wavelength)?;
        positive("pump.fwhm", c.pump.fwhm)?;
        non_negative("pump.photons", c.pump.photons)?;
        if let Some(p) = c.poling.period {
            positive("poling.period", p)?;
        }
        if !(c.poling.duty > 0.0 && c.poling.duty < 1.0) {
            return Err(HarnessError::config("validate", "poling.duty", format!("must lie in (0, 1), got {}", c.poling.duty)));
        }
        positive("poling.apodization_width", c.poling.apodization_width)?;
        if c.poling.kind == PolingKind::File && c.poling.file.is_none() {
            return Err(HarnessError::config("validate", "poling.file", "required when poling.kind = \"file\""));
        }
        let e = &c.errors;
        non_negative("errors.loss_db_per_cm", e.loss_db_per_cm)?;
        if let Some(p) = e.pump_loss_db_per_cm {
            non_negative("errors.pump_loss_db_per_cm", p)?;
        }
        if !e.domain_shift.is_finite() {
            return Err(HarnessError::config("validate", "errors.domain_shift", "must be finite"));
        }
        if !(0.0..=1.0).contains(&e.missing_probability) {
            return Err(HarnessError::config(
                "validate",
                "errors.missing_probability",
                format!("must lie in [0, 1], got {}", e.missing_probability),
            ));
        }
        non_negative("errors.inhomogeneity_range", e.inhomogeneity_range)?;
        if let Some(s) = e.smoothing_length {
            positive("errors.smoothing_length", s)?;
        }
        if e.inhomogeneity_nodes == 0 {
            return Err(HarnessError::config("validate", "errors.inhomogeneity_nodes", "must be at least 1"));
        }
        positive("mesh.max_generator_phase", c.mesh.max_generator_phase)?;
        if let Some(s) = c.mesh.max_step {
            positive("mesh.max_step", s)?;
        }
        let [hi, lo] = c.spm_scan.thresholds;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(HarnessError::config(
                "validate",
                "spm_scan.thresholds",
                format!("need 0 < second ≤ first ≤ 1, got [{hi}, {lo}]"),
            ));
        }
        non_negative("spm_scan.loss_db_per_cm", c.spm_scan.loss_db_per_cm)?;
        if c.combined.steps == 0 {
            return Err(HarnessError::config("validate", "combined.steps", "must be at least 1"));
        }

        let mut files = vec![
            ("dispersion.pump", &c.dispersion.pump),
            ("dispersion.signal", &c.dispersion.signal),
            ("dispersion.idler", &c.dispersion.idler),
        ];
        if let Some(f) = &c.poling.file {
            files.push(("poling.file", f));
        }
        if let Some(m) = &c.coefficients.mode_fields {
            files.extend([("coefficients.mode_fields.pump", &m.pump), ("coefficients.mode_fields.signal", &m.signal)]);
            files.push(("coefficients.mode_fields.idler", &m.idler));
        }
        for (key, file) in files {
            let path = self.resolve(file);
            if !path.is_file() {
                return Err(HarnessError::config("validate", key, format!("file not found: {}", path.display())));
            }
        }
        match &c.coefficients.mode_fields {
            Some(_) if c.coefficients.twm.is_some() => Err(HarnessError::config(
                "validate",
                "coefficients.twm",
                "give either direct coefficients or mode_fields, not both",
            )),
            None if c.coefficients.twm.is_none() => {
                Err(HarnessError::config("validate", "coefficients.twm", "missing three-wave coefficient"))
            }
            _ => Ok(()),
        }
    }
}

/// Sets a dotted key, creating intermediate tables. Integer-valued numbers
/// replace integers as integers.
fn set_path(root: &mut toml::Value, key: &str, value: f64) -> HarnessResult<()> {
    if !value.is_finite() {
        return Err(HarnessError::config("override", key, format!("non-finite value {value}")));
    }
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::config("override", key, "malformed parameter path"));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| HarnessError::config("override", key, format!("`{part}` is not inside a table")))?;
        node = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| HarnessError::config("override", key, "parent is not a table"))?;
    let last = parts[parts.len() - 1].to_string();
    let integral = matches!(table.get(&last), Some(toml::Value::Integer(_)));
    let new = if integral && value.fract() == 0.0 && value.abs() < 9.0e15 {
        toml::Value::Integer(value as i64)
    } else {
        toml::Value::Float(value)
    };
    table.insert(last, new);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_path_keeps_integers() {
        let mut v: toml::Value = toml::from_str("[grid]\nmodes = 8\nspacing = 1.0").unwrap();
        set_path(&mut v, "grid.modes", 12.0).unwrap();
        set_path(&mut v, "grid.spacing", 3.0).unwrap();
        assert_eq!(v["grid"]["modes"], toml::Value::Integer(12));
        assert_eq!(v["grid"]["spacing"], toml::Value::Float(3.0));
        set_path(&mut v, "errors.loss_db_per_cm", 0.5).unwrap();
        assert_eq!(v["errors"]["loss_db_per_cm"], toml::Value::Float(0.5));
    }

    #[test]
    fn malformed_paths_are_rejected() {
        let mut v: toml::Value = toml::from_str("a = 1").unwrap();
        assert!(set_path(&mut v, "a..b", 1.0).is_err());
        assert!(set_path(&mut v, "a.b", 1.0).is_err());
    }

    #[test]
    fn coefficients_accept_real_or_pair() {
        #[derive(Deserialize)]
        struct T {
            a: Coefficient,
            b: Coefficient,
        }
        let t: T = toml::from_str("a = 2.5\nb = [1.0, -0.5]").unwrap();
        assert_eq!(t.a.value(), Complex64::new(2.5, 0.0));
        assert_eq!(t.b.value(), Complex64::new(1.0, -0.5));
    }
}
