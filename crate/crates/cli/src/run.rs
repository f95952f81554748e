//! Single runs, parameter sweeps and self-phase-modulation scans.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qtwm_core::analysis::{figures_of_merit, jsa_decompose, moment_m, FiguresOfMerit, StateDescriptor};
use qtwm_core::propagator::{trotter_propagate, ProcessKind, Propagator};
use qtwm_core::pump::spm_overlap_fom;
use qtwm_core::seed::derive;
use qtwm_core::CMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::build::{build, Built};
use crate::config::{LoadedConfig, PropagatorFormat};
use crate::diag::{Context, HarnessError, HarnessResult};
use crate::plot;

/// Parameter name that selects the joint preset.
pub const COMBINED: &str = "combined";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; the config's `output.dir` when `None`.
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps and scans; 0 picks the rayon default.
    pub workers: usize,
    pub emit_plots: bool,
}

pub struct Evaluation {
    pub built: Built,
    pub propagator: Propagator,
    pub fom: FiguresOfMerit,
}

/// Builds and propagates one scenario.
pub fn evaluate(loaded: &LoadedConfig, seed: u64) -> HarnessResult<Evaluation> {
    let built = build(loaded, seed)?;
    let propagator = trotter_propagate(&built.scenario, &built.mesh).within("propagator-core", "trotter_propagate")?;
    let fom = figures_of_merit(&propagator).within("state-analysis", "figures_of_merit")?;
    Ok(Evaluation { built, propagator, fom })
}

fn out_dir(loaded: &LoadedConfig, options: &RunOptions) -> HarnessResult<PathBuf> {
    let dir = options.out.clone().unwrap_or_else(|| loaded.resolve(&loaded.config.output.dir));
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::output(&dir, e))?;
    Ok(dir)
}

fn create(path: &Path) -> HarnessResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::output(path, e))
}

fn write_text(path: &Path, text: &str) -> HarnessResult<()> {
    std::fs::write(path, text).map_err(|e| HarnessError::output(path, e))
}

fn pool(workers: usize) -> HarnessResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::config("workers", "--workers", e))
}

#[derive(Serialize)]
struct FomFile<'a> {
    config_sha256: &'a str,
    seed: u64,
    figures_of_merit: &'a FiguresOfMerit,
}

#[derive(Serialize)]
struct JsaSidecar<'a> {
    config_sha256: &'a str,
    kind: ProcessKind,
    /// What the matrix holds: the joint amplitude or the converter block.
    matrix: &'static str,
    signal_frequencies: Vec<f64>,
    idler_frequencies: Vec<f64>,
    mode_weights: &'a [f64],
    schmidt_number: Option<f64>,
    photons_signal: Option<f64>,
    photons_idler: Option<f64>,
    conversion_probability: Option<f64>,
    separability: Option<f64>,
}

#[derive(Serialize)]
struct StateFile<'a> {
    config_sha256: &'a str,
    seed: u64,
    state: serde_json::Value,
}

/// Files written by `simulate`.
#[derive(Debug, Clone)]
pub struct SimulateReport {
    pub dir: PathBuf,
    pub seed: u64,
    pub fom: FiguresOfMerit,
    pub files: Vec<PathBuf>,
}

/// Seed of a single `simulate` run.
pub fn single_seed(master: u64) -> u64 {
    derive(master, 0)
}

/// Seed for repetition `rep` of sweep value `index`.
pub fn sweep_seed(master: u64, index: usize, rep: usize) -> u64 {
    derive(master, ((index as u64) << 32) | rep as u64)
}

pub fn simulate(loaded: &LoadedConfig, options: &RunOptions) -> HarnessResult<SimulateReport> {
    let dir = out_dir(loaded, options)?;
    let seed = single_seed(loaded.config.seeds.master);
    let eval = evaluate(loaded, seed)?;
    let hash = loaded.sha256.as_str();
    let mut files = Vec::new();

    let fom_path = dir.join("fom.json");
    let body = serde_json::to_string_pretty(&FomFile { config_sha256: hash, seed, figures_of_merit: &eval.fom })
        .map_err(|e| HarnessError::output(&fom_path, e))?;
    write_text(&fom_path, &(body + "\n"))?;
    files.push(fom_path);

    let p = &eval.propagator;
    let (matrix, label) = match p.kind() {
        ProcessKind::Pdc => {
            let dec = jsa_decompose(&moment_m(p).within("state-analysis", "moment_m")?).within("state-analysis", "jsa_decompose")?;
            let state_path = dir.join("state.json");
            let descriptor = StateDescriptor::from_decomposition(&dec);
            let state: serde_json::Value = serde_json::from_str(&descriptor.to_json().within("state-analysis", "descriptor")?)
                .map_err(|e| HarnessError::output(&state_path, e))?;
            let text = serde_json::to_string_pretty(&StateFile { config_sha256: hash, seed, state })
                .map_err(|e| HarnessError::output(&state_path, e))?;
            write_text(&state_path, &(text + "\n"))?;
            files.push(state_path);
            (dec.jsa, "joint spectral amplitude")
        }
        ProcessKind::Qfc => (p.k_is(), "signal-to-idler transfer block"),
    };
    let (signal, idler) = eval.built.scenario.grids.clone().expect("config scenarios carry grids");
    let (ws, wi) = (signal.points(), idler.points());
    files.push(write_matrix_csv(&dir.join("jsa_abs.csv"), hash, &ws, &wi, &matrix, |c| c.norm())?);
    files.push(write_matrix_csv(&dir.join("jsa_phase.csv"), hash, &ws, &wi, &matrix, |c| c.arg())?);

    let sidecar_path = dir.join("jsa.json");
    let fom = &eval.fom;
    let sidecar = JsaSidecar {
        config_sha256: hash,
        kind: p.kind(),
        matrix: label,
        signal_frequencies: ws.clone(),
        idler_frequencies: wi.clone(),
        mode_weights: &fom.mode_weights,
        schmidt_number: fom.schmidt_number,
        photons_signal: fom.photons_signal,
        photons_idler: fom.photons_idler,
        conversion_probability: fom.conversion_probability,
        separability: fom.separability,
    };
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| HarnessError::output(&sidecar_path, e))?;
    write_text(&sidecar_path, &(text + "\n"))?;
    files.push(sidecar_path);

    let metadata = format!("config_sha256={hash};seed={seed}");
    let format = loaded.config.output.propagator;
    if matches!(format, PropagatorFormat::Json | PropagatorFormat::Both) {
        let path = dir.join("propagator.json");
        p.write_json_with_metadata(&path, Some(&metadata)).map_err(|e| HarnessError::output(&path, e))?;
        files.push(path);
    }
    if matches!(format, PropagatorFormat::Binary | PropagatorFormat::Both) {
        let path = dir.join("propagator.bin");
        let mut out = create(&path)?;
        p.write_binary_with_metadata(&mut out, &metadata).map_err(|e| HarnessError::output(&path, e))?;
        out.flush().map_err(|e| HarnessError::output(&path, e))?;
        files.push(path);
    }
    if options.emit_plots {
        let path = dir.join("jsa_abs.png");
        let values: Vec<Vec<f64>> =
            (0..matrix.nrows()).map(|r| (0..matrix.ncols()).map(|c| matrix[(r, c)].norm()).collect()).collect();
        plot::heatmap(&values, &path)?;
        files.push(path);
    }
    Ok(SimulateReport { dir, seed, fom: eval.fom, files })
}

fn write_matrix_csv(
    path: &Path,
    hash: &str,
    signal: &[f64],
    idler: &[f64],
    m: &CMatrix,
    f: impl Fn(&qtwm_core::Complex64) -> f64,
) -> HarnessResult<PathBuf> {
    let mut out = create(path)?;
    let err = |e: std::io::Error| HarnessError::output(path, e);
    writeln!(out, "# config_sha256={hash}").map_err(err)?;
    writeln!(out, "# rows: signal omega (rad/s); columns: idler omega (rad/s)").map_err(err)?;
    let header: Vec<String> = std::iter::once("omega_s\\omega_i".to_string()).chain(idler.iter().map(|w| w.to_string())).collect();
    writeln!(out, "{}", header.join(",")).map_err(err)?;
    for (r, ws) in signal.iter().enumerate() {
        let row: Vec<String> = std::iter::once(ws.to_string()).chain((0..m.ncols()).map(|c| f(&m[(r, c)]).to_string())).collect();
        writeln!(out, "{}", row.join(",")).map_err(err)?;
    }
    out.flush().map_err(err)?;
    Ok(path.to_path_buf())
}

/// Scalar columns shared by sweep and scan outputs.
pub const METRICS: [&str; 9] = [
    "schmidt_number",
    "purity",
    "dominant_squeezing",
    "photons_signal",
    "photons_idler",
    "conversion_probability",
    "conversion_total",
    "separability",
    "edge_energy_fraction",
];

pub fn metric_values(fom: &FiguresOfMerit) -> [Option<f64>; 9] {
    let total = match fom.kind {
        ProcessKind::Qfc => Some(fom.mode_weights.iter().sum()),
        ProcessKind::Pdc => None,
    };
    [
        fom.schmidt_number,
        fom.purity,
        fom.dominant_squeezing,
        fom.photons_signal,
        fom.photons_idler,
        fom.conversion_probability,
        total,
        fom.separability,
        Some(fom.edge_energy_fraction),
    ]
}

pub fn metric(name: &str) -> Option<usize> {
    METRICS.iter().position(|m| *m == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value_index: usize,
    pub value: f64,
    pub repetition: usize,
    pub seed: u64,
    pub metrics: [Option<f64>; 9],
    pub undefined: Vec<String>,
}

/// Mean, min and max of each metric over the repetitions of one value.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub value_index: usize,
    pub value: f64,
    pub count: usize,
    pub mean: [Option<f64>; 9],
    pub min: [Option<f64>; 9],
    pub max: [Option<f64>; 9],
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub path: PathBuf,
    pub param: String,
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Default values for `param`: the matching preset, or the combined ramp.
pub fn preset_values(loaded: &LoadedConfig, param: &str) -> HarnessResult<Vec<f64>> {
    if param == COMBINED {
        let steps = loaded.config.combined.steps;
        return Ok((0..=steps).map(|k| k as f64 / steps as f64).collect());
    }
    loaded
        .config
        .presets
        .get(param)
        .cloned()
        .ok_or_else(|| HarnessError::config("sweep", param, "no --values given and no preset for this parameter"))
}

fn variant(loaded: &LoadedConfig, param: &str, value: f64) -> HarnessResult<LoadedConfig> {
    if param == COMBINED {
        loaded.with_combined(value)
    } else {
        loaded.with_value(param, value)
    }
}

pub fn sweep(
    loaded: &LoadedConfig,
    param: &str,
    values: Option<&[f64]>,
    seeds: usize,
    options: &RunOptions,
) -> HarnessResult<SweepReport> {
    let values = match values {
        Some(v) => v.to_vec(),
        None => preset_values(loaded, param)?,
    };
    if values.is_empty() {
        return Err(HarnessError::config("sweep", "--values", "need at least one value"));
    }
    if seeds == 0 {
        return Err(HarnessError::config("sweep", "--seeds", "need at least one repetition"));
    }
    // Resolve every variant up front so a bad path fails before any work.
    let variants = values.iter().map(|&v| variant(loaded, param, v)).collect::<HarnessResult<Vec<_>>>()?;
    let master = loaded.config.seeds.master;
    let jobs: Vec<(usize, usize)> = (0..values.len()).flat_map(|i| (0..seeds).map(move |r| (i, r))).collect();
    let results: Vec<HarnessResult<SweepRow>> = pool(options.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(i, rep)| {
                let seed = sweep_seed(master, i, rep);
                let eval = evaluate(&variants[i], seed)?;
                Ok(SweepRow {
                    value_index: i,
                    value: values[i],
                    repetition: rep,
                    seed,
                    metrics: metric_values(&eval.fom),
                    undefined: eval.fom.undefined.clone(),
                })
            })
            .collect()
    });
    let mut rows = results.into_iter().collect::<HarnessResult<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.value_index, r.repetition));
    let aggregates = aggregate(&rows, values.len());

    let dir = out_dir(loaded, options)?;
    let path = dir.join("sweep.csv");
    write_sweep_csv(&path, &loaded.sha256, param, &rows, &aggregates)?;
    if options.emit_plots {
        for (k, name) in METRICS.iter().enumerate() {
            let points: Vec<(f64, f64)> = aggregates.iter().filter_map(|a| a.mean[k].map(|m| (a.value, m))).collect();
            if !points.is_empty() {
                plot::curve(&points, &dir.join(format!("sweep_{name}.png")))?;
            }
        }
    }
    Ok(SweepReport { path, param: param.to_string(), rows, aggregates })
}

fn aggregate(rows: &[SweepRow], count: usize) -> Vec<Aggregate> {
    (0..count)
        .map(|i| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.value_index == i).collect();
            let mut agg = Aggregate {
                value_index: i,
                value: group[0].value,
                count: group.len(),
                mean: [None; 9],
                min: [None; 9],
                max: [None; 9],
            };
            for k in 0..METRICS.len() {
                let vals: Vec<f64> = group.iter().filter_map(|r| r.metrics[k]).collect();
                if vals.is_empty() {
                    continue;
                }
                agg.mean[k] = Some(vals.iter().sum::<f64>() / vals.len() as f64);
                agg.min[k] = Some(vals.iter().copied().fold(f64::INFINITY, f64::min));
                agg.max[k] = Some(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
            agg
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, hash: &str, param: &str, rows: &[SweepRow], aggs: &[Aggregate]) -> HarnessResult<()> {
    let mut out = create(path)?;
    let err = |e: std::io::Error| HarnessError::output(path, e);
    writeln!(out, "# config_sha256={hash}").map_err(err)?;
    let mut header = vec!["row_type", "param", "param_value", "repetition", "seed"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    for m in METRICS {
        header.extend([m.to_string(), format!("{m}_min"), format!("{m}_max")]);
    }
    header.push("undefined".into());
    let mut w = csv::Writer::from_writer(&mut out);
    let csv_err = |e: csv::Error| HarnessError::output(path, e);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec!["run".into(), param.into(), r.value.to_string(), r.repetition.to_string(), r.seed.to_string()];
        for v in r.metrics {
            rec.extend([cell(v), String::new(), String::new()]);
        }
        rec.push(r.undefined.join(";"));
        w.write_record(&rec).map_err(csv_err)?;
    }
    for a in aggs {
        let mut rec = vec!["aggregate".into(), param.into(), a.value.to_string(), String::new(), String::new()];
        for k in 0..METRICS.len() {
            rec.extend([cell(a.mean[k]), cell(a.min[k]), cell(a.max[k])]);
        }
        rec.push(String::new());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(err)?;
    drop(w);
    out.flush().map_err(err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NearZero,
    Weak,
    Strong,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::NearZero => "near-zero",
            Regime::Weak => "weak",
            Regime::Strong => "strong",
        }
    }

    pub fn classify(fom: f64, thresholds: [f64; 2]) -> Self {
        if fom >= thresholds[0] {
            Regime::NearZero
        } else if fom >= thresholds[1] {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub photons: f64,
    pub overlap_fom: f64,
    pub regime: Regime,
    pub metrics: [Option<f64>; 9],
}

#[derive(Debug, Clone)]
pub struct ScanReport {
    pub path: PathBuf,
    pub rows: Vec<ScanRow>,
}

/// Overlap FOM and state metrics for each pump photon number, with the
/// scan loss applied to all fields.
pub fn spm_scan(loaded: &LoadedConfig, photons: &[f64], options: &RunOptions) -> HarnessResult<ScanReport> {
    if photons.is_empty() {
        return Err(HarnessError::config("spm-scan", "--pump-photons", "need at least one value"));
    }
    let scan = loaded.config.spm_scan.clone();
    let mut lossy = loaded.with_value("errors.loss_db_per_cm", scan.loss_db_per_cm)?;
    if lossy.config.errors.pump_loss_db_per_cm.is_some() {
        lossy = lossy.with_value("errors.pump_loss_db_per_cm", scan.loss_db_per_cm)?;
    }
    let variants = photons.iter().map(|&n| lossy.with_value("pump.photons", n)).collect::<HarnessResult<Vec<_>>>()?;
    let seed = single_seed(loaded.config.seeds.master);
    let results: Vec<HarnessResult<ScanRow>> = pool(options.workers)?.install(|| {
        variants
            .par_iter()
            .zip(photons.par_iter())
            .map(|(cfg, &n)| {
                let eval = evaluate(cfg, seed)?;
                let b = &eval.built;
                let fom = spm_overlap_fom(&b.pulse, b.spm, cfg.config.waveguide.length, &b.pump_attenuation)
                    .within("pump-field", "spm_overlap_fom")?;
                Ok(ScanRow {
                    photons: n,
                    overlap_fom: fom,
                    regime: Regime::classify(fom, scan.thresholds),
                    metrics: metric_values(&eval.fom),
                })
            })
            .collect()
    });
    let rows = results.into_iter().collect::<HarnessResult<Vec<_>>>()?;
    let dir = out_dir(loaded, options)?;
    let path = dir.join("spm_scan.csv");
    let mut out = create(&path)?;
    let err = |e: std::io::Error| HarnessError::output(&path, e);
    writeln!(out, "# config_sha256={}", loaded.sha256).map_err(err)?;
    writeln!(out, "# thresholds={},{} loss_db_per_cm={}", scan.thresholds[0], scan.thresholds[1], scan.loss_db_per_cm)
        .map_err(err)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| HarnessError::output(&path, e);
        let mut header = vec!["pump_photons".to_string(), "overlap_fom".into(), "regime".into()];
        header.extend(METRICS.iter().map(|m| m.to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for r in &rows {
            let mut rec = vec![r.photons.to_string(), r.overlap_fom.to_string(), r.regime.label().to_string()];
            rec.extend(r.metrics.iter().map(|v| cell(*v)));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(err)?;
    }
    out.flush().map_err(err)?;
    if options.emit_plots {
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.photons.log10(), r.overlap_fom)).collect();
        plot::curve(&points, &dir.join("spm_scan.png"))?;
    }
    Ok(ScanReport { path, rows })
}
