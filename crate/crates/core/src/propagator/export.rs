use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trotter::{LossKind, Propagator};
use super::ProcessKind;
use crate::spectral::FrequencyGrid;
use crate::{CMatrix, Error, Result};

const MAGIC: &[u8; 8] = b"QTWMPROP";
const VERSION: u32 = 2;

/// JSON form of a propagator. `matrix` holds the stored 2N×2N matrix row by
/// row as `[re, im]` pairs; `blocks` names its N×N quadrants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorRecord {
    pub kind: ProcessKind,
    pub modes: usize,
    pub transmission: f64,
    pub loss: LossKind,
    pub blocks: [[String; 2]; 2],
    pub signal_grid: Option<FrequencyGrid>,
    pub idler_grid: Option<FrequencyGrid>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    /// Free-form provenance text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
}

impl Propagator {
    pub fn to_record(&self) -> PropagatorRecord {
        let m = self.matrix();
        let conj = if self.kind() == ProcessKind::Pdc { "*" } else { "" };
        PropagatorRecord {
            kind: self.kind(),
            modes: self.dim(),
            transmission: self.transmission(),
            loss: self.loss(),
            blocks: [["K_ss".into(), "K_si".into()], [format!("K_is{conj}"), format!("K_ii{conj}")]],
            signal_grid: self.grids().map(|g| g.0.clone()),
            idler_grid: self.grids().map(|g| g.1.clone()),
            matrix: (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect(),
            metadata: None,
        }
    }

    pub fn from_record(record: &PropagatorRecord) -> Result<Self> {
        let dim = 2 * record.modes;
        if record.matrix.len() != dim || record.matrix.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput(format!("propagator record is not {dim}×{dim}")));
        }
        let matrix = CMatrix::from_fn(dim, dim, |r, c| {
            let [re, im] = record.matrix[r][c];
            Complex64::new(re, im)
        });
        let grids = match (&record.signal_grid, &record.idler_grid) {
            (Some(s), Some(i)) => Some((s.clone(), i.clone())),
            _ => None,
        };
        Ok(Propagator::new(record.kind, matrix, record.transmission, record.loss)?.with_grids(grids))
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_json_with_metadata(path, None)
    }

    pub fn write_json_with_metadata(&self, path: impl AsRef<Path>, metadata: Option<&str>) -> Result<()> {
        let path = path.as_ref();
        let mut record = self.to_record();
        record.metadata = metadata.map(str::to_string);
        let text = serde_json::to_string_pretty(&record).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let record: PropagatorRecord = serde_json::from_str(&text).map_err(|e| Error::io(path, e))?;
        Self::from_record(&record)
    }

    /// Little-endian binary layout: magic `QTWMPROP`, u32 version, u8 kind
    /// (0 down-conversion, 1 conversion), u8 loss (0 lossless, 1 uniform,
    /// 2 interleaved), u64 N, f64 transmission, u32 metadata length and
    /// UTF-8 metadata (version 2 only), then the stored matrix row by row
    /// as (re, im) f64 pairs.
    pub fn write_binary(&self, out: impl Write) -> std::io::Result<()> {
        self.write_binary_with_metadata(out, "")
    }

    pub fn write_binary_with_metadata(&self, mut out: impl Write, metadata: &str) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&[self.kind() as u8, self.loss() as u8])?;
        out.write_all(&(self.dim() as u64).to_le_bytes())?;
        out.write_all(&self.transmission().to_le_bytes())?;
        out.write_all(&(metadata.len() as u32).to_le_bytes())?;
        out.write_all(metadata.as_bytes())?;
        let m = self.matrix();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.write_all(&m[(r, c)].re.to_le_bytes())?;
                out.write_all(&m[(r, c)].im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary(input: impl Read) -> Result<Self> {
        Self::read_binary_with_metadata(input).map(|(p, _)| p)
    }

    pub fn read_binary_with_metadata(mut input: impl Read) -> Result<(Self, String)> {
        let bad = |e: std::io::Error| Error::InvalidInput(format!("propagator binary: {e}"));
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(bad)?;
        if &magic != MAGIC {
            return Err(Error::InvalidInput("not a propagator file".into()));
        }
        let mut word = [0u8; 4];
        input.read_exact(&mut word).map_err(bad)?;
        let version = u32::from_le_bytes(word);
        if version != 1 && version != VERSION {
            return Err(Error::InvalidInput(format!("unsupported propagator file version {version}")));
        }
        let mut tags = [0u8; 2];
        input.read_exact(&mut tags).map_err(bad)?;
        let kind = match tags[0] {
            0 => ProcessKind::Pdc,
            1 => ProcessKind::Qfc,
            t => return Err(Error::InvalidInput(format!("unknown process tag {t}"))),
        };
        let loss = match tags[1] {
            0 => LossKind::Lossless,
            1 => LossKind::Uniform,
            2 => LossKind::Interleaved,
            t => return Err(Error::InvalidInput(format!("unknown loss tag {t}"))),
        };
        let mut long = [0u8; 8];
        input.read_exact(&mut long).map_err(bad)?;
        let n = u64::from_le_bytes(long) as usize;
        input.read_exact(&mut long).map_err(bad)?;
        let transmission = f64::from_le_bytes(long);
        let metadata = if version >= 2 {
            input.read_exact(&mut word).map_err(bad)?;
            let mut text = vec![0u8; u32::from_le_bytes(word) as usize];
            input.read_exact(&mut text).map_err(bad)?;
            String::from_utf8(text).map_err(|e| Error::InvalidInput(format!("propagator metadata: {e}")))?
        } else {
            String::new()
        };
        let dim = 2 * n;
        let mut values = Vec::with_capacity(dim * dim);
        for _ in 0..dim * dim {
            input.read_exact(&mut long).map_err(bad)?;
            let re = f64::from_le_bytes(long);
            input.read_exact(&mut long).map_err(bad)?;
            values.push(Complex64::new(re, f64::from_le_bytes(long)));
        }
        Ok((Propagator::new(kind, CMatrix::from_row_slice(dim, dim, &values), transmission, loss)?, metadata))
    }
}
