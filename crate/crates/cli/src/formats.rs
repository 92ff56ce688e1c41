//! JSON file formats for states, channels, density matrices and protocols.
//!
//! Complex numbers are `[re, im]` pairs and matrices are lists of rows. Every
//! float is written with 17 significant digits, so a write-then-read cycle
//! reproduces values bit for bit.

use std::io;
use std::path::Path;

use coherence::{CMatrix, DensityMatrix, KrausSet, PureState, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

/// Normalization slack accepted on ingest; inputs within it are rescaled.
pub const INGEST_TOLERANCE: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Invalid(String),
}

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

fn to_pair(z: &C64) -> Complex {
    [z.re, z.im]
}

fn from_pair(p: &Complex) -> C64 {
    C64::new(p[0], p[1])
}

fn to_rows(m: &CMatrix) -> Matrix {
    m.row_iter().map(|row| row.iter().map(to_pair).collect()).collect()
}

fn from_rows(rows: &Matrix, dim: usize, what: &str) -> Result<CMatrix, FormatError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(FormatError::Invalid(format!("{what} is not {dim}x{dim}")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(FormatError::Invalid(format!("{what} has non-finite entries")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| from_pair(&rows[i][j])))
}

/// A pure state: `{"dim": d, "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    pub amplitudes: Vec<Complex>,
}

impl StateFile {
    pub fn from_state(psi: &PureState) -> Self {
        Self {
            dim: psi.dim(),
            amplitudes: psi.amplitudes().iter().map(to_pair).collect(),
        }
    }

    /// The state, plus a warning when the amplitudes had to be renormalized.
    pub fn to_state(&self) -> Result<(PureState, Option<String>), FormatError> {
        if self.dim == 0 || self.amplitudes.len() != self.dim {
            return Err(FormatError::Invalid(format!(
                "dim is {} but {} amplitudes were given",
                self.dim,
                self.amplitudes.len()
            )));
        }
        if self.amplitudes.iter().flatten().any(|x| !x.is_finite()) {
            return Err(FormatError::Invalid("non-finite amplitude".into()));
        }
        let amps: Vec<C64> = self.amplitudes.iter().map(from_pair).collect();
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let deviation = (total - 1.0).abs();
        if deviation > INGEST_TOLERANCE {
            return Err(FormatError::Invalid(format!(
                "squared amplitudes sum to {total}, not 1 within {INGEST_TOLERANCE:e}"
            )));
        }
        match PureState::new(amps.clone()) {
            Ok(psi) => Ok((psi, None)),
            Err(_) => {
                let psi = PureState::normalized(amps).map_err(|e| FormatError::Invalid(e.to_string()))?;
                Ok((psi, Some(format!("renormalized state (squared norm was {total})"))))
            }
        }
    }
}

/// A Kraus set: `{"dim": d, "operators": [matrix, ...], "labels": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub operators: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl ChannelFile {
    pub fn from_kraus(set: &KrausSet) -> Self {
        Self {
            dim: set.dim(),
            operators: set.operators().iter().map(to_rows).collect(),
            labels: Some(set.labels().to_vec()),
        }
    }

    /// The operators as a Kraus set; completeness is checked separately.
    pub fn to_kraus(&self) -> Result<KrausSet, FormatError> {
        if self.dim == 0 {
            return Err(FormatError::Invalid("dim must be positive".into()));
        }
        let ops = self
            .operators
            .iter()
            .enumerate()
            .map(|(k, m)| from_rows(m, self.dim, &format!("operator {k}")))
            .collect::<Result<Vec<_>, _>>()?;
        let set = match &self.labels {
            Some(labels) => KrausSet::with_labels(ops, labels.clone()),
            None => KrausSet::new(ops),
        };
        set.map_err(|e| FormatError::Invalid(e.to_string()))
    }
}

/// A density matrix: `{"dim": d, "entries": matrix}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub dim: usize,
    pub entries: Matrix,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            entries: to_rows(rho.entries()),
        }
    }

    /// The density matrix, plus a warning when the trace had to be rescaled.
    pub fn to_density(&self) -> Result<(DensityMatrix, Option<String>), FormatError> {
        if self.dim == 0 {
            return Err(FormatError::Invalid("dim must be positive".into()));
        }
        let m = from_rows(&self.entries, self.dim, "density matrix")?;
        let trace = m.trace().re;
        let invalid = |e: coherence::Error| FormatError::Invalid(e.to_string());
        if (trace - 1.0).abs() > INGEST_TOLERANCE {
            return DensityMatrix::new(m).map(|rho| (rho, None)).map_err(invalid);
        }
        match DensityMatrix::new(m.clone()) {
            Ok(rho) => Ok((rho, None)),
            Err(_) => {
                let rho = DensityMatrix::new(m.unscale(trace)).map_err(invalid)?;
                Ok((rho, Some(format!("rescaled density matrix (trace was {trace})"))))
            }
        }
    }
}

/// Checks recorded alongside an exported protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolReport {
    /// Per stage, `max |Σ K†K − I|`.
    pub completeness_residuals: Vec<f64>,
    /// Per stage, the largest second-largest column modulus (zero when incoherent).
    pub incoherence_residuals: Vec<f64>,
    /// Success probability of the composed channel applied to the source.
    pub composed_success_probability: f64,
    /// Fidelity with the target of each composed success branch.
    pub success_fidelities: Vec<f64>,
}

/// An exported protocol: its stages in application order plus a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    pub dim: usize,
    pub success_probability: f64,
    pub success_label: String,
    pub stages: Vec<ChannelFile>,
    pub report: ProtocolReport,
}

/// One member of a convex-roof ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: StateFile,
}

/// A feasible decomposition and its average, an upper bound on the roof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoofFile {
    pub functional: String,
    pub value: f64,
    pub quality: String,
    pub ensemble: Vec<EnsembleMember>,
}

/// Writes floats as `{:.16e}`, one object key per line and arrays inline.
#[derive(Default)]
struct Sig17 {
    depth: usize,
}

impl Sig17 {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W, depth: usize) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    // the formats have no optional values, so a null can only be a NaN or infinity
    fn write_null<W: ?Sized + io::Write>(&mut self, _: &mut W) -> io::Result<()> {
        Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite number"))
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth += 1;
        w.write_all(b"{")
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.depth -= 1;
        self.newline(w, self.depth)?;
        w.write_all(b"}")
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w, self.depth)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

/// Serializes `value` as pretty JSON with 17 significant digits per float.
///
/// Non-finite floats have no JSON form and are rejected.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17::default());
    value.serialize(&mut ser).map_err(|source| FormatError::Json {
        path: "<output>".into(),
        source,
    })?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = to_json(value)?;
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FormatError::Json {
        path: path.display().to_string(),
        source,
    })
}
