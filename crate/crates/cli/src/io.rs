//! Config loading, provenance and output helpers.

use std::fs;
use std::io::Write;
use std::path::Path;

use ambiswitch_core::schema::ProblemFile;
use ambiswitch_core::SwitchingProblem;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A parsed problem together with the hash of its source bytes.
pub struct Loaded {
    pub problem: SwitchingProblem,
    pub hash: String,
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Dotted serde path to a JSON pointer, e.g. `dynamics[0].b` → `/dynamics/0/b`.
fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment;
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

pub fn parse_json<T: serde::de::DeserializeOwned>(bytes: &[u8], what: &Path) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::Schema(format!("{}: schema error at {}: {}", what.display(), pointer(e.path()), e.inner()))
    })
}

pub fn load_problem(path: &Path) -> Result<Loaded, CliError> {
    let bytes = read_bytes(path)?;
    let file: ProblemFile = parse_json(&bytes, path)?;
    let problem = file
        .to_problem()
        .map_err(|e| CliError::Schema(format!("{}: invalid value at {}: {e}", path.display(), e.path())))?;
    Ok(Loaded { problem, hash: sha256_hex(&bytes) })
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(hash: &str, seed: Option<u64>) -> Self {
        Provenance { tool: "ambiswitch", version: VERSION, config_sha256: hash.to_string(), seed }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut s = format!("# tool: {} {}\n# config_sha256: {}\n", self.tool, self.version, self.config_sha256);
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s
    }
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<ProblemFile>,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a leading `provenance` object and, when given, the
/// problem document it was computed from.
pub fn json_with_provenance<T: Serialize>(
    prov: &Provenance,
    problem: Option<&SwitchingProblem>,
    body: &T,
) -> Result<String, CliError> {
    let problem = problem.map(ProblemFile::from_problem);
    let mut s = serde_json::to_string_pretty(&WithProvenance { provenance: prov, problem, body })
        .map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV text with provenance comment lines followed by the records.
pub fn csv_with_provenance(prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = prov.csv_header();
    out.push_str(&String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?);
    Ok(out)
}

/// Formats a float so that it reads back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}
