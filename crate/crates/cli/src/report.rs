//! Report types and their deterministic JSON and CSV encodings.
//!
//! JSON objects are emitted with sorted keys and every float as `{:.16e}`
//! (17 significant digits), so a parsed report re-serializes byte for byte.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: Value,
    pub environment: Environment,
    pub records: Vec<Record>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InertiaRecord {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoisometryRecord {
    pub observable: f64,
    pub raw: f64,
    pub subspace_dim: usize,
}

/// Pairwise Frobenius discrepancies of the three kernel evaluations, maxed
/// over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub closed_vs_synthesized: f64,
    /// `None` when every pair was skipped.
    pub closed_vs_resolvent: Option<f64>,
    pub synthesized_vs_resolvent: Option<f64>,
    pub max_discrepancy: f64,
    pub scale: f64,
    pub skipped_pairs: usize,
}

/// Both signed arrangements of the skew term against `Φ♯(p)`, maxed over the
/// grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub proof_arrangement_error: f64,
    pub stated_arrangement_error: f64,
    pub skipped_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundRecord {
    pub ptilde_norm: f64,
    pub bound: f64,
    pub m_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Assertion {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    #[serde(rename = "N")]
    pub n: usize,
    pub signature: InertiaRecord,
    pub kept: usize,
    pub cutoff_threshold: f64,
    pub moment_errors: Vec<f64>,
    pub evaluation_identity_error: f64,
    pub coisometry: CoisometryRecord,
    pub kernel: KernelRecord,
    /// Absent when a coefficient signature is configured.
    pub evaluation: Option<EvaluationRecord>,
    pub norm_bound: NormBoundRecord,
    pub r0_norm: f64,
    pub warnings: Vec<String>,
    pub assertions: Vec<Assertion>,
}

impl Record {
    pub fn pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Pretty printer that writes every float with 17 significant digits.
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(rep: &Report) -> io::Result<Vec<u8>> {
    // Routing through `Value` sorts every object's keys.
    let value = serde_json::to_value(rep).map_err(io::Error::other)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

pub fn from_json(bytes: &[u8]) -> serde_json::Result<Report> {
    serde_json::from_slice(bytes)
}

fn fixed(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-`N` convergence table.
pub fn to_csv(rep: &Report) -> io::Result<Vec<u8>> {
    let moments = rep.records.iter().map(|r| r.moment_errors.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["N", "n_plus", "n_minus", "n_zero", "kept"].map(String::from).to_vec();
    header.extend((0..moments).map(|n| format!("e{n}")));
    header.extend(
        [
            "coisometry_observable",
            "coisometry_raw",
            "kernel_discrepancy",
            "ptilde_norm",
            "norm_bound",
            "pass",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(io::Error::other)?;
    for r in &rep.records {
        let mut row = vec![
            r.n.to_string(),
            r.signature.positive.to_string(),
            r.signature.negative.to_string(),
            r.signature.zero.to_string(),
            r.kept.to_string(),
        ];
        row.extend((0..moments).map(|n| r.moment_errors.get(n).map_or_else(String::new, |&e| fixed(e))));
        row.extend([
            fixed(r.coisometry.observable),
            fixed(r.coisometry.raw),
            fixed(r.kernel.max_discrepancy),
            fixed(r.norm_bound.ptilde_norm),
            fixed(r.norm_bound.bound),
            r.pass().to_string(),
        ]);
        w.write_record(&row).map_err(io::Error::other)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

pub fn emit_report(rep: &Report, format: Format) -> io::Result<Vec<u8>> {
    match format {
        Format::Json => to_json(rep),
        Format::Csv => to_csv(rep),
    }
}
