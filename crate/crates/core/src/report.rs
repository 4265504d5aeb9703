//! Machine-readable run reports.
//!
//! Floats are written with 17 significant digits so that two runs with the
//! same configuration can be compared byte for byte.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::betti::BettiBoundReport;
use crate::error::Result;

pub const REPORT_VERSION: &str = "1";

/// Aggregated outcome of one inequality family, showing its worst instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// The checked relation as a formula.
    pub paper_ref: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs` at the worst instance.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub trials: usize,
    pub failures: usize,
}

/// Accumulates `lhs ≤ rhs` observations into a [`Record`].
#[derive(Debug, Clone)]
pub struct Check {
    name: String,
    formula: String,
    tolerance: f64,
    trials: usize,
    failures: usize,
    worst: Option<(bool, f64, f64, f64)>,
}

/// `(rhs - lhs) / max(|lhs|, |rhs|)`; NaN maps to `-∞`.
fn normalized_margin(lhs: f64, rhs: f64) -> f64 {
    let s = (rhs - lhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

impl Check {
    pub fn new(name: impl Into<String>, formula: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            formula: formula.into(),
            tolerance,
            trials: 0,
            failures: 0,
            worst: None,
        }
    }

    /// Records one instance. Failing instances always rank below passing ones.
    pub fn observe(&mut self, lhs: f64, rhs: f64, pass: bool) {
        let pass = pass && !lhs.is_nan() && !rhs.is_nan();
        self.trials += 1;
        if !pass {
            self.failures += 1;
        }
        let score = normalized_margin(lhs, rhs);
        let worse = match self.worst {
            None => true,
            Some((p, s, _, _)) => (pass, score) < (p, s),
        };
        if worse {
            self.worst = Some((pass, score, lhs, rhs));
        }
    }

    /// `lhs ≤ rhs + tolerance · |rhs|`.
    pub fn observe_relative(&mut self, lhs: f64, rhs: f64) {
        let pass = lhs <= rhs + self.tolerance * rhs.abs();
        self.observe(lhs, rhs, pass);
    }

    pub fn finish(self) -> Record {
        let (lhs, rhs) = self.worst.map_or((0.0, 0.0), |(_, _, l, r)| (l, r));
        Record {
            name: self.name,
            paper_ref: self.formula,
            lhs,
            rhs,
            margin: rhs - lhs,
            tolerance: self.tolerance,
            pass: self.failures == 0 && self.trials > 0,
            trials: self.trials,
            failures: self.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub records: usize,
    pub failures: usize,
    /// Absent from the canonical form used for determinism checks.
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: String,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub records: Vec<Record>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betti_reports: Option<Vec<BettiBoundReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

/// Hex SHA-256 of the compact JSON encoding.
pub fn config_hash(config: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(config).expect("values always serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(command: Vec<String>, config: impl Serialize, records: Vec<Record>, wall_time: f64) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        let failures = records.iter().filter(|r| !r.pass).count();
        Ok(Self {
            version: REPORT_VERSION.into(),
            command,
            config_hash: config_hash(&config),
            config,
            summary: Summary {
                pass: failures == 0,
                records: records.len(),
                failures,
                wall_time_seconds: Some(wall_time),
            },
            records,
            betti_reports: None,
            details: None,
        })
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    /// The report with the wall time removed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.summary.wall_time_seconds = None;
        r
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        write_json(self, w)
    }
}

/// Pretty printer that writes every float as `{:.16e}`.
pub struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Default for FixedDigits<'_> {
    fn default() -> Self {
        Self(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn write_json(value: &impl Serialize, mut w: impl Write) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut w, FixedDigits::default());
    value.serialize(&mut ser)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn to_json_string(value: &impl Serialize) -> String {
    let mut buf = Vec::new();
    write_json(value, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}
