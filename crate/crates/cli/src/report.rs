use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use poslab_core::GroupSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::config::{Backend, HarnessError, Suite};

/// Outcome of one trial. `margin` is positive exactly when the checked quantity is on the
/// passing side of its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub pass: bool,
    pub margin: Option<f64>,
    pub note: String,
}

/// A failed trial with everything needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    /// ChaCha8 stream the trial drew from.
    pub stream: u64,
    pub message: String,
    pub input: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub suite: Suite,
    pub group: GroupSpec,
    pub backend: Backend,
    pub seed: u64,
    pub tol: f64,
    pub trials: usize,
    pub passes: usize,
    pub failures: Vec<Failure>,
    pub min_margin: Option<f64>,
    pub max_margin: Option<f64>,
    pub records: Vec<TrialRecord>,
    /// Not written to report files, which must be identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrialReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let m = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
        format!(
            "{} {} [{}]: {}/{} passed, margin min {} max {} ({:.2}s)",
            self.suite,
            self.group,
            self.backend,
            self.passes,
            self.trials,
            m(self.min_margin),
            m(self.max_margin),
            self.wall_time.as_secs_f64()
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(HarnessError::Usage(format!("unknown report format {s:?}"))),
        }
    }
}

impl Format {
    /// Guesses from a file extension, defaulting to JSON.
    pub fn from_path(p: &Path) -> Format {
        match p.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Floats as `{:.16e}` (17 significant digits), compact otherwise.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect::<Map<_, _>>())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        v => v,
    }
}

/// Canonical JSON: sorted keys, fixed float formatting, trailing newline.
pub fn write_json<W: Write>(report: &TrialReport, w: W) -> Result<(), HarnessError> {
    write_canonical(&serde_json::to_value(report).map_err(io::Error::other)?, w)
}

pub(crate) fn write_canonical<W: Write>(v: &Value, mut w: W) -> Result<(), HarnessError> {
    let mut ser = serde_json::Serializer::with_formatter(&mut w, FixedFloats);
    sorted(v.clone()).serialize(&mut ser).map_err(io::Error::other)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Canonical JSON of any value, as a string.
pub fn canonical_json(v: &Value) -> String {
    let mut buf = Vec::new();
    write_canonical(v, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

/// One row per trial: `index,pass,margin,note`.
pub fn write_csv<W: Write>(report: &TrialReport, w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["index", "pass", "margin", "note"])?;
    for r in &report.records {
        let margin = r.margin.map_or(String::new(), |m| format!("{m:.16e}"));
        out.write_record([r.index.to_string(), r.pass.to_string(), margin, r.note.clone()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_report(report: &TrialReport, format: Format, path: &Path) -> Result<(), HarnessError> {
    let f = File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    match format {
        Format::Json => write_json(report, &mut w)?,
        Format::Csv => write_csv(report, &mut w)?,
    }
    w.flush()?;
    Ok(())
}
