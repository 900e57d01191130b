use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything that determines a run. Unset fields are omitted.
#[derive(Clone, Debug, Default, Serialize)]
pub struct JobConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twice_index: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub primes: Vec<u64>,
    /// Precision actually used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_requested: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_bound: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub verify: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub format: String,
}

impl JobConfig {
    pub fn new(command: &str) -> Self {
        JobConfig { command: command.to_string(), format: Format::Json.name().to_string(), ..Default::default() }
    }

    /// Never lets an override go below `required`; a lower request is
    /// raised with a warning on stderr.
    pub fn settle_precision(&mut self, requested: Option<usize>, required: usize) -> usize {
        self.precision_requested = requested;
        let used = match requested {
            Some(n) if n < required => {
                eprintln!("warning: precision {n} is below the required {required}, using {required}");
                required
            }
            Some(n) => n,
            None => required,
        };
        self.precision = Some(used);
        used
    }
}

/// Outcome of one command: a small summary, the full payload, and a flat
/// table for CSV output.
#[derive(Clone, Debug)]
pub struct Report {
    pub config: JobConfig,
    pub summary: Value,
    pub result: Value,
    /// Every internal cross-check agreed.
    pub agree: bool,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn status(&self) -> &'static str {
        if self.agree {
            "agree"
        } else {
            "mismatch"
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.agree {
            0
        } else {
            1
        }
    }

    pub fn manifest(&self) -> Value {
        json!({
            "tool": "upcong",
            "version": VERSION,
            "config": self.config,
            "status": self.status(),
            "summary": self.summary,
        })
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.manifest();
        v["result"] = self.result.clone();
        v
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(vec![]);
        let io = |e: csv::Error| CliError::Input(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
    }

    pub fn render(&self, format: Format) -> CliResult<String> {
        match format {
            Format::Json => Ok(pretty(&self.to_json())),
            Format::Csv => self.to_csv(),
        }
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// `1 0 -1` for vectors, `2 1;1 2` for matrices.
pub fn join_vec(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn join_matrix(m: &[Vec<i64>]) -> String {
    m.iter().map(|r| join_vec(r)).collect::<Vec<_>>().join(";")
}
