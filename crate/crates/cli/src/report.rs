use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::input::InputDigest;

/// Record of one command invocation, printed on stdout. Never written into
/// `--out` so that artifact files stay byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub input: Option<InputDigest>,
    pub outputs: Value,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str, config: Value, input: Option<InputDigest>, outputs: Value) -> Self {
        RunReport { command: command.to_string(), config, input, outputs, warnings: Vec::new(), wall_time_seconds: 0.0 }
    }

    pub fn with_elapsed(mut self, d: Duration) -> Self {
        self.wall_time_seconds = d.as_secs_f64();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key: value` lines for the top-level output fields, then warnings.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.input {
            let _ = writeln!(s, "input: {} ({} values, sha256 {})", d.path, d.values, d.sha256);
        }
        if let Value::Object(map) = &self.outputs {
            for (k, v) in map {
                let _ = writeln!(s, "{k}: {}", flat(v));
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(s, "wall time: {:.3} s", self.wall_time_seconds);
        s
    }
}

fn flat(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.len() > 20 => format!("[{} items]", a.len()),
        other => other.to_string(),
    }
}
