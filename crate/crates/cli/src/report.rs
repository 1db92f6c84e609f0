//! Report assembly: canonical hashing, 15-significant-digit number
//! formatting, phase timings, and JSON emission.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use cofil::io::{instrument_to_json, matrix_to_json};
use cofil::linalg::ComplexMatrix;
use cofil::sio::SioInstrument;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

/// Round to 15 significant digits so reports are stable beyond the accuracy
/// anything downstream should rely on.
pub fn round15(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float reparses")
}

/// Apply [`round15`] to every number in a JSON tree.
pub fn round_numbers(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    *value = json!(round15(f));
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Hex digest of the canonically serialized matrix, for provenance.
pub fn matrix_sha256(m: &ComplexMatrix) -> String {
    hex::encode(Sha256::digest(matrix_to_json(m).as_bytes()))
}

pub fn instrument_sha256(ins: &SioInstrument) -> String {
    hex::encode(Sha256::digest(instrument_to_json(ins).as_bytes()))
}

/// Wall-clock phase timer. Timings land in the report but are excluded from
/// the determinism contract.
pub struct Phases {
    start: Instant,
    last: Instant,
    map: Map<String, Value>,
}

impl Phases {
    pub fn new() -> Self {
        let now = Instant::now();
        Phases {
            start: now,
            last: now,
            map: Map::new(),
        }
    }

    pub fn mark(&mut self, name: &str) {
        let now = Instant::now();
        let ms = now.duration_since(self.last).as_secs_f64() * 1e3;
        self.map.insert(format!("{name}_ms"), json!(ms));
        self.last = now;
    }

    fn finish(mut self) -> Map<String, Value> {
        let total = self.start.elapsed().as_secs_f64() * 1e3;
        self.map.insert("total_ms".into(), json!(total));
        self.map
    }
}

/// Assemble the full report and write it to `--output` or stdout.
pub fn emit(
    command: &str,
    inputs: Value,
    mut results: Value,
    phases: Phases,
    output: Option<&Path>,
) -> Result<(), CliError> {
    round_numbers(&mut results);
    let mut inputs = inputs;
    round_numbers(&mut inputs);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "results": results,
        "timings": Value::Object(phases.finish()),
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")
                .map_err(|e| CliError::Internal(format!("cannot write report: {e}")))
        }
    }
}

/// One human-readable status line on stderr.
pub fn status(line: impl AsRef<str>) {
    eprintln!("{}", line.as_ref());
}
