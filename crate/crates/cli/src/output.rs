use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use weakbayes::report::Provenance;

use crate::args::OutputArgs;
use crate::error::CliError;

/// Writes `content` to `--out` or stdout.
pub fn emit(output: &OutputArgs, content: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => write_file(path, content.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// CSV text preceded by a `# provenance:` comment line.
pub fn csv_with_provenance(provenance: &Provenance, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    let prov = serde_json::to_string(provenance).expect("plain data serializes");
    format!("# provenance: {prov}\n{body}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
