//! Number formatting, CSV assembly and run manifests.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Plain decimal text with at most 12 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("valid float text");
    rounded.to_string()
}

/// Comma-separated table with a header row and `\n` line endings.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Csv { writer }
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, cells: &[S]) {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("cells are UTF-8")
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new<P: Serialize>(subcommand: &str, params: &P, seed: Option<u64>, outputs: &[PathBuf], elapsed: Duration) -> Self {
        RunManifest {
            subcommand: subcommand.into(),
            parameters: serde_json::to_value(params).expect("arguments serialize"),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            duration_seconds: elapsed.as_secs_f64(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        write_file(path, &text)
    }
}

/// Manifest path for a single output file: `FILE.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.2), "0.2");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(2.0 / 3.0), "0.666666666667");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(16.0), "16");
        assert_eq!(num(1e-7), "0.0000001");
        assert_eq!(num(123456789.123456), "123456789.123");
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(&["1", "2"]);
        c.row(&[num(0.5), num(0.25)]);
        assert_eq!(c.into_string(), "a,b\n1,2\n0.5,0.25\n");
    }

    #[test]
    fn manifest_next_to_output() {
        assert_eq!(
            manifest_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.csv.manifest.json")
        );
    }
}
