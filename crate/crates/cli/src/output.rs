//! Deterministic CSV, JSON and SVG writers and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal; `NaN`, `inf` and `-inf` for non-finite values.
pub fn num(x: f64) -> String {
    match serde_json::Number::from_f64(x) {
        Some(v) => v.to_string(),
        None if x.is_nan() => "NaN".into(),
        None if x > 0.0 => "inf".into(),
        None => "-inf".into(),
    }
}

/// Recursively rebuilds objects with lexicographically sorted keys.
pub fn canonical(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonical(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        other => other,
    }
}

pub fn json_document(value: Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(value)).expect("serializing a Value cannot fail");
    s.push('\n');
    s
}

pub struct Csv {
    header: Vec<String>,
    body: String,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|h| h.as_ref().to_owned()).collect(),
            body: String::new(),
        }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let cells: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_owned()).collect();
        debug_assert_eq!(cells.len(), self.header.len());
        self.body.push_str(&cells.join(","));
        self.body.push('\n');
    }

    pub fn finish(self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

/// Fixed 9 decimals, with `-0.000000000` printed as `0.000000000`.
pub fn fixed9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_owned()
    } else {
        s
    }
}

/// SVG 1.1 with one root group and one `path` per polyline, in the given
/// order. The y axis is flipped so that plane coordinates read upright.
pub fn svg_document(paths: &[Vec<[f64; 2]>]) -> CliResult<String> {
    let pts = || paths.iter().flatten();
    if pts().next().is_none() {
        return Err(CliError::EmptyGeometry);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts() {
        let q = [p[0], -p[1]];
        for i in 0..2 {
            lo[i] = lo[i].min(q[i]);
            hi[i] = hi[i].max(q[i]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = 0.02 * span;
    let stroke = 0.002 * span;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">",
        fixed9(lo[0] - pad),
        fixed9(lo[1] - pad),
        fixed9(hi[0] - lo[0] + 2.0 * pad),
        fixed9(hi[1] - lo[1] + 2.0 * pad)
    );
    let _ = writeln!(s, "<g fill=\"none\" stroke=\"black\" stroke-width=\"{}\">", fixed9(stroke));
    for path in paths.iter().filter(|p| !p.is_empty()) {
        s.push_str("<path d=\"");
        for (i, p) in path.iter().enumerate() {
            let _ = write!(s, "{}{} {}", if i == 0 { "M" } else { " L" }, fixed9(p[0]), fixed9(-p[1]));
        }
        s.push_str("\"/>\n");
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}


/// Command, resolved parameters, library version and output checksums.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub version: String,
    pub outputs: Vec<(String, String)>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let outputs: Map<String, Value> = self
            .outputs
            .iter()
            .map(|(name, sum)| (name.clone(), Value::String(sum.clone())))
            .collect();
        json_document(serde_json::json!({
            "command": self.command,
            "parameters": self.parameters,
            "version": self.version,
            "sha256": outputs,
        }))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<out>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
