//! Deterministic artifact writers. All floating-point values are printed
//! with 17 significant digits so identical configs yield byte-identical
//! files; every artifact opens with a header carrying the config hash and
//! the library version.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn config_hash(raw: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(raw);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// 17 significant digits, sign-stable for zero. Non-finite values are not
/// valid JSON numbers and are emitted as tagged strings.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"nan\"".into()
    } else if x > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

/// Minimal JSON document model with insertion-ordered objects and the fixed
/// float format above (serde_json prints shortest-roundtrip floats, which is
/// a different determinism contract than the one we document).
pub enum Json {
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    fn render(&self, out: &mut String, indent: usize) {
        match self {
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => out.push_str(&fmt_f64(*x)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.render(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    let _ = write!(out, "\"{k}\": ");
                    v.render(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }

    pub fn to_string(&self) -> String {
        let mut out = String::new();
        self.render(&mut out, 0);
        out.push('\n');
        out
    }
}

/// Destination directory and header fields shared by all artifacts of a run.
pub struct ArtifactSink {
    pub dir: PathBuf,
    pub hash: String,
}

impl ArtifactSink {
    pub fn new(out_dir: Option<&Path>, raw_config: &[u8]) -> Result<Self, CliError> {
        let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir,
            hash: config_hash(raw_config),
        })
    }

    pub fn header_json(&self) -> Json {
        Json::obj(vec![
            ("config_sha256", Json::Str(self.hash.clone())),
            ("version", Json::Str(VERSION.into())),
        ])
    }

    pub fn write_json(&self, name: &str, mut fields: Vec<(&str, Json)>) -> Result<PathBuf, CliError> {
        fields.insert(0, ("header", self.header_json()));
        let path = self.dir.join(name);
        std::fs::write(&path, Json::obj(fields).to_string())
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    pub fn write_csv(
        &self,
        name: &str,
        columns: &[&str],
        rows: impl Iterator<Item = Vec<f64>>,
    ) -> Result<PathBuf, CliError> {
        let mut out = String::new();
        let _ = writeln!(out, "# config_sha256: {}", self.hash);
        let _ = writeln!(out, "# version: {VERSION}");
        let _ = writeln!(out, "{}", columns.join(","));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        let path = self.dir.join(name);
        std::fs::write(&path, out)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}
