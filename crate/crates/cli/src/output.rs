//! Run manifests and deterministic file output.

use crate::Failure;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Provenance of a set of output files, written beside each of them as
/// `<file>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, Value>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.into(),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.into(), serde_json::to_value(value).expect("serializable parameter"));
        self
    }
}

/// Collects outputs; files are written at once with their sidecars by
/// [`Sink::finish`], or printed when there is no destination.
pub struct Sink {
    manifest: RunManifest,
    files: Vec<(PathBuf, String)>,
}

impl Sink {
    pub fn new(manifest: RunManifest) -> Self {
        Self {
            manifest,
            files: Vec::new(),
        }
    }


    /// Queues `content` for `path`, or prints it to stdout.
    pub fn emit(&mut self, path: Option<&Path>, content: String) {
        match path {
            Some(p) => {
                self.manifest.outputs.push(p.display().to_string());
                self.files.push((p.to_path_buf(), content));
            }
            None => print!("{content}"),
        }
    }

    pub fn finish(self) -> Result<(), Failure> {
        let sidecar = serde_json::to_string_pretty(&self.manifest).expect("serializable manifest") + "\n";
        for (path, content) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
            }
            fs::write(path, content).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let mut side = path.as_os_str().to_owned();
            side.push(".manifest.json");
            fs::write(&side, &sidecar).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

/// CSV with a header row; floats use the shortest round-trip form.
pub fn csv<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v}").expect("write to string");
        }
        out.push('\n');
    }
    out
}
