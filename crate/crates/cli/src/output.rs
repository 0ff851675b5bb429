use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

pub const ENV_OUT_DIR: &str = "DSLM_OUT_DIR";

/// Output directory plus the reproducibility record stamped on every file.
pub struct Output {
    dir: PathBuf,
    meta: Value,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, command: &str, params: &impl Serialize) -> io::Result<Self> {
        fs::create_dir_all(&dir)?;
        let meta = json!({
            "tool": "dslm-sim",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "params": params,
        });
        Ok(Self {
            dir,
            meta,
            written: Vec::new(),
        })
    }

    /// CSV with a `# {meta}` first line.
    pub fn csv(&mut self, name: &str, body: &str) -> io::Result<()> {
        let text = format!("# {}\n{}", self.meta, body);
        self.write(name, text.as_bytes())
    }

    /// JSON document `{"meta": ..., "result": ...}`.
    pub fn json(&mut self, name: &str, result: &impl Serialize) -> io::Result<()> {
        let doc = json!({ "meta": self.meta, "result": result });
        let mut text = serde_json::to_string_pretty(&doc).map_err(io::Error::other)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// JSON lines, the first line being `{"meta": ...}`.
    pub fn jsonl<T: Serialize>(&mut self, name: &str, rows: &[T]) -> io::Result<()> {
        let mut text = json!({ "meta": self.meta }).to_string();
        text.push('\n');
        for r in rows {
            text.push_str(&serde_json::to_string(r).map_err(io::Error::other)?);
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    /// File written verbatim, for formats that must round-trip as input.
    pub fn raw(&mut self, name: &str, text: &str) -> io::Result<()> {
        self.write(name, text.as_bytes())
    }

    pub fn svg(&mut self, name: &str, body: &str) -> io::Result<()> {
        let text = body.replacen(
            "<svg ",
            &format!("<!-- {} -->\n<svg ", self.meta.to_string().replace("--", "- -")),
            1,
        );
        self.write(name, text.as_bytes())
    }

    /// Write to a sibling temporary file, then rename over the target.
    fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// `--out` if given, else `$DSLM_OUT_DIR`, else `./dslm-out`.
pub fn resolve_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(ENV_OUT_DIR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("dslm-out")),
    }
}
