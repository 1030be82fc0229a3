//! CSV files with a `#`-prefixed JSON header, and the run manifest that
//! registers them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Git-style content hash: SHA-256 over `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex(&h.finalize())
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    Ok(hex(&Sha256::digest(fs::read(path)?)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Shortest round-trip representation; `NaN` for missing values.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), fmt_f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub rows: usize,
}

/// Writes `rows` under `columns` with the JSON `header` split over `#` lines.
pub fn write_csv(
    path: &Path,
    header: &serde_json::Value,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<usize> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    let text = serde_json::to_string_pretty(header).map_err(io::Error::other)?;
    for line in text.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{}", columns.join(","))?;
    let mut n = 0;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        writeln!(w, "{}", row.join(","))?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Reads back the JSON header of a file written by [`write_csv`].
pub fn read_header(path: &Path) -> io::Result<serde_json::Value> {
    let text = fs::read_to_string(path)?;
    let json: String = text.lines().map_while(|l| l.strip_prefix("# ")).collect::<Vec<_>>().join("\n");
    serde_json::from_str(&json).map_err(io::Error::other)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub params: serde_json::Value,
    pub config_hash: String,
    pub rng_seed: u64,
    pub files: Vec<FileEntry>,
    pub timings_s: BTreeMap<String, f64>,
    pub started_unix_s: u64,
    pub status: String,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, rng_seed: u64) -> Self {
        let config_hash = content_hash(serde_json::to_string(&params).expect("plain JSON").as_bytes());
        let started = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            params,
            config_hash,
            rng_seed,
            files: Vec::new(),
            timings_s: BTreeMap::new(),
            started_unix_s: started,
            status: "running".to_string(),
        }
    }

    /// Header block shared by every file of the run.
    pub fn header(&self, extra: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "manifest_hash": self.config_hash,
            "command": self.command,
            "params": self.params,
            "data": extra,
        })
    }

    pub fn manifest_path(out: &Path, command: &str) -> PathBuf {
        out.join(format!("manifest-{command}.json"))
    }

    /// Writes a CSV under `out` and registers it.
    pub fn emit_csv(
        &mut self,
        out: &Path,
        name: &str,
        extra: serde_json::Value,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> io::Result<PathBuf> {
        let path = out.join(name);
        let n = write_csv(&path, &self.header(extra), columns, rows)?;
        self.files.push(FileEntry { path: name.to_string(), sha256: file_sha256(&path)?, rows: n });
        Ok(path)
    }

    /// Writes a JSON document under `out` and registers it.
    pub fn emit_json<T: Serialize>(&mut self, out: &Path, name: &str, value: &T) -> io::Result<PathBuf> {
        let path = out.join(name);
        fs::create_dir_all(out)?;
        let doc = serde_json::json!({ "manifest_hash": self.config_hash, "data": value });
        fs::write(&path, serde_json::to_string_pretty(&doc).map_err(io::Error::other)? + "\n")?;
        self.files.push(FileEntry { path: name.to_string(), sha256: file_sha256(&path)?, rows: 1 });
        Ok(path)
    }

    pub fn time(&mut self, label: &str, secs: f64) {
        self.timings_s.insert(label.to_string(), secs);
    }

    pub fn write(&self, out: &Path) -> io::Result<PathBuf> {
        fs::create_dir_all(out)?;
        let path = Self::manifest_path(out, &self.command);
        fs::write(&path, serde_json::to_string_pretty(self).map_err(io::Error::other)? + "\n")?;
        Ok(path)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        serde_json::from_str(&fs::read_to_string(path)?).map_err(io::Error::other)
    }

    /// Files that are missing, changed, or lack the manifest hash.
    pub fn verify(&self, out: &Path) -> Vec<String> {
        let mut bad = Vec::new();
        for f in &self.files {
            let path = out.join(&f.path);
            match file_sha256(&path) {
                Err(e) => bad.push(format!("{}: {e}", f.path)),
                Ok(h) if h != f.sha256 => bad.push(format!("{}: hash mismatch", f.path)),
                Ok(_) => {
                    let text = fs::read_to_string(&path).unwrap_or_default();
                    if !text.contains(&self.config_hash) {
                        bad.push(format!("{}: manifest hash missing from header", f.path));
                    }
                }
            }
        }
        bad
    }
}
