//! Output directory bookkeeping: atomic writes and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandRun {
    pub started_unix: u64,
    pub finished_unix: u64,
    pub exit_code: i32,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    pub seed: u64,
    /// Condition verdicts, `A/B/C`.
    pub conditions: Option<String>,
    pub runs: BTreeMap<String, CommandRun>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Option<RunManifest> {
        let text = fs::read_to_string(dir.join(MANIFEST)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Every listed file exists and matches its digest.
    pub fn check(&self, dir: &Path) -> Result<(), String> {
        for run in self.runs.values() {
            for f in &run.files {
                let bytes = fs::read(dir.join(&f.path)).map_err(|e| format!("{}: {e}", f.path))?;
                if sha256_hex(&bytes) != f.sha256 {
                    return Err(format!("{}: digest mismatch", f.path));
                }
            }
        }
        Ok(())
    }
}

/// Collects the files written by one command.
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<FileEntry>,
}

impl Outputs {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, content: &[u8]) -> io::Result<()> {
        write_atomic(&self.dir.join(name), content)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(content), bytes: content.len() as u64 });
        Ok(())
    }

    /// Record this command in the manifest, replacing it when the config
    /// changed.
    pub fn finish(
        self,
        command: &str,
        config_digest: &str,
        seed: u64,
        conditions: Option<String>,
        started: u64,
        exit_code: i32,
    ) -> io::Result<()> {
        let mut m = match RunManifest::load(&self.dir) {
            Some(m) if m.config_digest == config_digest => m,
            _ => RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config_digest: config_digest.to_string(),
                seed,
                conditions: None,
                runs: BTreeMap::new(),
            },
        };
        if conditions.is_some() {
            m.conditions = conditions;
        }
        m.runs.insert(
            command.to_string(),
            CommandRun { started_unix: started, finished_unix: unix_now(), exit_code, files: self.files },
        );
        let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST), text.as_bytes())
    }
}
