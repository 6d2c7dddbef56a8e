use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::args::Command;

/// Everything needed to rerun a command: the fully resolved arguments
/// (absolute paths, every default filled in) and what it wrote.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
}

pub fn path_for(out_dir: &Path, command: &Command) -> PathBuf {
    out_dir.join(format!("{}.manifest.json", command.name()))
}

pub fn write(out_dir: &Path, command: &Command, outputs: Vec<String>) -> Result<PathBuf> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
        outputs,
    };
    let path = path_for(out_dir, command);
    let mut text = serde_json::to_string_pretty(&m)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn read(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}
