//! Output directories that clean up after a failed command.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Relative output paths are resolved against this directory when set.
pub const OUTPUT_ROOT_ENV: &str = "PNMF_OUTPUT_ROOT";

pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if path.is_relative() && !root.is_empty() => Path::new(&root).join(path),
        _ => path.to_path_buf(),
    }
}

/// Tracks everything a command writes. Unless [`Staging::commit`] is called,
/// dropping it deletes the written files and any directories it created.
pub struct Staging {
    dir: PathBuf,
    created: Vec<PathBuf>,
    files: Vec<PathBuf>,
    committed: bool,
}

impl Staging {
    pub fn open(dir: &Path) -> Result<Self> {
        let mut stage = Self {
            dir: dir.to_path_buf(),
            created: Vec::new(),
            files: Vec::new(),
            committed: false,
        };
        stage.ensure_dir(dir)?;
        Ok(stage)
    }

    fn ensure_dir(&mut self, dir: &Path) -> Result<()> {
        if dir.is_dir() {
            return Ok(());
        }
        // record the outermost missing ancestor so cleanup removes the whole chain
        let mut top = dir.to_path_buf();
        while let Some(parent) = top.parent() {
            if parent.as_os_str().is_empty() || parent.exists() {
                break;
            }
            top = parent.to_path_buf();
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        self.created.push(top);
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Path for a file about to be written under the output directory.
    pub fn file(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            let parent = parent.to_path_buf();
            self.ensure_dir(&parent)?;
        }
        self.files.push(path.clone());
        Ok(path)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.created.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}
