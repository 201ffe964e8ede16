//! Output-directory bookkeeping: every file written by one invocation is
//! tracked, and all of them are removed again if the command fails before
//! committing. Exit code 0 therefore implies all outputs are present and
//! valid.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Run a writer against a tracked path.
    pub fn write_with(
        &mut self,
        name: &str,
        write: impl FnOnce(&Path) -> Result<()>,
    ) -> Result<()> {
        let path = self.path(name);
        self.written.push(path.clone());
        write(&path).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Serialize a value as pretty JSON (trailing newline included).
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write_with(name, |path| {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            fs::write(path, text)?;
            Ok(())
        })
    }

    /// Mark the invocation successful; files stay.
    pub fn commit(&mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for path in &self.written {
            let _ = fs::remove_file(path);
        }
    }
}
