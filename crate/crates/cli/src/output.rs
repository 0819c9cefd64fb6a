use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use navier4_core::GridField;
use serde::Serialize;

use crate::error::CliError;

/// Output directory; every file is written to a temporary sibling first and
/// renamed into place.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        tmp.persist(&target).map_err(|e| CliError::Io(e.error))?;
        Ok(target)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn field(&self, name: &str, field: &GridField) -> Result<PathBuf, CliError> {
        self.write(name, field.to_csv_string().as_bytes())
    }
}
