use std::path::{Path, PathBuf};

use tempfile::TempDir;

/// Collects a command's output files in a staging directory next to the
/// destination and moves them into place only on [`OutputDir::commit`].
/// Dropping without committing leaves the destination untouched.
pub struct OutputDir {
    dest: PathBuf,
    staging: TempDir,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dest: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dest)?;
        let staging = tempfile::Builder::new().prefix(".nidt-staging-").tempdir_in(dest)?;
        Ok(Self { dest: dest.to_path_buf(), staging, files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> std::io::Result<()> {
        std::fs::write(self.staging.path().join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn commit(self) -> std::io::Result<()> {
        for name in &self.files {
            std::fs::rename(self.staging.path().join(name), self.dest.join(name))?;
        }
        Ok(())
    }
}
