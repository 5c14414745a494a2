use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// Output files collected in memory and written only once the whole pipeline
/// has succeeded. Every file is first written to a temporary sibling; the
/// renames happen only after all temporaries exist.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    /// Final paths, in the order added.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating output directory {}", self.dir.display()))?;
        let mut pending = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let mut tmp = NamedTempFile::new_in(&self.dir)
                .with_context(|| format!("staging {name} in {}", self.dir.display()))?;
            tmp.write_all(bytes).with_context(|| format!("writing {name}"))?;
            tmp.as_file().sync_all().with_context(|| format!("flushing {name}"))?;
            pending.push((tmp, self.dir.join(name)));
        }
        let mut written = Vec::with_capacity(pending.len());
        for (tmp, dest) in pending {
            tmp.persist(&dest)
                .with_context(|| format!("moving output into place at {}", dest.display()))?;
            written.push(dest);
        }
        Ok(written)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/out");
        let mut s = Staged::new(&out);
        s.add("a.txt", "alpha");
        s.add("b.bin", vec![1u8, 2, 3]);
        let paths = s.commit().unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(fs::read_to_string(out.join("a.txt")).unwrap(), "alpha");
        assert_eq!(fs::read(out.join("b.bin")).unwrap(), vec![1, 2, 3]);
        assert_eq!(fs::read_dir(&out).unwrap().count(), 2);
    }

    #[test]
    fn unwritable_dir_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let mut s = Staged::new(&blocker.join("sub"));
        s.add("a.txt", "alpha");
        assert!(s.commit().is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
