use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A file written by a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFile {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Files emitted by one command run, in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub dir: PathBuf,
    pub files: Vec<EmittedFile>,
}

impl ReportBundle {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| io_error(&dir, source))?;
        Ok(Self {
            dir,
            files: Vec::new(),
        })
    }

    pub fn emit(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| io_error(&path, source))?;
        self.files.push(EmittedFile {
            name: name.to_string(),
            bytes: contents.len(),
            sha256: hex::encode(Sha256::digest(contents)),
        });
        Ok(())
    }

    /// Write `manifest.csv` listing every emitted file with its checksum.
    pub fn finish(self) -> Result<Self> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["file", "bytes", "sha256"])?;
        for f in &self.files {
            w.write_record([f.name.as_str(), &f.bytes.to_string(), f.sha256.as_str()])?;
        }
        let bytes = into_bytes(w)?;
        let path = self.dir.join("manifest.csv");
        std::fs::write(&path, bytes).map_err(|source| io_error(&path, source))?;
        Ok(self)
    }
}

pub(crate) fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io {
        path: "csv buffer".into(),
        source: e.into_error(),
    })
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut bundle = ReportBundle::new(dir.path()).unwrap();
        bundle.emit("a.csv", b"x\n1\n").unwrap();
        let bundle = bundle.finish().unwrap();
        assert_eq!(bundle.files.len(), 1);
        assert_eq!(
            bundle.files[0].sha256,
            hex::encode(Sha256::digest(b"x\n1\n"))
        );
        let manifest = std::fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert!(manifest.starts_with("file,bytes,sha256\na.csv,4,"));
    }
}
