//! Discovery of bundled spaces and similarity datasets in a data directory.
//!
//! Layout:
//!
//! ```text
//! <root>/spaces/<name>.vec                      text format
//! <root>/spaces/<name>.vocab + <name>.vectors   binary format
//! <root>/similarity/<name>.tsv                  word-similarity datasets
//! ```

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::SimilarityDataset;
use crate::store::{load_binary, load_text, EmbeddingSpace, VECTORS_HEADER_LEN, VECTORS_MAGIC};

pub const DATA_DIR_ENV: &str = "EMBIAS_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceFormat {
    Text,
    Binary,
}

/// A space file found on disk, described without loading its vectors.
#[derive(Debug, Clone, Serialize)]
pub struct SpaceEntry {
    pub name: String,
    pub format: SpaceFormat,
    pub dim: usize,
    pub vocab_size: usize,
    #[serde(skip)]
    pub path: PathBuf,
}

impl SpaceEntry {
    pub fn load(&self) -> Result<EmbeddingSpace> {
        let space = match self.format {
            SpaceFormat::Text => load_text(&self.path, None)?,
            SpaceFormat::Binary => load_binary(self.path.with_extension("vocab"), &self.path)?,
        };
        Ok(space.with_name(self.name.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$EMBIAS_DATA_DIR`, falling back to `./data`.
    pub fn from_env() -> Self {
        Self::new(std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| "data".into()))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Space files sorted by name. A missing `spaces/` directory yields none.
    pub fn spaces(&self) -> Result<Vec<SpaceEntry>> {
        let mut out = Vec::new();
        for path in sorted_files(&self.root.join("spaces"))? {
            let Some(name) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            match path.extension().and_then(|e| e.to_str()) {
                Some("vec" | "txt") => {
                    let (vocab_size, dim) = scan_text(&path)?;
                    out.push(SpaceEntry {
                        name: name.to_string(),
                        format: SpaceFormat::Text,
                        dim,
                        vocab_size,
                        path,
                    });
                }
                Some("vectors") if path.with_extension("vocab").is_file() => {
                    let (vocab_size, dim) = scan_binary(&path)?;
                    out.push(SpaceEntry {
                        name: name.to_string(),
                        format: SpaceFormat::Binary,
                        dim,
                        vocab_size,
                        path,
                    });
                }
                _ => {}
            }
        }
        Ok(out)
    }

    pub fn similarity_datasets(&self) -> Result<Vec<SimilarityDataset>> {
        sorted_files(&self.root.join("similarity"))?
            .into_iter()
            .filter(|p| p.extension().is_some_and(|e| e == "tsv"))
            .map(SimilarityDataset::load)
            .collect()
    }
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    Ok(files)
}

/// Counts rows and reads the width of a text space without parsing numbers.
/// A leading "<count> <dim>" header is not counted.
fn scan_text(path: &Path) -> Result<(usize, usize)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut rows = 0;
    let mut dim = 0;
    let mut first = true;
    for line in reader.lines() {
        let line = line?;
        let mut fields = line.split_whitespace();
        let Some(head) = fields.next() else { continue };
        let width = fields.count();
        if first {
            first = false;
            let is_header = width == 1
                && head.parse::<u64>().is_ok()
                && line.split_whitespace().nth(1).is_some_and(|f| f.parse::<u64>().is_ok());
            if is_header {
                continue;
            }
        }
        if dim == 0 {
            dim = width;
        }
        rows += 1;
    }
    Ok((rows, dim))
}

fn scan_binary(path: &Path) -> Result<(usize, usize)> {
    let mut header = [0u8; VECTORS_HEADER_LEN];
    fs::File::open(path)?
        .read_exact(&mut header)
        .map_err(|_| Error::Format(format!("{}: truncated header", path.display())))?;
    if &header[..4] != VECTORS_MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let rows = u64::from_le_bytes(header[4..12].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(header[12..20].try_into().unwrap()) as usize;
    Ok((rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{save_binary, save_text};

    #[test]
    fn lists_text_and_binary_spaces() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("spaces")).unwrap();
        let space = EmbeddingSpace::from_pairs("x", &[("a", [1.0, 2.0, 3.0]), ("b", [0.0, 1.0, 0.0])]).unwrap();
        save_text(&space, dir.path().join("spaces/plain.vec")).unwrap();
        save_binary(&space, dir.path().join("spaces/packed.vocab"), dir.path().join("spaces/packed.vectors")).unwrap();
        fs::write(dir.path().join("spaces/notes.md"), "ignored").unwrap();

        let entries = DataDir::new(dir.path()).spaces().unwrap();
        let names: Vec<_> = entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["packed", "plain"]);
        for e in &entries {
            assert_eq!((e.vocab_size, e.dim), (2, 3));
            let loaded = e.load().unwrap();
            assert_eq!(loaded.name(), e.name);
            assert_eq!(loaded.len(), 2);
        }
    }

    #[test]
    fn header_line_is_not_a_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.vec");
        fs::write(&path, "2 2\na 1 0\nb 0 1\n").unwrap();
        assert_eq!(scan_text(&path).unwrap(), (2, 2));
    }

    #[test]
    fn missing_directories_are_empty() {
        let d = DataDir::new("/nonexistent/embias");
        assert!(d.spaces().unwrap().is_empty());
        assert!(d.similarity_datasets().unwrap().is_empty());
    }
}
