//! Embedding spaces and their on-disk formats.
//!
//! Two formats are supported:
//!
//! * text: one `word c1 c2 ... cd` line per word, optionally preceded by a
//!   `count dim` header line (word2vec/fastText style) or not (GloVe style);
//! * binary: a `.vocab` JSON object mapping words to row indices plus a
//!   `.vectors` file laid out as `b"EMB1"`, `rows: u64 LE`, `cols: u64 LE`
//!   followed by `rows * cols` little-endian `f32` values in row-major order.
//!
//! Vectors are held as `f64` in memory. Binary files store `f32`, so a
//! binary load/save round trip is bit-exact.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const VECTORS_MAGIC: &[u8; 4] = b"EMB1";
pub const VECTORS_HEADER_LEN: usize = 4 + 8 + 8;

/// An immutable vocabulary with one row vector per word.
#[derive(Debug, Clone)]
pub struct EmbeddingSpace {
    name: String,
    words: Vec<String>,
    index: HashMap<String, usize>,
    // lowercase form -> first row whose word lowercases to it
    folded: HashMap<String, usize>,
    matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupResult {
    pub word: String,
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_form: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

fn check_word(word: &str) -> Result<()> {
    if word.is_empty() {
        return Err(Error::Format("empty word".into()));
    }
    if word.chars().any(char::is_whitespace) {
        return Err(Error::Format(format!("word {word:?} contains whitespace")));
    }
    Ok(())
}

impl EmbeddingSpace {
    /// Builds a space from words in row order. Duplicate or malformed words are rejected.
    pub fn new(name: impl Into<String>, words: Vec<String>, matrix: Matrix) -> Result<Self> {
        if words.len() != matrix.rows() {
            return Err(Error::Format(format!(
                "{} words but {} matrix rows",
                words.len(),
                matrix.rows()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        let mut folded = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            check_word(w)?;
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate word {w:?}")));
            }
            folded.entry(w.to_lowercase()).or_insert(i);
        }
        Ok(Self {
            name: name.into(),
            words,
            index,
            folded,
            matrix,
        })
    }

    pub fn from_pairs<S: AsRef<str>, V: AsRef<[f64]>>(
        name: impl Into<String>,
        pairs: &[(S, V)],
    ) -> Result<Self> {
        let words = pairs.iter().map(|(w, _)| w.as_ref().to_string()).collect();
        let rows: Vec<&[f64]> = pairs.iter().map(|(_, v)| v.as_ref()).collect();
        Self::new(name, words, Matrix::from_rows(&rows)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        self.matrix.row(row)
    }

    /// Returns a space with the same vocabulary and a replacement matrix.
    pub fn with_matrix(&self, name: impl Into<String>, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != self.len() || matrix.cols() != self.dim() {
            return Err(Error::Shape(format!(
                "replacement matrix is {}x{}, space is {}x{}",
                matrix.rows(),
                matrix.cols(),
                self.len(),
                self.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            words: self.words.clone(),
            index: self.index.clone(),
            folded: self.folded.clone(),
            matrix,
        })
    }

    /// Row index of `word` and the vocabulary form that matched.
    ///
    /// Tries the exact form, then the lowercased query, then any vocabulary
    /// entry equal to the query up to case.
    pub fn resolve(&self, word: &str) -> Option<(usize, &str)> {
        if let Some(&i) = self.index.get(word) {
            return Some((i, &self.words[i]));
        }
        let lower = word.to_lowercase();
        self.index
            .get(&lower)
            .or_else(|| self.folded.get(&lower))
            .map(|&i| (i, self.words[i].as_str()))
    }

    pub fn lookup(&self, word: &str) -> LookupResult {
        match self.resolve(word) {
            Some((i, form)) => LookupResult {
                word: word.to_string(),
                found: true,
                matched_form: Some(form.to_string()),
                vector: Some(self.vector(i).to_vec()),
            },
            None => LookupResult {
                word: word.to_string(),
                found: false,
                matched_form: None,
                vector: None,
            },
        }
    }

    /// Approximate in-memory footprint, used for registry caps.
    pub fn byte_size(&self) -> usize {
        std::mem::size_of_val(self.matrix.as_slice())
            + self.words.iter().map(|w| w.len() * 2 + 48).sum::<usize>()
    }
}

fn name_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "space".to_string())
}

fn header_dims(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let count = parts.next()?.parse().ok()?;
    let dim = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((count, dim))
}

/// Reads a text-format embedding file. See [`read_text`].
pub fn load_text(path: impl AsRef<Path>, limit: Option<usize>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_text(
        BufReader::new(file),
        &name_from_path(path),
        &path.display().to_string(),
        limit,
    )
}

/// Parses text-format embeddings from any reader.
///
/// Words keep file order; a repeated word keeps its first vector and is not
/// counted again toward `limit`. `source` is used in line diagnostics.
pub fn read_text<R: BufRead>(
    reader: R,
    name: &str,
    source: &str,
    limit: Option<usize>,
) -> Result<EmbeddingSpace> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut words = Vec::new();
    let mut seen = HashMap::new();
    let mut data = Vec::new();
    let mut dim: Option<usize> = None;
    let mut content_lines = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        if limit.is_some_and(|l| words.len() >= l) {
            break;
        }
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        content_lines += 1;
        if content_lines == 1 && header_dims(&line).is_some() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line");
        let values = parts
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(line_no, format!("non-numeric component {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_err(line_no, format!("word {word:?} has no vector")));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(parse_err(
                    line_no,
                    format!("expected {d} components, found {}", values.len()),
                ))
            }
            Some(_) => {}
        }
        if seen.contains_key(word) {
            continue;
        }
        seen.insert(word.to_string(), words.len());
        words.push(word.to_string());
        data.extend(values);
    }

    let Some(dim) = dim else {
        return Err(Error::Format(format!("{source}: no embeddings found")));
    };
    let matrix = Matrix::new(words.len(), dim, data)?;
    EmbeddingSpace::new(name, words, matrix)
}

/// Writes a headerless text file; values use the shortest round-tripping representation.
pub fn save_text(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_text(space, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_text<W: Write>(space: &EmbeddingSpace, out: &mut W) -> Result<()> {
    for (word, row) in space.words().iter().zip(space.matrix().row_iter()) {
        write!(out, "{word}")?;
        for v in row {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

struct VocabRef<'a>(&'a [String]);

impl Serialize for VocabRef<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (i, w) in self.0.iter().enumerate() {
            map.serialize_entry(w, &i)?;
        }
        map.end()
    }
}

pub fn vocab_json(space: &EmbeddingSpace) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(&VocabRef(space.words()))?)
}

pub fn vectors_bytes(space: &EmbeddingSpace) -> Vec<u8> {
    let m = space.matrix();
    let mut buf = Vec::with_capacity(VECTORS_HEADER_LEN + m.as_slice().len() * 4);
    buf.extend_from_slice(VECTORS_MAGIC);
    buf.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for &v in m.as_slice() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    buf
}

pub fn save_binary(
    space: &EmbeddingSpace,
    vocab_path: impl AsRef<Path>,
    vectors_path: impl AsRef<Path>,
) -> Result<()> {
    if space.is_empty() {
        return Err(Error::Format("refusing to serialize an empty space".into()));
    }
    std::fs::write(vocab_path, vocab_json(space)?)?;
    std::fs::write(vectors_path, vectors_bytes(space))?;
    Ok(())
}

pub fn load_binary(
    vocab_path: impl AsRef<Path>,
    vectors_path: impl AsRef<Path>,
) -> Result<EmbeddingSpace> {
    let vocab_path = vocab_path.as_ref();
    let vocab = std::fs::read(vocab_path)?;
    let mut vectors = Vec::new();
    File::open(vectors_path)?.read_to_end(&mut vectors)?;
    parse_binary(&name_from_path(vocab_path), &vocab, &vectors)
}

/// Decodes an in-memory `.vocab` / `.vectors` pair.
pub fn parse_binary(name: &str, vocab: &[u8], vectors: &[u8]) -> Result<EmbeddingSpace> {
    let map: HashMap<String, u64> = serde_json::from_slice(vocab)
        .map_err(|e| Error::Format(format!("malformed vocab JSON: {e}")))?;

    if vectors.len() < VECTORS_HEADER_LEN || &vectors[..4] != VECTORS_MAGIC {
        return Err(Error::Format("bad magic in vectors file".into()));
    }
    let rows = u64::from_le_bytes(vectors[4..12].try_into().expect("8 bytes")) as usize;
    let cols = u64::from_le_bytes(vectors[12..20].try_into().expect("8 bytes")) as usize;
    let payload = &vectors[VECTORS_HEADER_LEN..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("vectors header overflows".into()))?;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "vectors payload is {} bytes, header declares {rows}x{cols} ({expected} bytes)",
            payload.len()
        )));
    }
    if map.len() != rows {
        return Err(Error::Format(format!(
            "vocab has {} entries but matrix has {rows} rows",
            map.len()
        )));
    }

    let mut words: Vec<Option<String>> = vec![None; rows];
    for (word, idx) in map {
        let idx = idx as usize;
        if idx >= rows {
            return Err(Error::Format(format!(
                "index {idx} for {word:?} out of range for {rows} rows"
            )));
        }
        if let Some(prev) = &words[idx] {
            return Err(Error::Format(format!(
                "duplicate index {idx} for {prev:?} and {word:?}"
            )));
        }
        words[idx] = Some(word);
    }
    let words: Vec<String> = words.into_iter().map(|w| w.expect("all filled")).collect();

    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    EmbeddingSpace::new(name, words, Matrix::new(rows, cols, data)?)
}
