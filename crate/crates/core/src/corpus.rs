//! Document sources: JSONL files with a `"text"` field, plain-text files
//! (one document per file), and in-memory collections.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("document {doc}: {path}: {source}")]
    Io {
        doc: usize,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("document {doc}: {path}:{line}: {message}")]
    Json {
        doc: usize,
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("document {doc}: invalid UTF-8 at byte {offset}")]
    InvalidUtf8 { doc: usize, offset: usize },
}

pub type DocResult = Result<String, CorpusError>;

/// A corpus that can be streamed more than once.
pub trait CorpusSource {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_>;
}

impl CorpusSource for [String] {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_> {
        Box::new(self.iter().cloned().map(Ok))
    }
}

impl CorpusSource for Vec<String> {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_> {
        self.as_slice().documents()
    }
}

impl CorpusSource for [&str] {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_> {
        Box::new(self.iter().map(|s| Ok(s.to_string())))
    }
}

impl<const N: usize> CorpusSource for [&str; N] {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_> {
        self.as_slice().documents()
    }
}

/// Decodes raw document bytes, rejecting invalid UTF-8.
pub fn decode_document(doc: usize, bytes: Vec<u8>) -> DocResult {
    String::from_utf8(bytes).map_err(|e| CorpusError::InvalidUtf8 {
        doc,
        offset: e.utf8_error().valid_up_to(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON object per line, document in the `"text"` field.
    Jsonl,
    /// Each file is one document.
    Text,
}

impl CorpusFormat {
    /// `.jsonl`/`.json` files are JSONL, everything else plain text.
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => CorpusFormat::Jsonl,
            _ => CorpusFormat::Text,
        }
    }
}

/// Files on disk, optionally truncated to the first `limit` documents.
#[derive(Debug, Clone)]
pub struct FileCorpus {
    files: Vec<(PathBuf, CorpusFormat)>,
    limit: Option<usize>,
}

impl FileCorpus {
    /// Directories are expanded to their files (sorted, non-recursive).
    pub fn new<P: AsRef<Path>>(paths: &[P], format: Option<CorpusFormat>) -> std::io::Result<Self> {
        let mut files = Vec::new();
        for p in paths {
            let p = p.as_ref();
            if p.is_dir() {
                let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|e| e.is_file())
                    .collect();
                entries.sort();
                for e in entries {
                    let f = format.unwrap_or_else(|| CorpusFormat::detect(&e));
                    files.push((e, f));
                }
            } else {
                let f = format.unwrap_or_else(|| CorpusFormat::detect(p));
                files.push((p.to_path_buf(), f));
            }
        }
        Ok(Self { files, limit: None })
    }

    pub fn with_limit(mut self, limit: Option<usize>) -> Self {
        self.limit = limit;
        self
    }
}

impl CorpusSource for FileCorpus {
    fn documents(&self) -> Box<dyn Iterator<Item = DocResult> + '_> {
        // per-file iterators number from 0; renumbered globally below
        let iter = self.files.iter().flat_map(|(path, format)| {
            let docs: Box<dyn Iterator<Item = DocResult>> = match format {
                CorpusFormat::Text => Box::new(std::iter::once(read_text_file(0, path))),
                CorpusFormat::Jsonl => match File::open(path) {
                    Ok(f) => Box::new(JsonlDocuments {
                        reader: BufReader::new(f),
                        path: path.clone(),
                        line: 0,
                        buf: Vec::new(),
                        done: false,
                    }),
                    Err(source) => Box::new(std::iter::once(Err(CorpusError::Io {
                        doc: 0,
                        path: path.clone(),
                        source,
                    }))),
                },
            };
            docs
        });
        let iter = iter.enumerate().map(|(n, d)| d.map_err(|e| e.with_doc(n)));
        match self.limit {
            Some(l) => Box::new(iter.take(l)),
            None => Box::new(iter),
        }
    }
}

impl CorpusError {
    fn with_doc(self, n: usize) -> Self {
        match self {
            CorpusError::InvalidUtf8 { offset, .. } => CorpusError::InvalidUtf8 { doc: n, offset },
            CorpusError::Io { path, source, .. } => CorpusError::Io {
                doc: n,
                path,
                source,
            },
            CorpusError::Json {
                path,
                line,
                message,
                ..
            } => CorpusError::Json {
                doc: n,
                path,
                line,
                message,
            },
        }
    }
}

fn read_text_file(doc: usize, path: &Path) -> DocResult {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| CorpusError::Io {
            doc,
            path: path.to_path_buf(),
            source,
        })?;
    decode_document(doc, bytes)
}

struct JsonlDocuments {
    reader: BufReader<File>,
    path: PathBuf,
    line: usize,
    buf: Vec<u8>,
    done: bool,
}

#[derive(serde::Deserialize)]
struct JsonlRecord {
    text: String,
}

impl Iterator for JsonlDocuments {
    type Item = DocResult;

    fn next(&mut self) -> Option<DocResult> {
        while !self.done {
            self.buf.clear();
            self.line += 1;
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    if self.buf.iter().all(u8::is_ascii_whitespace) {
                        continue;
                    }
                    let doc = 0;
                    let line = std::mem::take(&mut self.buf);
                    let text = match decode_document(doc, line) {
                        Ok(t) => t,
                        Err(e) => return Some(Err(e)),
                    };
                    return Some(
                        serde_json::from_str::<JsonlRecord>(&text)
                            .map(|r| r.text)
                            .map_err(|e| CorpusError::Json {
                                doc,
                                path: self.path.clone(),
                                line: self.line,
                                message: e.to_string(),
                            }),
                    );
                }
                Err(source) => {
                    self.done = true;
                    return Some(Err(CorpusError::Io {
                        doc: 0,
                        path: self.path.clone(),
                        source,
                    }));
                }
            }
        }
        None
    }
}
