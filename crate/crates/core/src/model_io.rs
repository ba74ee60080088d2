//! Model files and training logs.
//!
//! A model file is JSON:
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "target_size": 512,
//!   "pretokenizer": { ... },
//!   "merges": [ {"left": " t", "right": "o", "count": 41, "kind": "regular"}, ... ],
//!   "metadata": { ... },
//!   "greedy_ngrams": [ [" to", " be"], ... ]
//! }
//! ```
//!
//! Token bytes are written as a JSON string when they are valid UTF-8 and
//! as an array of byte values otherwise. Token ids are not stored; they are
//! reassigned in merge order on load.
//!
//! A training log has one tab-separated line per merge:
//! `index  kind  left-hex  right-hex  count`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{MergeKind, ModelBuilder, ModelError, TokenizerModel, TrainingMetadata};
use crate::pretokenizer::{Pretokenizer, PretokenizerConfig, PretokenizerError};
use crate::TokenId;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported format version {found}, expected {FORMAT_VERSION}")]
    Version { found: u32 },
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("invalid model: {0}")]
    Invalid(#[from] ModelError),
    #[error("invalid pre-tokenizer config: {0}")]
    Pretokenizer(#[from] PretokenizerError),
}

/// Token bytes as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TokenBytes {
    Text(String),
    Bytes(Vec<u8>),
}

impl TokenBytes {
    pub fn new(bytes: &[u8]) -> Self {
        match std::str::from_utf8(bytes) {
            Ok(s) => TokenBytes::Text(s.to_string()),
            Err(_) => TokenBytes::Bytes(bytes.to_vec()),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        match self {
            TokenBytes::Text(s) => s.as_bytes(),
            TokenBytes::Bytes(b) => b,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MergeRecord {
    left: TokenBytes,
    right: TokenBytes,
    count: u64,
    kind: MergeKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    target_size: usize,
    pretokenizer: PretokenizerConfig,
    merges: Vec<MergeRecord>,
    #[serde(default)]
    metadata: TrainingMetadata,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    greedy_ngrams: Vec<Vec<TokenBytes>>,
}

#[derive(Debug, Deserialize)]
struct VersionProbe {
    format_version: u32,
}

/// Non-fatal anomaly found while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LoadWarning {
    /// A supermerge parent that is not a superword and would fail the
    /// merge-pattern half of the eligibility test.
    IneligibleParent { index: usize, bytes: Vec<u8> },
}

impl std::fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadWarning::IneligibleParent { index, bytes } => write!(
                f,
                "merge {index}: supermerge parent {:?} does not match the merge pattern",
                String::from_utf8_lossy(bytes)
            ),
        }
    }
}

pub fn to_json(model: &TokenizerModel) -> String {
    let tok = |id: TokenId| TokenBytes::new(model.token_bytes(id).expect("model token"));
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        target_size: model.target_size(),
        pretokenizer: model.pretokenizer().clone(),
        merges: model
            .merges()
            .iter()
            .map(|m| MergeRecord {
                left: tok(m.left),
                right: tok(m.right),
                count: m.count,
                kind: m.kind,
            })
            .collect(),
        metadata: model.metadata().clone(),
        greedy_ngrams: model
            .greedy_ngrams()
            .iter()
            .map(|g| g.iter().map(|&t| tok(t)).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Parses and validates a model, returning eligibility warnings alongside.
pub fn from_json(json: &str) -> Result<(TokenizerModel, Vec<LoadWarning>), ModelIoError> {
    let probe: VersionProbe =
        serde_json::from_str(json).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(ModelIoError::Version {
            found: probe.format_version,
        });
    }
    let file: ModelFile =
        serde_json::from_str(json).map_err(|e| ModelIoError::Malformed(e.to_string()))?;
    let pretokenizer = Pretokenizer::new(file.pretokenizer.clone())?;

    let mut b = ModelBuilder::new(file.target_size, file.pretokenizer);
    for m in &file.merges {
        b.push(m.left.as_bytes(), m.right.as_bytes(), m.count, m.kind)?;
    }
    let mut model = b.metadata(file.metadata).build();
    model.validate()?;

    let mut ngrams = Vec::with_capacity(file.greedy_ngrams.len());
    for g in &file.greedy_ngrams {
        let ids: Option<Vec<TokenId>> = g.iter().map(|t| model.token_id(t.as_bytes())).collect();
        ngrams.push(ids.ok_or_else(|| {
            ModelIoError::Malformed("greedy n-gram references an unknown token".into())
        })?);
    }
    model.set_greedy_ngrams(ngrams);

    let mut warnings = Vec::new();
    for (index, m) in model.merges().iter().enumerate() {
        if m.kind != MergeKind::Super {
            continue;
        }
        for t in [m.left, m.right] {
            if !model.is_regular_token(t) {
                continue;
            }
            let bytes = model.token_bytes(t).expect("model token");
            let ok =
                std::str::from_utf8(bytes).is_ok_and(|s| pretokenizer.matches_merge_pattern(s));
            if !ok {
                warnings.push(LoadWarning::IneligibleParent {
                    index,
                    bytes: bytes.to_vec(),
                });
            }
        }
    }
    Ok((model, warnings))
}

pub fn save_model(model: &TokenizerModel, path: &Path) -> Result<(), ModelIoError> {
    let io = |source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(to_json(model).as_bytes()).map_err(io)?;
    w.write_all(b"\n").map_err(io)?;
    w.flush().map_err(io)
}

pub fn load_model_with_warnings(
    path: &Path,
) -> Result<(TokenizerModel, Vec<LoadWarning>), ModelIoError> {
    let json = std::fs::read_to_string(path).map_err(|source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&json)
}

/// Loads a model, logging any eligibility warnings.
pub fn load_model(path: &Path) -> Result<TokenizerModel, ModelIoError> {
    let (model, warnings) = load_model_with_warnings(path)?;
    for w in warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(model)
}

/// One merge of a training log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub index: usize,
    pub kind: MergeKind,
    pub left: Vec<u8>,
    pub right: Vec<u8>,
    pub count: u64,
}

pub fn training_log(model: &TokenizerModel) -> Vec<LogRecord> {
    model
        .merges()
        .iter()
        .enumerate()
        .map(|(index, m)| LogRecord {
            index,
            kind: m.kind,
            left: model.token_bytes(m.left).expect("model token").to_vec(),
            right: model.token_bytes(m.right).expect("model token").to_vec(),
            count: m.count,
        })
        .collect()
}

pub fn write_training_log<W: Write>(model: &TokenizerModel, mut w: W) -> std::io::Result<()> {
    for r in training_log(model) {
        let kind = match r.kind {
            MergeKind::Regular => "regular",
            MergeKind::Super => "super",
        };
        writeln!(
            w,
            "{}\t{kind}\t{}\t{}\t{}",
            r.index,
            hex::encode(&r.left),
            hex::encode(&r.right),
            r.count
        )?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("log line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub fn read_training_log<R: BufRead>(r: R) -> Result<Vec<LogRecord>, LogError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| LogError::Parse {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let kind = match f[1] {
            "regular" => MergeKind::Regular,
            "super" => MergeKind::Super,
            k => return Err(err(format!("unknown kind {k:?}"))),
        };
        out.push(LogRecord {
            index: f[0].parse().map_err(|e| err(format!("index: {e}")))?,
            kind,
            left: hex::decode(f[2]).map_err(|e| err(format!("left: {e}")))?,
            right: hex::decode(f[3]).map_err(|e| err(format!("right: {e}")))?,
            count: f[4].parse().map_err(|e| err(format!("count: {e}")))?,
        });
    }
    Ok(out)
}

pub fn read_training_log_file(path: &Path) -> Result<Vec<LogRecord>, LogError> {
    read_training_log(BufReader::new(File::open(path)?))
}

/// A supermerge whose count exceeds a parent's creation count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountBoundViolation {
    pub index: usize,
    pub count: u64,
    pub parent: Vec<u8>,
    pub parent_count: u64,
}

/// Checks every supermerge count against the creation counts of its two
/// parents. Single bytes have no bound. A token produced by more than one
/// rule is bounded by the sum of their counts.
pub fn supermerge_count_violations(log: &[LogRecord]) -> Vec<CountBoundViolation> {
    let mut created: rustc_hash::FxHashMap<Vec<u8>, u64> = rustc_hash::FxHashMap::default();
    let mut out = Vec::new();
    for r in log {
        if r.kind == MergeKind::Super {
            for parent in [&r.left, &r.right] {
                if parent.len() == 1 {
                    continue;
                }
                let bound = created.get(parent).copied().unwrap_or(0);
                if r.count > bound {
                    out.push(CountBoundViolation {
                        index: r.index,
                        count: r.count,
                        parent: parent.clone(),
                        parent_count: bound,
                    });
                }
            }
        }
        let mut produced = r.left.clone();
        produced.extend_from_slice(&r.right);
        *created.entry(produced).or_insert(0) += r.count;
    }
    out
}
