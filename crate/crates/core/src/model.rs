//! Tokenizer model: the byte alphabet, an ordered merge list and the
//! pre-tokenization config it was trained with.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::pretokenizer::{PretokenizerConfig, Vocabulary};
use crate::TokenId;

/// Number of single-byte tokens. Ids `0..256` are the bytes themselves.
pub const SIGMA_SIZE: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeKind {
    /// Merge inside a pretoken.
    Regular,
    /// Merge of two adjacent single-token pretokens (or superwords).
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: TokenId,
    pub right: TokenId,
    pub produced: TokenId,
    /// Pair count when the rule was selected.
    pub count: u64,
    pub kind: MergeKind,
}

/// Optional provenance recorded with a trained model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regular: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supermerges: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("merge {index}: token id {token} is not defined before use")]
    Unreachable { index: usize, token: TokenId },
    #[error("merge {index}: {kind:?} count {count} exceeds previous {kind:?} count {previous}")]
    IncreasingCount {
        index: usize,
        kind: MergeKind,
        count: u64,
        previous: u64,
    },
    #[error("merge {index}: parent token {bytes:?} is not defined before use")]
    UnknownParent { index: usize, bytes: Vec<u8> },
    #[error("merge {index}: produced id {produced} does not match its bytes")]
    ProducedMismatch { index: usize, produced: TokenId },
    #[error("vocabulary size {size} exceeds target size {target}")]
    TooLarge { size: usize, target: usize },
}

/// A trained tokenizer.
///
/// Token identity is the byte string: a merge producing bytes that already
/// exist reuses the existing id, so `vocab_size() <= SIGMA_SIZE + merges().len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerModel {
    merges: Vec<MergeRule>,
    tokens: Vec<Vec<u8>>,
    vocab: FxHashMap<Vec<u8>, TokenId>,
    /// Token is a byte or the product of a regular merge.
    regular: Vec<bool>,
    target_size: usize,
    pretokenizer: PretokenizerConfig,
    metadata: TrainingMetadata,
    greedy_ngrams: Vec<Vec<TokenId>>,
}

/// Incrementally assembles a model from merges given by byte strings.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    model: TokenizerModel,
}

impl ModelBuilder {
    pub fn new(target_size: usize, pretokenizer: PretokenizerConfig) -> Self {
        let tokens: Vec<Vec<u8>> = (0..=255u8).map(|b| vec![b]).collect();
        let vocab = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Self {
            model: TokenizerModel {
                merges: Vec::new(),
                tokens,
                vocab,
                regular: vec![true; SIGMA_SIZE],
                target_size,
                pretokenizer,
                metadata: TrainingMetadata::default(),
                greedy_ngrams: Vec::new(),
            },
        }
    }

    /// Appends a merge of two existing tokens, returning the produced id.
    pub fn push(
        &mut self,
        left: &[u8],
        right: &[u8],
        count: u64,
        kind: MergeKind,
    ) -> Result<TokenId, ModelError> {
        let index = self.model.merges.len();
        let lookup = |bytes: &[u8]| {
            self.model
                .token_id(bytes)
                .ok_or_else(|| ModelError::UnknownParent {
                    index,
                    bytes: bytes.to_vec(),
                })
        };
        let (l, r) = (lookup(left)?, lookup(right)?);
        self.push_ids(l, r, count, kind)
    }

    /// Appends a merge of two existing token ids.
    pub fn push_ids(
        &mut self,
        left: TokenId,
        right: TokenId,
        count: u64,
        kind: MergeKind,
    ) -> Result<TokenId, ModelError> {
        let index = self.model.merges.len();
        let m = &mut self.model;
        for t in [left, right] {
            if t as usize >= m.tokens.len() {
                return Err(ModelError::Unreachable { index, token: t });
            }
        }
        let mut bytes = m.tokens[left as usize].clone();
        bytes.extend_from_slice(&m.tokens[right as usize]);
        let produced = match m.vocab.get(&bytes) {
            Some(&id) => id,
            None => {
                let id = m.tokens.len() as TokenId;
                m.vocab.insert(bytes.clone(), id);
                m.tokens.push(bytes);
                m.regular.push(false);
                id
            }
        };
        if kind == MergeKind::Regular {
            m.regular[produced as usize] = true;
        }
        m.merges.push(MergeRule {
            left,
            right,
            produced,
            count,
            kind,
        });
        Ok(produced)
    }

    pub fn metadata(mut self, metadata: TrainingMetadata) -> Self {
        self.model.metadata = metadata;
        self
    }

    pub fn len(&self) -> usize {
        self.model.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.model.merges.is_empty()
    }

    pub fn token_bytes(&self, id: TokenId) -> &[u8] {
        &self.model.tokens[id as usize]
    }

    pub fn build(self) -> TokenizerModel {
        self.model
    }
}

impl TokenizerModel {
    /// Rebuilds a model from a merge list whose ids follow the builder's
    /// numbering (bytes first, new byte strings in order of first production).
    pub fn from_merges(
        merges: &[MergeRule],
        target_size: usize,
        pretokenizer: PretokenizerConfig,
    ) -> Result<Self, ModelError> {
        let mut b = ModelBuilder::new(target_size, pretokenizer);
        for (index, m) in merges.iter().enumerate() {
            let produced = b.push_ids(m.left, m.right, m.count, m.kind)?;
            if produced != m.produced {
                return Err(ModelError::ProducedMismatch {
                    index,
                    produced: m.produced,
                });
            }
        }
        Ok(b.build())
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Byte string of every token, indexed by id.
    pub fn tokens(&self) -> &[Vec<u8>] {
        &self.tokens
    }

    pub fn token_bytes(&self, id: TokenId) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }

    pub fn token_id(&self, bytes: &[u8]) -> Option<TokenId> {
        self.vocab.get(bytes).copied()
    }

    /// Number of distinct tokens, bytes included.
    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn pretokenizer(&self) -> &PretokenizerConfig {
        &self.pretokenizer
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn set_metadata(&mut self, metadata: TrainingMetadata) {
        self.metadata = metadata;
    }

    /// True when the token is a byte or produced by a regular merge.
    pub fn is_regular_token(&self, id: TokenId) -> bool {
        self.regular.get(id as usize).copied().unwrap_or(false)
    }

    pub fn num_regular(&self) -> usize {
        self.merges
            .iter()
            .filter(|m| m.kind == MergeKind::Regular)
            .count()
    }

    pub fn num_super(&self) -> usize {
        self.merges.len() - self.num_regular()
    }

    /// Frequent n-grams used for greedy splitting of candidate runs at
    /// inference. Empty unless the model was trained with splitting.
    pub fn greedy_ngrams(&self) -> &[Vec<TokenId>] {
        &self.greedy_ngrams
    }

    pub fn set_greedy_ngrams(&mut self, ngrams: Vec<Vec<TokenId>>) {
        self.greedy_ngrams = ngrams;
    }

    /// The tokens a pretoken can be reduced to by regular merges alone.
    pub fn regular_vocabulary(&self) -> RegularVocabulary<'_> {
        RegularVocabulary(self)
    }

    /// Checks reachability and per-kind count monotonicity.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut last: [Option<u64>; 2] = [None, None];
        for (index, m) in self.merges.iter().enumerate() {
            let k = m.kind as usize;
            if let Some(previous) = last[k] {
                if m.count > previous {
                    return Err(ModelError::IncreasingCount {
                        index,
                        kind: m.kind,
                        count: m.count,
                        previous,
                    });
                }
            }
            last[k] = Some(m.count);
        }
        let size = self.vocab_size();
        if size > self.target_size.max(SIGMA_SIZE) {
            return Err(ModelError::TooLarge {
                size,
                target: self.target_size,
            });
        }
        Ok(())
    }

    /// Vocabulary as a set of byte strings.
    pub fn vocabulary_set(&self) -> BTreeSet<Vec<u8>> {
        self.tokens.iter().cloned().collect()
    }

    /// Merge sequence by bytes, ignoring ids.
    pub fn merge_signature(&self) -> Vec<(Vec<u8>, Vec<u8>, MergeKind)> {
        self.merges
            .iter()
            .map(|m| {
                (
                    self.tokens[m.left as usize].clone(),
                    self.tokens[m.right as usize].clone(),
                    m.kind,
                )
            })
            .collect()
    }

    /// Merge sequence of one kind, by bytes, with counts.
    pub fn merges_of_kind(&self, kind: MergeKind) -> Vec<(Vec<u8>, Vec<u8>, u64)> {
        self.merges
            .iter()
            .filter(|m| m.kind == kind)
            .map(|m| {
                (
                    self.tokens[m.left as usize].clone(),
                    self.tokens[m.right as usize].clone(),
                    m.count,
                )
            })
            .collect()
    }

    /// Same vocabulary and same ordered merges within each kind.
    ///
    /// Regular merges only ever apply inside pretokens and supermerges only
    /// across them, so the interleaving of the two kinds does not affect
    /// encoding and is not compared.
    pub fn equivalent_to(&self, other: &TokenizerModel) -> bool {
        self.vocabulary_set() == other.vocabulary_set()
            && self.merges_of_kind(MergeKind::Regular) == other.merges_of_kind(MergeKind::Regular)
            && self.merges_of_kind(MergeKind::Super) == other.merges_of_kind(MergeKind::Super)
    }
}

/// Single-token lookup restricted to byte and regular-merge tokens.
#[derive(Debug, Clone, Copy)]
pub struct RegularVocabulary<'a>(&'a TokenizerModel);

impl Vocabulary for RegularVocabulary<'_> {
    fn single_token(&self, bytes: &[u8]) -> Option<TokenId> {
        self.0
            .token_id(bytes)
            .filter(|&id| self.0.is_regular_token(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builder() -> ModelBuilder {
        ModelBuilder::new(1000, PretokenizerConfig::default())
    }

    #[test]
    fn builder_assigns_ids_in_order() {
        let mut b = builder();
        let ab = b.push(b"a", b"b", 10, MergeKind::Regular).unwrap();
        let abc = b.push(b"ab", b"c", 5, MergeKind::Regular).unwrap();
        assert_eq!((ab, abc), (256, 257));
        let m = b.build();
        assert_eq!(m.vocab_size(), 258);
        assert_eq!(m.token_bytes(257), Some(&b"abc"[..]));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn duplicate_bytes_reuse_the_id() {
        let mut b = builder();
        b.push(b"a", b"b", 10, MergeKind::Regular).unwrap();
        b.push(b"b", b"c", 9, MergeKind::Regular).unwrap();
        let x = b.push(b"ab", b"c", 8, MergeKind::Regular).unwrap();
        let y = b.push(b"a", b"bc", 7, MergeKind::Regular).unwrap();
        assert_eq!(x, y);
        let m = b.build();
        assert_eq!(m.merges().len(), 4);
        assert_eq!(m.vocab_size(), 256 + 3);
    }

    #[test]
    fn unknown_parent_is_unreachable() {
        let mut b = builder();
        assert!(matches!(
            b.push(b"ab", b"c", 1, MergeKind::Regular),
            Err(ModelError::UnknownParent { index: 0, .. })
        ));
        assert!(matches!(
            b.push_ids(300, 1, 1, MergeKind::Regular),
            Err(ModelError::Unreachable { token: 300, .. })
        ));
    }

    #[test]
    fn increasing_count_fails_validation() {
        let mut b = builder();
        b.push(b"a", b"b", 3, MergeKind::Regular).unwrap();
        b.push(b"c", b"d", 4, MergeKind::Regular).unwrap();
        assert!(matches!(
            b.build().validate(),
            Err(ModelError::IncreasingCount { index: 1, .. })
        ));
    }

    #[test]
    fn super_tokens_are_not_regular_vocabulary() {
        let mut b = builder();
        let ab = b.push(b"a", b"b", 3, MergeKind::Super).unwrap();
        let m = b.build();
        assert!(!m.is_regular_token(ab));
        assert_eq!(m.regular_vocabulary().single_token(b"ab"), None);
        assert_eq!(m.regular_vocabulary().single_token(b"a"), Some(97));
    }

    #[test]
    fn equivalence_ignores_interleaving() {
        let mut a = builder();
        a.push(b"a", b"b", 5, MergeKind::Regular).unwrap();
        a.push(b"x", b"y", 4, MergeKind::Super).unwrap();
        a.push(b"c", b"d", 3, MergeKind::Regular).unwrap();
        let mut b = builder();
        b.push(b"a", b"b", 5, MergeKind::Regular).unwrap();
        b.push(b"c", b"d", 3, MergeKind::Regular).unwrap();
        b.push(b"x", b"y", 4, MergeKind::Super).unwrap();
        let (a, b) = (a.build(), b.build());
        assert!(a.equivalent_to(&b));
        assert_ne!(a.merge_signature(), b.merge_signature());
    }
}
