//! Byte-level BPE with superword tokens.
//!
//! Training runs in two phases. Phase 1 trains regular BPE over aggregated
//! pretokens. Phase 2 aggregates runs of adjacent single-token pretokens
//! (supermerge candidates) and either replays the phase-1 merges against the
//! best supermerge (BoundlessBPE) or spends a fixed supermerge budget
//! (SuperBPE).

pub mod bpe_trainer;
pub mod candidate_aggregator;
pub mod corpus;
pub mod greedy_ngrams;
pub mod inference;
pub mod model;
pub mod model_io;
pub mod oracle;
pub mod pair_index;
pub mod phase2_trainer;
pub mod pipeline;
pub mod pretokenizer;
pub mod unicode_scripts;

/// Index into a model's token table. Ids `0..256` are single bytes.
pub type TokenId = u32;

pub use inference::{DecodeError, Encoder};
pub use model::{MergeKind, MergeRule, ModelBuilder, ModelError, TokenizerModel, SIGMA_SIZE};
pub use pretokenizer::{Pretokenizer, PretokenizerConfig};
