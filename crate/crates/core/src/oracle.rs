//! Naive interleaved BoundlessBPE trainer used as a test oracle.
//!
//! Documents are kept whole. Every step recounts regular pairs inside
//! pretokens and supermerge pairs between adjacent eligible single-token
//! pretokens, then applies the higher of the two (ties to regular). A
//! pretoken becomes available for supermerges only once regular merges have
//! reduced it to a single token.

use std::cmp::Reverse;

use rustc_hash::FxHashMap;

use crate::corpus::{CorpusError, CorpusSource};
use crate::model::{
    MergeKind, ModelBuilder, ModelError, TokenizerModel, TrainingMetadata, SIGMA_SIZE,
};
use crate::pair_index::{Pair, TokenTable};
use crate::pretokenizer::{Pretokenizer, PretokenizerConfig, PretokenizerError};
use crate::TokenId;

/// Largest corpus, in pretokens, the oracle accepts.
pub const MAX_PRETOKENS: usize = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("corpus has {pretokens} pretokens, over the oracle cap of {cap}")]
    TooLarge { pretokens: usize, cap: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pretokenizer(#[from] PretokenizerError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
struct Unit {
    tokens: Vec<TokenId>,
    letter: bool,
    chunk: usize,
    superword: bool,
}

impl Unit {
    fn available(&self) -> bool {
        self.tokens.len() == 1 && (self.letter || self.superword)
    }
}

fn best(counts: &FxHashMap<Pair, u64>, table: &TokenTable) -> Option<(Pair, u64)> {
    counts
        .iter()
        .max_by_key(|(&p, &c)| (c, Reverse((&table.get(p.0)[..], &table.get(p.1)[..]))))
        .map(|(&p, &c)| (p, c))
}

fn merge_seq(seq: &mut Vec<TokenId>, pair: Pair, new_id: TokenId) {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && (seq[i], seq[i + 1]) == pair {
            out.push(new_id);
            i += 2;
        } else {
            out.push(seq[i]);
            i += 1;
        }
    }
    *seq = out;
}

/// Interleaved training to `target_size` rules plus bytes. Stops early
/// when neither kind of pair remains.
pub fn train_interleaved<C>(
    corpus: &C,
    target_size: usize,
    config: PretokenizerConfig,
) -> Result<TokenizerModel, OracleError>
where
    C: CorpusSource + ?Sized,
{
    let pretokenizer = Pretokenizer::new(config.clone())?;
    let cross_script = config.cross_script_supermerges;
    let mut docs: Vec<Vec<Unit>> = Vec::new();
    let mut total = 0usize;
    for doc in corpus.documents() {
        let doc = doc?;
        let units: Vec<Unit> = pretokenizer
            .pretokenize_document(&doc)
            .into_iter()
            .map(|p| Unit {
                tokens: p.text.bytes().map(TokenId::from).collect(),
                letter: pretokenizer.matches_merge_pattern(p.text),
                chunk: p.chunk,
                superword: false,
            })
            .collect();
        total += units.len();
        if total > MAX_PRETOKENS {
            return Err(OracleError::TooLarge {
                pretokens: total,
                cap: MAX_PRETOKENS,
            });
        }
        docs.push(units);
    }

    let mut table = TokenTable::new();
    let mut builder = ModelBuilder::new(target_size, config);
    while builder.len() + SIGMA_SIZE < target_size {
        let mut regular: FxHashMap<Pair, u64> = FxHashMap::default();
        let mut sup: FxHashMap<Pair, u64> = FxHashMap::default();
        for units in &docs {
            for u in units.iter().filter(|u| !u.superword) {
                for w in u.tokens.windows(2) {
                    *regular.entry((w[0], w[1])).or_insert(0) += 1;
                }
            }
            for w in units.windows(2) {
                if w[0].available()
                    && w[1].available()
                    && (cross_script || w[0].chunk == w[1].chunk)
                {
                    *sup.entry((w[0].tokens[0], w[1].tokens[0])).or_insert(0) += 1;
                }
            }
        }
        let r = best(&regular, &table);
        let s = best(&sup, &table);
        let (pair, count, kind) = match (r, s) {
            (None, None) => break,
            (Some((p, c_r)), Some((_, c_s))) if c_r >= c_s => (p, c_r, MergeKind::Regular),
            (Some((p, c)), None) => (p, c, MergeKind::Regular),
            (_, Some((p, c))) => (p, c, MergeKind::Super),
        };
        let new_id = table.intern_pair(pair);
        builder.push(&table.get(pair.0)[..], &table.get(pair.1)[..], count, kind)?;
        for units in &mut docs {
            match kind {
                MergeKind::Regular => {
                    for u in units
                        .iter_mut()
                        .filter(|u| !u.superword && u.tokens.len() >= 2)
                    {
                        merge_seq(&mut u.tokens, pair, new_id);
                    }
                }
                MergeKind::Super => {
                    let mut out: Vec<Unit> = Vec::with_capacity(units.len());
                    let mut i = 0;
                    while i < units.len() {
                        let u = &units[i];
                        if i + 1 < units.len() {
                            let v = &units[i + 1];
                            if u.available()
                                && v.available()
                                && (cross_script || u.chunk == v.chunk)
                                && (u.tokens[0], v.tokens[0]) == pair
                            {
                                out.push(Unit {
                                    tokens: vec![new_id],
                                    letter: true,
                                    chunk: u.chunk,
                                    superword: true,
                                });
                                i += 2;
                                continue;
                            }
                        }
                        out.push(u.clone());
                        i += 1;
                    }
                    *units = out;
                }
            }
        }
    }
    let mut model = builder.build();
    model.set_metadata(TrainingMetadata {
        algorithm: Some("interleaved".into()),
        regular: Some(model.num_regular()),
        supermerges: Some(model.num_super()),
        ..Default::default()
    });
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(m: &TokenizerModel) -> Vec<(String, String, MergeKind)> {
        m.merge_signature()
            .into_iter()
            .map(|(l, r, k)| {
                (
                    String::from_utf8_lossy(&l).into_owned(),
                    String::from_utf8_lossy(&r).into_owned(),
                    k,
                )
            })
            .collect()
    }

    #[test]
    fn supermerge_unlocks_after_both_pretokens_exist() {
        let m =
            train_interleaved(&[" to be to be"], 256 + 8, PretokenizerConfig::default()).unwrap();
        let s = sig(&m);
        let pos = |l: &str, r: &str| s.iter().position(|(a, b, _)| a == l && b == r);
        let sup = pos(" to", " be").expect("supermerge selected");
        assert_eq!(s[sup].2, MergeKind::Super);
        assert!(pos(" t", "o").unwrap() < sup);
        assert!(pos(" b", "e").unwrap() < sup);
    }

    #[test]
    fn no_eligible_pretokens_is_plain_bpe() {
        let docs = ["12 34 12 34 ... 12"];
        let m = train_interleaved(&docs, 300, PretokenizerConfig::default()).unwrap();
        assert_eq!(m.num_super(), 0);
        assert!(m.num_regular() > 0);
    }
}
