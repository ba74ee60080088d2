//! Encoding and decoding with a trained model.
//!
//! Regular merges are applied inside each pretoken, then supermerges inside
//! each run of adjacent eligible single-token pretokens. Within a sequence,
//! rules are applied in merge-list order, each one to all of its
//! occurrences left to right, which reproduces what training did.

use rustc_hash::FxHashMap;

use crate::candidate_aggregator::eligible_runs;
use crate::greedy_ngrams::NgramCounts;
use crate::model::{MergeKind, TokenizerModel};
use crate::pair_index::Pair;
use crate::pretokenizer::{Pretokenizer, PretokenizerError, Vocabulary};
use crate::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("token {id} at position {index} is not in the vocabulary")]
pub struct DecodeError {
    pub index: usize,
    pub id: TokenId,
}

/// Merge rules of one kind: pair → (rank, produced).
#[derive(Debug, Clone, Default)]
struct RankTable(FxHashMap<Pair, (u32, TokenId)>);

impl RankTable {
    fn new(model: &TokenizerModel, kind: MergeKind) -> Self {
        let mut map = FxHashMap::default();
        for (rank, m) in model.merges().iter().enumerate() {
            if m.kind == kind {
                map.entry((m.left, m.right))
                    .or_insert((rank as u32, m.produced));
            }
        }
        RankTable(map)
    }

    /// Applies the rules to `seq` in rank order.
    fn apply(&self, seq: &mut Vec<TokenId>) {
        if self.0.is_empty() {
            return;
        }
        let mut floor: Option<u32> = None;
        while seq.len() >= 2 {
            let next = seq
                .windows(2)
                .filter_map(|w| {
                    let pair = (w[0], w[1]);
                    self.0
                        .get(&pair)
                        .map(|&(rank, produced)| (rank, pair, produced))
                })
                .filter(|(rank, ..)| floor.is_none_or(|f| *rank > f))
                .min_by_key(|(rank, ..)| *rank);
            let Some((rank, pair, produced)) = next else {
                break;
            };
            merge_pair(seq, pair, produced);
            floor = Some(rank);
        }
    }
}

fn merge_pair(seq: &mut Vec<TokenId>, pair: Pair, produced: TokenId) {
    let mut w = 0;
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && seq[i] == pair.0 && seq[i + 1] == pair.1 {
            seq[w] = produced;
            i += 2;
        } else {
            seq[w] = seq[i];
            i += 1;
        }
        w += 1;
    }
    seq.truncate(w);
}

/// Immutable encoder; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Encoder {
    model: TokenizerModel,
    pretokenizer: Pretokenizer,
    regular: RankTable,
    supers: RankTable,
    /// Regular-vocabulary byte string → id, for the shortcut and eligibility.
    regular_vocab: FxHashMap<Vec<u8>, TokenId>,
    shortcut: bool,
    splitter: Option<NgramCounts>,
}

impl Vocabulary for Encoder {
    fn single_token(&self, bytes: &[u8]) -> Option<TokenId> {
        self.regular_vocab.get(bytes).copied()
    }
}

impl Encoder {
    pub fn new(model: TokenizerModel) -> Result<Self, PretokenizerError> {
        let pretokenizer = Pretokenizer::new(model.pretokenizer().clone())?;
        let regular = RankTable::new(&model, MergeKind::Regular);
        let supers = RankTable::new(&model, MergeKind::Super);
        let regular_vocab = model
            .tokens()
            .iter()
            .enumerate()
            .filter(|(id, _)| model.is_regular_token(*id as TokenId))
            .map(|(id, t)| (t.clone(), id as TokenId))
            .collect();
        Ok(Self {
            model,
            pretokenizer,
            regular,
            supers,
            regular_vocab,
            shortcut: true,
            splitter: None,
        })
    }

    /// Emit a pretoken found in the regular vocabulary directly. On by default.
    pub fn with_shortcut(mut self, enabled: bool) -> Self {
        self.shortcut = enabled;
        self
    }

    /// Greedy-split candidate runs with the model's stored n-grams before
    /// applying supermerges. Off by default.
    pub fn with_greedy_split(mut self, enabled: bool) -> Self {
        self.splitter =
            enabled.then(|| NgramCounts::from_keys(self.model.greedy_ngrams().iter().cloned()));
        self
    }

    pub fn model(&self) -> &TokenizerModel {
        &self.model
    }

    pub fn shortcut_enabled(&self) -> bool {
        self.shortcut
    }

    /// Regular merges only, for one pretoken.
    pub fn encode_pretoken(&self, pretoken: &str) -> Vec<TokenId> {
        if self.shortcut {
            if let Some(id) = self.single_token(pretoken.as_bytes()) {
                return vec![id];
            }
        }
        let mut seq: Vec<TokenId> = pretoken.bytes().map(TokenId::from).collect();
        self.regular.apply(&mut seq);
        seq
    }

    fn apply_supers(&self, run: &[TokenId], out: &mut Vec<TokenId>) {
        let mut seq = run.to_vec();
        self.supers.apply(&mut seq);
        out.extend_from_slice(&seq);
    }

    pub fn encode(&self, text: &str) -> Vec<TokenId> {
        let pretokens = self.pretokenizer.pretokenize_document(text);
        let encoded: Vec<Vec<TokenId>> = pretokens
            .iter()
            .map(|p| self.encode_pretoken(p.text))
            .collect();
        if self.supers.0.is_empty() {
            return encoded.into_iter().flatten().collect();
        }
        let eligible: Vec<Option<TokenId>> = pretokens
            .iter()
            .zip(&encoded)
            .map(|(p, e)| {
                // a pretoken reduced to one regular token is in the regular vocabulary
                (e.len() == 1)
                    .then(|| self.pretokenizer.eligible_token(p.text, self))
                    .flatten()
            })
            .collect();
        let chunks: Vec<usize> = pretokens.iter().map(|p| p.chunk).collect();
        let runs = eligible_runs(
            &eligible,
            &chunks,
            self.pretokenizer.config().cross_script_supermerges,
        );

        let mut out = Vec::with_capacity(encoded.len());
        let mut next = 0;
        for r in runs {
            for e in &encoded[next..r.start] {
                out.extend_from_slice(e);
            }
            let run: Vec<TokenId> = eligible[r.clone()]
                .iter()
                .map(|t| t.expect("eligible"))
                .collect();
            match &self.splitter {
                None => self.apply_supers(&run, &mut out),
                Some(ngrams) => {
                    let mut pos = 0;
                    for seg in ngrams.greedy_segments(&run) {
                        out.extend_from_slice(&run[pos..seg.start]);
                        self.apply_supers(&run[seg.clone()], &mut out);
                        pos = seg.end;
                    }
                    out.extend_from_slice(&run[pos..]);
                }
            }
            next = r.end;
        }
        for e in &encoded[next..] {
            out.extend_from_slice(e);
        }
        out
    }

    pub fn decode(&self, tokens: &[TokenId]) -> Result<Vec<u8>, DecodeError> {
        decode(&self.model, tokens)
    }
}

/// Concatenates token bytes.
pub fn decode(model: &TokenizerModel, tokens: &[TokenId]) -> Result<Vec<u8>, DecodeError> {
    let mut out = Vec::new();
    for (index, &id) in tokens.iter().enumerate() {
        let bytes = model.token_bytes(id).ok_or(DecodeError { index, id })?;
        out.extend_from_slice(bytes);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelBuilder;
    use crate::pretokenizer::PretokenizerConfig;

    fn to_be_model() -> TokenizerModel {
        let mut b = ModelBuilder::new(1000, PretokenizerConfig::default());
        b.push(b" ", b"t", 10, MergeKind::Regular).unwrap();
        b.push(b" t", b"o", 9, MergeKind::Regular).unwrap();
        b.push(b" ", b"b", 8, MergeKind::Regular).unwrap();
        b.push(b" b", b"e", 7, MergeKind::Regular).unwrap();
        b.push(b" to", b" be", 6, MergeKind::Super).unwrap();
        b.build()
    }

    #[test]
    fn superword_is_one_token() {
        let m = to_be_model();
        let id = m.token_id(b" to be").unwrap();
        let enc = Encoder::new(m).unwrap();
        assert_eq!(enc.encode(" to be"), vec![id]);
        assert_eq!(enc.decode(&[id]).unwrap(), b" to be");
        assert_eq!(enc.clone().with_shortcut(false).encode(" to be"), vec![id]);
    }

    #[test]
    fn byte_fallback() {
        let m = ModelBuilder::new(256, PretokenizerConfig::default()).build();
        let enc = Encoder::new(m).unwrap();
        assert_eq!(enc.encode("A"), vec![0x41]);
        assert!(enc.encode("").is_empty());
        assert_eq!(enc.decode(&[]).unwrap(), b"");
    }

    #[test]
    fn unknown_id_reports_position() {
        let m = to_be_model();
        assert_eq!(
            decode(&m, &[1, 2, 5000]),
            Err(DecodeError { index: 2, id: 5000 })
        );
    }

    #[test]
    fn rules_apply_in_list_order() {
        // (b,c) outranks (a,b): "abc" must become a + bc
        let mut b = ModelBuilder::new(1000, PretokenizerConfig::default());
        let bc = b.push(b"b", b"c", 5, MergeKind::Regular).unwrap();
        b.push(b"a", b"b", 4, MergeKind::Regular).unwrap();
        let enc = Encoder::new(b.build()).unwrap().with_shortcut(false);
        assert_eq!(enc.encode("abc"), vec![97, bc]);
    }

    #[test]
    fn greedy_split_limits_supermerges() {
        let mut m = to_be_model();
        let to = m.token_id(b" to").unwrap();
        let be = m.token_id(b" be").unwrap();
        let enc = Encoder::new(m.clone()).unwrap().with_greedy_split(true);
        // no stored n-grams: nothing can be merged across pretokens
        assert_eq!(enc.encode(" to be"), vec![to, be]);
        m.set_greedy_ngrams(vec![vec![to, be]]);
        let enc = Encoder::new(m.clone()).unwrap().with_greedy_split(true);
        assert_eq!(enc.encode(" to be"), vec![m.token_id(b" to be").unwrap()]);
    }

    #[test]
    fn encoder_is_shareable() {
        fn check<T: Send + Sync>() {}
        check::<Encoder>();
    }
}
