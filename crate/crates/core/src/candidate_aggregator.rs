//! Supermerge candidates: maximal runs of two or more consecutive
//! merge-eligible pretokens, aggregated by frequency across a corpus.

use std::ops::Range;

use rustc_hash::FxHashMap;

use crate::corpus::{CorpusError, CorpusSource};
use crate::greedy_ngrams::NgramCounts;
use crate::pretokenizer::{Pretoken, Pretokenizer, Vocabulary};
use crate::TokenId;

/// Candidate (token ids of its eligible pretokens) → count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregatedCandidates {
    counts: FxHashMap<Vec<TokenId>, u64>,
    total: u64,
}

impl AggregatedCandidates {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` occurrences. Sequences shorter than 2 are ignored.
    pub fn add(&mut self, candidate: &[TokenId], n: u64) {
        if candidate.len() < 2 || n == 0 {
            return;
        }
        match self.counts.get_mut(candidate) {
            Some(c) => *c += n,
            None => {
                self.counts.insert(candidate.to_vec(), n);
            }
        }
        self.total += n;
    }

    pub fn get(&self, candidate: &[TokenId]) -> u64 {
        self.counts.get(candidate).copied().unwrap_or(0)
    }

    /// Unique candidates.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total candidate occurrences.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[TokenId], u64)> + Clone {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Entries sorted by token-id sequence.
    pub fn sorted(&self) -> Vec<(&[TokenId], u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    /// Re-aggregates after greedy left-to-right splitting of every candidate.
    pub fn split_with(&self, ngrams: &NgramCounts) -> AggregatedCandidates {
        let mut out = AggregatedCandidates::new();
        for (cand, n) in self.iter() {
            for seg in ngrams.greedy_split(cand) {
                out.add(seg, n);
            }
        }
        out
    }

    /// TSV: tab-joined escaped token strings, then the count. Sorted.
    pub fn write_tsv<W: std::io::Write>(
        &self,
        mut w: W,
        token_bytes: impl Fn(TokenId) -> Vec<u8>,
    ) -> std::io::Result<()> {
        let mut rows: Vec<(Vec<String>, u64)> = self
            .iter()
            .map(|(c, n)| {
                (
                    c.iter()
                        .map(|&t| token_bytes(t).escape_ascii().to_string())
                        .collect(),
                    n,
                )
            })
            .collect();
        rows.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        for (toks, n) in rows {
            writeln!(w, "{}\t{}", toks.join("\t"), n)?;
        }
        Ok(())
    }
}

impl<S: AsRef<[TokenId]>> FromIterator<(S, u64)> for AggregatedCandidates {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut a = Self::new();
        for (k, v) in iter {
            a.add(k.as_ref(), v);
        }
        a
    }
}

/// Index ranges of the maximal runs of length ≥ 2 in `eligible`. With
/// `cross_script` off, runs are also cut where the chunk index changes.
pub fn eligible_runs(
    eligible: &[Option<TokenId>],
    chunks: &[usize],
    cross_script: bool,
) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=eligible.len() {
        let continues = i < eligible.len()
            && eligible[i].is_some()
            && match start {
                Some(s) => cross_script || chunks[i] == chunks[s],
                None => true,
            };
        if continues {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            if i - s >= 2 {
                runs.push(s..i);
            }
        }
        // an eligible pretoken that failed only the script check opens a new run
        if i < eligible.len() && eligible[i].is_some() {
            start = Some(i);
        }
    }
    runs
}

/// Token ids of one document's pretokens under `vocab`, `None` where ineligible.
pub fn mark_eligible<V: Vocabulary + ?Sized>(
    pretokens: &[Pretoken<'_>],
    pretokenizer: &Pretokenizer,
    vocab: &V,
) -> Vec<Option<TokenId>> {
    pretokens
        .iter()
        .map(|p| pretokenizer.eligible_token(p.text, vocab))
        .collect()
}

/// Supermerge candidates of a single document, in order.
pub fn extract_candidates<V: Vocabulary + ?Sized>(
    document: &str,
    pretokenizer: &Pretokenizer,
    vocab: &V,
) -> Vec<Vec<TokenId>> {
    let pretokens = pretokenizer.pretokenize_document(document);
    let eligible = mark_eligible(&pretokens, pretokenizer, vocab);
    let chunks: Vec<usize> = pretokens.iter().map(|p| p.chunk).collect();
    eligible_runs(
        &eligible,
        &chunks,
        pretokenizer.config().cross_script_supermerges,
    )
    .into_iter()
    .map(|r| eligible[r].iter().map(|t| t.expect("eligible")).collect())
    .collect()
}

/// Streams the corpus and counts candidates, optionally greedy-splitting
/// each one first.
pub fn aggregate_candidates<C, V>(
    corpus: &C,
    pretokenizer: &Pretokenizer,
    vocab: &V,
    splitter: Option<&NgramCounts>,
) -> Result<AggregatedCandidates, CorpusError>
where
    C: CorpusSource + ?Sized,
    V: Vocabulary + ?Sized,
{
    let mut agg = AggregatedCandidates::new();
    for doc in corpus.documents() {
        let doc = doc?;
        for cand in extract_candidates(&doc, pretokenizer, vocab) {
            match splitter {
                Some(ngrams) => {
                    for seg in ngrams.greedy_split(&cand) {
                        agg.add(seg, 1);
                    }
                }
                None => agg.add(&cand, 1),
            }
        }
    }
    Ok(agg)
}
