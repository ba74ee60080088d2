//! Frequent pretoken n-grams with subgram pruning, and greedy longest-match
//! splitting of supermerge candidates.

use std::ops::Range;

use rustc_hash::FxHashMap;

use crate::model::MergeRule;
use crate::TokenId;

/// Default floor applied to the last phase-1 merge count.
pub const DEFAULT_MIN_COUNT_FLOOR: u64 = 15;
/// Default maximum n-gram length.
pub const DEFAULT_MAX_LEN: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NgramError {
    #[error("maximum n-gram length must be at least 2, got {0}")]
    MaxLen(usize),
    #[error("minimum count must be at least 1")]
    MinCount,
    #[error("no phase-1 merges to derive a minimum count from")]
    NoMerges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramConfig {
    max_len: usize,
    min_count: u64,
}

impl NgramConfig {
    pub fn new(max_len: usize, min_count: u64) -> Result<Self, NgramError> {
        if max_len < 2 {
            return Err(NgramError::MaxLen(max_len));
        }
        if min_count == 0 {
            return Err(NgramError::MinCount);
        }
        Ok(Self { max_len, min_count })
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }
}

/// `max(count of the last merge, floor)`.
pub fn derive_c_min(merges: &[MergeRule], floor: u64) -> Result<u64, NgramError> {
    merges
        .last()
        .map(|m| m.count.max(floor))
        .ok_or(NgramError::NoMerges)
}

/// N-grams of length `2..=L` with count at least `c_min`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NgramCounts {
    counts: FxHashMap<Vec<TokenId>, u64>,
    max_len: usize,
}

impl NgramCounts {
    /// Builds a splitter from a bare n-gram list (counts unknown, set to 0).
    pub fn from_keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<TokenId>>,
    {
        let mut c = Self::default();
        for k in keys {
            let k = k.into();
            if k.len() >= 2 {
                c.max_len = c.max_len.max(k.len());
                c.counts.insert(k, 0);
            }
        }
        c
    }

    pub fn get(&self, ngram: &[TokenId]) -> Option<u64> {
        self.counts.get(ngram).copied()
    }

    pub fn contains(&self, ngram: &[TokenId]) -> bool {
        self.counts.contains_key(ngram)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Longest stored n-gram.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[TokenId], u64)> + Clone {
        self.counts.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// Entries sorted by key.
    pub fn sorted(&self) -> Vec<(&[TokenId], u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }

    pub fn into_map(self) -> FxHashMap<Vec<TokenId>, u64> {
        self.counts
    }

    /// Left-to-right longest match. Unmatched positions advance by one and
    /// produce no segment, so every returned segment is a stored key.
    pub fn greedy_split<'a>(&self, candidate: &'a [TokenId]) -> Vec<&'a [TokenId]> {
        self.greedy_segments(candidate)
            .into_iter()
            .map(|r| &candidate[r])
            .collect()
    }

    /// Index ranges of the segments returned by [`NgramCounts::greedy_split`].
    pub fn greedy_segments(&self, candidate: &[TokenId]) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < candidate.len() {
            let longest = (2..=self.max_len.min(candidate.len() - i))
                .rev()
                .find(|&n| self.counts.contains_key(&candidate[i..i + n]));
            match longest {
                Some(n) => {
                    out.push(i..i + n);
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }

    /// TSV: escaped token strings tab-joined, then the count. Sorted by
    /// descending count.
    pub fn write_tsv<W: std::io::Write>(
        &self,
        mut w: W,
        token_bytes: impl Fn(TokenId) -> Vec<u8>,
    ) -> std::io::Result<()> {
        let mut rows = self.sorted();
        rows.sort_by_key(|r| std::cmp::Reverse(r.1));
        for (g, n) in rows {
            let toks: Vec<String> = g
                .iter()
                .map(|&t| token_bytes(t).escape_ascii().to_string())
                .collect();
            writeln!(w, "{}\t{}", toks.join("\t"), n)?;
        }
        Ok(())
    }
}

/// Counts every n-gram of length `2..=L` reaching `c_min`, in passes of
/// increasing length. An n-gram is only tallied when both of its
/// (n-1)-subgrams survived the previous pass.
pub fn count_frequent_ngrams<'a, I>(sequences: I, config: NgramConfig) -> NgramCounts
where
    I: IntoIterator<Item = (&'a [TokenId], u64)>,
    I::IntoIter: Clone,
{
    count_ngrams_impl(sequences.into_iter(), config, true)
}

/// Same passes without the subgram bound. Exists to check that pruning
/// changes only the work done, never the result.
pub fn count_frequent_ngrams_unpruned<'a, I>(sequences: I, config: NgramConfig) -> NgramCounts
where
    I: IntoIterator<Item = (&'a [TokenId], u64)>,
    I::IntoIter: Clone,
{
    count_ngrams_impl(sequences.into_iter(), config, false)
}

fn count_ngrams_impl<'a, I>(sequences: I, config: NgramConfig, prune: bool) -> NgramCounts
where
    I: Iterator<Item = (&'a [TokenId], u64)> + Clone,
{
    let c_min = config.min_count;
    let mut c: FxHashMap<Vec<TokenId>, u64> = FxHashMap::default();
    for n in 1..=config.max_len {
        let prev_size = c.len();
        for (seq, count) in sequences.clone() {
            if seq.len() < n {
                continue;
            }
            for i in 0..=seq.len() - n {
                if prune && n > 1 {
                    let a = c.get(&seq[i..i + n - 1]).copied().unwrap_or(0);
                    let b = c.get(&seq[i + 1..i + n]).copied().unwrap_or(0);
                    if a.min(b) < c_min {
                        continue;
                    }
                }
                let g = &seq[i..i + n];
                match c.get_mut(g) {
                    Some(v) => *v += count,
                    None => {
                        c.insert(g.to_vec(), count);
                    }
                }
            }
        }
        c.retain(|_, v| *v >= c_min);
        if c.len() == prev_size {
            break;
        }
    }
    c.retain(|g, _| g.len() > 1);
    let max_len = c.keys().map(Vec::len).max().unwrap_or(0);
    NgramCounts { counts: c, max_len }
}
