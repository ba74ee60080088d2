//! Weighted token sequences with incrementally maintained adjacent-pair
//! counts, posting lists and a lazily invalidated max-heap.
//!
//! Phase-1 BPE runs this over aggregated pretokens and phase 2 over
//! aggregated supermerge candidates. Ties between equal counts go to the
//! lexicographically smallest `(left bytes, right bytes)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::TokenId;

pub type Pair = (TokenId, TokenId);

/// Token id → bytes, with byte-string interning. Ids `0..256` are bytes.
#[derive(Debug, Clone)]
pub struct TokenTable {
    bytes: Vec<Arc<[u8]>>,
    ids: FxHashMap<Arc<[u8]>, TokenId>,
}

impl Default for TokenTable {
    fn default() -> Self {
        Self::new()
    }
}

impl TokenTable {
    pub fn new() -> Self {
        let mut t = Self {
            bytes: Vec::with_capacity(1024),
            ids: FxHashMap::default(),
        };
        for b in 0..=255u8 {
            t.intern(vec![b]);
        }
        t
    }

    /// Table holding exactly `tokens`, ids in order.
    pub fn from_tokens(tokens: &[Vec<u8>]) -> Self {
        let mut t = Self {
            bytes: Vec::with_capacity(tokens.len()),
            ids: FxHashMap::default(),
        };
        for tok in tokens {
            let a: Arc<[u8]> = Arc::from(tok.as_slice());
            t.ids.insert(a.clone(), t.bytes.len() as TokenId);
            t.bytes.push(a);
        }
        t
    }

    /// Id for `bytes`, allocating the next id if they are new.
    pub fn intern(&mut self, bytes: Vec<u8>) -> TokenId {
        if let Some(&id) = self.ids.get(bytes.as_slice()) {
            return id;
        }
        let id = self.bytes.len() as TokenId;
        let a: Arc<[u8]> = Arc::from(bytes);
        self.ids.insert(a.clone(), id);
        self.bytes.push(a);
        id
    }

    /// Id of the concatenation of two tokens.
    pub fn intern_pair(&mut self, pair: Pair) -> TokenId {
        let mut v = Vec::with_capacity(
            self.bytes[pair.0 as usize].len() + self.bytes[pair.1 as usize].len(),
        );
        v.extend_from_slice(&self.bytes[pair.0 as usize]);
        v.extend_from_slice(&self.bytes[pair.1 as usize]);
        self.intern(v)
    }

    pub fn get(&self, id: TokenId) -> &Arc<[u8]> {
        &self.bytes[id as usize]
    }

    pub fn id(&self, bytes: &[u8]) -> Option<TokenId> {
        self.ids.get(bytes).copied()
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

#[derive(Debug, Clone)]
struct HeapEntry {
    count: u64,
    left: Arc<[u8]>,
    right: Arc<[u8]>,
    pair: Pair,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // higher count first, then smaller (left, right) bytes first
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| (&*other.left, &*other.right).cmp(&(&*self.left, &*self.right)))
            .then_with(|| other.pair.cmp(&self.pair))
    }
}

/// Order in which equal-count pairs are selected.
pub fn tie_break_key(table: &TokenTable, pair: Pair) -> (&[u8], &[u8]) {
    (table.get(pair.0), table.get(pair.1))
}

/// Weighted sequences plus the pair-count index over them.
#[derive(Debug, Clone, Default)]
pub struct PairIndex {
    seqs: Vec<Vec<TokenId>>,
    weights: Vec<u64>,
    counts: FxHashMap<Pair, u64>,
    postings: FxHashMap<Pair, Vec<u32>>,
    heap: BinaryHeap<HeapEntry>,
}

impl PairIndex {
    /// Counts all adjacent pairs, weighted by sequence count.
    pub fn build<I>(sequences: I, table: &TokenTable) -> Self
    where
        I: IntoIterator<Item = (Vec<TokenId>, u64)>,
    {
        let mut idx = PairIndex::default();
        for (seq, w) in sequences {
            if w == 0 {
                continue;
            }
            let i = idx.seqs.len() as u32;
            for win in seq.windows(2) {
                let p = (win[0], win[1]);
                *idx.counts.entry(p).or_insert(0) += w;
                let post = idx.postings.entry(p).or_default();
                if post.last() != Some(&i) {
                    post.push(i);
                }
            }
            idx.seqs.push(seq);
            idx.weights.push(w);
        }
        idx.heap = idx
            .counts
            .iter()
            .map(|(&pair, &count)| HeapEntry {
                count,
                left: table.get(pair.0).clone(),
                right: table.get(pair.1).clone(),
                pair,
            })
            .collect();
        idx
    }

    /// Highest-count pair, ties to the smallest `(left, right)` bytes.
    pub fn best(&mut self) -> Option<(Pair, u64)> {
        while let Some(top) = self.heap.peek() {
            let current = self.counts.get(&top.pair).copied().unwrap_or(0);
            if current == top.count {
                return Some((top.pair, current));
            }
            // stored counts only ever overestimate
            let mut e = self.heap.pop().expect("peeked");
            if current > 0 {
                e.count = current;
                self.heap.push(e);
            }
        }
        None
    }

    pub fn count(&self, pair: Pair) -> u64 {
        self.counts.get(&pair).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Current non-zero pair counts.
    pub fn pair_counts(&self) -> &FxHashMap<Pair, u64> {
        &self.counts
    }

    /// Sequences with their weights, including ones reduced to a single token.
    pub fn sequences(&self) -> impl Iterator<Item = (&[TokenId], u64)> {
        self.seqs
            .iter()
            .map(Vec::as_slice)
            .zip(self.weights.iter().copied())
    }

    /// From-scratch pair tally of the current sequences.
    pub fn recount(&self) -> FxHashMap<Pair, u64> {
        let mut out: FxHashMap<Pair, u64> = FxHashMap::default();
        for (seq, w) in self.sequences() {
            for win in seq.windows(2) {
                *out.entry((win[0], win[1])).or_insert(0) += w;
            }
        }
        out
    }

    /// Replaces every occurrence of `pair` (left to right, non-overlapping)
    /// with `new_id` and updates the counts of the neighbouring pairs.
    /// Work is proportional to the posting list of `pair`. Returns the
    /// number of weighted occurrences merged.
    pub fn apply(&mut self, pair: Pair, new_id: TokenId, table: &TokenTable) -> u64 {
        let Some(mut post) = self.postings.remove(&pair) else {
            return 0;
        };
        post.sort_unstable();
        post.dedup();
        let (a, b) = pair;
        let mut merged = 0u64;
        let mut touched: FxHashSet<Pair> = FxHashSet::default();
        let mut out: Vec<TokenId> = Vec::new();

        for &si in &post {
            let seq = &self.seqs[si as usize];
            let w = self.weights[si as usize];
            let Some(first) = seq.windows(2).position(|win| win[0] == a && win[1] == b) else {
                continue; // stale posting
            };
            out.clear();
            out.extend_from_slice(&seq[..first]);
            let mut i = first;
            let mut last_end = first;
            let mut k = 0usize;
            while i < seq.len() {
                if i + 1 < seq.len() && seq[i] == a && seq[i + 1] == b {
                    out.push(new_id);
                    i += 2;
                    last_end = i;
                    k += 1;
                } else {
                    out.push(seq[i]);
                    i += 1;
                }
            }
            merged += w * k as u64;

            // only windows overlapping [first - 1, last_end] change
            let lo = first.saturating_sub(1);
            for j in lo..last_end.min(seq.len() - 1) {
                let p = (seq[j], seq[j + 1]);
                let c = self.counts.get_mut(&p).expect("counted pair");
                *c -= w;
                if *c == 0 {
                    self.counts.remove(&p);
                }
            }
            let new_end = last_end - k;
            for j in lo..new_end.min(out.len().saturating_sub(1)) {
                let p = (out[j], out[j + 1]);
                *self.counts.entry(p).or_insert(0) += w;
                if p.0 == new_id || p.1 == new_id {
                    touched.insert(p);
                    let post = self.postings.entry(p).or_default();
                    if post.last() != Some(&si) {
                        post.push(si);
                    }
                }
            }
            std::mem::swap(&mut self.seqs[si as usize], &mut out);
        }
        debug_assert_eq!(self.count(pair), 0);

        let mut fresh: Vec<Pair> = touched.into_iter().collect();
        fresh.sort_unstable();
        for p in fresh {
            if let Some(&count) = self.counts.get(&p) {
                self.heap.push(HeapEntry {
                    count,
                    left: table.get(p.0).clone(),
                    right: table.get(p.1).clone(),
                    pair: p,
                });
            }
        }
        merged
    }
}
