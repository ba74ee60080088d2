//! Phase-1 byte-level BPE over frequency-aggregated pretokens.

use rustc_hash::FxHashMap;

use crate::corpus::{CorpusError, CorpusSource};
use crate::model::{MergeKind, MergeRule};
use crate::pair_index::{Pair, PairIndex, TokenTable};
use crate::pretokenizer::Pretokenizer;
use crate::TokenId;

/// Pretoken → occurrence count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregatedPretokens {
    counts: FxHashMap<String, u64>,
    total: u64,
    documents: usize,
}

impl AggregatedPretokens {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, pretoken: &str, n: u64) {
        if n == 0 {
            return;
        }
        match self.counts.get_mut(pretoken) {
            Some(c) => *c += n,
            None => {
                self.counts.insert(pretoken.to_string(), n);
            }
        }
        self.total += n;
    }

    pub fn get(&self, pretoken: &str) -> u64 {
        self.counts.get(pretoken).copied().unwrap_or(0)
    }

    /// Unique pretokens.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total pretoken occurrences.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Documents added through [`add_document`].
    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Entries sorted by pretoken bytes.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable();
        v
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for AggregatedPretokens {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut a = Self::new();
        for (k, v) in iter {
            a.add(k.as_ref(), v);
        }
        a
    }
}

/// Script-splits, pretokenizes and counts every document. Documents are
/// dropped after counting.
pub fn aggregate_corpus<C>(
    corpus: &C,
    pretokenizer: &Pretokenizer,
) -> Result<AggregatedPretokens, CorpusError>
where
    C: CorpusSource + ?Sized,
{
    let mut agg = AggregatedPretokens::new();
    for doc in corpus.documents() {
        let doc = doc?;
        add_document(&mut agg, &doc, pretokenizer);
    }
    Ok(agg)
}

pub fn add_document(agg: &mut AggregatedPretokens, document: &str, pretokenizer: &Pretokenizer) {
    agg.documents += 1;
    pretokenizer.for_each_pretoken(document, |p| agg.add(p.text, 1));
}

/// Incremental BPE trainer; one call to [`BpeTrainer::step`] per merge.
#[derive(Debug, Clone)]
pub struct BpeTrainer {
    table: TokenTable,
    index: PairIndex,
    merges: Vec<MergeRule>,
}

impl BpeTrainer {
    pub fn new(pretokens: &AggregatedPretokens) -> Self {
        let table = TokenTable::new();
        let seqs = pretokens
            .sorted()
            .into_iter()
            .map(|(p, c)| (p.bytes().map(TokenId::from).collect::<Vec<_>>(), c));
        let index = PairIndex::build(seqs, &table);
        Self {
            table,
            index,
            merges: Vec::new(),
        }
    }

    /// Selects and applies the next merge; `None` when no pair remains.
    pub fn step(&mut self) -> Option<MergeRule> {
        let (pair, count) = self.index.best()?;
        let produced = self.table.intern_pair(pair);
        self.index.apply(pair, produced, &self.table);
        let rule = MergeRule {
            left: pair.0,
            right: pair.1,
            produced,
            count,
            kind: MergeKind::Regular,
        };
        self.merges.push(rule);
        Some(rule)
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn into_merges(self) -> Vec<MergeRule> {
        self.merges
    }

    pub fn table(&self) -> &TokenTable {
        &self.table
    }

    pub fn pair_counts(&self) -> &FxHashMap<Pair, u64> {
        self.index.pair_counts()
    }

    pub fn recount(&self) -> FxHashMap<Pair, u64> {
        self.index.recount()
    }
}

/// Runs up to `num_merges` BPE merges. Stops early when no pair remains.
pub fn train_bpe(pretokens: &AggregatedPretokens, num_merges: usize) -> Vec<MergeRule> {
    let mut t = BpeTrainer::new(pretokens);
    while t.merges().len() < num_merges {
        if t.step().is_none() {
            break;
        }
    }
    t.into_merges()
}
