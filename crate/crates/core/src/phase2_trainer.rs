//! Second phase: BoundlessBPE replay of the phase-1 merge list against the
//! best supermerge, and SuperBPE with a fixed supermerge budget.

use log::warn;
use rustc_hash::FxHashMap;

use crate::candidate_aggregator::AggregatedCandidates;
use crate::model::{
    MergeKind, ModelBuilder, ModelError, TokenizerModel, TrainingMetadata, SIGMA_SIZE,
};
use crate::pair_index::{Pair, PairIndex, TokenTable};
use crate::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Phase2Error {
    #[error("phase-1 model has {merges} merges, too many for target size {target}")]
    TooManyMerges { merges: usize, target: usize },
    #[error("phase-1 model contains a supermerge at index {0}")]
    NotRegular(usize),
    #[error("base model has {actual} regular merges, budget expects {expected}")]
    BudgetMismatch { expected: usize, actual: usize },
    #[error("pair ({0}, {1}) is not present in the candidate index")]
    AbsentPair(TokenId, TokenId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Number of regular merges and supermerges, `|V| = r + s + 256`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct SuperBpeBudget {
    pub regular: usize,
    pub supermerges: usize,
}

impl SuperBpeBudget {
    pub fn new(regular: usize, supermerges: usize) -> Self {
        Self {
            regular,
            supermerges,
        }
    }

    /// The budget of an already trained model.
    pub fn of(model: &TokenizerModel) -> Self {
        Self::new(model.num_regular(), model.num_super())
    }

    pub fn vocab_size(&self) -> usize {
        SIGMA_SIZE + self.regular + self.supermerges
    }
}

/// Pair counts over aggregated candidates, with the token table needed to
/// break ties and name new tokens.
#[derive(Debug, Clone)]
pub struct PairCountIndex {
    table: TokenTable,
    index: PairIndex,
}

impl PairCountIndex {
    /// Tallies adjacent pairs of every candidate. `table` must cover all
    /// ids appearing in `d`.
    pub fn count_pairs(d: &AggregatedCandidates, table: TokenTable) -> Self {
        let seqs = d.sorted().into_iter().map(|(c, n)| (c.to_vec(), n));
        let index = PairIndex::build(seqs, &table);
        Self { table, index }
    }

    pub fn best(&mut self) -> Option<(Pair, u64)> {
        self.index.best()
    }

    pub fn count(&self, pair: Pair) -> u64 {
        self.index.count(pair)
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn pair_counts(&self) -> &FxHashMap<Pair, u64> {
        self.index.pair_counts()
    }

    pub fn recount(&self) -> FxHashMap<Pair, u64> {
        self.index.recount()
    }

    pub fn table(&self) -> &TokenTable {
        &self.table
    }

    /// Candidates still holding at least one pair.
    pub fn candidates(&self) -> AggregatedCandidates {
        self.index
            .sequences()
            .filter(|(s, _)| s.len() >= 2)
            .collect()
    }

    /// Merges every occurrence of `pair`, returning the produced id and the
    /// pair's count before the merge.
    pub fn apply_supermerge(&mut self, pair: Pair) -> Result<(TokenId, u64), Phase2Error> {
        let count = self.index.count(pair);
        if count == 0 {
            return Err(Phase2Error::AbsentPair(pair.0, pair.1));
        }
        let produced = self.table.intern_pair(pair);
        self.index.apply(pair, produced, &self.table);
        Ok((produced, count))
    }
}

fn check_phase1(model: &TokenizerModel) -> Result<(), Phase2Error> {
    match model
        .merges()
        .iter()
        .position(|m| m.kind != MergeKind::Regular)
    {
        Some(i) => Err(Phase2Error::NotRegular(i)),
        None => Ok(()),
    }
}

fn push_super(
    builder: &mut ModelBuilder,
    idx: &PairCountIndex,
    pair: Pair,
    count: u64,
) -> Result<(), Phase2Error> {
    let t = idx.table();
    builder.push(
        &t.get(pair.0)[..],
        &t.get(pair.1)[..],
        count,
        MergeKind::Super,
    )?;
    Ok(())
}

/// Replays `phase1` against the best supermerge in `d` until the model has
/// `target_size - 256` rules. A supermerge is taken only when its count is
/// strictly higher than the next regular merge's. Once the candidates run
/// dry the remaining regular merges are replayed; once the regular merges
/// run out, supermerges continue alone.
///
/// `d` must use the token ids of `phase1`.
pub fn train_boundless_phase2(
    d: &AggregatedCandidates,
    phase1: &TokenizerModel,
    target_size: usize,
) -> Result<TokenizerModel, Phase2Error> {
    let idx = PairCountIndex::count_pairs(d, TokenTable::from_tokens(phase1.tokens()));
    boundless_replay(idx, phase1, target_size)
}

/// [`train_boundless_phase2`] over an already counted index.
pub fn boundless_replay(
    mut idx: PairCountIndex,
    phase1: &TokenizerModel,
    target_size: usize,
) -> Result<TokenizerModel, Phase2Error> {
    check_phase1(phase1)?;
    let m_w = phase1.merges();
    if m_w.len() + SIGMA_SIZE > target_size {
        return Err(Phase2Error::TooManyMerges {
            merges: m_w.len(),
            target: target_size,
        });
    }
    if m_w.len() + SIGMA_SIZE < target_size {
        warn!(
            "phase 1 stopped at {} merges, short of {}",
            m_w.len(),
            target_size - SIGMA_SIZE
        );
    }
    let mut builder = ModelBuilder::new(target_size, phase1.pretokenizer().clone());
    let mut j = 0usize;
    while builder.len() + SIGMA_SIZE < target_size {
        let regular = m_w.get(j);
        match (idx.best(), regular) {
            (None, None) => break,
            (Some((pair, c_s)), r) if r.is_none_or(|r| c_s > r.count) => {
                idx.apply_supermerge(pair)?;
                push_super(&mut builder, &idx, pair, c_s)?;
            }
            (_, Some(r)) => {
                let left = phase1.token_bytes(r.left).expect("phase-1 token");
                let right = phase1.token_bytes(r.right).expect("phase-1 token");
                builder.push(left, right, r.count, MergeKind::Regular)?;
                j += 1;
            }
            (Some(_), None) => unreachable!("guard accepts every pair once M_W is exhausted"),
        }
    }
    let mut model = builder.build();
    let budget = SuperBpeBudget::of(&model);
    model.set_metadata(TrainingMetadata {
        algorithm: Some("boundless".into()),
        regular: Some(budget.regular),
        supermerges: Some(budget.supermerges),
        ..phase1.metadata().clone()
    });
    Ok(model)
}

/// Result of a SuperBPE second phase.
#[derive(Debug, Clone)]
pub struct SuperBpeOutput {
    pub model: TokenizerModel,
    /// Supermerges requested but not performed because no pair was left.
    pub shortfall: usize,
}

/// Appends up to `budget.supermerges` supermerges to `base`, each the
/// highest-count pair in `d`. `base` must have exactly `budget.regular`
/// merges, all regular, and `d` must use its token ids.
pub fn train_superbpe_phase2(
    d: &AggregatedCandidates,
    budget: SuperBpeBudget,
    base: &TokenizerModel,
) -> Result<SuperBpeOutput, Phase2Error> {
    let idx = PairCountIndex::count_pairs(d, TokenTable::from_tokens(base.tokens()));
    superbpe_extend(idx, budget, base)
}

/// [`train_superbpe_phase2`] over an already counted index.
pub fn superbpe_extend(
    mut idx: PairCountIndex,
    budget: SuperBpeBudget,
    base: &TokenizerModel,
) -> Result<SuperBpeOutput, Phase2Error> {
    check_phase1(base)?;
    if base.merges().len() != budget.regular {
        return Err(Phase2Error::BudgetMismatch {
            expected: budget.regular,
            actual: base.merges().len(),
        });
    }
    let target = budget.vocab_size();
    let mut builder = ModelBuilder::new(target, base.pretokenizer().clone());
    for r in base.merges() {
        builder.push_ids(r.left, r.right, r.count, MergeKind::Regular)?;
    }
    let mut done = 0;
    while done < budget.supermerges {
        let Some((pair, count)) = idx.best() else {
            break;
        };
        idx.apply_supermerge(pair)?;
        push_super(&mut builder, &idx, pair, count)?;
        done += 1;
    }
    let shortfall = budget.supermerges - done;
    if shortfall > 0 {
        warn!(
            "candidates exhausted after {done} of {} supermerges",
            budget.supermerges
        );
    }
    let mut model = builder.build();
    model.set_metadata(TrainingMetadata {
        algorithm: Some("superbpe".into()),
        regular: Some(budget.regular),
        supermerges: Some(done),
        ..base.metadata().clone()
    });
    Ok(SuperBpeOutput { model, shortfall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pretokenizer::PretokenizerConfig;

    const A: TokenId = 97;
    const B: TokenId = 98;
    const C: TokenId = 99;

    fn d(items: &[(&[TokenId], u64)]) -> AggregatedCandidates {
        items.iter().copied().collect()
    }

    fn counts(idx: &PairCountIndex) -> Vec<(Pair, u64)> {
        let mut v: Vec<_> = idx.pair_counts().iter().map(|(&p, &c)| (p, c)).collect();
        v.sort_unstable();
        v
    }

    fn base(merges: &[(&[u8], &[u8], u64)]) -> TokenizerModel {
        let mut b = ModelBuilder::new(100_000, PretokenizerConfig::default());
        for (l, r, c) in merges {
            b.push(l, r, *c, MergeKind::Regular).unwrap();
        }
        b.build()
    }

    #[test]
    fn count_pairs_examples() {
        let idx = PairCountIndex::count_pairs(&d(&[(&[A, B, C], 2)]), TokenTable::new());
        assert_eq!(counts(&idx), vec![((A, B), 2), ((B, C), 2)]);
        let idx = PairCountIndex::count_pairs(&d(&[]), TokenTable::new());
        assert!(idx.is_empty());
        let idx = PairCountIndex::count_pairs(&d(&[(&[A, A, A], 1)]), TokenTable::new());
        assert_eq!(counts(&idx), vec![((A, A), 2)]);
    }

    #[test]
    fn apply_supermerge_examples() {
        let mut idx = PairCountIndex::count_pairs(&d(&[(&[A, B, C], 3)]), TokenTable::new());
        let (ab, n) = idx.apply_supermerge((A, B)).unwrap();
        assert_eq!(n, 3);
        assert_eq!(counts(&idx), vec![((ab, C), 3)]);
        assert_eq!(idx.candidates(), d(&[(&[ab, C], 3)]));

        let mut idx = PairCountIndex::count_pairs(&d(&[(&[A, B], 5)]), TokenTable::new());
        idx.apply_supermerge((A, B)).unwrap();
        assert!(idx.is_empty());
        assert!(idx.candidates().is_empty());

        let mut idx = PairCountIndex::count_pairs(&d(&[(&[A, A, A], 1)]), TokenTable::new());
        let (aa, _) = idx.apply_supermerge((A, A)).unwrap();
        assert_eq!(idx.candidates(), d(&[(&[aa, A], 1)]));

        assert_eq!(
            idx.apply_supermerge((B, C)),
            Err(Phase2Error::AbsentPair(B, C))
        );
    }

    #[test]
    fn tie_goes_to_regular() {
        let p1 = base(&[(b"x", b"y", 4), (b"x", b"z", 2)]);
        let model = train_boundless_phase2(&d(&[(&[A, B], 4)]), &p1, 258).unwrap();
        let kinds: Vec<_> = model.merges().iter().map(|m| m.kind).collect();
        assert_eq!(kinds, vec![MergeKind::Regular, MergeKind::Super]);
        assert_eq!(model.merges()[1].count, 4);
    }

    #[test]
    fn empty_candidates_replay_phase1() {
        let p1 = base(&[(b"x", b"y", 4), (b"x", b"z", 2), (b"q", b"r", 1)]);
        let model = train_boundless_phase2(&d(&[]), &p1, 259).unwrap();
        assert_eq!(model.merges(), p1.merges());
        assert_eq!(model.num_super(), 0);
    }

    #[test]
    fn supermerges_continue_after_phase1_runs_out() {
        let p1 = base(&[(b"x", b"y", 4)]);
        let model = train_boundless_phase2(&d(&[(&[A, B, C], 1)]), &p1, 260).unwrap();
        assert_eq!(model.num_regular(), 1);
        assert_eq!(model.num_super(), 2);
    }

    #[test]
    fn oversized_phase1_is_rejected() {
        let p1 = base(&[(b"x", b"y", 4), (b"x", b"z", 2)]);
        assert!(matches!(
            train_boundless_phase2(&d(&[]), &p1, 257),
            Err(Phase2Error::TooManyMerges { .. })
        ));
    }

    #[test]
    fn superbpe_budget() {
        let p1 = base(&[(b"x", b"y", 4)]);
        let out = train_superbpe_phase2(&d(&[]), SuperBpeBudget::new(1, 0), &p1).unwrap();
        assert_eq!(out.model.merges(), p1.merges());
        assert_eq!(out.shortfall, 0);

        let out = train_superbpe_phase2(&d(&[]), SuperBpeBudget::new(1, 3), &p1).unwrap();
        assert_eq!(out.model.num_super(), 0);
        assert_eq!(out.shortfall, 3);

        let out =
            train_superbpe_phase2(&d(&[(&[A, B], 1)]), SuperBpeBudget::new(1, 3), &p1).unwrap();
        assert_eq!(out.model.num_super(), 1);
        assert_eq!(out.shortfall, 2);

        assert!(matches!(
            train_superbpe_phase2(&d(&[]), SuperBpeBudget::new(2, 0), &p1),
            Err(Phase2Error::BudgetMismatch { .. })
        ));
    }
}
