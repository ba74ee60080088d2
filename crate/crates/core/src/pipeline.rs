//! End-to-end training: aggregation, phase 1, candidate aggregation,
//! optional greedy splitting and phase 2, with per-stage timings.

use std::time::{Duration, Instant};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::bpe_trainer::{aggregate_corpus, AggregatedPretokens, BpeTrainer};
use crate::candidate_aggregator::{aggregate_candidates, AggregatedCandidates};
use crate::corpus::{CorpusError, CorpusSource};
use crate::greedy_ngrams::{
    count_frequent_ngrams, derive_c_min, NgramConfig, NgramCounts, NgramError, DEFAULT_MAX_LEN,
    DEFAULT_MIN_COUNT_FLOOR,
};
use crate::model::{ModelError, TokenizerModel, TrainingMetadata, SIGMA_SIZE};
use crate::pair_index::TokenTable;
use crate::phase2_trainer::{
    boundless_replay, superbpe_extend, PairCountIndex, Phase2Error, SuperBpeBudget,
};
use crate::pretokenizer::{Pretokenizer, PretokenizerConfig, PretokenizerError};
use crate::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bpe,
    Boundless,
    SuperBpe,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Bpe => "bpe",
            Algorithm::Boundless => "boundless",
            Algorithm::SuperBpe => "superbpe",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub algorithm: Algorithm,
    /// Target vocabulary size, bytes included.
    pub vocab_size: usize,
    /// SuperBPE only: number of supermerges `s`; `r = vocab_size - 256 - s`.
    pub supermerges: usize,
    pub pretokenizer: PretokenizerConfig,
    pub greedy_split: bool,
    pub ngram_max_len: usize,
    pub min_count_floor: u64,
}

impl TrainOptions {
    pub fn new(algorithm: Algorithm, vocab_size: usize) -> Self {
        Self {
            algorithm,
            vocab_size,
            supermerges: 0,
            pretokenizer: PretokenizerConfig::default(),
            greedy_split: false,
            ngram_max_len: DEFAULT_MAX_LEN,
            min_count_floor: DEFAULT_MIN_COUNT_FLOOR,
        }
    }

    /// SuperBPE options reproducing a trained model's budget.
    pub fn matching(model: &TokenizerModel) -> Self {
        let b = SuperBpeBudget::of(model);
        let mut o = Self::new(Algorithm::SuperBpe, b.vocab_size());
        o.supermerges = b.supermerges;
        o.pretokenizer = model.pretokenizer().clone();
        o
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Options(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Pretokenizer(#[from] PretokenizerError),
    #[error(transparent)]
    Phase2(#[from] Phase2Error),
    #[error(transparent)]
    Ngram(#[from] NgramError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub pretokenization: f64,
    pub initialize_counts: f64,
    pub merge: f64,
    pub other: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Option<Algorithm>,
    pub target_size: usize,
    /// `256 + r + s`.
    pub vocab_size: usize,
    pub distinct_tokens: usize,
    pub documents: usize,
    pub unique_pretokens: usize,
    pub total_pretokens: u64,
    pub unique_candidates: usize,
    pub total_candidates: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unique_split_candidates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_split_candidates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequent_ngrams: Option<usize>,
    pub regular: usize,
    pub supermerges: usize,
    pub supermerge_shortfall: usize,
    pub times: StageTimes,
}

/// Unique ÷ total, 0 for an empty collection.
pub fn type_token_ratio(unique: usize, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        unique as f64 / total as f64
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: TokenizerModel,
    pub report: RunReport,
}

#[derive(Default)]
struct Clock {
    pretokenization: Duration,
    initialize_counts: Duration,
    merge: Duration,
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *slot += t.elapsed();
    out
}

/// Phase 1 on aggregated pretokens.
fn phase1(
    agg: &AggregatedPretokens,
    merges: usize,
    cfg: &PretokenizerConfig,
    clock: &mut Clock,
) -> Result<TokenizerModel, PipelineError> {
    let mut t = timed(&mut clock.initialize_counts, || BpeTrainer::new(agg));
    timed(&mut clock.merge, || {
        while t.merges().len() < merges && t.step().is_some() {}
    });
    if t.merges().len() < merges {
        warn!("phase 1 ran out of pairs after {} merges", t.merges().len());
    }
    Ok(TokenizerModel::from_merges(
        &t.into_merges(),
        SIGMA_SIZE + merges,
        cfg.clone(),
    )?)
}

fn prefix(model: &TokenizerModel, n: usize) -> Result<TokenizerModel, ModelError> {
    let n = n.min(model.merges().len());
    let mut m = TokenizerModel::from_merges(
        &model.merges()[..n],
        SIGMA_SIZE + n,
        model.pretokenizer().clone(),
    )?;
    m.set_metadata(model.metadata().clone());
    Ok(m)
}

/// Re-expresses n-grams in `target`'s ids, dropping those whose tokens it lacks.
fn remap_ngrams(
    ngrams: &NgramCounts,
    from: &TokenizerModel,
    target: &TokenizerModel,
) -> Vec<Vec<TokenId>> {
    let mut out: Vec<Vec<TokenId>> = ngrams
        .iter()
        .filter_map(|(g, _)| {
            g.iter()
                .map(|&t| {
                    from.token_bytes(t)
                        .and_then(|b| target.token_id(b))
                        .filter(|&id| target.is_regular_token(id))
                })
                .collect()
        })
        .collect();
    out.sort_unstable();
    out
}

pub fn train<C: CorpusSource + ?Sized>(
    corpus: &C,
    opts: &TrainOptions,
) -> Result<TrainOutput, PipelineError> {
    let start = Instant::now();
    if opts.vocab_size < SIGMA_SIZE {
        return Err(PipelineError::Options(format!(
            "vocabulary size {} is below the {SIGMA_SIZE} byte tokens",
            opts.vocab_size
        )));
    }
    let merges = opts.vocab_size - SIGMA_SIZE;
    if opts.algorithm == Algorithm::SuperBpe && opts.supermerges > merges {
        return Err(PipelineError::Options(format!(
            "{} supermerges do not fit in vocabulary size {}",
            opts.supermerges, opts.vocab_size
        )));
    }
    let pretokenizer = Pretokenizer::new(opts.pretokenizer.clone())?;
    let mut clock = Clock::default();
    let mut report = RunReport {
        algorithm: Some(opts.algorithm),
        target_size: opts.vocab_size,
        ..Default::default()
    };

    let agg = timed(&mut clock.pretokenization, || {
        aggregate_corpus(corpus, &pretokenizer)
    })?;
    report.documents = agg.documents();
    report.unique_pretokens = agg.len();
    report.total_pretokens = agg.total();
    info!("{} unique of {} pretokens", agg.len(), agg.total());

    // SuperBPE only needs r phase-1 merges unless c_min must be derived.
    let phase1_merges = match opts.algorithm {
        Algorithm::SuperBpe if !opts.greedy_split => merges - opts.supermerges,
        _ => merges,
    };
    let full = phase1(&agg, phase1_merges, &opts.pretokenizer, &mut clock)?;
    drop(agg);

    let mut model = match opts.algorithm {
        Algorithm::Bpe => full,
        Algorithm::Boundless | Algorithm::SuperBpe => {
            let base = match opts.algorithm {
                Algorithm::SuperBpe => prefix(&full, merges - opts.supermerges)?,
                _ => full.clone(),
            };
            let d = timed(&mut clock.pretokenization, || {
                aggregate_candidates(corpus, &pretokenizer, &base.regular_vocabulary(), None)
            })?;
            report.unique_candidates = d.len();
            report.total_candidates = d.total();
            let (d, ngrams) = if opts.greedy_split {
                let (d, ngrams, c_min) = split_candidates(&d, &full, opts)?;
                report.c_min = Some(c_min);
                report.frequent_ngrams = Some(ngrams.len());
                report.unique_split_candidates = Some(d.len());
                report.total_split_candidates = Some(d.total());
                (d, Some(ngrams))
            } else {
                (d, None)
            };
            let idx = timed(&mut clock.initialize_counts, || {
                PairCountIndex::count_pairs(&d, TokenTable::from_tokens(base.tokens()))
            });
            drop(d);
            let mut model = match opts.algorithm {
                Algorithm::Boundless => timed(&mut clock.merge, || {
                    boundless_replay(idx, &base, opts.vocab_size)
                })?,
                _ => {
                    let budget = SuperBpeBudget::new(base.merges().len(), opts.supermerges);
                    let out = timed(&mut clock.merge, || superbpe_extend(idx, budget, &base))?;
                    report.supermerge_shortfall = out.shortfall;
                    out.model
                }
            };
            if let Some(ngrams) = ngrams {
                let g = remap_ngrams(&ngrams, &base, &model);
                model.set_greedy_ngrams(g);
            }
            model
        }
    };
    model.set_metadata(TrainingMetadata {
        algorithm: Some(opts.algorithm.to_string()),
        regular: Some(model.num_regular()),
        supermerges: Some(model.num_super()),
        ..model.metadata().clone()
    });

    report.regular = model.num_regular();
    report.supermerges = model.num_super();
    report.vocab_size = SIGMA_SIZE + report.regular + report.supermerges;
    report.distinct_tokens = model.vocab_size();
    let total = start.elapsed().as_secs_f64();
    let (p, i, m) = (
        clock.pretokenization.as_secs_f64(),
        clock.initialize_counts.as_secs_f64(),
        clock.merge.as_secs_f64(),
    );
    report.times = StageTimes {
        pretokenization: p,
        initialize_counts: i,
        merge: m,
        other: (total - p - i - m).max(0.0),
        total,
    };
    Ok(TrainOutput { model, report })
}

/// Derives `c_min` from the full phase-1 run, mines frequent n-grams and
/// greedy-splits every candidate.
pub fn split_candidates(
    d: &AggregatedCandidates,
    full_phase1: &TokenizerModel,
    opts: &TrainOptions,
) -> Result<(AggregatedCandidates, NgramCounts, u64), PipelineError> {
    let c_min = derive_c_min(full_phase1.merges(), opts.min_count_floor)?;
    let config = NgramConfig::new(opts.ngram_max_len, c_min)?;
    let ngrams = count_frequent_ngrams(d.iter(), config);
    info!("{} frequent n-grams at c_min {c_min}", ngrams.len());
    Ok((d.split_with(&ngrams), ngrams, c_min))
}
