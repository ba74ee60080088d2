use serde::Serialize;
use superword::bpe_trainer::aggregate_corpus;
use superword::candidate_aggregator::aggregate_candidates;
use superword::greedy_ngrams::{count_frequent_ngrams, derive_c_min, NgramConfig};
use superword::model_io::{load_model, read_training_log_file, supermerge_count_violations};
use superword::pipeline::type_token_ratio;
use superword::{MergeKind, MergeRule, Pretokenizer, PretokenizerConfig};

use crate::args::StatsArgs;
use crate::error::CliError;
use crate::train::write_file;

#[derive(Debug, Serialize)]
struct Collection {
    unique: usize,
    total: u64,
    type_token_ratio: f64,
}

impl Collection {
    fn new(unique: usize, total: u64) -> Self {
        Self {
            unique,
            total,
            type_token_ratio: type_token_ratio(unique, total),
        }
    }
}

#[derive(Debug, Serialize)]
struct SupermergeRank {
    /// 1-based rank among supermerges.
    rank: usize,
    /// Position in the full merge list.
    index: usize,
    count: u64,
}

#[derive(Debug, Default, Serialize)]
struct StatsReport {
    documents: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pretokens: Option<Collection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    candidates: Option<Collection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    split_candidates: Option<Collection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequent_ngrams: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    supermerge_counts: Option<Vec<SupermergeRank>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    count_bound_violations: Option<usize>,
}

pub fn run(a: StatsArgs) -> Result<(), CliError> {
    if a.split.greedy_split && a.model.is_none() {
        return Err(CliError::Usage(
            "--greedy-split needs --model to derive the minimum count".into(),
        ));
    }
    let model = a.model.as_deref().map(load_model).transpose()?;
    let base = model
        .as_ref()
        .map(|m| m.pretokenizer().clone())
        .unwrap_or_else(PretokenizerConfig::default);
    let pretokenizer = Pretokenizer::new(a.pretokenizer.apply(base))?;
    let corpus = a.corpus.open()?;

    let agg = aggregate_corpus(&corpus, &pretokenizer)?;
    let mut report = StatsReport {
        documents: agg.documents(),
        pretokens: Some(Collection::new(agg.len(), agg.total())),
        ..Default::default()
    };
    eprintln!(
        "{} documents, {} unique of {} pretokens",
        agg.documents(),
        agg.len(),
        agg.total()
    );
    drop(agg);

    if let Some(model) = &model {
        let d = aggregate_candidates(&corpus, &pretokenizer, &model.regular_vocabulary(), None)?;
        report.candidates = Some(Collection::new(d.len(), d.total()));
        eprintln!("{} unique of {} supermerge candidates", d.len(), d.total());
        if a.split.greedy_split {
            let regular: Vec<MergeRule> = model
                .merges()
                .iter()
                .filter(|m| m.kind == MergeKind::Regular)
                .copied()
                .collect();
            let c_min = derive_c_min(&regular, a.split.min_count_floor)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let config = NgramConfig::new(a.split.ngram_max_len, c_min)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let ngrams = count_frequent_ngrams(d.iter(), config);
            let split = d.split_with(&ngrams);
            eprintln!(
                "{} frequent n-grams at c_min {c_min}; {} unique of {} split candidates",
                ngrams.len(),
                split.len(),
                split.total()
            );
            report.c_min = Some(c_min);
            report.frequent_ngrams = Some(ngrams.len());
            report.split_candidates = Some(Collection::new(split.len(), split.total()));
        }
    }

    if let Some(path) = &a.log {
        let log = read_training_log_file(path)?;
        let series: Vec<SupermergeRank> = log
            .iter()
            .filter(|r| r.kind == MergeKind::Super)
            .enumerate()
            .map(|(i, r)| SupermergeRank {
                rank: i + 1,
                index: r.index,
                count: r.count,
            })
            .collect();
        let violations = supermerge_count_violations(&log);
        for v in violations.iter().take(5) {
            log::warn!(
                "merge {}: supermerge count {} exceeds parent {:02x?} count {}",
                v.index,
                v.count,
                v.parent,
                v.parent_count
            );
        }
        eprintln!(
            "{} supermerges in log, {} count-bound violations",
            series.len(),
            violations.len()
        );
        report.count_bound_violations = Some(violations.len());
        report.supermerge_counts = Some(series);
    }

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.output {
        Some(p) => write_file(p, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}
