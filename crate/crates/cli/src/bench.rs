use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use superword::corpus::CorpusSource;
use superword::phase2_trainer::SuperBpeBudget;
use superword::pipeline::{train, Algorithm, TrainOptions};
use superword::{Encoder, PretokenizerConfig, TokenizerModel};

use crate::args::{BenchArgs, Kind};
use crate::error::CliError;
use crate::train::split_options;

#[derive(Debug, Serialize)]
struct Row {
    algorithm: String,
    documents: usize,
    vocab: usize,
    regular: usize,
    supermerges: usize,
    unique_pretokens: usize,
    total_pretokens: u64,
    unique_candidates: usize,
    total_candidates: u64,
    pretokenization: f64,
    initialize_counts: f64,
    merge: f64,
    other: f64,
    total: f64,
    encode_shortcut: Option<f64>,
    encode_no_shortcut: Option<f64>,
}

/// Seconds to encode every document, and the token count.
fn time_encode(enc: &Encoder, docs: &[String]) -> (f64, usize) {
    let t = Instant::now();
    let tokens = docs.iter().map(|d| enc.encode(d).len()).sum();
    (t.elapsed().as_secs_f64(), tokens)
}

fn kind_order(k: Kind) -> u8 {
    match k {
        Kind::Bpe => 0,
        Kind::Boundless => 1,
        Kind::Superbpe => 2,
    }
}

pub fn run(a: BenchArgs) -> Result<(), CliError> {
    let mut kinds = a.algorithms.clone();
    kinds.sort_by_key(|&k| kind_order(k));
    kinds.dedup();
    if kinds.contains(&Kind::Superbpe)
        && a.supermerges.is_none()
        && !kinds.contains(&Kind::Boundless)
    {
        return Err(CliError::Usage(
            "superbpe needs --supermerges or a boundless run to match".into(),
        ));
    }
    let pretokenizer = a.pretokenizer.apply(PretokenizerConfig::default());
    let doc_counts: Vec<Option<usize>> = if a.docs.is_empty() {
        vec![a.corpus.limit]
    } else {
        a.docs.iter().map(|&d| Some(d)).collect()
    };

    let mut out: Box<dyn Write> = match &a.csv {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::io(p.display(), e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    for limit in doc_counts {
        let corpus = a.corpus.open_limited(limit)?;
        let docs: Vec<String> = if a.encode {
            corpus.documents().collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        for &vocab in &a.vocab {
            let mut trained: HashMap<Kind, TokenizerModel> = HashMap::new();
            for &kind in &kinds {
                let mut opts = TrainOptions::new(kind.into(), vocab);
                opts.pretokenizer = pretokenizer.clone();
                split_options(&mut opts, &a.split)?;
                if kind == Kind::Superbpe {
                    opts.supermerges = match a.supermerges {
                        Some(s) => s,
                        None => SuperBpeBudget::of(&trained[&Kind::Boundless]).supermerges,
                    };
                }
                let result = train(&corpus, &opts)?;
                let r = &result.report;
                let (mut enc_on, mut enc_off) = (None, None);
                if a.encode {
                    let enc = Encoder::new(result.model.clone())?;
                    let (on, n_on) = time_encode(&enc, &docs);
                    let (off, n_off) = time_encode(&enc.with_shortcut(false), &docs);
                    if n_on != n_off {
                        log::warn!("shortcut changed the token count: {n_on} vs {n_off}");
                    }
                    enc_on = Some(on);
                    enc_off = Some(off);
                }
                eprintln!(
                    "{:>9} docs={:<8} vocab={:<7} total={:.3}s{}",
                    opts.algorithm,
                    r.documents,
                    vocab,
                    r.times.total,
                    match (enc_on, enc_off) {
                        (Some(on), Some(off)) => format!(" encode={on:.3}s no-shortcut={off:.3}s"),
                        _ => String::new(),
                    }
                );
                w.serialize(Row {
                    algorithm: Algorithm::from(kind).to_string(),
                    documents: r.documents,
                    vocab,
                    regular: r.regular,
                    supermerges: r.supermerges,
                    unique_pretokens: r.unique_pretokens,
                    total_pretokens: r.total_pretokens,
                    unique_candidates: r.unique_candidates,
                    total_candidates: r.total_candidates,
                    pretokenization: r.times.pretokenization,
                    initialize_counts: r.times.initialize_counts,
                    merge: r.times.merge,
                    other: r.times.other,
                    total: r.times.total,
                    encode_shortcut: enc_on,
                    encode_no_shortcut: enc_off,
                })
                .map_err(|e| CliError::io("csv", e))?;
                trained.insert(kind, result.model);
            }
        }
    }
    w.flush().map_err(|e| CliError::io("csv", e))?;
    Ok(())
}
