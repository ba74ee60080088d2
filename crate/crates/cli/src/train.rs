use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use superword::model_io::{load_model, save_model, write_training_log};
use superword::pipeline::{train, Algorithm, TrainOptions};
use superword::{PretokenizerConfig, TokenizerModel};

use crate::args::{Kind, SplitArgs, TrainArgs};
use crate::error::CliError;

pub fn split_options(opts: &mut TrainOptions, split: &SplitArgs) -> Result<(), CliError> {
    if split.greedy_split && split.ngram_max_len < 2 {
        return Err(CliError::Usage(format!(
            "--ngram-max-len must be at least 2, got {}",
            split.ngram_max_len
        )));
    }
    opts.greedy_split = split.greedy_split;
    opts.ngram_max_len = split.ngram_max_len;
    opts.min_count_floor = split.min_count_floor;
    Ok(())
}

fn options(a: &TrainArgs) -> Result<TrainOptions, CliError> {
    let vocab = || {
        a.vocab.ok_or_else(|| {
            CliError::Usage(format!("train {:?} needs --vocab", a.kind).to_lowercase())
        })
    };
    let mut opts = match (a.kind, &a.match_model, a.supermerges) {
        (Kind::Superbpe, Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "--match and --supermerges are mutually exclusive".into(),
            ))
        }
        (Kind::Superbpe, Some(path), None) => {
            let reference = load_model(path)?;
            let mut o = TrainOptions::matching(&reference);
            if let Some(v) = a.vocab {
                if v != o.vocab_size {
                    return Err(CliError::Usage(format!(
                        "--vocab {v} conflicts with the matched model's size {}",
                        o.vocab_size
                    )));
                }
            }
            if a.pretokenizer.is_set() {
                log::warn!(
                    "overriding the matched model's pre-tokenization; the result will not match it"
                );
            }
            o.pretokenizer = a.pretokenizer.apply(o.pretokenizer);
            o
        }
        (Kind::Superbpe, None, Some(s)) => {
            let mut o = TrainOptions::new(Algorithm::SuperBpe, vocab()?);
            o.supermerges = s;
            o.pretokenizer = a.pretokenizer.apply(PretokenizerConfig::default());
            o
        }
        (Kind::Superbpe, None, None) => {
            return Err(CliError::Usage(
                "train superbpe needs --supermerges or --match".into(),
            ))
        }
        (kind, m, s) => {
            if m.is_some() || s.is_some() {
                return Err(CliError::Usage(
                    "--match and --supermerges only apply to superbpe".into(),
                ));
            }
            let mut o = TrainOptions::new(kind.into(), vocab()?);
            o.pretokenizer = a.pretokenizer.apply(PretokenizerConfig::default());
            o
        }
    };
    split_options(&mut opts, &a.split)?;
    Ok(opts)
}

pub fn write_log(model: &TokenizerModel, path: &Path) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::io(path.display(), e))?;
    let mut w = BufWriter::new(f);
    write_training_log(model, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path.display(), e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path.display(), e))
}

pub fn run(a: TrainArgs) -> Result<(), CliError> {
    let opts = options(&a)?;
    let corpus = a.corpus.open()?;
    let out = train(&corpus, &opts)?;
    save_model(&out.model, &a.output)?;
    if let Some(p) = &a.log {
        write_log(&out.model, p)?;
    }
    let json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    if let Some(p) = &a.report {
        write_file(p, &json)?;
    }
    println!("{json}");
    let r = &out.report;
    eprintln!(
        "{}: {} tokens ({} regular, {} supermerges) from {} documents in {:.2}s -> {}",
        opts.algorithm,
        r.vocab_size,
        r.regular,
        r.supermerges,
        r.documents,
        r.times.total,
        a.output.display()
    );
    if r.supermerge_shortfall > 0 {
        eprintln!(
            "warning: {} supermerges short of the budget",
            r.supermerge_shortfall
        );
    }
    Ok(())
}
