use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use superword::corpus::CorpusSource;
use superword::model_io::load_model;
use superword::Encoder;

use crate::args::{DecodeArgs, EncodeArgs};
use crate::error::CliError;

const BATCH: usize = 1024;

#[derive(Serialize, Deserialize)]
struct IdsLine {
    ids: Vec<u32>,
}

#[derive(Serialize)]
struct TextLine<'a> {
    text: &'a str,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p.display(), e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Encodes a batch, splitting it across `workers` threads.
pub fn encode_batch(enc: &Encoder, docs: &[String], workers: usize) -> Vec<Vec<u32>> {
    if workers <= 1 || docs.len() < 2 {
        return docs.iter().map(|d| enc.encode(d)).collect();
    }
    let chunk = docs.len().div_ceil(workers);
    std::thread::scope(|s| {
        let handles: Vec<_> = docs
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|d| enc.encode(d)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("encoder thread panicked"))
            .collect()
    })
}

pub fn run_encode(a: EncodeArgs) -> Result<(), CliError> {
    if a.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let model = load_model(&a.model)?;
    let enc = Encoder::new(model)?
        .with_shortcut(!a.no_shortcut)
        .with_greedy_split(a.greedy_split);
    let corpus = a.corpus.open()?;
    let mut out = output(a.output.as_deref())?;
    let write_err = |e: io::Error| CliError::io("output", e);
    let (mut docs, mut tokens) = (0usize, 0usize);
    let mut batch = Vec::with_capacity(BATCH);
    let mut docs_iter = corpus.documents().peekable();
    while docs_iter.peek().is_some() {
        batch.clear();
        for d in docs_iter.by_ref().take(BATCH) {
            batch.push(d?);
        }
        for ids in encode_batch(&enc, &batch, a.workers) {
            tokens += ids.len();
            serde_json::to_writer(&mut out, &IdsLine { ids })
                .map_err(|e| CliError::io("output", e))?;
            out.write_all(b"\n").map_err(write_err)?;
        }
        docs += batch.len();
    }
    out.flush().map_err(write_err)?;
    eprintln!("encoded {docs} documents into {tokens} tokens");
    Ok(())
}

fn parse_ids(line: &str, n: usize) -> Result<Vec<u32>, CliError> {
    let bad = |m: String| CliError::Validation(format!("input line {n}: {m}"));
    if line.trim_start().starts_with('{') {
        let l: IdsLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        return Ok(l.ids);
    }
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("not a token id: {t:?}"))))
        .collect()
}

pub fn run_decode(a: DecodeArgs) -> Result<(), CliError> {
    let enc = Encoder::new(load_model(&a.model)?)?;
    let input: Box<dyn BufRead> = match &a.input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| CliError::io(p.display(), e))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let mut out = output(a.output.as_deref())?;
    let write_err = |e: io::Error| CliError::io("output", e);
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CliError::io("input", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let ids = parse_ids(&line, i + 1)?;
        let bytes = enc
            .decode(&ids)
            .map_err(|e| CliError::Validation(format!("input line {}: {e}", i + 1)))?;
        if a.raw {
            out.write_all(&bytes).map_err(write_err)?;
        } else {
            let text = String::from_utf8_lossy(&bytes);
            if let std::borrow::Cow::Owned(_) = text {
                log::warn!("input line {}: decoded bytes are not valid UTF-8", i + 1);
            }
            serde_json::to_writer(&mut out, &TextLine { text: &text })
                .map_err(|e| CliError::io("output", e))?;
        }
        out.write_all(b"\n").map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}
