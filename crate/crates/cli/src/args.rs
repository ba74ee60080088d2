use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use superword::corpus::{CorpusFormat, FileCorpus};
use superword::greedy_ngrams::{DEFAULT_MAX_LEN, DEFAULT_MIN_COUNT_FLOOR};
use superword::pipeline::Algorithm;
use superword::PretokenizerConfig;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "superword",
    version,
    about = "BPE, BoundlessBPE and SuperBPE tokenizer training"
)]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and print its run report as JSON.
    Train(TrainArgs),
    /// Encode documents to token ids, one JSON line per document.
    Encode(EncodeArgs),
    /// Decode token-id lines back to text.
    Decode(DecodeArgs),
    /// Pretoken and candidate statistics of a corpus.
    Stats(StatsArgs),
    /// Training and encoding timings as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Kind {
    Bpe,
    Boundless,
    Superbpe,
}

impl From<Kind> for Algorithm {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Bpe => Algorithm::Bpe,
            Kind::Boundless => Algorithm::Boundless,
            Kind::Superbpe => Algorithm::SuperBpe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// JSONL files (documents in the "text" field), text files or directories.
    #[arg(required = true)]
    pub corpus: Vec<PathBuf>,
    /// Input format; detected from the extension by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Use only the first N documents.
    #[arg(long)]
    pub limit: Option<usize>,
}

impl CorpusArgs {
    pub fn open(&self) -> Result<FileCorpus, CliError> {
        self.open_limited(self.limit)
    }

    pub fn open_limited(&self, limit: Option<usize>) -> Result<FileCorpus, CliError> {
        for p in &self.corpus {
            if !p.exists() {
                return Err(CliError::io(p.display(), "no such file or directory"));
            }
        }
        let format = self.format.map(|f| match f {
            Format::Jsonl => CorpusFormat::Jsonl,
            Format::Text => CorpusFormat::Text,
        });
        let c = FileCorpus::new(&self.corpus, format).map_err(|e| CliError::io("corpus", e))?;
        Ok(c.with_limit(limit))
    }
}

#[derive(Debug, Clone, Args)]
pub struct PretokenizerArgs {
    /// Comma-separated scripts that get character-level pre-tokenization,
    /// or "none".
    #[arg(long)]
    pub scripts: Option<String>,
    /// Only allow supermerges between pretokens of the same script chunk.
    #[arg(long)]
    pub same_script_only: bool,
}

impl PretokenizerArgs {
    /// Applies the overrides on top of `base`.
    pub fn apply(&self, mut base: PretokenizerConfig) -> PretokenizerConfig {
        if let Some(s) = &self.scripts {
            let list: Vec<String> = s
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty() && !s.eq_ignore_ascii_case("none"))
                .map(String::from)
                .collect();
            base = base.with_scripts(list);
        }
        if self.same_script_only {
            base.cross_script_supermerges = false;
        }
        base
    }

    pub fn is_set(&self) -> bool {
        self.scripts.is_some() || self.same_script_only
    }
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Greedy-split supermerge candidates into frequent n-grams.
    #[arg(long)]
    pub greedy_split: bool,
    /// Longest n-gram considered when splitting.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub ngram_max_len: usize,
    /// Floor on the minimum n-gram count.
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT_FLOOR)]
    pub min_count_floor: u64,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Target vocabulary size including the 256 byte tokens.
    #[arg(long)]
    pub vocab: Option<usize>,
    /// SuperBPE: number of supermerges.
    #[arg(long)]
    pub supermerges: Option<usize>,
    /// SuperBPE: take vocabulary size, supermerge count and pre-tokenization
    /// from a trained model.
    #[arg(long = "match", value_name = "MODEL")]
    pub match_model: Option<PathBuf>,
    #[command(flatten)]
    pub pretokenizer: PretokenizerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Where to write the model.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write the run report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the merge log (TSV: index, kind, left hex, right hex, count).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    #[arg(short, long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Disable the whole-pretoken vocabulary lookup.
    #[arg(long)]
    pub no_shortcut: bool,
    /// Split supermerge candidates with the model's stored n-grams.
    #[arg(long)]
    pub greedy_split: bool,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output file; stdout by default.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    #[arg(short, long)]
    pub model: PathBuf,
    /// Lines of `{"ids": [...]}` or whitespace-separated ids; stdin by default.
    pub input: Option<PathBuf>,
    /// Write raw bytes, one document per line, instead of JSON lines.
    #[arg(long)]
    pub raw: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Model whose regular vocabulary decides candidate eligibility.
    #[arg(short, long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub pretokenizer: PretokenizerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Training log to report supermerge counts by rank from.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Comma-separated vocabulary sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub vocab: Vec<usize>,
    /// Comma-separated document counts; all documents by default.
    #[arg(long, value_delimiter = ',')]
    pub docs: Vec<usize>,
    /// Comma-separated algorithms.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "bpe,boundless"
    )]
    pub algorithms: Vec<Kind>,
    /// SuperBPE supermerge count; matched to the Boundless run by default.
    #[arg(long)]
    pub supermerges: Option<usize>,
    #[command(flatten)]
    pub pretokenizer: PretokenizerArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Also time encoding with and without the vocabulary shortcut.
    #[arg(long)]
    pub encode: bool,
    /// CSV output; stdout by default.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pretok(scripts: Option<&str>, same_script_only: bool) -> PretokenizerArgs {
        PretokenizerArgs {
            scripts: scripts.map(String::from),
            same_script_only,
        }
    }

    #[test]
    fn script_overrides() {
        let base = PretokenizerConfig::default();
        assert_eq!(pretok(None, false).apply(base.clone()), base);
        let c = pretok(Some("Han, Thai"), true).apply(base.clone());
        assert_eq!(c.script_specific_scripts, vec!["Han", "Thai"]);
        assert!(!c.cross_script_supermerges);
        assert!(pretok(Some("none"), false)
            .apply(base)
            .script_specific_scripts
            .is_empty());
    }

    #[test]
    fn parses_bench_lists() {
        let cli = Cli::try_parse_from([
            "superword",
            "bench",
            "c.jsonl",
            "--vocab",
            "300,400",
            "--algorithms",
            "superbpe,bpe",
        ])
        .unwrap();
        let Command::Bench(b) = cli.command else {
            panic!("not bench")
        };
        assert_eq!(b.vocab, vec![300, 400]);
        assert_eq!(b.algorithms, vec![Kind::Superbpe, Kind::Bpe]);
        assert_eq!(b.split.min_count_floor, 15);
    }
}
