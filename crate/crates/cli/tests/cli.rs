use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use superword::model_io::load_model;
use tempfile::TempDir;

const WORDS: &[&str] = &[
    "the", "of", "and", "to", "in", "is", "it", "that", "for", "was", "on", "as", "with", "be",
    "at", "by", "this", "have", "from", "or", "one", "had", "not", "but", "what", "all", "were",
    "when", "we", "there", "can", "an", "your", "which", "their", "said", "if", "do", "will",
    "each", "about", "how", "up", "out", "them", "then",
];
const HAN: &[&str] = &[
    "德", "国", "电", "磁", "球", "阀", "中", "文", "学", "生", "人", "大", "天", "日", "本", "语",
];

fn english_docs(seed: u64, n: usize) -> Vec<String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = r.gen_range(5..60);
            let mut d: String = (0..len)
                .map(|i| {
                    // low ranks far more often
                    let k = (r.gen::<f64>().powi(3) * WORDS.len() as f64) as usize;
                    if i == 0 {
                        WORDS[k].to_string()
                    } else {
                        format!(" {}", WORDS[k])
                    }
                })
                .collect();
            d.push('.');
            d
        })
        .collect()
}

fn han_docs(seed: u64, n: usize) -> Vec<String> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..r.gen_range(5..80))
                .map(|_| *HAN.choose(&mut r).unwrap())
                .collect()
        })
        .collect()
}

fn write_jsonl(dir: &Path, name: &str, docs: &[String]) -> PathBuf {
    let p = dir.join(name);
    let body: String = docs
        .iter()
        .map(|d| serde_json::json!({ "text": d }).to_string() + "\n")
        .collect();
    std::fs::write(&p, body).unwrap();
    p
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_superword"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null)
}

struct Fixture {
    dir: TempDir,
    corpus: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_jsonl(dir.path(), "corpus.jsonl", &english_docs(1, 300));
        Fixture { dir, corpus }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, kind: &str, extra: &[&str], model: &str) -> serde_json::Value {
        let mut args: Vec<String> = vec![
            "train".into(),
            kind.into(),
            self.corpus.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        args.extend(["-o".into(), self.path(model).display().to_string()]);
        ok(&run(args))
    }
}

#[test]
fn boundless_report_and_matched_superbpe() {
    let f = Fixture::new();
    let log = f.path("merges.tsv");
    let report = f.train(
        "boundless",
        &["--vocab", "400", "--log", log.to_str().unwrap()],
        "b.json",
    );
    let (r, s) = (
        report["regular"].as_u64().unwrap(),
        report["supermerges"].as_u64().unwrap(),
    );
    assert_eq!(r + s + 256, 400);
    assert!(s > 0);
    assert_eq!(report["vocab_size"], 400);

    let matched = f.train(
        "superbpe",
        &["--match", f.path("b.json").to_str().unwrap()],
        "s.json",
    );
    assert_eq!(matched["regular"], r);
    assert_eq!(matched["supermerges"], s);
    let a = load_model(&f.path("b.json")).unwrap();
    let b = load_model(&f.path("s.json")).unwrap();
    assert!(a.equivalent_to(&b));

    let stats = ok(&run([
        "stats",
        f.corpus.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
        "--model",
        f.path("b.json").to_str().unwrap(),
    ]));
    let series = stats["supermerge_counts"].as_array().unwrap();
    assert_eq!(series.len() as u64, s);
    assert_eq!(stats["count_bound_violations"], 0);
    let counts: Vec<u64> = series
        .iter()
        .map(|p| p["count"].as_u64().unwrap())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn bpe_at_byte_vocabulary_is_empty() {
    let f = Fixture::new();
    let report = f.train("bpe", &["--vocab", "256"], "m.json");
    assert_eq!(report["regular"], 0);
    assert!(load_model(&f.path("m.json")).unwrap().merges().is_empty());
}

#[test]
fn encode_decode_round_trip() {
    let f = Fixture::new();
    let docs = english_docs(1, 300);
    f.train(
        "boundless",
        &["--vocab", "500", "--greedy-split", "--min-count-floor", "2"],
        "m.json",
    );
    let model = f.path("m.json");
    let encode = |extra: &[&str], out: &str| {
        let mut args = vec![
            "encode",
            "-m",
            model.to_str().unwrap(),
            f.corpus.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out_path = f.path(out);
        args.extend_from_slice(&["-o", out_path.to_str().unwrap()]);
        ok(&run(&args));
        std::fs::read_to_string(out_path).unwrap()
    };
    let ids = encode(&[], "ids.jsonl");
    assert_eq!(ids.lines().count(), docs.len());
    assert_eq!(encode(&["--no-shortcut"], "slow.jsonl"), ids);
    assert_eq!(encode(&["--workers", "4"], "par.jsonl"), ids);
    encode(&["--greedy-split"], "split.jsonl");

    let out = run([
        "decode",
        "-m",
        model.to_str().unwrap(),
        f.path("split.jsonl").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let texts: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["text"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(texts, docs);
}

#[test]
fn candidates_aggregate_worse_than_pretokens() {
    let f = Fixture::new();
    f.train("bpe", &["--vocab", "400"], "m.json");
    let stats = ok(&run([
        "stats",
        f.corpus.to_str().unwrap(),
        "-m",
        f.path("m.json").to_str().unwrap(),
    ]));
    let pre = stats["pretokens"]["type_token_ratio"].as_f64().unwrap();
    let cand = stats["candidates"]["type_token_ratio"].as_f64().unwrap();
    assert!(cand > pre, "candidate ratio {cand} vs pretoken ratio {pre}");
}

#[test]
fn script_specific_pretokens_aggregate_han() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_jsonl(dir.path(), "han.jsonl", &han_docs(2, 200));
    let ratio = |scripts: &str| {
        let stats = ok(&run([
            "stats",
            corpus.to_str().unwrap(),
            "--scripts",
            scripts,
        ]));
        stats["pretokens"]["type_token_ratio"].as_f64().unwrap()
    };
    let off = ratio("none");
    let on = ratio("Han");
    assert!(
        on * 20.0 < off,
        "ratio with script split {on}, without {off}"
    );
}

#[test]
fn bench_writes_csv_rows() {
    let f = Fixture::new();
    let csv = f.path("bench.csv");
    let out = run([
        "bench",
        f.corpus.to_str().unwrap(),
        "--vocab",
        "300,400",
        "--docs",
        "50,300",
        "--algorithms",
        "bpe,boundless,superbpe",
        "--encode",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 3);
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    assert!(rows.iter().all(|r| !r[col("encode_shortcut")].is_empty()));
    // matched SuperBPE lands on the same split as the Boundless row before it
    for pair in rows.chunks(3) {
        assert_eq!(pair[1][col("supermerges")], pair[2][col("supermerges")]);
    }
}

#[test]
fn bench_on_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_jsonl(dir.path(), "empty.jsonl", &[]);
    let out = run([
        "bench",
        corpus.to_str().unwrap(),
        "--vocab",
        "300",
        "--encode",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("bpe,0,300,0,0"));
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let corpus = f.corpus.to_str().unwrap();
    let out = f.path("x.json");
    let out = out.to_str().unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap();

    assert_eq!(
        code(&["train", "superbpe", corpus, "--vocab", "300", "-o", out]),
        1
    );
    assert_eq!(code(&["train", "boundless", corpus, "-o", out]), 1);
    assert_eq!(
        code(&["train", "bpe", corpus, "--vocab", "100", "-o", out]),
        1
    );
    assert_eq!(
        code(&[
            "train",
            "bpe",
            corpus,
            "--vocab",
            "300",
            "--scripts",
            "Klingon",
            "-o",
            out
        ]),
        1
    );
    assert_eq!(code(&["train", "bpe", "--bogus", corpus, "-o", out]), 1);
    assert_eq!(
        code(&["train", "bpe", "missing.jsonl", "--vocab", "300", "-o", out]),
        2
    );
    assert_eq!(code(&["encode", "-m", "missing.json", corpus]), 2);

    let bad = f.path("bad.json");
    std::fs::write(&bad, r#"{"format_version": 99}"#).unwrap();
    assert_eq!(code(&["encode", "-m", bad.to_str().unwrap(), corpus]), 3);
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(code(&["encode", "-m", bad.to_str().unwrap(), corpus]), 3);
    assert_eq!(code(&["--help"]), 0);
}
