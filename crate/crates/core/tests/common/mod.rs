//! Deterministic corpus generators shared by the integration tests.
#![allow(dead_code)]

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MIXED_SENTENCE: &str = "Tokenization of multilingual text 德国HYDAC电磁球阀 can be hard.";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const LATIN: &[&str] = &[
    "ka", "to", "be", "ri", "an", "ne", "so", "mi", "lo", "the", "in", "or", "st", "ar", "qu", "é",
    "ö", "ñ",
];
const CYRILLIC: &[&str] = &["ка", "по", "ри", "ст", "но", "вы"];
const HAN: &[&str] = &[
    "德", "国", "电", "磁", "球", "阀", "中", "文", "学", "生", "人", "大", "天", "日",
];
const THAI_CONS: &[&str] = &[
    "ก", "ข", "ค", "ง", "จ", "ช", "ด", "ต", "ถ", "ท", "น", "บ", "ป", "พ", "ม", "ย", "ร", "ล", "ว",
    "ส", "ห", "อ",
];
const THAI_MARK: &[&str] = &["", "", "", "ั", "ิ", "ี", "่", "้", "า", "ุ", "ู", "ื", "ิ่"];
const KANA: &[&str] = &["の", "は", "か", "ア", "イ", "カ", "ー"];
const PUNCT: &[&str] = &[".", ",", "!", "?", " -", ":", "\n", " (", ")"];

fn latin_word<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=3);
    let mut w: String = (0..n).map(|_| *LATIN.choose(rng).unwrap()).collect();
    if rng.gen_bool(0.1) {
        w.push('\u{0301}');
    }
    if rng.gen_bool(0.1) {
        let mut c = w.chars();
        let first = c.next().unwrap().to_uppercase().collect::<String>();
        w = first + c.as_str();
    }
    w
}

fn thai_word<R: Rng>(rng: &mut R) -> String {
    (0..rng.gen_range(1..=3))
        .map(|_| {
            format!(
                "{}{}",
                THAI_CONS.choose(rng).unwrap(),
                THAI_MARK.choose(rng).unwrap()
            )
        })
        .collect()
}

fn pick_word<R: Rng>(rng: &mut R) -> (String, bool) {
    match rng.gen_range(0..20) {
        0..=11 => (latin_word(rng), true),
        12..=13 => (
            (0..rng.gen_range(1..=3))
                .map(|_| *CYRILLIC.choose(rng).unwrap())
                .collect(),
            true,
        ),
        14..=16 => (
            (0..rng.gen_range(1..=3))
                .map(|_| *HAN.choose(rng).unwrap())
                .collect(),
            false,
        ),
        17..=18 => (thai_word(rng), false),
        _ => (
            (0..rng.gen_range(1..=3))
                .map(|_| *KANA.choose(rng).unwrap())
                .collect(),
            false,
        ),
    }
}

/// `n` distinct words; each word carries whether it takes a leading space.
pub fn lexicon<R: Rng>(rng: &mut R, n: usize) -> Vec<(String, bool)> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = pick_word(rng);
        if seen.insert(w.0.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|k| 1.0 / (k as f64).powf(s))).unwrap()
}

fn document<R: Rng>(
    rng: &mut R,
    lex: &[(String, bool)],
    dist: &WeightedIndex<f64>,
    words: usize,
) -> String {
    let mut doc = String::new();
    for i in 0..words {
        let (w, spaced) = &lex[dist.sample(rng)];
        if i > 0 && (*spaced || rng.gen_bool(0.3)) {
            doc.push(' ');
        }
        doc.push_str(w);
        if rng.gen_bool(0.08) {
            doc.push_str(PUNCT.choose(rng).unwrap());
        }
        if rng.gen_bool(0.02) {
            doc.push_str(&format!(" {}", rng.gen_range(0..2000)));
        }
    }
    doc
}

/// A small multilingual corpus: at most 200 documents of at most ~1KB each,
/// drawn from a Zipf-weighted lexicon so that words repeat.
pub fn small_corpus(seed: u64) -> Vec<String> {
    let mut r = rng(seed);
    let size = r.gen_range(15..60);
    let lex = lexicon(&mut r, size);
    let dist = zipf(lex.len(), r.gen_range(0.8..1.4));
    let docs = r.gen_range(10..=200);
    (0..docs)
        .map(|_| {
            let words = r.gen_range(1..80);
            let mut d = document(&mut r, &lex, &dist, words);
            if r.gen_bool(0.02) {
                d.push(' ');
                d.push_str(MIXED_SENTENCE);
            }
            d
        })
        .collect()
}

const FUZZ_POOLS: &[&[char]] = &[
    &['a', 'b', 'z', 'T', ' ', ' ', '.', ',', '\'', '1', '9'],
    &['\n', '\t', '\r', ' ', '\u{a0}', '\u{3000}'],
    &[
        '\u{0301}', '\u{0308}', '\u{0e34}', '\u{0e48}', '\u{200d}', '\u{fe0f}',
    ],
    &['德', '国', '电', '中', '\u{20000}', 'の', 'ア', 'ー'],
    &['ก', 'ข', 'น', 'ั', 'ิ', 'က', 'ျ', 'ក', 'ລ'],
    &['é', 'ß', 'ж', 'Ω', 'ا', 'ש', 'ह', '\u{093f}', '한'],
    &[
        '😀',
        '👍',
        '🏽',
        '\u{1f1fa}',
        '\u{10ffff}',
        '\u{0}',
        '\u{7f}',
        '\u{80}',
    ],
];

/// Random valid UTF-8 mixing scripts, combining marks, whitespace and emoji.
pub fn fuzz_string<R: Rng>(rng: &mut R) -> String {
    let len = rng.gen_range(0..40);
    let mut s = String::new();
    for _ in 0..len {
        let pool = FUZZ_POOLS.choose(rng).unwrap();
        s.push(*pool.choose(rng).unwrap());
        if rng.gen_bool(0.05) {
            s.push_str(LATIN.choose(rng).unwrap());
        }
    }
    s
}

/// `n` fuzz strings, the mixed-script sentence first.
pub fn fuzz_corpus(seed: u64, n: usize) -> Vec<String> {
    let mut r = rng(seed);
    let mut v = vec![
        MIXED_SENTENCE.to_string(),
        String::new(),
        "e\u{0301}中".to_string(),
    ];
    while v.len() < n {
        v.push(fuzz_string(&mut r));
    }
    v
}

/// Han and Thai heavy documents with some Latin in between.
pub fn han_thai_fixture(seed: u64, docs: usize) -> Vec<String> {
    let mut r = rng(seed);
    let mut lex: Vec<(String, bool)> = Vec::new();
    // a wide Han repertoire so that rare characters share lead bytes
    let han: Vec<char> = (0..3000)
        .map(|_| char::from_u32(r.gen_range(0x4E00..0x9FA0)).unwrap())
        .collect();
    let han_dist = zipf(han.len(), 0.9);
    for _ in 0..2000 {
        let w = if r.gen_bool(0.6) {
            (0..r.gen_range(1..=4))
                .map(|_| han[han_dist.sample(&mut r)])
                .collect()
        } else {
            thai_word(&mut r)
        };
        lex.push((w, false));
    }
    for _ in 0..30 {
        lex.push((latin_word(&mut r), true));
    }
    lex.shuffle(&mut r);
    let dist = zipf(lex.len(), 1.0);
    (0..docs)
        .map(|_| {
            let words = r.gen_range(5..120);
            document(&mut r, &lex, &dist, words)
        })
        .collect()
}

/// Syllable words, mostly Latin with some Cyrillic and Han, for scale runs.
fn large_lexicon<R: Rng>(rng: &mut R, n: usize) -> Vec<(String, bool)> {
    const SYL: &[&str] = &[
        "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "qi", "ro", "su",
        "ta", "ve", "wi", "xo", "yu", "za", "an", "er", "in", "on", "st", "th", "ch", "sh", "ng",
    ];
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = match rng.gen_range(0..10) {
            0 => (0..rng.gen_range(1..=4))
                .map(|_| *CYRILLIC.choose(rng).unwrap())
                .collect(),
            1 => (0..rng.gen_range(1..=4))
                .map(|_| *HAN.choose(rng).unwrap())
                .collect(),
            _ => (0..rng.gen_range(1..=5))
                .map(|_| *SYL.choose(rng).unwrap())
                .collect::<String>(),
        };
        if seen.insert(w.clone()) {
            let spaced = !HAN.iter().any(|h| w.starts_with(h));
            out.push((w, spaced));
        }
    }
    out
}

/// About `bytes` of Zipf-distributed synthetic text in ~2KB documents.
pub fn zipf_corpus(seed: u64, bytes: usize) -> Vec<String> {
    let mut r = rng(seed);
    let lex = large_lexicon(&mut r, 200_000);
    let dist = zipf(lex.len(), 1.05);
    let mut docs = Vec::new();
    let mut total = 0;
    while total < bytes {
        let d = document(&mut r, &lex, &dist, 300);
        total += d.len();
        docs.push(d);
    }
    docs
}

/// Random weighted sequences over a small alphabet.
pub fn random_sequences<R: Rng>(
    rng: &mut R,
    alphabet: u32,
    max_len: usize,
    n: usize,
) -> Vec<(Vec<u32>, u64)> {
    (0..n)
        .map(|_| {
            let len = rng.gen_range(0..=max_len);
            let seq = (0..len).map(|_| rng.gen_range(0..alphabet)).collect();
            (seq, rng.gen_range(1..=5))
        })
        .collect()
}

/// Every n-gram of length `2..=l` with total weight at least `c_min`.
pub fn brute_force_ngrams(seqs: &[(Vec<u32>, u64)], l: usize, c_min: u64) -> Vec<(Vec<u32>, u64)> {
    let mut all = std::collections::BTreeMap::<Vec<u32>, u64>::new();
    for (s, w) in seqs {
        for n in 2..=l.min(s.len()) {
            for g in s.windows(n) {
                *all.entry(g.to_vec()).or_insert(0) += w;
            }
        }
    }
    all.into_iter().filter(|(_, c)| *c >= c_min).collect()
}
