//! Regex pre-tokenization of script chunks and supermerge eligibility.

use fancy_regex::Regex;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::unicode_scripts::{split_scripts, Script, ScriptChunk, UnknownScript};

/// The GPT-4o (`o200k_base`) pre-tokenization pattern.
pub const GPT4O_REGEX: &str = concat!(
    r"[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]*[\p{Ll}\p{Lm}\p{Lo}\p{M}]+(?i:'s|'t|'re|'ve|'m|'ll|'d)?",
    "|",
    r"[^\r\n\p{L}\p{N}]?[\p{Lu}\p{Lt}\p{Lm}\p{Lo}\p{M}]+[\p{Ll}\p{Lm}\p{Lo}\p{M}]*(?i:'s|'t|'re|'ve|'m|'ll|'d)?",
    "|",
    r"\p{N}{1,3}",
    "|",
    r" ?[^\s\p{L}\p{N}]+[\r\n/]*",
    "|",
    r"\s*[\r\n]+",
    "|",
    r"\s+(?!\S)",
    "|",
    r"\s+",
);

/// GPT-4o pattern with the two word branches replaced by a single-letter
/// branch: one letter, optional leading space, trailing combining marks.
pub const SCRIPT_SPECIFIC_GPT4O_REGEX: &str = concat!(
    r" ?\p{L}\p{M}*",
    "|",
    r"\p{N}{1,3}",
    "|",
    r" ?[^\s\p{L}\p{N}]+[\r\n/]*",
    "|",
    r"\s*[\r\n]+",
    "|",
    r"\s+(?!\S)",
    "|",
    r"\s+",
);

/// A pretoken is supermerge-eligible only if this pattern matches somewhere in it.
pub const MERGE_PATTERN: &str = r"\p{L}";

/// Non-space-delimited scripts that get character-level pre-tokenization.
pub const DEFAULT_SCRIPT_SPECIFIC_SCRIPTS: [&str; 7] = [
    "Han", "Hiragana", "Katakana", "Thai", "Myanmar", "Khmer", "Lao",
];

/// Pre-tokenization settings. Stored verbatim in model files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PretokenizerConfig {
    pub default_pattern: String,
    pub script_specific_pattern: String,
    pub script_specific_scripts: Vec<String>,
    pub merge_pattern: String,
    /// When false, supermerge candidate runs are cut at script-chunk boundaries.
    #[serde(default = "default_true")]
    pub cross_script_supermerges: bool,
}

fn default_true() -> bool {
    true
}

impl Default for PretokenizerConfig {
    fn default() -> Self {
        Self {
            default_pattern: GPT4O_REGEX.to_string(),
            script_specific_pattern: SCRIPT_SPECIFIC_GPT4O_REGEX.to_string(),
            script_specific_scripts: DEFAULT_SCRIPT_SPECIFIC_SCRIPTS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            merge_pattern: MERGE_PATTERN.to_string(),
            cross_script_supermerges: true,
        }
    }
}

impl PretokenizerConfig {
    /// Same config with a different script-specific script list.
    pub fn with_scripts<I, S>(mut self, scripts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.script_specific_scripts = scripts.into_iter().map(Into::into).collect();
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PretokenizerError {
    #[error("invalid {which} pattern: {source}")]
    Pattern {
        which: &'static str,
        #[source]
        source: Box<fancy_regex::Error>,
    },
    #[error(transparent)]
    Script(#[from] UnknownScript),
}

/// One pretoken of a document, tagged with the chunk it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pretoken<'a> {
    pub text: &'a str,
    pub script: Script,
    /// Index of the source chunk within the document.
    pub chunk: usize,
}

/// Compiled [`PretokenizerConfig`].
#[derive(Debug, Clone)]
pub struct Pretokenizer {
    config: PretokenizerConfig,
    default_re: Regex,
    specific_re: Regex,
    merge_re: Regex,
    scripts: FxHashSet<Script>,
}

fn compile(which: &'static str, pattern: &str) -> Result<Regex, PretokenizerError> {
    Regex::new(pattern).map_err(|e| PretokenizerError::Pattern {
        which,
        source: Box::new(e),
    })
}

impl Pretokenizer {
    pub fn new(config: PretokenizerConfig) -> Result<Self, PretokenizerError> {
        let default_re = compile("default", &config.default_pattern)?;
        let specific_re = compile("script-specific", &config.script_specific_pattern)?;
        let merge_re = compile("merge", &config.merge_pattern)?;
        let scripts = config
            .script_specific_scripts
            .iter()
            .map(|s| s.parse::<Script>())
            .collect::<Result<_, _>>()?;
        Ok(Self {
            config,
            default_re,
            specific_re,
            merge_re,
            scripts,
        })
    }

    pub fn config(&self) -> &PretokenizerConfig {
        &self.config
    }

    pub fn is_script_specific(&self, script: Script) -> bool {
        self.scripts.contains(&script)
    }

    /// Splits one chunk into pretokens that tile it exactly.
    pub fn pretokenize<'a>(&self, chunk: &ScriptChunk<'a>) -> Vec<&'a str> {
        let mut out = Vec::new();
        self.pretokenize_into(chunk, |p| out.push(p));
        out
    }

    fn pretokenize_into<'a>(&self, chunk: &ScriptChunk<'a>, mut emit: impl FnMut(&'a str)) {
        let re = if self.is_script_specific(chunk.script) {
            &self.specific_re
        } else {
            &self.default_re
        };
        let text = chunk.text;
        let mut covered = 0;
        for m in re.find_iter(text) {
            let m = match m {
                Ok(m) => m,
                Err(e) => {
                    log::warn!("pretokenizer regex failed at byte {covered}: {e}");
                    break;
                }
            };
            if m.start() > covered {
                emit(&text[covered..m.start()]);
            }
            if m.end() > m.start() {
                emit(m.as_str());
            }
            covered = m.end();
        }
        // unmatched text is kept as its own pretoken so the chunk stays tiled
        if covered < text.len() {
            emit(&text[covered..]);
        }
    }

    /// Script-splits and pretokenizes a whole document, in order.
    pub fn pretokenize_document<'a>(&self, document: &'a str) -> Vec<Pretoken<'a>> {
        let mut out = Vec::new();
        self.for_each_pretoken(document, |p| out.push(p));
        out
    }

    /// Streaming form of [`Self::pretokenize_document`].
    pub fn for_each_pretoken<'a>(&self, document: &'a str, mut f: impl FnMut(Pretoken<'a>)) {
        for (i, chunk) in split_scripts(document).iter().enumerate() {
            self.pretokenize_into(chunk, |text| {
                f(Pretoken {
                    text,
                    script: chunk.script,
                    chunk: i,
                })
            });
        }
    }

    /// Search (not full match) for the merge pattern.
    pub fn matches_merge_pattern(&self, pretoken: &str) -> bool {
        self.merge_re.is_match(pretoken).unwrap_or(false)
    }

    /// A pretoken can take part in a supermerge iff it matches the merge
    /// pattern and is a single token, i.e. its bytes are in `vocabulary`.
    pub fn is_merge_eligible<V: Vocabulary + ?Sized>(
        &self,
        pretoken: &str,
        vocabulary: &V,
    ) -> bool {
        self.eligible_token(pretoken, vocabulary).is_some()
    }

    /// Token id of an eligible pretoken. Training and inference both decide
    /// eligibility through this function.
    pub fn eligible_token<V: Vocabulary + ?Sized>(
        &self,
        pretoken: &str,
        vocabulary: &V,
    ) -> Option<crate::TokenId> {
        let id = vocabulary.single_token(pretoken.as_bytes())?;
        self.matches_merge_pattern(pretoken).then_some(id)
    }
}

/// Membership test for the single-token check.
pub trait Vocabulary {
    fn single_token(&self, bytes: &[u8]) -> Option<crate::TokenId>;
}

impl Vocabulary for rustc_hash::FxHashMap<Vec<u8>, crate::TokenId> {
    fn single_token(&self, bytes: &[u8]) -> Option<crate::TokenId> {
        self.get(bytes).copied()
    }
}

impl Vocabulary for std::collections::HashMap<Vec<u8>, crate::TokenId> {
    fn single_token(&self, bytes: &[u8]) -> Option<crate::TokenId> {
        self.get(bytes).copied()
    }
}
