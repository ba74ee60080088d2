//! Unicode script classification and single-script chunking of documents.
//!
//! Every code point maps to exactly one [`Script`]; code points the data file
//! leaves unassigned (`Unknown`) are treated as [`Script::Common`]. A document
//! is split into maximal chunks whose script-specific code points all share a
//! script. Runs of `Common` code points attach to the chunk that follows them
//! (a trailing run attaches to the chunk before it), and `Inherited` code
//! points stay with whatever scalar precedes them.

use std::fmt;
use std::str::FromStr;

include!(concat!(env!("OUT_DIR"), "/script_table.rs"));

impl Script {
    /// `Common` and `Inherited` do not start a chunk of their own.
    pub fn is_script_specific(self) -> bool {
        !matches!(self, Script::Common | Script::Inherited)
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Returned when a script name is not in the table.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown script name {0:?}")]
pub struct UnknownScript(pub String);

impl FromStr for Script {
    type Err = UnknownScript;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "Unknown" {
            return Ok(Script::Common);
        }
        ALL_SCRIPTS
            .iter()
            .copied()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| UnknownScript(s.to_string()))
    }
}

/// Script of a single code point.
pub fn classify(c: char) -> Script {
    let cp = c as u32;
    match SCRIPT_RANGES.binary_search_by(|&(lo, hi, _)| {
        if hi < cp {
            std::cmp::Ordering::Less
        } else if lo > cp {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    }) {
        Ok(i) => SCRIPT_RANGES[i].2,
        Err(_) => Script::Common,
    }
}

/// A maximal single-script slice of a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptChunk<'a> {
    pub script: Script,
    /// Byte offset of `text` in the source document.
    pub start: usize,
    pub text: &'a str,
}

/// Splits `document` into script chunks. Linear in the number of code points.
pub fn split_scripts(document: &str) -> Vec<ScriptChunk<'_>> {
    split_scripts_with(document, classify)
}

/// [`split_scripts`] with a caller-supplied classifier, called exactly once per
/// code point.
pub fn split_scripts_with<F>(document: &str, mut classify: F) -> Vec<ScriptChunk<'_>>
where
    F: FnMut(char) -> Script,
{
    let mut chunks = Vec::new();
    // open chunk: (script, start byte)
    let mut open: Option<(Script, usize)> = None;
    // start of the pending Common/Inherited run not yet assigned to a chunk
    let mut pending: Option<usize> = None;

    for (pos, c) in document.char_indices() {
        match classify(c) {
            Script::Common => {
                pending.get_or_insert(pos);
            }
            // glues to the preceding scalar, which is either in the open chunk
            // or in the pending run
            Script::Inherited => {
                if open.is_none() {
                    pending.get_or_insert(pos);
                }
            }
            script => {
                match open {
                    Some((cur, _)) if cur == script => {}
                    Some((cur, start)) => {
                        let begin = pending.unwrap_or(pos);
                        chunks.push(ScriptChunk {
                            script: cur,
                            start,
                            text: &document[start..begin],
                        });
                        open = Some((script, begin));
                    }
                    None => open = Some((script, pending.unwrap_or(pos))),
                }
                pending = None;
            }
        }
    }

    match open {
        Some((script, start)) => chunks.push(ScriptChunk {
            script,
            start,
            text: &document[start..],
        }),
        None if !document.is_empty() => chunks.push(ScriptChunk {
            script: Script::Common,
            start: 0,
            text: document,
        }),
        None => {}
    }
    chunks
}
