//! Generates the script lookup table from `data/Scripts.txt` (UCD format).

use std::collections::BTreeSet;
use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

fn main() {
    let src = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap()).join("data/Scripts.txt");
    println!("cargo:rerun-if-changed={}", src.display());
    let text = fs::read_to_string(&src).expect("read data/Scripts.txt");

    let mut version = String::from("unknown");
    let mut ranges: Vec<(u32, u32, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        if let Some(rest) = raw.strip_prefix("# Scripts-") {
            version = rest.trim_end_matches(".txt").to_string();
        }
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (cps, name) = line
            .split_once(';')
            .unwrap_or_else(|| panic!("Scripts.txt:{}: missing ';'", lineno + 1));
        let cps = cps.trim();
        let name = name.trim().to_string();
        let (lo, hi) = match cps.split_once("..") {
            Some((a, b)) => (parse_hex(a, lineno), parse_hex(b, lineno)),
            None => {
                let v = parse_hex(cps, lineno);
                (v, v)
            }
        };
        assert!(lo <= hi, "Scripts.txt:{}: inverted range", lineno + 1);
        ranges.push((lo, hi, name));
    }
    ranges.sort_by_key(|r| r.0);
    // adjacent entries with the same script are coalesced; overlaps are a data error
    let mut merged: Vec<(u32, u32, String)> = Vec::with_capacity(ranges.len());
    for (lo, hi, name) in ranges {
        if let Some(last) = merged.last_mut() {
            assert!(lo > last.1, "overlapping ranges at U+{lo:04X}");
            if last.1 + 1 == lo && last.2 == name {
                last.1 = hi;
                continue;
            }
        }
        merged.push((lo, hi, name));
    }

    let mut names: BTreeSet<String> = merged.iter().map(|r| r.2.clone()).collect();
    names.insert("Common".into());
    names.insert("Inherited".into());
    let names: Vec<String> = names.into_iter().collect();

    let mut out = String::new();
    writeln!(out, "/// Unicode version of the embedded script table.").unwrap();
    writeln!(out, "pub const UNICODE_VERSION: &str = {version:?};").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "/// Unicode `Script` property value. `Unknown` is folded into `Common`."
    )
    .unwrap();
    writeln!(
        out,
        "#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]"
    )
    .unwrap();
    writeln!(out, "#[allow(missing_docs)]").unwrap();
    writeln!(out, "pub enum Script {{").unwrap();
    for n in &names {
        writeln!(out, "    {},", ident(n)).unwrap();
    }
    writeln!(out, "}}").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "/// Every script, in name order.").unwrap();
    writeln!(out, "pub const ALL_SCRIPTS: [Script; {}] = [", names.len()).unwrap();
    for n in &names {
        writeln!(out, "    Script::{},", ident(n)).unwrap();
    }
    writeln!(out, "];").unwrap();
    writeln!(out).unwrap();
    writeln!(out, "impl Script {{").unwrap();
    writeln!(out, "    /// UCD long name, e.g. `Han` or `Old_Italic`.").unwrap();
    writeln!(out, "    pub const fn name(self) -> &'static str {{").unwrap();
    writeln!(out, "        match self {{").unwrap();
    for n in &names {
        writeln!(out, "            Script::{} => {:?},", ident(n), n).unwrap();
    }
    writeln!(out, "        }}").unwrap();
    writeln!(out, "    }}").unwrap();
    writeln!(out, "}}").unwrap();
    writeln!(out).unwrap();
    writeln!(
        out,
        "static SCRIPT_RANGES: [(u32, u32, Script); {}] = [",
        merged.len()
    )
    .unwrap();
    for (lo, hi, n) in &merged {
        writeln!(out, "    (0x{lo:04X}, 0x{hi:04X}, Script::{}),", ident(n)).unwrap();
    }
    writeln!(out, "];").unwrap();

    let dest = PathBuf::from(env::var("OUT_DIR").unwrap()).join("script_table.rs");
    fs::write(dest, out).expect("write script_table.rs");
}

fn parse_hex(s: &str, lineno: usize) -> u32 {
    u32::from_str_radix(s.trim(), 16)
        .unwrap_or_else(|_| panic!("Scripts.txt:{}: bad code point {s:?}", lineno + 1))
}

fn ident(name: &str) -> String {
    name.replace('_', "")
}
