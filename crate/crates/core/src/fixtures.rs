//! Printed automaton tables and annihilating polynomials, embedded at build
//! time. Keys look like `q8_0.s1` (tower key, element name).

use std::path::Path;

use crate::dfao::{parse_tsv, Dfao};
use crate::error::{Error, Result};
use crate::gf2m::FieldCtx;
use crate::poly::BivarPoly;

/// `(file name, contents, expected state count)`.
pub const TABLES: [(&str, &str, usize); 8] = [
    ("q8_0_s1_s2.tsv", include_str!("../fixtures/q8_0_s1_s2.tsv"), 8),
    ("q8_0_order4.tsv", include_str!("../fixtures/q8_0_order4.tsv"), 16),
    ("q8_0_s1sq.tsv", include_str!("../fixtures/q8_0_s1sq.tsv"), 5),
    ("q8_s_s1cube.tsv", include_str!("../fixtures/q8_s_s1cube.tsv"), 36),
    ("q8_s_s0cube.tsv", include_str!("../fixtures/q8_s_s0cube.tsv"), 95),
    ("d4_1_t1_t2.tsv", include_str!("../fixtures/d4_1_t1_t2.tsv"), 104),
    ("d4_s_t1_d4_s2_t2.tsv", include_str!("../fixtures/d4_s_t1_d4_s2_t2.tsv"), 104),
    ("d4_s_t2_d4_s2_t1.tsv", include_str!("../fixtures/d4_s_t2_d4_s2_t1.tsv"), 104),
];

pub const POLYNOMIALS: &str = include_str!("../fixtures/polynomials.txt");

#[derive(Debug, Clone)]
pub struct FixtureAutomaton {
    pub key: String,
    pub file: String,
    pub automaton: Dfao,
}

impl FixtureAutomaton {
    pub fn tower_key(&self) -> &str {
        self.key.split_once('.').map_or(&self.key, |(t, _)| t)
    }

    pub fn element(&self) -> &str {
        self.key.split_once('.').map_or("", |(_, e)| e)
    }
}

fn expand(file: &str, text: &str) -> Result<Vec<FixtureAutomaton>> {
    let parsed = parse_tsv(text).map_err(|e| Error::MalformedTable(format!("{file}: {e}")))?;
    Ok(parsed.into_iter().map(|(key, automaton)| FixtureAutomaton { key, file: file.to_string(), automaton }).collect())
}

/// Every label column of every embedded table.
pub fn automata() -> Result<Vec<FixtureAutomaton>> {
    let mut out = Vec::new();
    for (file, text, _) in TABLES {
        out.extend(expand(file, text)?);
    }
    Ok(out)
}

/// The same tables read from `dir`, e.g. a working copy under edit.
pub fn automata_from_dir(dir: &Path) -> Result<Vec<FixtureAutomaton>> {
    let mut out = Vec::new();
    for (file, _, _) in TABLES {
        let text =
            std::fs::read_to_string(dir.join(file)).map_err(|e| Error::MalformedTable(format!("{file}: {e}")))?;
        out.extend(expand(file, &text)?);
    }
    Ok(out)
}

pub fn automaton(key: &str) -> Result<FixtureAutomaton> {
    automata()?
        .into_iter()
        .find(|a| a.key == key)
        .ok_or_else(|| Error::MalformedTable(format!("no fixture automaton `{key}`")))
}

/// Parse `key: polynomial` lines; `#` starts a comment.
pub fn parse_polynomials(ctx: &FieldCtx, text: &str) -> Result<Vec<(String, BivarPoly)>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, p) = l.split_once(':').ok_or_else(|| Error::PolyParse(format!("missing `:` in `{l}`")))?;
            Ok((k.trim().to_string(), BivarPoly::parse(ctx, p)?))
        })
        .collect()
}

pub fn polynomials() -> Result<Vec<(String, BivarPoly)>> {
    parse_polynomials(&FieldCtx::gf4(), POLYNOMIALS)
}

pub fn polynomials_from_dir(dir: &Path) -> Result<Vec<(String, BivarPoly)>> {
    let text = std::fs::read_to_string(dir.join("polynomials.txt"))
        .map_err(|e| Error::PolyParse(format!("polynomials.txt: {e}")))?;
    parse_polynomials(&FieldCtx::gf4(), &text)
}

pub fn polynomial(key: &str) -> Result<BivarPoly> {
    polynomials()?
        .into_iter()
        .find(|(k, _)| k == key)
        .map(|(_, p)| p)
        .ok_or_else(|| Error::PolyParse(format!("no printed polynomial `{key}`")))
}
