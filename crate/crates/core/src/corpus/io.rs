//! Text formats for vocabularies and sparse vectors.
//!
//! Vocabulary: one term per line, the line number (from 0) is the index.
//! Vectors: one sentence per line, `sentence_id<TAB>index:count,index:count`,
//! ids counting up from 0. An empty sentence keeps its line with nothing
//! after the tab.

use std::fmt::Write as _;

use super::{SentenceVector, Vocabulary};
use crate::error::{Error, Result};

pub fn format_vocabulary(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    for t in vocab.terms() {
        out.push_str(t);
        out.push('\n');
    }
    out
}

pub fn parse_vocabulary(text: &str) -> Result<Vocabulary> {
    Vocabulary::from_terms(text.lines().map(str::trim_end).filter(|l| !l.is_empty()))
}

pub fn format_vectors(vectors: &[SentenceVector]) -> String {
    let mut out = String::new();
    for (id, v) in vectors.iter().enumerate() {
        write!(out, "{id}\t").unwrap();
        for (k, (i, c)) in v.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{i}:{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the sparse vector format. When `dim` is given every index must be
/// below it.
pub fn parse_vectors(text: &str, dim: Option<usize>) -> Result<Vec<SentenceVector>> {
    let bad = |line: usize, msg: String| {
        Error::format("vector file", format!("line {}: {msg}", line + 1))
    };
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| bad(ln, "missing tab separator".into()))?;
        let id: usize = id
            .parse()
            .map_err(|_| bad(ln, format!("bad sentence id {id:?}")))?;
        if id != out.len() {
            return Err(bad(
                ln,
                format!("expected sentence id {}, found {id}", out.len()),
            ));
        }
        let mut pairs = Vec::new();
        for item in body.split(',').filter(|s| !s.is_empty()) {
            let (i, c) = item
                .split_once(':')
                .ok_or_else(|| bad(ln, format!("bad entry {item:?}")))?;
            let i: u32 = i.parse().map_err(|_| bad(ln, format!("bad index {i:?}")))?;
            let c: u32 = c.parse().map_err(|_| bad(ln, format!("bad count {c:?}")))?;
            if let Some(n) = dim {
                if i as usize >= n {
                    return Err(bad(ln, format!("index {i} out of range for dimension {n}")));
                }
            }
            pairs.push((i, c));
        }
        out.push(SentenceVector::from_pairs(pairs).map_err(|e| bad(ln, e.to_string()))?);
    }
    Ok(out)
}
