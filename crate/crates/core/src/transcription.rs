//! Parsers for the bundled plain-text transcriptions.
//!
//! All formats ignore blank lines and `#` comments. Labels must appear in
//! canonical order `W0..Z3`, each exactly once.

use serde::Serialize;

use crate::basis::{BasisLabel, IntMatrix};
use crate::error::{Error, Result};

pub const CORRECTION_MATRICES: &str = include_str!("../data/correction_matrices.txt");
pub const SWAP_TABLE: &str = include_str!("../data/swap_table.txt");
pub const TELEPORT_BRANCHES: &str = include_str!("../data/teleport_branches.txt");

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_label(line: usize, s: &str, expected: usize) -> Result<BasisLabel> {
    let label: BasisLabel = s
        .parse()
        .map_err(|_| Error::Parse { line, reason: format!("bad label {s:?}") })?;
    if label.flat() != expected {
        return Err(Error::Parse {
            line,
            reason: format!("label {label} out of canonical order, expected {}", BasisLabel::from_flat(expected)?),
        });
    }
    Ok(label)
}

fn parse_sign(line: usize, s: &str) -> Result<i8> {
    match s {
        "+" | "+1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(Error::Parse { line, reason: format!("bad sign {s:?}") }),
    }
}

/// Sixteen labeled blocks of four rows of four signed integers.
pub fn parse_correction_matrices(text: &str) -> Result<Vec<IntMatrix>> {
    let mut lines = content_lines(text);
    let mut out = Vec::with_capacity(16);
    while let Some((line, head)) = lines.next() {
        parse_label(line, head, out.len())?;
        let mut m = [0i64; 16];
        for r in 0..4 {
            let (line, row) = lines.next().ok_or(Error::Parse { line, reason: "truncated block".into() })?;
            let vals: Vec<i64> = row
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line, reason: e.to_string() })?;
            if vals.len() != 4 {
                return Err(Error::Parse { line, reason: format!("{} entries in row", vals.len()) });
            }
            m[r * 4..r * 4 + 4].copy_from_slice(&vals);
        }
        out.push(m);
    }
    if out.len() != 16 {
        return Err(Error::Parse { line: 0, reason: format!("{} blocks, expected 16", out.len()) });
    }
    Ok(out)
}

/// One line of a swap-table transcription: `outcome sign result`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SwapLine {
    pub outcome: BasisLabel,
    pub sign: i8,
    pub result: BasisLabel,
}

pub fn parse_swap_table(text: &str) -> Result<Vec<SwapLine>> {
    let out: Vec<SwapLine> = content_lines(text)
        .enumerate()
        .map(|(k, (line, l))| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [o, s, r] = parts.as_slice() else {
                return Err(Error::Parse { line, reason: "expected `outcome sign result`".into() });
            };
            let result = r
                .parse()
                .map_err(|_| Error::Parse { line, reason: format!("bad label {r:?}") })?;
            Ok(SwapLine { outcome: parse_label(line, o, k)?, sign: parse_sign(line, s)?, result })
        })
        .collect::<Result<_>>()?;
    if out.len() != 16 {
        return Err(Error::Parse { line: 0, reason: format!("{} entries, expected 16", out.len()) });
    }
    Ok(out)
}

/// Receiver maps as integer matrices `[c, a]`: coefficient of `|c⟩` (times
/// 4) when the input is `|a⟩`.
pub fn parse_teleport_branches(text: &str) -> Result<Vec<IntMatrix>> {
    let out: Vec<IntMatrix> = content_lines(text)
        .enumerate()
        .map(|(k, (line, l))| {
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(Error::Parse { line, reason: "expected label and four terms".into() });
            }
            parse_label(line, parts[0], k)?;
            let mut m = [0i64; 16];
            for (c, term) in parts[1..].iter().enumerate() {
                let (sign, name) = term.split_at(1);
                let sign = i64::from(parse_sign(line, sign)?);
                let a = match name {
                    "alpha" => 0,
                    "beta" => 1,
                    "gamma" => 2,
                    "delta" => 3,
                    _ => return Err(Error::Parse { line, reason: format!("bad symbol {name:?}") }),
                };
                m[c * 4 + a] = sign;
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    if out.len() != 16 {
        return Err(Error::Parse { line: 0, reason: format!("{} entries, expected 16", out.len()) });
    }
    Ok(out)
}
