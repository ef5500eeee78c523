//! Line-oriented presentation files.
//!
//! ```text
//! algebra <name>
//! N <integer>
//! scale <level> <scalar>          # sigma^2 of the level
//! swap <gen> <gen> <scalar>       # a b -> c * b a
//! commutator <level> <poly>       # x_i x_i* -> x_i* x_i + poly
//! radius <scalar>                 # fixed value of r^2
//! ```
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Alphabet, PresentationError, PresentationParts, SpherePresentation};
use crate::expr::{parse_poly, parse_scalar, ParseError};
use crate::ncalgebra::Generator;

/// Presentation file for `S^3_q` at unit normalization, shipped with the crate.
pub const S3Q_PRESENTATION: &str = include_str!("../../presentations/s3q.pres");

struct Line<'a> {
    number: usize,
    /// (0-based char column, token text)
    tokens: Vec<(usize, &'a str)>,
    text: &'a str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> PresentationError {
    PresentationError::Syntax { line, column, message: message.into() }
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (col, (byte, c)) in body.char_indices().enumerate() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some((col, byte)),
                (true, Some((sc, sb))) => {
                    tokens.push((sc, &body[sb..byte]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some((sc, sb)) = start {
            tokens.push((sc, &body[sb..]));
        }
        if !tokens.is_empty() {
            out.push(Line { number: i + 1, tokens, text: body });
        }
    }
    out
}

/// Remainder of the line from token `k` on, with its starting column.
fn rest<'a>(line: &Line<'a>, k: usize) -> Option<(usize, &'a str)> {
    let (col, _) = *line.tokens.get(k)?;
    let byte = line.text.char_indices().nth(col).map(|(b, _)| b)?;
    Some((col, line.text[byte..].trim_end()))
}

fn expr_error(line: usize, start: usize, e: ParseError) -> PresentationError {
    syntax(line, start + e.position + 1, e.message())
}

fn parse_level(line: &Line<'_>, k: usize) -> Result<usize, PresentationError> {
    let Some(&(col, tok)) = line.tokens.get(k) else {
        let end = line.text.chars().count();
        return Err(syntax(line.number, end + 1, "expected a level"));
    };
    tok.parse().map_err(|_| syntax(line.number, col + 1, format!("expected a level, found `{tok}`")))
}

fn parse_generator(line: &Line<'_>, k: usize, alphabet: &Alphabet) -> Result<Generator, PresentationError> {
    let Some(&(col, tok)) = line.tokens.get(k) else {
        let end = line.text.chars().count();
        return Err(syntax(line.number, end + 1, "expected a generator"));
    };
    let bad = || syntax(line.number, col + 1, format!("expected a generator, found `{tok}`"));
    let body = tok.strip_prefix('x').ok_or_else(bad)?;
    let (digits, starred) = match body.strip_suffix('*') {
        Some(d) => (d, true),
        None => (body, false),
    };
    let level: usize = digits.parse().map_err(|_| bad())?;
    if level > 255 || (level == 0 && starred) {
        return Err(bad());
    }
    let g = Generator::new(level, starred);
    if !alphabet.contains(g) {
        return Err(syntax(line.number, col + 1, format!("unknown generator `{tok}`")));
    }
    Ok(g)
}

fn required_rest<'a>(line: &Line<'a>, k: usize, what: &str) -> Result<(usize, &'a str), PresentationError> {
    rest(line, k).ok_or_else(|| syntax(line.number, line.text.chars().count() + 1, format!("expected {what}")))
}

pub fn parse_presentation(text: &str) -> Result<SpherePresentation, PresentationError> {
    let lines = tokenize(text);
    if lines.is_empty() {
        return Err(syntax(1, 1, "empty presentation"));
    }

    // N fixes the generator set, so find it first
    let mut dim = None;
    for line in &lines {
        if line.tokens[0].1 == "N" {
            if dim.is_some() {
                return Err(syntax(line.number, 1, "duplicate `N` line"));
            }
            let Some(&(col, tok)) = line.tokens.get(1) else {
                return Err(syntax(line.number, 2, "expected an integer"));
            };
            let n: usize = tok.parse().map_err(|_| syntax(line.number, col + 1, format!("expected an integer, found `{tok}`")))?;
            if line.tokens.len() > 2 {
                return Err(syntax(line.number, line.tokens[2].0 + 1, "unexpected trailing input"));
            }
            if n < 3 {
                return Err(PresentationError::Domain(n));
            }
            dim = Some(n);
        }
    }
    let dim = dim.ok_or_else(|| syntax(lines[0].number, 1, "missing `N` line"))?;
    let alphabet = Alphabet::for_dim(dim);

    let mut name = None;
    let mut scale_sq = BTreeMap::new();
    let mut swaps = BTreeMap::new();
    let mut commutators = BTreeMap::new();
    let mut radius_sq = None;

    for line in &lines {
        let (col0, keyword) = line.tokens[0];
        let no = line.number;
        match keyword {
            "N" => {}
            "algebra" => {
                let (_, n) = required_rest(line, 1, "a name")?;
                if name.replace(n.to_string()).is_some() {
                    return Err(syntax(no, col0 + 1, "duplicate `algebra` line"));
                }
            }
            "scale" => {
                let level = parse_level(line, 1)?;
                if !alphabet.levels().any(|l| l == level) {
                    return Err(syntax(no, line.tokens[1].0 + 1, format!("no level {level} for N = {dim}")));
                }
                let (start, body) = required_rest(line, 2, "a scalar")?;
                let v = parse_scalar(body).map_err(|e| expr_error(no, start, e))?;
                if scale_sq.insert(level, v).is_some() {
                    return Err(syntax(no, col0 + 1, format!("duplicate scale for level {level}")));
                }
            }
            "swap" => {
                let a = parse_generator(line, 1, &alphabet)?;
                let b = parse_generator(line, 2, &alphabet)?;
                let (start, body) = required_rest(line, 3, "a scalar")?;
                let c = parse_scalar(body).map_err(|e| expr_error(no, start, e))?;
                if swaps.insert((a, b), c).is_some() {
                    return Err(syntax(no, col0 + 1, format!("duplicate swap rule for {a} {b}")));
                }
            }
            "commutator" => {
                let level = parse_level(line, 1)?;
                if level == 0 || level > alphabet.rank {
                    return Err(syntax(no, line.tokens[1].0 + 1, format!("no commutator level {level} for N = {dim}")));
                }
                let (start, body) = required_rest(line, 2, "a polynomial")?;
                let p = parse_poly(body, &alphabet).map_err(|e| expr_error(no, start, e))?;
                if commutators.insert(level, p).is_some() {
                    return Err(syntax(no, col0 + 1, format!("duplicate commutator for level {level}")));
                }
            }
            "radius" => {
                let (start, body) = required_rest(line, 1, "a scalar")?;
                let v = parse_scalar(body).map_err(|e| expr_error(no, start, e))?;
                if radius_sq.replace(v).is_some() {
                    return Err(syntax(no, col0 + 1, "duplicate `radius` line"));
                }
            }
            other => return Err(syntax(no, col0 + 1, format!("unknown directive `{other}`"))),
        }
    }

    let radius_sq = radius_sq.ok_or_else(|| PresentationError::Semantic {
        rule: "radius".into(),
        message: "missing `radius` line".into(),
    })?;
    let parts = PresentationParts {
        name: name.unwrap_or_else(|| format!("S{}_q", dim - 1)),
        dim,
        scale_sq,
        swaps,
        commutators,
        radius_sq,
    };
    SpherePresentation::from_parts(alphabet, parts)
}

pub(super) fn write_presentation(p: &SpherePresentation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "algebra {}", p.name());
    let _ = writeln!(out, "N {}", p.dim());
    for (level, v) in p.scales() {
        let _ = writeln!(out, "scale {level} {v}");
    }
    for ((a, b), c) in p.swap_coefficients() {
        let _ = writeln!(out, "swap {a} {b} {c}");
    }
    for level in 1..=p.rank() {
        let _ = writeln!(out, "commutator {level} {}", p.commutator(level).expect("every level has a commutator"));
    }
    let _ = writeln!(out, "radius {}", p.radius_sq());
    out
}
