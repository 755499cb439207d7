//! Parser for the line-oriented input grammar.
//!
//! ```text
//! # comment
//! symbol theta
//! rep pi {
//!   atom 1/5 mult 2
//!   atom sym:theta mult 1 ; atom -1 mult inf
//!   wm left_regular mult 1 flags mixing mildly_mixing
//! }
//! ```
//!
//! Angle literals are numbers of turns: `p/q` (reduced rationals in
//! `[0,1)`), `sym:name`, and sums such as `1/3+2*sym:theta`. The bare
//! integers `1` and `-1` are shorthands for the eigenvalues `+1` (angle 0)
//! and `−1` (half turn). Statements are separated by newlines or `;`.

use crate::circle::{CirclePoint, SymbolTable};
use crate::extent::Extent;
use crate::rep::{RepError, Representation, WmKind, WmPart};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        msg: msg.into(),
    })
}

/// A parsed input file: the ambient symbol table plus named representations
/// in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecFile {
    pub symbols: SymbolTable,
    pub reps: Vec<Representation>,
}

impl SpecFile {
    pub fn get(&self, name: &str) -> Option<&Representation> {
        self.reps.iter().find(|r| r.name() == name)
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses an angle literal into a circle point.
pub fn parse_angle(text: &str, table: &SymbolTable, line: usize) -> Result<CirclePoint, ParseError> {
    let text = text.trim();
    if text == "1" {
        return Ok(CirclePoint::identity());
    }
    if text == "-1" {
        return Ok(CirclePoint::half());
    }
    let mut torsion = BigRational::zero();
    let mut symbolic: BTreeMap<String, BigInt> = BTreeMap::new();
    // Split into signed terms.
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut current = String::new();
    let mut negative = false;
    for (i, ch) in text.chars().enumerate() {
        match ch {
            '+' | '-' if i > 0 => {
                terms.push((negative, std::mem::take(&mut current)));
                negative = ch == '-';
            }
            '-' => negative = true,
            _ => current.push(ch),
        }
    }
    terms.push((negative, current));
    for (neg, term) in terms {
        let term = term.trim();
        if term.is_empty() {
            return err(line, format!("malformed angle `{text}`"));
        }
        if let Some(name) = term.strip_prefix("sym:") {
            if !table.contains(name) {
                return err(line, format!("undeclared symbol `{name}`"));
            }
            let c = symbolic.entry(name.to_string()).or_insert_with(BigInt::zero);
            *c += if neg { -BigInt::one() } else { BigInt::one() };
        } else if let Some((coef, name)) = term.split_once("*sym:") {
            let k = BigInt::from_str(coef.trim())
                .map_err(|_| ParseError {
                    line,
                    msg: format!("bad symbol coefficient `{coef}`"),
                })?;
            if !table.contains(name) {
                return err(line, format!("undeclared symbol `{name}`"));
            }
            let c = symbolic.entry(name.to_string()).or_insert_with(BigInt::zero);
            *c += if neg { -k } else { k };
        } else if let Some((p, q)) = term.split_once('/') {
            let p = BigInt::from_str(p.trim())
                .map_err(|_| ParseError { line, msg: format!("bad rational `{term}`") })?;
            let q = BigInt::from_str(q.trim())
                .map_err(|_| ParseError { line, msg: format!("bad rational `{term}`") })?;
            if q.is_zero() {
                return err(line, "zero denominator in angle");
            }
            let r = BigRational::new(p, q);
            if neg || r.is_negative() || r >= BigRational::one() {
                return err(line, format!("angle `{term}` must lie in [0,1) turns"));
            }
            torsion += r;
        } else if let Ok(n) = BigInt::from_str(term) {
            if n.is_zero() && !neg {
                continue;
            }
            return err(
                line,
                format!("bare integer `{term}` is not an angle (only 1 and -1 are shorthands)"),
            );
        } else {
            return err(line, format!("malformed angle term `{term}`"));
        }
    }
    if torsion >= BigRational::one() {
        return err(line, format!("angle `{text}` must lie in [0,1) turns"));
    }
    Ok(CirclePoint::from_parts(torsion, symbolic))
}

fn parse_mult(tok: &str, line: usize) -> Result<Extent, ParseError> {
    if tok == "inf" {
        return Ok(Extent::Infinite);
    }
    match tok.parse::<u128>() {
        Ok(n) if n >= 1 => Ok(Extent::Finite(n)),
        _ => err(line, format!("invalid multiplicity `{tok}` (positive integer or `inf`)")),
    }
}

enum BodyItem {
    Atom(CirclePoint, Extent),
    Wm(WmPart),
}

fn parse_body_stmt(stmt: &str, table: &SymbolTable, line: usize) -> Result<BodyItem, ParseError> {
    let toks: Vec<&str> = stmt.split_whitespace().collect();
    match toks.first() {
        Some(&"atom") => {
            if toks.len() != 4 || toks[2] != "mult" {
                return err(line, "expected `atom ANGLE mult N`");
            }
            let angle = parse_angle(toks[1], table, line)?;
            let mult = parse_mult(toks[3], line)?;
            Ok(BodyItem::Atom(angle, mult))
        }
        Some(&"wm") => {
            if toks.len() < 2 {
                return err(line, "expected `wm KIND [mult N] [flags ...]`");
            }
            let mut idx = 2;
            let mut mult = None;
            if toks.len() >= idx + 2 && toks[idx] == "mult" {
                mult = Some(parse_mult(toks[idx + 1], line)?);
                idx += 2;
            }
            let kind = match toks[1] {
                "left_regular" => WmKind::LeftRegular(mult.unwrap_or(Extent::Finite(1))),
                "singular_closed" => {
                    if mult.is_some() {
                        return err(line, "multiplicity is only meaningful for left_regular");
                    }
                    WmKind::SingularClosed
                }
                "atomless" => {
                    if mult.is_some() {
                        return err(line, "multiplicity is only meaningful for left_regular");
                    }
                    WmKind::AtomlessGeneric
                }
                other => return err(line, format!("unknown weakly mixing kind `{other}`")),
            };
            let (mut mixing, mut mildly, mut rigid) = (false, false, false);
            if idx < toks.len() {
                if toks[idx] != "flags" {
                    return err(line, format!("unexpected token `{}`", toks[idx]));
                }
                for &f in &toks[idx + 1..] {
                    match f {
                        "mixing" => mixing = true,
                        "mildly_mixing" => mildly = true,
                        "rigid" => rigid = true,
                        other => return err(line, format!("unknown flag `{other}`")),
                    }
                }
            }
            let part = WmPart::new(kind, mixing, mildly, rigid).map_err(|e| ParseError {
                line,
                msg: e.to_string(),
            })?;
            Ok(BodyItem::Wm(part))
        }
        _ => err(line, format!("unexpected statement `{stmt}` inside rep body")),
    }
}

/// Parses a whole input file.
pub fn parse_spec(text: &str) -> Result<SpecFile, ParseError> {
    // First pass: symbol declarations (order-independent; the table sorts).
    let mut names = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if let Some(rest) = line.strip_prefix("symbol ") {
            let name = rest.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return err(lineno + 1, format!("bad symbol name `{name}`"));
            }
            names.push(name.to_string());
        } else if line == "symbol" {
            return err(lineno + 1, "symbol declaration needs a name");
        }
    }
    let symbols = SymbolTable::new(names).map_err(|e| ParseError {
        line: 0,
        msg: e.to_string(),
    })?;

    let mut reps: Vec<Representation> = Vec::new();
    let mut current: Option<(String, usize, Vec<(CirclePoint, Extent)>, Vec<WmPart>)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        // Braces end a statement themselves, so one-line blocks such as
        // `rep b { atom 1/3 mult 1 ; atom -1 mult 1 }` parse too.
        let line = line.replace('{', "{;").replace('}', ";};");
        for stmt in line.split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() {
                continue;
            }
            match &mut current {
                None => {
                    if stmt.starts_with("symbol ") {
                        continue;
                    }
                    if let Some(rest) = stmt.strip_prefix("rep ") {
                        let rest = rest.trim();
                        let Some(name) = rest.strip_suffix('{').map(str::trim) else {
                            return err(lineno, "expected `rep NAME {`");
                        };
                        if name.is_empty()
                            || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                        {
                            return err(lineno, format!("bad representation name `{name}`"));
                        }
                        if reps.iter().any(|r| r.name() == name) {
                            return err(lineno, format!("representation `{name}` declared twice"));
                        }
                        current = Some((name.to_string(), lineno, Vec::new(), Vec::new()));
                    } else {
                        return err(lineno, format!("unexpected statement `{stmt}`"));
                    }
                }
                Some((name, start, atoms, wm)) => {
                    if stmt == "}" {
                        let rep = Representation::new(
                            name,
                            std::mem::take(atoms),
                            std::mem::take(wm),
                            symbols.clone(),
                        )
                        .map_err(|e: RepError| ParseError {
                            line: *start,
                            msg: e.to_string(),
                        })?;
                        reps.push(rep);
                        current = None;
                    } else {
                        match parse_body_stmt(stmt, &symbols, lineno)? {
                            BodyItem::Atom(p, m) => atoms.push((p, m)),
                            BodyItem::Wm(part) => wm.push(part),
                        }
                    }
                }
            }
        }
    }
    if let Some((name, start, _, _)) = current {
        return err(start, format!("rep `{name}` is never closed with `}}`"));
    }
    Ok(SpecFile { symbols, reps })
}

/// Parses text containing exactly one representation block (plus symbol
/// declarations) and returns it.
pub fn parse_rep(text: &str) -> Result<Representation, ParseError> {
    let file = parse_spec(text)?;
    match file.reps.len() {
        1 => Ok(file.reps.into_iter().next().unwrap()),
        n => err(0, format!("expected exactly one rep block, found {n}")),
    }
}
