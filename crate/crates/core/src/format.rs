//! The `vcsp 1` line-oriented instance text format.
//!
//! ```text
//! vcsp 1
//! n <num_vars>
//! label <index> <k> <i>     # optional, all-or-none
//! c0 <weight>               # optional
//! u <index> <weight>
//! b <index> <index> <weight>
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::{Instance, Label};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, what: &str, tok: Option<&str>) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} {tok:?}")))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header_seen = false;
    let mut num_vars: Option<usize> = None;
    let mut constant: Option<i128> = None;
    let mut labels: Vec<(usize, Label)> = Vec::new();
    let mut unaries = Vec::new();
    let mut binaries = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let kw = toks.next().unwrap_or_default();

        if !header_seen {
            if kw != "vcsp" || toks.next() != Some("1") || toks.next().is_some() {
                return Err(parse_err(line, "expected header `vcsp 1`"));
            }
            header_seen = true;
            continue;
        }
        if kw != "n" && num_vars.is_none() {
            return Err(parse_err(line, "`n <num_vars>` must precede constraints"));
        }

        match kw {
            "n" => {
                if num_vars.is_some() {
                    return Err(parse_err(line, "repeated `n` line"));
                }
                num_vars = Some(field(line, "variable count", toks.next())?);
            }
            "label" => {
                let idx: usize = field(line, "index", toks.next())?;
                let k: u32 = field(line, "gadget index", toks.next())?;
                let i: u32 = field(line, "position", toks.next())?;
                labels.push((idx, Label::new(k, i)));
            }
            "c0" => {
                if constant.is_some() {
                    return Err(parse_err(line, "repeated `c0` line"));
                }
                constant = Some(field(line, "weight", toks.next())?);
            }
            "u" => {
                let idx: usize = field(line, "index", toks.next())?;
                let w: i128 = field(line, "weight", toks.next())?;
                unaries.push((idx, w));
            }
            "b" => {
                let a: usize = field(line, "index", toks.next())?;
                let b: usize = field(line, "index", toks.next())?;
                let w: i128 = field(line, "weight", toks.next())?;
                binaries.push((a, b, w));
            }
            other => return Err(parse_err(line, format!("unknown record {other:?}"))),
        }
        if let Some(extra) = toks.next() {
            return Err(parse_err(line, format!("trailing token {extra:?}")));
        }
    }

    if !header_seen {
        return Err(parse_err(0, "empty input, expected header `vcsp 1`"));
    }
    let n = num_vars.ok_or_else(|| parse_err(0, "missing `n` line"))?;
    let inst = Instance::new(n, constant.unwrap_or(0), &unaries, &binaries)?;

    if labels.is_empty() {
        return Ok(inst);
    }
    let mut slots: Vec<Option<Label>> = vec![None; n];
    for (idx, l) in labels {
        let slot = slots.get_mut(idx).ok_or(Error::IndexOutOfRange {
            index: idx,
            num_vars: n,
        })?;
        if slot.replace(l).is_some() {
            return Err(Error::InvalidLabels(format!("variable {idx} labeled twice")));
        }
    }
    let labels = slots
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::InvalidLabels(format!("variable {i} has no label"))))
        .collect::<Result<Vec<_>>>()?;
    inst.with_labels(labels)
}

pub fn write_instance(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str("vcsp 1\n");
    let _ = writeln!(out, "n {}", inst.num_vars());
    if let Some(labels) = inst.labels() {
        for (i, l) in labels.iter().enumerate() {
            let _ = writeln!(out, "label {} {} {}", i, l.gadget, l.position);
        }
    }
    if inst.constant() != 0 {
        let _ = writeln!(out, "c0 {}", inst.constant());
    }
    for (i, w) in inst.unaries() {
        let _ = writeln!(out, "u {i} {w}");
    }
    for ((a, b), w) in inst.binaries() {
        let _ = writeln!(out, "b {a} {b} {w}");
    }
    out
}

/// SHA-256 of the canonical text serialisation, hex encoded.
pub fn instance_hash(inst: &Instance) -> String {
    hex::encode(Sha256::digest(write_instance(inst).as_bytes()))
}
