//! Text format for moment sequences.
//!
//! ```text
//! # moments
//! n: 2
//! d_max: 2
//! normalized: true
//! scale: 0x1p+2
//! "0,0": 0x1p+0
//! "1,0": 0x0p+0
//! ...
//! ```
//!
//! Values may be decimal or hex-float; the writer always emits hex-float so a
//! store/load round trip is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{MomentSequence, Provenance};
use crate::error::{Error, Result};
use crate::hexfloat::{format_hex, parse_float};
use crate::indexing::{glex_enumerate, MultiIndex};

pub fn write_moments(seq: &MomentSequence, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# moments ({})", seq.provenance())?;
    writeln!(out, "n: {}", seq.dim())?;
    writeln!(out, "d_max: {}", seq.max_degree())?;
    writeln!(out, "normalized: {}", seq.is_normalized())?;
    writeln!(out, "scale: {}", format_hex(seq.scale()))?;
    let table = glex_enumerate(seq.dim(), seq.max_degree()).expect("enumeration");
    for (alpha, v) in table.iter().zip(seq.values()) {
        writeln!(out, "\"{alpha}\": {}", format_hex(*v))?;
    }
    Ok(())
}

pub fn store_moments(seq: &MomentSequence, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_moments(seq, &mut buf).expect("writing to memory");
    fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_moments(path: &Path) -> Result<MomentSequence> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_moments(&text, path)
}

/// Parses a moment document; `origin` is used for messages and provenance.
pub fn parse_moments(text: &str, origin: &Path) -> Result<MomentSequence> {
    let err = |line: usize, msg: String| Error::parse(origin, line, msg);

    let mut n = None;
    let mut d_max = None;
    let mut normalized = None;
    let mut scale = None;
    let mut records: Vec<(usize, MultiIndex, f64)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = if let Some(rest) = line.strip_prefix('"') {
            let (k, v) = rest
                .split_once('"')
                .ok_or_else(|| err(lineno, "unterminated multi-index key".into()))?;
            let v = v
                .trim_start()
                .strip_prefix(':')
                .ok_or_else(|| err(lineno, "expected ':' after key".into()))?;
            let alpha: MultiIndex = k
                .parse()
                .map_err(|_| err(lineno, format!("bad multi-index \"{k}\"")))?;
            let v = v.trim();
            let value = parse_float(v).ok_or_else(|| err(lineno, format!("bad number {v:?}")))?;
            records.push((lineno, alpha, value));
            continue;
        } else {
            line.split_once(':')
                .ok_or_else(|| err(lineno, format!("expected 'key: value', got {line:?}")))?
        };
        let value = value.trim();
        match key.trim() {
            "n" => {
                n = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| err(lineno, "bad n".into()))?,
                )
            }
            "d_max" => {
                d_max = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| err(lineno, "bad d_max".into()))?,
                )
            }
            "normalized" => {
                normalized = Some(
                    value
                        .parse::<bool>()
                        .map_err(|_| err(lineno, "normalized must be true or false".into()))?,
                )
            }
            "scale" => {
                scale = Some(parse_float(value).ok_or_else(|| err(lineno, "bad scale".into()))?)
            }
            other => return Err(err(lineno, format!("unknown header field {other:?}"))),
        }
    }

    let n = n.ok_or_else(|| err(0, "missing header field n".into()))?;
    let d_max = d_max.ok_or_else(|| err(0, "missing header field d_max".into()))?;
    let normalized = normalized.ok_or_else(|| err(0, "missing header field normalized".into()))?;
    let scale = scale.ok_or_else(|| err(0, "missing header field scale".into()))?;
    if n == 0 {
        return Err(Error::ZeroDimension);
    }

    let table = glex_enumerate(n, d_max)?;
    let mut values: Vec<Option<f64>> = vec![None; table.len()];
    for (lineno, alpha, value) in records {
        if alpha.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: alpha.dim(),
            });
        }
        if alpha.degree() > d_max {
            return Err(err(
                lineno,
                format!("multi-index ({alpha}) exceeds d_max = {d_max}"),
            ));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(alpha.to_string()));
        }
        let slot = &mut values[alpha.glex_rank()];
        if slot.is_some() {
            return Err(Error::DuplicateMoment(alpha.to_string()));
        }
        *slot = Some(value);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::MissingMoment(table.get(i).to_string())))
        .collect::<Result<Vec<f64>>>()?;

    MomentSequence::new(
        n,
        d_max,
        values,
        normalized,
        scale,
        Provenance::File(origin.to_path_buf()),
    )
}
