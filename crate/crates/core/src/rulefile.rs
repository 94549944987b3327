//! Text format for cubature rules.
//!
//! ```text
//! # cubature rule
//! n: 1
//! m: 2
//! precision: 3
//! scale: 0x1p+1
//! nodes:
//! -0x1.279a74590331cp-1 : 0x1p+0
//! 0x1.279a74590331cp-1 : 0x1p+0
//! report:
//! max_abs_error: 2.2e-16
//! ```
//!
//! Node coordinates and weights are hex-floats (decimal is accepted on
//! input). The report block is informational and ignored by the reader.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::cubature::{CubatureRule, ExactnessReport};
use crate::error::{Error, Result};
use crate::hexfloat::{format_hex, parse_float};

pub fn write_rule(
    rule: &CubatureRule,
    report: Option<&ExactnessReport>,
    out: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(out, "# cubature rule")?;
    writeln!(out, "n: {}", rule.n)?;
    writeln!(out, "m: {}", rule.m)?;
    writeln!(out, "precision: {}", rule.precision())?;
    writeln!(out, "scale: {}", format_hex(rule.scale))?;
    writeln!(out, "nodes:")?;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let coords: Vec<String> = x.iter().map(|&c| format_hex(c)).collect();
        writeln!(out, "{} : {}", coords.join(" "), format_hex(*w))?;
    }
    if let Some(r) = report {
        writeln!(out, "report:")?;
        writeln!(out, "degree: {}", r.degree)?;
        writeln!(out, "max_abs_error: {:e}", r.max_abs_error)?;
        writeln!(out, "max_rel_error: {:e}", r.max_rel_error)?;
        writeln!(out, "worst_index: {}", r.worst_index)?;
        writeln!(out, "min_weight: {:e}", r.min_weight)?;
        writeln!(out, "weight_sum: {:e}", r.weight_sum)?;
        if let Some(res) = r.node_residual {
            writeln!(out, "node_residual: {res:e}")?;
        }
        if let Some(inside) = r.interior {
            writeln!(out, "interior: {inside}")?;
        }
    }
    Ok(())
}

pub fn store_rule(
    rule: &CubatureRule,
    report: Option<&ExactnessReport>,
    path: &Path,
) -> Result<()> {
    let mut buf = Vec::new();
    write_rule(rule, report, &mut buf).expect("writing to memory");
    fs::write(path, buf).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_rule(path: &Path) -> Result<CubatureRule> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rule(&text, path)
}

pub fn parse_rule(text: &str, origin: &Path) -> Result<CubatureRule> {
    let err = |line: usize, msg: String| Error::parse(origin, line, msg);
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut precision: Option<usize> = None;
    let mut scale: Option<f64> = None;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut in_nodes = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "report:" {
            break;
        }
        if line == "nodes:" {
            in_nodes = true;
            continue;
        }
        if in_nodes {
            let dim = n.ok_or_else(|| err(lineno, "nodes before 'n'".into()))?;
            let (xs, w) = line
                .rsplit_once(':')
                .ok_or_else(|| err(lineno, "expected 'x1 ... xn : weight'".into()))?;
            let coords = xs
                .split_whitespace()
                .map(|t| parse_float(t).ok_or_else(|| err(lineno, format!("bad number '{t}'"))))
                .collect::<Result<Vec<f64>>>()?;
            if coords.len() != dim {
                return Err(err(
                    lineno,
                    format!("node has {} coordinates, expected {dim}", coords.len()),
                ));
            }
            let w =
                parse_float(w).ok_or_else(|| err(lineno, format!("bad weight '{}'", w.trim())))?;
            if coords.iter().chain([&w]).any(|v| !v.is_finite()) {
                return Err(err(lineno, "non-finite value".into()));
            }
            nodes.push(coords);
            weights.push(w);
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(lineno, format!("expected 'key: value', got '{line}'")))?;
        let value = value.trim();
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| err(lineno, format!("bad integer '{v}'")))
        };
        match key.trim() {
            "n" => n = Some(int(value)?),
            "m" => m = Some(int(value)?),
            "precision" => precision = Some(int(value)?),
            "scale" => {
                scale = Some(
                    parse_float(value)
                        .ok_or_else(|| err(lineno, format!("bad scale '{value}'")))?,
                )
            }
            other => return Err(err(lineno, format!("unknown key '{other}'"))),
        }
    }

    let missing = |what: &str| err(0, format!("missing '{what}'"));
    let n = n.ok_or_else(|| missing("n"))?;
    let m = m.ok_or_else(|| missing("m"))?;
    let scale = scale.ok_or_else(|| missing("scale"))?;
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if m == 0 {
        return Err(err(0, "m must be at least 1".into()));
    }
    if let Some(p) = precision {
        if p != 2 * m - 1 {
            return Err(err(0, format!("precision {p} does not match m = {m}")));
        }
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(err(0, format!("scale {scale} must be positive")));
    }
    if nodes.is_empty() {
        return Err(missing("nodes"));
    }
    Ok(CubatureRule {
        n,
        m,
        nodes,
        weights,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CubatureRule {
        CubatureRule {
            n: 2,
            m: 2,
            nodes: vec![vec![-0.1, 1.0 / 3.0], vec![0.5, -2.0], vec![1e-300, 7.25]],
            weights: vec![0.1, std::f64::consts::PI, 2.0],
            scale: 9.869604401089358,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rule = sample();
        let mut buf = Vec::new();
        write_rule(&rule, None, &mut buf).unwrap();
        let back = parse_rule(std::str::from_utf8(&buf).unwrap(), Path::new("mem")).unwrap();
        assert_eq!(back, rule);
    }

    #[test]
    fn report_block_is_ignored() {
        let rule = sample();
        let report = ExactnessReport {
            degree: 3,
            max_abs_error: 1e-15,
            max_rel_error: 1e-15,
            worst_index: "1,2".into(),
            min_weight: 0.1,
            weight_sum: 5.0,
            node_residual: Some(1e-12),
            interior: Some(false),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rule.txt");
        store_rule(&rule, Some(&report), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("report:\n"));
        assert!(text.contains("interior: false"));
        assert_eq!(load_rule(&path).unwrap(), rule);
    }

    #[test]
    fn malformed_rules() {
        let p = Path::new("bad");
        let cases = [
            "m: 1\nscale: 1\nnodes:\n0 : 1\n",
            "n: 1\nm: 1\nscale: 1\nnodes:\n0 0 : 1\n",
            "n: 1\nm: 1\nscale: 1\nnodes:\n0 1\n",
            "n: 1\nm: 1\nscale: -1\nnodes:\n0 : 1\n",
            "n: 1\nm: 2\nprecision: 2\nscale: 1\nnodes:\n0 : 1\n",
            "n: 1\nm: 1\nscale: 1\n",
            "n: 1\nm: 1\nscale: 1\ncolor: red\nnodes:\n0 : 1\n",
            "n: 1\nm: 1\nscale: 1\nnodes:\nnan : 1\n",
        ];
        for text in cases {
            assert!(parse_rule(text, p).is_err(), "{text:?}");
        }
        let ok = parse_rule("n: 1\nm: 1\nscale: 2\nnodes:\n0.0 : 2.0\n", p).unwrap();
        assert_eq!(ok.weights, vec![2.0]);
    }
}
