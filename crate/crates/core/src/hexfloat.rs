//! Exact text encoding of `f64` values (C99 `%a` style).

/// Formats `x` as a hex-float such as `-0x1.8p+1`. Non-finite values are
/// written as `inf`, `-inf` or `nan`.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    let frac = format!("{mantissa:013x}");
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{frac}p{exp:+}")
    }
}

/// Parses a decimal or hex-float literal.
pub fn parse_float(s: &str) -> Option<f64> {
    let s = s.trim();
    let unsigned = s.trim_start_matches(['+', '-']);
    if unsigned.starts_with("0x") || unsigned.starts_with("0X") {
        hexf_parse::parse_hexf64(s, false).ok()
    } else {
        s.parse::<f64>().ok()
    }
}
