//! C99 `%a`-style hexadecimal floats (`0x1.8p+1`), exact for every finite f64.

use std::fmt::Write as _;

pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut digits = format!("{mant:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let mut out = String::with_capacity(24);
    let _ = write!(out, "{sign}0x{lead}");
    if !digits.is_empty() {
        out.push('.');
        out.push_str(&digits);
    }
    let _ = write!(out, "p{exp:+}");
    out
}

/// Parses the output of [`format`]; also accepts plain decimal text.
pub fn parse(s: &str) -> Option<f64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return s.parse().ok();
    };
    let (mantissa, exp) = hex.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part != "0" && int_part != "1" || frac_part.len() > 13 {
        return None;
    }
    let lead = int_part == "1";
    let frac = if frac_part.is_empty() {
        0
    } else {
        u64::from_str_radix(frac_part, 16).ok()? << (4 * (13 - frac_part.len()))
    };
    let bits = if !lead {
        if frac == 0 {
            0
        } else if exp == -1022 {
            frac
        } else {
            return None;
        }
    } else {
        let biased = exp + 1023;
        if !(1..=2046).contains(&biased) {
            return None;
        }
        ((biased as u64) << 52) | frac
    };
    let v = f64::from_bits(bits);
    Some(if neg { -v } else { v })
}
