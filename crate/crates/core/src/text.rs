//! Decimal text form of complex numbers.
//!
//! Grammar: `[-]ddd[.ddd][(+|-)ddd[.ddd]i]`, or a pure imaginary
//! `[-]ddd[.ddd]i`. No whitespace and no exponents. Output uses the same
//! grammar, always with an imaginary part, so it parses back.

use rug::{Complex, Float};

use crate::error::{Error, Result};

/// Decimal digits that make a `prec`-bit float round-trip.
pub fn digits_for_prec(prec: u32) -> usize {
    (f64::from(prec) * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// Split off a leading `ddd[.ddd]` token.
fn take_number(s: &str) -> Option<(&str, &str)> {
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i == 0 {
        return None;
    }
    if i < b.len() && b[i] == b'.' {
        let mut j = i + 1;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j == i + 1 {
            return None;
        }
        i = j;
    }
    Some(s.split_at(i))
}

fn to_float(tok: &str, neg: bool, prec: u32) -> Float {
    let parsed = Float::parse(tok).expect("token already validated");
    let f = Float::with_val(prec, parsed);
    if neg {
        -f
    } else {
        f
    }
}

/// Parse a complex literal at `prec` bits.
pub fn parse_complex(s: &str, prec: u32) -> Result<Complex> {
    let bad = || Error::Parse(format!("malformed complex literal {s:?}"));
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (first, rest) = take_number(rest).ok_or_else(bad)?;
    let x = to_float(first, neg, prec);
    if rest.is_empty() {
        return Ok(Complex::with_val(prec, (x, 0)));
    }
    if rest == "i" {
        return Ok(Complex::with_val(prec, (0, x)));
    }
    let (neg2, rest) = match rest.as_bytes()[0] {
        b'+' => (false, &rest[1..]),
        b'-' => (true, &rest[1..]),
        _ => return Err(bad()),
    };
    let (second, rest) = take_number(rest).ok_or_else(bad)?;
    if rest != "i" {
        return Err(bad());
    }
    Ok(Complex::with_val(prec, (x, to_float(second, neg2, prec))))
}

/// Plain decimal rendering of `x` with `digits` significant digits,
/// trailing zeros removed.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let (neg, ds, exp) = x.to_sign_string_exp(10, Some(digits.max(1)));
    let ds = ds.trim_end_matches('0');
    let exp = exp.unwrap_or(0);
    let body = if exp <= 0 {
        format!("0.{}{}", "0".repeat(exp.unsigned_abs() as usize), ds)
    } else if exp as usize >= ds.len() {
        format!("{}{}", ds, "0".repeat(exp as usize - ds.len()))
    } else {
        let (a, b) = ds.split_at(exp as usize);
        format!("{a}.{b}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// `re+imi` / `re-imi` with `digits` significant digits per part.
pub fn format_complex(z: &Complex, digits: usize) -> String {
    let re = format_float(z.real(), digits);
    let im = format_float(z.imag(), digits);
    match im.strip_prefix('-') {
        Some(m) => format!("{re}-{m}i"),
        None => format!("{re}+{im}i"),
    }
}

/// [`format_complex`] with enough digits to round-trip the value's precision.
pub fn format_complex_exact(z: &Complex) -> String {
    format_complex(z, digits_for_prec(crate::numerics::cprec(z)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        let p = 64;
        assert_eq!(parse_complex("1i", p).unwrap(), Complex::with_val(p, (0, 1)));
        assert_eq!(parse_complex("-2.5", p).unwrap(), Complex::with_val(p, (-2.5, 0)));
        assert_eq!(parse_complex("0.5+1i", p).unwrap(), Complex::with_val(p, (0.5, 1)));
        assert_eq!(parse_complex("-0.5-0.25i", p).unwrap(), Complex::with_val(p, (-0.5, -0.25)));
        for bad in ["", "i", "1+i", "1e3", "1.", ".5", "1 +2i", "1+2", "1+2ii", "--1", "1+-2i"] {
            assert!(parse_complex(bad, p).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn formats_plain_decimals() {
        assert_eq!(format_float(&Float::with_val(64, 1234.5), 10), "1234.5");
        assert_eq!(format_float(&Float::with_val(64, 0.001), 5), "0.001");
        assert_eq!(format_float(&Float::with_val(64, -3e5), 5), "-300000");
        assert_eq!(format_float(&Float::with_val(64, 0), 5), "0");
        let z = Complex::with_val(64, (0.5, -2));
        assert_eq!(format_complex(&z, 6), "0.5-2i");
    }

    #[test]
    fn round_trips_at_precision() {
        for prec in [64u32, 128, 300] {
            let z = Complex::with_val(prec, (Float::with_val(prec, 2).sqrt() / 3u32, -Float::with_val(prec, 7).ln()));
            let s = format_complex_exact(&z);
            assert!(!s.contains('e'));
            assert_eq!(parse_complex(&s, prec).unwrap(), z, "{s}");
        }
        let tiny = Complex::with_val(128, (1, 1)) >> 200i32;
        assert_eq!(parse_complex(&format_complex_exact(&tiny), 128).unwrap(), tiny);
    }
}
