//! Exact decimal arithmetic helpers.
//!
//! Problem numbers and answers are kept as arbitrary-precision rationals so
//! that accuracy figures are bit-reproducible across platforms. Decimal
//! strings parse exactly (scaled integers); division produces rationals and
//! only rendering falls back to rounded decimal output.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact numeric value used throughout the crate.
pub type Num = BigRational;

/// Parse a decimal literal like `8`, `3.5`, `-0.25` into an exact rational.
///
/// Returns `None` for anything that is not a plain decimal number.
pub fn parse_decimal(s: &str) -> Option<Num> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1i32, rest),
        None => (1i32, s.strip_prefix('+').unwrap_or(s)),
    };
    let mut int_part = String::new();
    let mut frac_part = String::new();
    let mut seen_dot = false;
    for c in digits.chars() {
        match c {
            '0'..='9' => {
                if seen_dot {
                    frac_part.push(c);
                } else {
                    int_part.push(c);
                }
            }
            '.' if !seen_dot => seen_dot = true,
            // Thousands separators like 1,000 appear in some corpora.
            ',' if !seen_dot && !int_part.is_empty() => {}
            _ => return None,
        }
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let scale = frac_part.len() as u32;
    let all_digits = format!("{int_part}{frac_part}");
    let numer: BigInt = all_digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(scale);
    let mut r = BigRational::new(numer, denom);
    if sign < 0 {
        r = -r;
    }
    Some(r)
}

/// Construct an exact integer value.
pub fn from_i64(v: i64) -> Num {
    BigRational::from_integer(BigInt::from(v))
}

/// Render a rational as a decimal string.
///
/// Terminating decimals render exactly (`5`, `1.25`); non-terminating ones
/// are rounded to `sig` significant digits (`1.66666666667` for 5/3 at 12).
pub fn to_decimal_string(v: &Num, sig: usize) -> String {
    if v.is_integer() {
        return v.numer().to_string();
    }
    // Exact when the reduced denominator is of the form 2^a * 5^b.
    if let Some(s) = exact_decimal(v) {
        return s;
    }
    rounded_decimal(v, sig)
}

fn exact_decimal(v: &Num) -> Option<String> {
    let mut d = v.denom().clone();
    let mut tens = 0u32;
    for p in [2u32, 5u32] {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
            tens += 1;
        }
    }
    if !d.is_one() {
        return None;
    }
    // v = n / (2^a 5^b); scale to an integer over 10^k.
    let mut k = 0u32;
    let mut scaled = v.clone();
    let ten = BigRational::from_integer(BigInt::from(10));
    while !scaled.is_integer() {
        scaled *= &ten;
        k += 1;
        if k > tens * 2 + 64 {
            return None; // unreachable given the denominator check
        }
    }
    let digits = scaled.numer().abs().to_string();
    let neg = v.is_negative();
    let k = k as usize;
    let s = if digits.len() <= k {
        format!("0.{}{}", "0".repeat(k - digits.len()), digits)
    } else {
        let (int, frac) = digits.split_at(digits.len() - k);
        format!("{int}.{frac}")
    };
    let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    Some(if neg { format!("-{s}") } else { s })
}

fn rounded_decimal(v: &Num, sig: usize) -> String {
    let f = v.to_f64().unwrap_or(f64::NAN);
    let formatted = format!("{:.*e}", sig.saturating_sub(1), f);
    // Re-render from scientific notation to a plain decimal.
    let parsed: f64 = formatted.parse().unwrap_or(f);
    let mut s = format!("{parsed}");
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    s
}

/// Absolute-or-relative tolerance check used by execution accuracy:
/// `|a - b| <= tol * max(1, |b|)`.
pub fn within_tolerance(a: &Num, b: &Num, tol: &Num) -> bool {
    let diff = (a - b).abs();
    let scale = b.abs().max(BigRational::one());
    diff <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_decimals() {
        assert_eq!(parse_decimal("8").unwrap(), from_i64(8));
        assert_eq!(parse_decimal("8.0").unwrap(), from_i64(8));
        assert_eq!(
            parse_decimal("-0.25").unwrap(),
            BigRational::new(BigInt::from(-1), BigInt::from(4))
        );
        assert_eq!(parse_decimal("1,218").unwrap(), from_i64(1218));
        assert!(parse_decimal("abc").is_none());
        assert!(parse_decimal("").is_none());
        assert!(parse_decimal(".").is_none());
    }

    #[test]
    fn renders_terminating_decimals_exactly() {
        assert_eq!(to_decimal_string(&from_i64(46), 12), "46");
        let q = BigRational::new(BigInt::from(5), BigInt::from(4));
        assert_eq!(to_decimal_string(&q, 12), "1.25");
        let q = BigRational::new(BigInt::from(-3), BigInt::from(8));
        assert_eq!(to_decimal_string(&q, 12), "-0.375");
    }

    #[test]
    fn renders_repeating_decimals_rounded() {
        let q = BigRational::new(BigInt::from(5), BigInt::from(3));
        let s = to_decimal_string(&q, 12);
        assert!(s.starts_with("1.6666666666"), "got {s}");
    }

    #[test]
    fn tolerance_is_relative_above_one() {
        let tol = parse_decimal("0.0001").unwrap();
        assert!(within_tolerance(
            &parse_decimal("1.666666").unwrap(),
            &BigRational::new(BigInt::from(5), BigInt::from(3)),
            &tol
        ));
        assert!(!within_tolerance(
            &from_i64(72),
            &from_i64(8),
            &tol
        ));
    }
}
