//! Helpers for exact rational values: construction, parsing, and rendering.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use serde::Serializer;

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `log2(x)` when `x` is an exact power of two (including `2^-k`), else `None`.
pub fn log2_exact(x: &BigRational) -> Option<i64> {
    if !x.is_positive() {
        return None;
    }
    let (num, den) = (x.numer(), x.denom());
    let pow2 = |v: &BigInt| -> Option<i64> {
        let bits = v.bits();
        (bits > 0 && *v == BigInt::one() << (bits - 1)).then(|| bits as i64 - 1)
    };
    if den.is_one() {
        pow2(num)
    } else if num.is_one() {
        pow2(den).map(|e| -e)
    } else {
        None
    }
}

/// Accepts `7`, `-3`, `3/2`, `1.5`, `.25`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let whole = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole.is_empty() { "0" } else { whole }, frac);
        let mut n: BigInt = digits.parse().ok()?;
        if negative {
            n = -n;
        }
        let d = num::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(n, d));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Decimal rendering when the expansion terminates, `p/q` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = (r * BigRational::from_integer(num::pow(BigInt::from(10), places))).to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (whole, frac) = digits.split_at(digits.len() - places);
    format!("{}{}.{}", if negative { "-" } else { "" }, whole, frac)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}
