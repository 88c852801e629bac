//! Exact rationals for supports, confidences and thresholds.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Non-negative exact rational. Confidences are `support(X u Y) / support(X)`.
pub type Ratio = num_rational::Ratio<u64>;

const MAX_FRACTION_DIGITS: usize = 18;

/// Parses a non-negative decimal (`0.7`, `.05`, `1`) or a fraction (`7/10`)
/// into an exact ratio. No float rounding is involved, so `0.9 - 0.1` is
/// exactly `4/5`.
pub fn parse_decimal(text: &str) -> Result<Ratio> {
    let s = text.trim();
    let bad = || Error::Param(format!("`{text}` is not a non-negative decimal"));
    if let Some((num, den)) = s.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(Error::Param(format!("`{text}` has a zero denominator")));
        }
        return Ok(Ratio::new(num, den));
    }
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > MAX_FRACTION_DIGITS {
        return Err(Error::Param(format!(
            "`{text}` has too many decimal places"
        )));
    }
    let whole: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| bad())?
    };
    let den = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let num = whole
        .checked_mul(den)
        .and_then(|w| w.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

/// Decimal rendering with a fixed number of places (presentation only).
pub fn format_decimal(r: &Ratio, places: usize) -> String {
    format!("{:.*}", places, to_f64(r))
}

pub fn to_f64(r: &Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn to_big(r: &Ratio) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `ceil(fraction * n)` computed exactly.
pub fn ceil_mul(fraction: &Ratio, n: usize) -> u64 {
    let num = *fraction.numer() as u128 * n as u128;
    let den = *fraction.denom() as u128;
    num.div_ceil(den) as u64
}
