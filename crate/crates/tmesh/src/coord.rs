//! Exact rational coordinates.
//!
//! `Coord` is an arbitrary-precision rational kept in reduced canonical form
//! (positive denominator, gcd 1). All mesh geometry and all linear algebra in
//! this crate run on these values; no floating point enters any computation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Coord = BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoordParseError {
    #[error("empty coordinate")]
    Empty,
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Integer coordinate.
pub fn coord(n: i64) -> Coord {
    BigRational::from_integer(BigInt::from(n))
}

/// Rational coordinate `n/d`. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Coord {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact midpoint of two coordinates.
pub fn midpoint(a: &Coord, b: &Coord) -> Coord {
    (a + b) / coord(2)
}

/// Parses `"num/den"` or a plain integer, bit-exact. `"3/0"` is rejected.
pub fn parse_coord(s: &str) -> Result<Coord, CoordParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CoordParseError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| CoordParseError::BadInteger(s.to_string()))?;
    let d: BigInt = match den {
        Some(d) => d
            .parse()
            .map_err(|_| CoordParseError::BadInteger(s.to_string()))?,
        None => BigInt::one(),
    };
    if d.is_zero() {
        return Err(CoordParseError::ZeroDenominator(s.to_string()));
    }
    Ok(BigRational::new(n, d))
}

/// Formats a coordinate as `num/den`, or just `num` when the denominator is 1.
pub fn format_coord(c: &Coord) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Approximate f64 value, used only for SVG rendering.
pub fn to_f64(c: &Coord) -> f64 {
    let n = c.numer();
    let d = c.denom();
    // Good enough for drawing; exact data never goes through here.
    let nf: f64 = n.to_string().parse().unwrap_or(if n.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    let df: f64 = d.to_string().parse().unwrap_or(f64::INFINITY);
    nf / df
}
