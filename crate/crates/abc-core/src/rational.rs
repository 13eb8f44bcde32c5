//! Exact rational arithmetic.
//!
//! All scores, budgets, loads, prices and purchase times in this crate are
//! [`Rational`]s backed by arbitrary-precision integers. The type is a thin
//! alias for [`num_rational::BigRational`], which already guarantees the two
//! invariants we rely on: values are always stored in lowest terms, and the
//! denominator is always positive. `Display` prints `p/q` (or just `p` for
//! integers), which is also the wire format used by the CLI.

use num_bigint::BigInt;
use num_traits::{One, Zero};

pub type Rational = num_rational::BigRational;

/// Shorthand constructor used pervasively in tests and generators.
///
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact rational from an unsigned integer (weights, counts).
pub fn rat_u(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Hashes a rational by its numerator and denominator digits.
///
/// The stock `Hash` impl of the underlying type hashes the continued-
/// fraction expansion (one big-integer division per term) so that equal
/// but unreduced fractions collide. Every value in this crate is in
/// lowest terms, so hashing the two components directly is equivalent —
/// and very much cheaper on the long-denominator values the sequential
/// engines produce.
pub(crate) fn hash_parts<H: std::hash::Hasher>(r: &Rational, state: &mut H) {
    use std::hash::Hash;
    r.numer().hash(state);
    r.denom().hash(state);
}

/// Parses `p`, `-p`, or `p/q` with arbitrary-precision components.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("bad numerator in rational `{s}`"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("bad denominator in rational `{s}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in rational `{s}`"));
    }
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_p_over_q() {
        assert_eq!(rat(53, 918).to_string(), "53/918");
        assert_eq!(rat(5, 1).to_string(), "5");
        assert_eq!(rat(-3, 6).to_string(), "-1/2");
    }

    #[test]
    fn parse_round_trips() {
        for s in ["1/20", "53/918", "-7/3", "42", "0"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x/2").is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        // 1/3 + 1/6 == 1/2 with no rounding anywhere.
        assert_eq!(rat(1, 3) + rat(1, 6), rat(1, 2));
        let harmonic: Rational = (1..=10).map(|y| rat(1, y)).fold(zero(), |a, b| a + b);
        assert_eq!(harmonic, rat(7381, 2520));
    }
}
