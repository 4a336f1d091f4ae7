//! Scalar type shared by the whole crate.
//!
//! All coefficients are arbitrary-precision rationals. Dimension counts,
//! series coefficients and matrix entries never leave this type, which is
//! what lets the verification suites compare with `==` instead of a
//! tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar.
pub type Q = BigRational;

/// Rational from a machine integer. Only the test suites spell out
/// signed literals; runtime code builds its scalars from counts.
#[cfg(test)]
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational from an unsigned count.
pub fn q_u(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parse `"p"` or `"p/q"` into a rational.
///
/// This is the inverse of the `Display` impl on [`Q`], which prints
/// integers without a denominator.
pub fn parse_ratio(s: &str) -> Option<Q> {
    s.trim().parse::<BigRational>().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn display_round_trips_through_parse() {
        let third = q(1) / q(3);
        assert_eq!(parse_ratio(&third.to_string()), Some(third));
        assert_eq!(parse_ratio("7"), Some(q(7)));
        assert_eq!(parse_ratio("-3/4"), Some(q(-3) / q(4)));
        assert_eq!(parse_ratio("x"), None);
    }

    #[test]
    fn integers_print_without_denominator() {
        assert_eq!(q(5).to_string(), "5");
        assert_eq!((q(2) / q(4)).to_string(), "1/2");
        assert!(Q::one().is_integer());
    }
}
