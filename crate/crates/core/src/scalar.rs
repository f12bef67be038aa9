//! Exact rational coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Scalar = BigRational;

pub fn int(value: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Scalar {
    Scalar::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses `7`, `-3`, `2/3` or `-10/4` (reduced on construction).
pub fn parse(text: &str) -> Option<Scalar> {
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let numer: BigInt = numer.parse().ok()?;
    let denom: BigInt = match denom {
        Some(d) => {
            if d.starts_with(['-', '+']) {
                return None;
            }
            d.parse().ok()?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return None;
    }
    Some(Scalar::new(numer, denom))
}

pub fn is_unit(value: &Scalar) -> bool {
    value.abs().is_one()
}

/// Integer factorial as a scalar.
pub fn factorial(k: usize) -> Scalar {
    (1..=k).fold(one(), |acc, i| acc * int(i as i64))
}
