//! Exact real scalars with certified interval evaluation.
//!
//! Values are built as exact expressions ([`Real`]) and only turned into
//! numbers by outward-rounded interval evaluation. A sign is reported as
//! [`Sign::Zero`] only when the normal form of the expression vanishes; interval
//! evidence alone never proves a value is zero.

mod coeff;
mod expr;
pub mod interval;
mod trig;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use expr::{Evaluator, Real};
pub use interval::{CertifiedScalar, Dyadic};
pub use trig::{cos_turn_interval, sin_turn_interval, Turn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    NegativeRadicand,
    #[error("could not decide the {0} within the precision cap")]
    Undecided(&'static str),
    #[error("angle denominator must be even and at least 2, got {0}")]
    BadDenominator(i64),
}

/// Precision ladder: start at `start_bits`, double until `max_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub start_bits: u32,
    pub max_bits: u32,
}

pub const DEFAULT_START_BITS: u32 = 128;
pub const MAX_BITS: u32 = 1024;

impl Default for Precision {
    fn default() -> Self {
        Precision {
            start_bits: DEFAULT_START_BITS,
            max_bits: MAX_BITS,
        }
    }
}

impl Precision {
    /// Ladder starting at `start_bits` (clamped to `[32, 1024]`) and capped at 1024.
    pub fn starting_at(start_bits: u32) -> Self {
        let start = start_bits.clamp(32, MAX_BITS);
        Precision {
            start_bits: start,
            max_bits: MAX_BITS,
        }
    }

    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let max = self.max_bits.max(self.start_bits);
        std::iter::successors(Some(self.start_bits), move |b| {
            let next = b.saturating_mul(2);
            (next <= max).then_some(next)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    StrictlyNegative,
    Zero,
    StrictlyPositive,
    Undecided,
}

impl Sign {
    pub fn is_decided(self) -> bool {
        self != Sign::Undecided
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCertificate {
    pub verdict: Sign,
    pub bits_used: u32,
}

/// Certified sign of `a - b`.
pub fn certify_compare(a: &Real, b: &Real, policy: Precision) -> SignCertificate {
    (a - b).sign(policy)
}

fn check_denominator(n: i64) -> Result<(), ScalarError> {
    if n < 2 || n % 2 != 0 {
        return Err(ScalarError::BadDenominator(n));
    }
    Ok(())
}

/// `cos(2πi/n)` for even `n ≥ 2`.
pub fn cos_frac(i: i64, n: i64) -> Result<Real, ScalarError> {
    check_denominator(n)?;
    Ok(Real::cos_turn(Turn::new(i, n)))
}

/// `sin(2πi/n)` for even `n ≥ 2`.
pub fn sin_frac(i: i64, n: i64) -> Result<Real, ScalarError> {
    check_denominator(n)?;
    Ok(Real::sin_turn(Turn::new(i, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn ladder_doubles_to_cap() {
        let v: Vec<u32> = Precision::starting_at(128).ladder().collect();
        assert_eq!(v, vec![128, 256, 512, 1024]);
        let v: Vec<u32> = Precision::starting_at(64).ladder().collect();
        assert_eq!(v, vec![64, 128, 256, 512, 1024]);
        assert_eq!(Precision::default(), Precision::starting_at(128));
    }

    #[test]
    fn odd_denominators_are_rejected() {
        assert_eq!(cos_frac(1, 7), Err(ScalarError::BadDenominator(7)));
        assert_eq!(sin_frac(1, 0), Err(ScalarError::BadDenominator(0)));
    }

    #[test]
    fn rotation_identities_reduce_to_zero() {
        let n = 24;
        let c = cos_frac(5, n).unwrap();
        let s = sin_frac(5, n).unwrap();
        assert!((&c * &c + &s * &s - Real::one()).is_zero());
        let c2 = cos_frac(10, n).unwrap();
        assert!((Real::from_int(2) * &c * &c - Real::one() - c2).is_zero());
    }

    #[test]
    fn sqrt_squares_back() {
        let p = Precision::default();
        let x = Real::from_ratio(7, 3) + cos_frac(1, 10).unwrap();
        let r = x.sqrt(p).unwrap();
        assert!((&r * &r - &x).is_zero());
        let four = Real::from_int(4).sqrt(p).unwrap();
        assert_eq!(four.as_rational(), Some(BigRational::from_integer(2.into())));
    }

    #[test]
    fn division_cancels_and_rationalises() {
        let p = Precision::default();
        let a = Real::from_int(3) + cos_frac(1, 12).unwrap();
        let b = Real::from_ratio(5, 2) - cos_frac(1, 8).unwrap();
        let q = &a / &b;
        assert!((&q * &b - &a).is_zero());
        let z = Real::from_int(2).sqrt(p).unwrap() + Real::one();
        let w = &a / &z;
        assert!((&w * &z - &a).is_zero());
        assert!(Real::one().checked_div(&Real::zero()).is_err());
    }

    #[test]
    fn sign_of_near_cancellation() {
        let p = Precision::default();
        let x = cos_frac(1, 24).unwrap() - Real::from_rational(BigRational::new(
            965_925_826_289_068i64.into(),
            1_000_000_000_000_000i64.into(),
        ));
        let cert = x.sign(p);
        assert!(cert.verdict.is_decided());
        assert_ne!(cert.verdict, Sign::Zero);
    }
}
