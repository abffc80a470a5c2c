//! Dyadic numbers and outward-rounded intervals at a fixed working precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ScalarError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Round {
    Down,
    Up,
}

/// An exact binary fraction `mant * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn div_round(num: &BigInt, den: &BigInt, mode: Round) -> BigInt {
    match mode {
        Round::Down => num.div_floor(den),
        Round::Up => -((-num).div_floor(den)),
    }
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic {
            mant: BigInt::from(v),
            exp: 0,
        }
        .normalized()
    }

    pub(crate) fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub(crate) fn round(&self, prec: u32, mode: Round) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        let den = BigInt::one() << shift;
        Dyadic::new(div_round(&self.mant, &den, mode), self.exp + shift as i64)
    }

    pub(crate) fn from_ratio(num: &BigInt, den: &BigInt, prec: u32, mode: Round) -> Dyadic {
        if num.is_zero() {
            return Dyadic::zero();
        }
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let s = prec as i64 + den.bits() as i64 - num.bits() as i64 + 2;
        let (n, d) = if s >= 0 {
            (num << s as u64, den)
        } else {
            (num, den << (-s) as u64)
        };
        Dyadic::new(div_round(&n, &d, mode), -s).round(prec, mode)
    }

    pub(crate) fn from_rational(q: &BigRational, prec: u32, mode: Round) -> Dyadic {
        Dyadic::from_ratio(q.numer(), q.denom(), prec, mode)
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
        let e = a.exp.min(b.exp);
        (
            &a.mant << (a.exp - e) as u64,
            &b.mant << (b.exp - e) as u64,
            e,
        )
    }

    pub(crate) fn add_exact(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::aligned(self, other);
        Dyadic::new(a + b, e)
    }

    pub(crate) fn mul_exact(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub(crate) fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub(crate) fn div_round(&self, other: &Dyadic, prec: u32, mode: Round) -> Dyadic {
        let q = Dyadic::from_ratio(&self.mant, &other.mant, prec, mode);
        Dyadic::new(q.mant, q.exp + self.exp - other.exp)
    }

    pub(crate) fn sqrt_round(&self, prec: u32, mode: Round) -> Dyadic {
        debug_assert!(!self.mant.is_negative());
        if self.mant.is_zero() {
            return Dyadic::zero();
        }
        let want = 2 * prec as i64 + 4;
        let mut s = (want - self.mant.bits() as i64).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.mant << s as u64;
        let e = self.exp - s;
        let mut r = m.sqrt();
        if mode == Round::Up && &r * &r != m {
            r += 1;
        }
        Dyadic::new(r, e / 2).round(prec, mode)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let top = (&self.mant >> shift as u64).to_f64().unwrap_or(f64::NAN);
        let e = self.exp + shift;
        top * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    /// The largest double not exceeding this value.
    pub fn to_f64_down(&self) -> f64 {
        let x = self.to_f64();
        match BigRational::from_float(x) {
            Some(q) if q > self.to_rational() => x.next_down(),
            _ => x,
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::aligned(self, other);
        a.cmp(&b)
    }
}

/// A closed interval `[lower, upper]` with dyadic endpoints, produced by
/// evaluating an exact expression at `precision_bits` of working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedScalar {
    pub lower: Dyadic,
    pub upper: Dyadic,
    pub precision_bits: u32,
}

impl CertifiedScalar {
    pub fn exact(d: Dyadic, prec: u32) -> Self {
        CertifiedScalar {
            lower: d.clone(),
            upper: d,
            precision_bits: prec,
        }
    }

    pub(crate) fn from_bounds(lower: Dyadic, upper: Dyadic, prec: u32) -> Self {
        debug_assert!(lower <= upper);
        CertifiedScalar {
            lower,
            upper,
            precision_bits: prec,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        CertifiedScalar {
            lower: Dyadic::from_rational(q, prec, Round::Down),
            upper: Dyadic::from_rational(q, prec, Round::Up),
            precision_bits: prec,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.lower.signum() <= 0 && self.upper.signum() >= 0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        match BigRational::from_float(x) {
            Some(q) => self.lower.to_rational() <= q && q <= self.upper.to_rational(),
            None => false,
        }
    }

    pub fn width(&self) -> BigRational {
        self.upper.to_rational() - self.lower.to_rational()
    }

    pub fn midpoint_f64(&self) -> f64 {
        let mid = (self.lower.to_rational() + self.upper.to_rational()) / BigRational::from_integer(2.into());
        rational_to_f64(&mid)
    }

    pub fn radius_f64(&self) -> f64 {
        rational_to_f64(&(self.width() / BigRational::from_integer(2.into())))
    }

    /// Intersection with a previous enclosure of the same quantity.
    pub fn intersect(&self, other: &CertifiedScalar) -> CertifiedScalar {
        let lower = self.lower.clone().max(other.lower.clone());
        let upper = self.upper.clone().min(other.upper.clone());
        CertifiedScalar {
            lower,
            upper,
            precision_bits: self.precision_bits.max(other.precision_bits),
        }
    }

    pub(crate) fn add(&self, o: &CertifiedScalar) -> CertifiedScalar {
        let p = self.precision_bits;
        CertifiedScalar::from_bounds(
            self.lower.add_exact(&o.lower).round(p, Round::Down),
            self.upper.add_exact(&o.upper).round(p, Round::Up),
            p,
        )
    }

    pub(crate) fn neg(&self) -> CertifiedScalar {
        CertifiedScalar::from_bounds(self.upper.neg(), self.lower.neg(), self.precision_bits)
    }

    pub(crate) fn mul(&self, o: &CertifiedScalar) -> CertifiedScalar {
        let p = self.precision_bits;
        let products = [
            self.lower.mul_exact(&o.lower),
            self.lower.mul_exact(&o.upper),
            self.upper.mul_exact(&o.lower),
            self.upper.mul_exact(&o.upper),
        ];
        let lo = products.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = products.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        CertifiedScalar::from_bounds(lo.round(p, Round::Down), hi.round(p, Round::Up), p)
    }

    pub(crate) fn div(&self, o: &CertifiedScalar) -> Result<CertifiedScalar, ScalarError> {
        if o.contains_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let p = self.precision_bits;
        let pairs = [
            (&self.lower, &o.lower),
            (&self.lower, &o.upper),
            (&self.upper, &o.lower),
            (&self.upper, &o.upper),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| a.div_round(b, p, Round::Down))
            .min()
            .unwrap_or_else(Dyadic::zero);
        let hi = pairs
            .iter()
            .map(|(a, b)| a.div_round(b, p, Round::Up))
            .max()
            .unwrap_or_else(Dyadic::zero);
        Ok(CertifiedScalar::from_bounds(lo, hi, p))
    }

    /// Square root of the non-negative part. The caller guarantees the true
    /// value is non-negative, so a slightly negative lower bound is clamped.
    pub(crate) fn sqrt(&self) -> Result<CertifiedScalar, ScalarError> {
        if self.upper.signum() < 0 {
            return Err(ScalarError::NegativeRadicand);
        }
        let p = self.precision_bits;
        let lo = if self.lower.signum() <= 0 {
            Dyadic::zero()
        } else {
            self.lower.sqrt_round(p, Round::Down)
        };
        Ok(CertifiedScalar::from_bounds(lo, self.upper.sqrt_round(p, Round::Up), p))
    }

    /// Decimal rendering `mid +/- radius` used in exported certificates.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let two = BigRational::from_integer(2.into());
        let mid = (self.lower.to_rational() + self.upper.to_rational()) / &two;
        let rad = self.width() / two;
        // Round the radius up to one significant digit so the printed bound
        // still covers the rounding of the midpoint.
        let ulp = BigRational::new(BigInt::one(), BigInt::from(10).pow(digits as u32));
        let bound = rad + ulp;
        format!("{} +/- {:.1e}", rational_to_decimal(&mid, digits), rational_to_f64(&bound) * 1.05)
    }
}

impl fmt::Display for CertifiedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17e}, {:.17e}]", self.lower.to_f64(), self.upper.to_f64())
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let d = Dyadic::from_rational(q, 64, Round::Down);
    d.to_f64()
}

pub(crate) fn rational_to_decimal(q: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = (q * BigRational::from_integer(scale.clone())).round().to_integer();
    let neg = scaled.is_negative();
    let abs = scaled.abs();
    let int_part = &abs / &scale;
    let frac_part = &abs % &scale;
    let frac = format!("{:0>width$}", frac_part.to_string(), width = digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac)
}
