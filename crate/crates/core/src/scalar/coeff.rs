//! Rational coefficients with a machine-word fast path.
//!
//! Values that fit `i64 / i64` are always stored as [`Q::Small`]; the big
//! variant only holds values that do not, so equality and hashing stay
//! structural.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

#[derive(Clone, Debug)]
pub(crate) enum Q {
    /// Reduced fraction with positive denominator.
    Small(i64, i64),
    Big(BigRational),
}

impl Q {
    pub(crate) fn zero() -> Self {
        Q::Small(0, 1)
    }

    pub(crate) fn one() -> Self {
        Q::Small(1, 1)
    }

    pub(crate) fn half() -> Self {
        Q::Small(1, 2)
    }

    pub(crate) fn from_int(v: i64) -> Self {
        Q::Small(v, 1)
    }

    fn from_i128(n: i128, d: i128) -> Self {
        debug_assert!(d != 0);
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Q::Small(n, d),
            _ => Q::Big(BigRational::new_raw(n.into(), d.into())),
        }
    }

    pub(crate) fn from_big(q: BigRational) -> Self {
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Q::Small(n, d),
            _ => Q::Big(q),
        }
    }

    pub(crate) fn to_big(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(q) => q.clone(),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }

    pub(crate) fn is_one(&self) -> bool {
        matches!(self, Q::Small(1, 1))
    }

    pub(crate) fn add(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                if b == d {
                    Q::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    Q::from_i128(
                        *a as i128 * *d as i128 + *c as i128 * *b as i128,
                        *b as i128 * *d as i128,
                    )
                }
            }
            _ => Q::from_big(self.to_big() + o.to_big()),
        }
    }

    pub(crate) fn mul(&self, o: &Q) -> Q {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Q::from_big(self.to_big() * o.to_big()),
        }
    }

    pub(crate) fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) if *n != i64::MIN => Q::Small(-n, *d),
            _ => Q::from_big(-self.to_big()),
        }
    }

    pub(crate) fn recip(&self) -> Q {
        match self {
            Q::Small(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::Big(q) => Q::from_big(q.recip()),
        }
    }
}

impl PartialEq for Q {
    fn eq(&self, o: &Q) -> bool {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => a == c && b == d,
            (Q::Big(x), Q::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Q {}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Hash for Q {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Q::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Q::Big(q) => {
                1u8.hash(state);
                q.hash(state);
            }
        }
    }
}

impl Default for Q {
    fn default() -> Self {
        Q::zero()
    }
}

impl From<&BigRational> for Q {
    fn from(q: &BigRational) -> Self {
        Q::from_big(q.clone())
    }
}
