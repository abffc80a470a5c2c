//! Exact real expressions in a normal form.
//!
//! A [`Real`] is `num / Π factor^e` where `num` is a polynomial in square-root
//! atoms with coefficients in the trigonometric algebra, and every denominator
//! factor is an atom-free polynomial normalised up to a rational scalar. An atom
//! is `√radicand` for an earlier `Real`; squaring an atom substitutes its
//! radicand. All rewrites are identities, so an empty numerator is a proof that
//! the value is exactly zero.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::coeff::Q;
use super::interval::CertifiedScalar;
use super::trig::{self, Trig, Turn};
use super::{Precision, ScalarError, Sign, SignCertificate};

/// Hash-consed shared node: cheap clones, fast equality on pointer or hash.
#[derive(Debug)]
pub(crate) struct Hashed<T>(Arc<(u64, T)>);

impl<T> Clone for Hashed<T> {
    fn clone(&self) -> Self {
        Hashed(Arc::clone(&self.0))
    }
}

impl<T: Hash> Hashed<T> {
    fn new(value: T) -> Self {
        let mut h = DefaultHasher::new();
        value.hash(&mut h);
        Hashed(Arc::new((h.finish(), value)))
    }
}

impl<T> Hashed<T> {
    pub(crate) fn get(&self) -> &T {
        &self.0 .1
    }
}

impl<T: PartialEq> PartialEq for Hashed<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0 .0 == other.0 .0 && self.0 .1 == other.0 .1)
    }
}

impl<T: Eq> Eq for Hashed<T> {}

impl<T: Ord> PartialOrd for Hashed<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Ord> Ord for Hashed<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.0 .0.cmp(&other.0 .0).then_with(|| self.0 .1.cmp(&other.0 .1))
    }
}

impl<T> Hash for Hashed<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0 .0);
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct AtomData {
    radicand: Real,
    depth: u32,
}

/// `√radicand`.
pub(crate) type Atom = Hashed<AtomData>;
/// Atom-free polynomial normalised so its leading rational coefficient is 1.
pub(crate) type Factor = Hashed<Poly>;

/// Sorted, duplicate-free product of atoms.
type Monomial = Vec<Atom>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Poly(BTreeMap<Monomial, Trig>);

impl Poly {
    fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    fn from_trig(t: Trig) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), t);
        p
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn is_atom_free(&self) -> bool {
        self.0.keys().all(|m| m.is_empty())
    }

    fn as_trig(&self) -> Option<Trig> {
        match self.0.len() {
            0 => Some(Trig::zero()),
            1 => self.0.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, t: Trig) {
        if t.is_zero() {
            return;
        }
        match self.0.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(t);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&t);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_assign(&mut self, other: &Poly) {
        for (m, t) in &other.0 {
            self.add_term(m.clone(), t.clone());
        }
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, t)| (m.clone(), t.neg())).collect())
    }

    fn scale(&self, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, t)| (m.clone(), t.scale(q))).collect())
    }

    /// Product with an atom-free polynomial; never produces squared atoms.
    fn mul_plain(&self, plain: &Poly) -> Poly {
        debug_assert!(plain.is_atom_free());
        let Some(t) = plain.0.get(&Vec::new()) else {
            return Poly::zero();
        };
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            out.add_term(m.clone(), c.mul(t));
        }
        out
    }

    fn max_depth_atom(&self) -> Option<Atom> {
        self.0
            .keys()
            .flat_map(|m| m.iter())
            .max_by(|a, b| a.get().depth.cmp(&b.get().depth).then_with(|| a.cmp(b)))
            .cloned()
    }

    /// Split into `(P, Q)` with `self = P + Q·atom` and neither part containing `atom`.
    fn split_on(&self, atom: &Atom) -> (Poly, Poly) {
        let mut without = Poly::zero();
        let mut with = Poly::zero();
        for (m, t) in &self.0 {
            if let Some(pos) = m.iter().position(|a| a == atom) {
                let mut rest = m.clone();
                rest.remove(pos);
                with.add_term(rest, t.clone());
            } else {
                without.add_term(m.clone(), t.clone());
            }
        }
        (without, with)
    }

    /// `(c, F)` with `self = c·F` and `F` having leading rational coefficient 1.
    fn normalize(&self) -> Option<(Q, Poly)> {
        let (_, lead) = self.0.iter().next_back()?;
        let c = lead.leading()?;
        let c = c.clone();
        let inv = c.recip();
        Some((c, self.scale(&inv)))
    }

    fn mul(&self, other: &Poly) -> Real {
        if self.is_zero() || other.is_zero() {
            return Real::zero();
        }
        let mut plain = Poly::zero();
        let mut squared: BTreeMap<Vec<Atom>, Poly> = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let (m, sq) = merge_monomials(ma, mb);
                let c = ca.mul(cb);
                if sq.is_empty() {
                    plain.add_term(m, c);
                } else {
                    squared.entry(sq).or_default().add_term(m, c);
                }
            }
        }
        let mut result = Real::from_poly(plain);
        for (sq, p) in squared {
            let mut term = Real::from_poly(p);
            for atom in &sq {
                term = term.mul_ref(&atom.get().radicand);
            }
            result = result.add_ref(&term);
        }
        result
    }
}

fn merge_monomials(a: &Monomial, b: &Monomial) -> (Monomial, Vec<Atom>) {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut sq = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                sq.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    (out, sq)
}

/// An exact real number in normal form; re-evaluable at any precision.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Real {
    num: Poly,
    den: BTreeMap<Factor, u32>,
}

impl Default for Real {
    fn default() -> Self {
        Real::zero()
    }
}

impl Real {
    pub fn zero() -> Self {
        Real {
            num: Poly::zero(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Real::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Real::from_q(Q::from_int(v))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Real::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Real::from_q(Q::from_big(q))
    }

    fn from_q(q: Q) -> Self {
        Real::from_poly(Poly::from_trig(Trig::constant(q)))
    }

    fn from_poly(num: Poly) -> Self {
        Real {
            num,
            den: BTreeMap::new(),
        }
    }

    /// `cos(2πω)` for a rational number of turns.
    pub fn cos_turn(w: Turn) -> Self {
        Real::from_poly(Poly::from_trig(Trig::cos(w)))
    }

    /// `sin(2πω)` for a rational number of turns.
    pub fn sin_turn(w: Turn) -> Self {
        Real::from_poly(Poly::from_trig(Trig::sin(w)))
    }

    /// Syntactic zero: the normal form has no terms.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The exact rational value, when the normal form is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.den.is_empty() {
            return None;
        }
        self.num.as_trig()?.as_constant().map(|q| q.to_big())
    }

    /// Number of stored terms; a rough size measure.
    pub fn term_count(&self) -> usize {
        self.num.0.values().map(Trig::term_count).sum::<usize>()
            + self.den.keys().map(|f| f.get().0.values().map(Trig::term_count).sum::<usize>()).sum::<usize>()
    }

    fn cancel(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        if self.den.is_empty() || !self.num.is_atom_free() {
            return self;
        }
        if let Some((c, f)) = self.num.normalize() {
            let key = Factor::new(f);
            if let Some(e) = self.den.get_mut(&key) {
                *e -= 1;
                if *e == 0 {
                    self.den.remove(&key);
                }
                self.num = Poly::from_trig(Trig::constant(c));
            }
        }
        self
    }

    fn factor_power_poly(factors: &BTreeMap<Factor, u32>) -> Poly {
        let mut acc = Poly::from_trig(Trig::constant(Q::one()));
        for (f, e) in factors {
            for _ in 0..*e {
                acc = acc.mul_plain(f.get());
            }
        }
        acc
    }

    pub(crate) fn add_ref(&self, other: &Real) -> Real {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let mut num = self.num.clone();
            num.add_assign(&other.num);
            return Real {
                num,
                den: self.den.clone(),
            }
            .cancel();
        }
        let mut den = self.den.clone();
        for (f, e) in &other.den {
            let slot = den.entry(f.clone()).or_insert(0);
            *slot = (*slot).max(*e);
        }
        let missing = |have: &BTreeMap<Factor, u32>| -> BTreeMap<Factor, u32> {
            den.iter()
                .filter_map(|(f, e)| {
                    let got = have.get(f).copied().unwrap_or(0);
                    (e > &got).then(|| (f.clone(), e - got))
                })
                .collect()
        };
        let mut num = self.num.mul_plain(&Real::factor_power_poly(&missing(&self.den)));
        num.add_assign(&other.num.mul_plain(&Real::factor_power_poly(&missing(&other.den))));
        Real { num, den }.cancel()
    }

    pub(crate) fn mul_ref(&self, other: &Real) -> Real {
        if self.is_zero() || other.is_zero() {
            return Real::zero();
        }
        let prod = self.num.mul(&other.num);
        let mut den = prod.den;
        for (f, e) in self.den.iter().chain(other.den.iter()) {
            *den.entry(f.clone()).or_insert(0) += e;
        }
        Real { num: prod.num, den }.cancel()
    }

    fn neg_ref(&self) -> Real {
        Real {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Real {
        self.scale_q(&Q::from_big(q.clone()))
    }

    fn scale_q(&self, q: &Q) -> Real {
        if q.is_zero() {
            return Real::zero();
        }
        Real {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    /// Multiplication by the rational `num/den`.
    pub fn scale_ratio(&self, num: i64, den: i64) -> Real {
        self.scale_q(&Q::from_big(BigRational::new(num.into(), den.into())))
    }

    /// Division; fails only when the divisor is syntactically zero.
    pub fn checked_div(&self, other: &Real) -> Result<Real, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Real::zero());
        }
        // x / (n/d) = x·d / n
        let numer = self.mul_ref(&Real::from_poly(Real::factor_power_poly(&other.den)));
        numer.div_by_poly(&other.num)
    }

    fn div_by_poly(&self, divisor: &Poly) -> Result<Real, ScalarError> {
        if divisor.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if divisor.is_atom_free() {
            let (c, f) = divisor.normalize().ok_or(ScalarError::DivisionByZero)?;
            let inv = c.recip();
            if f.as_trig().and_then(|t| t.as_constant()).is_some() {
                return Ok(self.scale_q(&inv));
            }
            let mut den = self.den.clone();
            *den.entry(Factor::new(f)).or_insert(0) += 1;
            return Ok(Real {
                num: self.num.scale(&inv),
                den,
            }
            .cancel());
        }
        // Rationalise the deepest atom: (P + Q·z)(P − Q·z) = P² − Q²·z².
        let atom = divisor.max_depth_atom().ok_or(ScalarError::DivisionByZero)?;
        let (p, q) = divisor.split_on(&atom);
        let z = Real::from_poly(Poly(BTreeMap::from([(vec![atom.clone()], Trig::constant(Q::one()))])));
        let p = Real::from_poly(p);
        let q = Real::from_poly(q);
        let conj = p.sub_ref(&q.mul_ref(&z));
        let norm = p.mul_ref(&p).sub_ref(&q.mul_ref(&q).mul_ref(&atom.get().radicand));
        if norm.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        self.mul_ref(&conj).checked_div(&norm)
    }

    fn sub_ref(&self, other: &Real) -> Real {
        self.add_ref(&other.neg_ref())
    }

    pub fn powi(&self, e: u32) -> Real {
        let mut acc = Real::one();
        for _ in 0..e {
            acc = acc.mul_ref(self);
        }
        acc
    }

    /// Exact square root of a certifiably non-negative value.
    pub fn sqrt(&self, policy: Precision) -> Result<Real, ScalarError> {
        if self.is_zero() {
            return Ok(Real::zero());
        }
        if let Some(q) = self.as_rational() {
            if q.is_negative() {
                return Err(ScalarError::NegativeRadicand);
            }
            let (n, d) = (q.numer(), q.denom());
            let (rn, rd) = (n.sqrt(), d.sqrt());
            if &(&rn * &rn) == n && &(&rd * &rd) == d {
                return Ok(Real::from_rational(BigRational::new(rn, rd)));
            }
        } else {
            match self.sign(policy).verdict {
                Sign::StrictlyPositive => {}
                Sign::StrictlyNegative => return Err(ScalarError::NegativeRadicand),
                _ => return Err(ScalarError::Undecided("sign of radicand")),
            }
        }
        let depth = self
            .atoms()
            .iter()
            .map(|a| a.get().depth)
            .max()
            .unwrap_or(0)
            + 1;
        let atom = Atom::new(AtomData {
            radicand: self.clone(),
            depth,
        });
        let mut num = Poly::zero();
        num.add_term(vec![atom], Trig::constant(Q::one()));
        Ok(Real::from_poly(num))
    }

    fn atoms(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self.num.0.keys().flat_map(|m| m.iter().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Certified enclosure at a fixed working precision.
    pub fn enclose(&self, bits: u32) -> Result<CertifiedScalar, ScalarError> {
        Evaluator::new(bits).eval(self)
    }

    /// Certified sign, escalating precision along the ladder.
    pub fn sign(&self, policy: Precision) -> SignCertificate {
        if self.is_zero() {
            return SignCertificate {
                verdict: Sign::Zero,
                bits_used: 0,
            };
        }
        let mut last = policy.start_bits;
        for bits in policy.ladder() {
            last = bits;
            if let Ok(iv) = self.enclose(bits) {
                if iv.lower.signum() > 0 {
                    return SignCertificate {
                        verdict: Sign::StrictlyPositive,
                        bits_used: bits,
                    };
                }
                if iv.upper.signum() < 0 {
                    return SignCertificate {
                        verdict: Sign::StrictlyNegative,
                        bits_used: bits,
                    };
                }
            }
        }
        SignCertificate {
            verdict: Sign::Undecided,
            bits_used: last,
        }
    }

    /// Double-precision approximation (midpoint of a 128-bit enclosure).
    pub fn to_f64(&self) -> f64 {
        self.enclose(128).map(|iv| iv.midpoint_f64()).unwrap_or(f64::NAN)
    }
}

/// Evaluation context holding per-precision caches of leaf enclosures.
pub struct Evaluator {
    bits: u32,
    trig: HashMap<(u32, u32), CertifiedScalar>,
    atoms: HashMap<Atom, CertifiedScalar>,
    factors: HashMap<Factor, CertifiedScalar>,
}

impl Evaluator {
    pub fn new(bits: u32) -> Self {
        Evaluator {
            bits,
            trig: HashMap::new(),
            atoms: HashMap::new(),
            factors: HashMap::new(),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn eval(&mut self, x: &Real) -> Result<CertifiedScalar, ScalarError> {
        let mut value = self.eval_poly(&x.num)?;
        for (f, e) in &x.den {
            let fv = match self.factors.get(f) {
                Some(v) => v.clone(),
                None => {
                    let v = self.eval_poly(f.get())?;
                    self.factors.insert(f.clone(), v.clone());
                    v
                }
            };
            for _ in 0..*e {
                value = value.div(&fv)?;
            }
        }
        Ok(value)
    }

    fn eval_trig(&mut self, t: &Trig) -> CertifiedScalar {
        let bits = self.bits;
        let mut acc = CertifiedScalar::exact(super::interval::Dyadic::zero(), bits);
        for (j, order, c) in t.terms() {
            let kv = self
                .trig
                .entry((j, order))
                .or_insert_with(|| trig::cos_turn_interval(Turn::new(j as i64, order as i64), bits))
                .clone();
            let cv = CertifiedScalar::from_rational(&c.to_big(), bits);
            acc = acc.add(&cv.mul(&kv));
        }
        acc
    }

    fn eval_atom(&mut self, a: &Atom) -> Result<CertifiedScalar, ScalarError> {
        if let Some(v) = self.atoms.get(a) {
            return Ok(v.clone());
        }
        let v = self.eval(&a.get().radicand)?.sqrt()?;
        self.atoms.insert(a.clone(), v.clone());
        Ok(v)
    }

    fn eval_poly(&mut self, p: &Poly) -> Result<CertifiedScalar, ScalarError> {
        let mut acc = CertifiedScalar::exact(super::interval::Dyadic::zero(), self.bits);
        for (m, t) in &p.0 {
            let mut term = self.eval_trig(t);
            for a in m {
                term = term.mul(&self.eval_atom(a)?);
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                self.$inner(rhs)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                (&self).$inner(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                (&self).$inner(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Real {
    fn div_panicking(&self, rhs: &Real) -> Real {
        self.checked_div(rhs)
            .expect("division by an expression that is exactly zero")
    }
}

forward_binop!(Div, div, div_panicking);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        self.neg_ref()
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        self.neg_ref()
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real::from_int(v)
    }
}

impl From<BigInt> for Real {
    fn from(v: BigInt) -> Self {
        Real::from_rational(BigRational::from_integer(v))
    }
}
