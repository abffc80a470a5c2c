//! Trigonometric constants `cos(2πω)`, `sin(2πω)` for rational turns `ω`.
//!
//! Values are stored as elements of the real cyclotomic field `Q(cos 2π/L)`
//! in the basis `cos(2πk/L)`, `0 ≤ k < φ(L)/2`. Higher multiples are rewritten
//! with a per-order table derived from the cyclotomic polynomial `Φ_L`. The
//! basis is linearly independent over `Q`, so an element is zero exactly when
//! all of its coefficients are.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use super::coeff::Q;
use super::interval::{CertifiedScalar, Dyadic, Round};

/// A rational number of full turns.
pub type Turn = Ratio<i64>;

/// Coefficients of `Φ_l`, lowest degree first (monic).
fn cyclotomic(l: u32) -> Vec<i64> {
    // x^l - 1 divided by Φ_d for every proper divisor d.
    let mut p = vec![0i64; l as usize + 1];
    p[0] = -1;
    p[l as usize] = 1;
    for d in 1..l {
        if l % d == 0 {
            p = div_monic(&p, &cyclotomic(d));
        }
    }
    p
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (j, &b) in den.iter().enumerate() {
            rem[i + j] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// `rows[k]` expresses `cos(2πk/L)` in the basis, for every `0 ≤ k < L`.
struct Table {
    dim: usize,
    rows: Vec<Vec<Q>>,
}

thread_local! {
    static TABLES: RefCell<HashMap<u32, Rc<Table>>> = RefCell::new(HashMap::new());
}

fn table(order: u32) -> Rc<Table> {
    if let Some(t) = TABLES.with(|c| c.borrow().get(&order).cloned()) {
        return t;
    }
    let t = Rc::new(build_table(order));
    TABLES.with(|c| c.borrow_mut().insert(order, t.clone()));
    t
}

fn poly_mul_y(p: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero()];
    out.extend(p.iter().cloned());
    out
}

fn poly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            x.add(&y.neg())
        })
        .collect()
}

fn build_table(order: u32) -> Table {
    if order <= 2 {
        let rows = (0..order as i64).map(|k| vec![Q::from_int(if k == 0 { 1 } else { -1 })]).collect();
        return Table { dim: 1, rows };
    }
    let phi = cyclotomic(order);
    let dim = (phi.len() - 1) / 2;
    // With y = 2cos(2π/L), ζ^k + ζ^-k = C_k(y) where C_0 = 2, C_1 = y and
    // C_{k+1} = y C_k - C_{k-1}. Φ_L is palindromic, so Φ_L(ζ)/ζ^dim is a
    // combination of the C_k and gives the minimal polynomial of y.
    let mut cheb: Vec<Vec<Q>> = vec![vec![Q::from_int(2)], vec![Q::zero(), Q::one()]];
    while cheb.len() <= order.max(dim as u32 + 1) as usize {
        let k = cheb.len();
        cheb.push(poly_sub(&poly_mul_y(&cheb[k - 1]), &cheb[k - 2]));
    }
    let mut minimal = vec![Q::from_int(phi[dim])];
    for k in 1..=dim {
        let term: Vec<Q> = cheb[k].iter().map(|c| c.mul(&Q::from_int(phi[dim + k]))).collect();
        minimal = poly_sub(&minimal, &term.iter().map(Q::neg).collect::<Vec<_>>());
    }
    debug_assert!(minimal.len() == dim + 1 && minimal[dim].is_one());
    let reduce = |mut p: Vec<Q>| -> Vec<Q> {
        for i in (dim..p.len()).rev() {
            let c = std::mem::take(&mut p[i]);
            if c.is_zero() {
                continue;
            }
            for j in 0..dim {
                p[i - dim + j] = p[i - dim + j].add(&c.mul(&minimal[j]).neg());
            }
        }
        p.resize(dim, Q::zero());
        p
    };
    let rows = (0..order as usize)
        .map(|k| {
            // Power-basis form of C_k(y), then change to the basis C_j / 2.
            let mut v = reduce(cheb[k].clone());
            let mut row = vec![Q::zero(); dim];
            for j in (0..dim).rev() {
                let lead = if j == 0 { v[0].mul(&Q::half()) } else { v[j].clone() };
                if lead.is_zero() {
                    continue;
                }
                let scaled: Vec<Q> = cheb[j].iter().map(|x| x.mul(&lead)).collect();
                v = poly_sub(&v, &scaled);
                // C_k = Σ b_j C_j and C_j = 2 cos(2πj/L), so cos(2πk/L) = Σ b_j cos(2πj/L).
                row[j] = lead;
            }
            row
        })
        .collect();
    Table { dim, rows }
}

/// Element of the real cyclotomic field of conductor `order`. Trailing zeros
/// are trimmed and rational elements always use `order = 1`, so equal values
/// built at the same order compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Trig {
    order: u32,
    coeffs: Vec<Q>,
}

impl Default for Trig {
    fn default() -> Self {
        Trig::zero()
    }
}

impl Trig {
    pub(crate) fn zero() -> Self {
        Trig {
            order: 1,
            coeffs: Vec::new(),
        }
    }

    pub(crate) fn constant(q: Q) -> Self {
        Trig {
            order: 1,
            coeffs: vec![q],
        }
        .trimmed()
    }

    pub(crate) fn cos(w: Turn) -> Self {
        let order = u32::try_from(*w.denom()).expect("turn denominator fits u32");
        let k = w.numer().rem_euclid(*w.denom()) as usize;
        Trig {
            order,
            coeffs: table(order).rows[k].clone(),
        }
        .trimmed()
    }

    pub(crate) fn sin(w: Turn) -> Self {
        Trig::cos(Turn::new(1, 4) - w)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The value when this element is rational.
    pub(crate) fn as_constant(&self) -> Option<Q> {
        match self.coeffs.len() {
            0 => Some(Q::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub(crate) fn term_count(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// Coefficient of the highest basis element present.
    pub(crate) fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    /// `(k, L, c)` triples meaning `c · cos(2πk/L)`.
    pub(crate) fn terms(&self) -> impl Iterator<Item = (u32, u32, &Q)> {
        let order = self.order;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(k, c)| (k as u32, order, c))
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(Q::is_zero) {
            self.coeffs.pop();
        }
        if self.coeffs.len() <= 1 {
            self.order = 1;
        }
        self
    }

    /// Fold coefficients of `cos(2πk/L)`, any `k < L`, into the basis.
    fn reduce(order: u32, raw: Vec<Q>) -> Self {
        let t = table(order);
        let mut out: Vec<Q> = vec![Q::zero(); t.dim];
        for (k, c) in raw.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < t.dim {
                out[k] = out[k].add(&c);
            } else {
                for (o, r) in out.iter_mut().zip(&t.rows[k]) {
                    if !r.is_zero() {
                        *o = o.add(&c.mul(r));
                    }
                }
            }
        }
        Trig { order, coeffs: out }.trimmed()
    }

    /// Coefficients over the basis of conductor `order`, a multiple of `self.order`.
    fn lift(&self, order: u32) -> Vec<Q> {
        if self.order == order {
            return self.coeffs.clone();
        }
        let step = (order / self.order) as usize;
        let mut raw = vec![Q::zero(); order as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            raw[k * step] = c.clone();
        }
        Trig::reduce(order, raw).coeffs
    }

    pub(crate) fn add_assign(&mut self, other: &Trig) {
        if other.is_zero() {
            return;
        }
        let order = self.order.lcm(&other.order);
        let mut a = self.lift(order);
        let b = other.lift(order);
        if a.len() < b.len() {
            a.resize(b.len(), Q::zero());
        }
        for (x, y) in a.iter_mut().zip(&b) {
            *x = x.add(y);
        }
        *self = Trig { order, coeffs: a }.trimmed();
    }

    pub(crate) fn scale(&self, q: &Q) -> Trig {
        if q.is_zero() {
            return Trig::zero();
        }
        if q.is_one() {
            return self.clone();
        }
        Trig {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.mul(q)).collect(),
        }
    }

    pub(crate) fn neg(&self) -> Trig {
        Trig {
            order: self.order,
            coeffs: self.coeffs.iter().map(Q::neg).collect(),
        }
    }

    pub(crate) fn mul(&self, other: &Trig) -> Trig {
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let order = self.order.lcm(&other.order);
        let a = self.lift(order);
        let b = other.lift(order);
        // cos x cos y = (cos(x + y) + cos(x - y)) / 2
        let mut raw = vec![Q::zero(); a.len() + b.len() - 1];
        let half = Q::half();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let xh = x.mul(&half);
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let c = xh.mul(y);
                raw[i + j] = raw[i + j].add(&c);
                let d = i.abs_diff(j);
                raw[d] = raw[d].add(&c);
            }
        }
        Trig::reduce(order, raw)
    }
}

/// Reduce `ω` modulo 1/2 into `[0, 1/2)`, returning the sign picked up from
/// `cos(ω + 1/2) = -cos ω`.
fn reduce_half(w: Turn) -> (Turn, i64) {
    let twice = w * 2;
    let k = twice.floor().to_integer();
    let r = w - Turn::new(k, 2);
    let sign = if k.rem_euclid(2) == 0 { 1 } else { -1 };
    (r, sign)
}

/// Fixed-point value `v * 2^-w` with an absolute error bound of `err` units.
struct Fixed {
    v: BigInt,
    err: BigInt,
}

fn atan_inv(q: u64, w: u64) -> Fixed {
    let q = BigInt::from(q);
    let q2 = &q * &q;
    let mut power = (BigInt::one() << w) / &q;
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    loop {
        let term = &power / BigInt::from(2 * k + 1);
        if term.is_zero() {
            break;
        }
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        power = &power / &q2;
        k += 1;
    }
    // Each truncated power carries at most 2 units of error, each term at
    // most 3, and the omitted tail is below 1 unit.
    Fixed {
        v: sum,
        err: BigInt::from(4 * k + 4),
    }
}

fn pi_fixed(w: u64) -> Fixed {
    let a = atan_inv(5, w);
    let b = atan_inv(239, w);
    Fixed {
        v: a.v * 16 - b.v * 4,
        err: a.err * 16 + b.err * 4,
    }
}

/// `cos x` (or `sin x`) for `0 ≤ x ≤ 2` given in fixed point, by Taylor series.
fn series(x: &BigInt, w: u64, sine: bool) -> Fixed {
    let one = BigInt::one() << w;
    let x2 = (x * x) >> w;
    let mut term = if sine { x.clone() } else { one.clone() };
    let mut sum = term.clone();
    let mut k: u64 = 1;
    loop {
        let d = if sine {
            (2 * k) * (2 * k + 1)
        } else {
            (2 * k - 1) * (2 * k)
        };
        term = (&term * &x2) / (&one * BigInt::from(d));
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    Fixed {
        v: sum,
        err: BigInt::from(4 * k + 4),
    }
}

fn fixed_to_interval(f: Fixed, w: u64, prec: u32) -> CertifiedScalar {
    let lo = Dyadic::new(&f.v - &f.err, -(w as i64)).round(prec, Round::Down);
    let hi = Dyadic::new(&f.v + &f.err, -(w as i64)).round(prec, Round::Up);
    let one = Dyadic::from_int(1);
    let lo = lo.max(one.neg());
    let hi = hi.min(one);
    CertifiedScalar::from_bounds(lo, hi, prec)
}

fn rational_interval(n: i64, d: i64, prec: u32) -> CertifiedScalar {
    CertifiedScalar::from_rational(&BigRational::new(n.into(), d.into()), prec)
}

fn sqrt_over(num: i64, radicand: i64, den: i64, prec: u32) -> CertifiedScalar {
    // num * sqrt(radicand) / den with outward rounding.
    let r = rational_interval(radicand, 1, prec + 8).sqrt().expect("positive radicand");
    let s = r.mul(&rational_interval(num, den, prec + 8));
    CertifiedScalar::from_bounds(
        s.lower.round(prec, Round::Down),
        s.upper.round(prec, Round::Up),
        prec,
    )
}

/// Closed forms for the angles that are multiples of 1/8 or 1/12 of a turn,
/// for `ω` already reduced into `[0, 1/4]`.
fn closed_form(w: Turn, sine: bool, prec: u32) -> Option<CertifiedScalar> {
    let deg = w * 360;
    if !deg.is_integer() {
        return None;
    }
    let deg = deg.to_integer();
    let angle = if sine { 90 - deg } else { deg };
    // cos of `angle` degrees, angle in [0, 90].
    Some(match angle {
        0 => rational_interval(1, 1, prec),
        30 => sqrt_over(1, 3, 2, prec),
        45 => sqrt_over(1, 2, 2, prec),
        60 => rational_interval(1, 2, prec),
        90 => CertifiedScalar::exact(Dyadic::zero(), prec),
        _ => return None,
    })
}

/// Certified enclosure of `cos(2πω)` or `sin(2πω)` for `ω ∈ [0, 1/4]`.
pub(crate) fn eval_reduced(w: Turn, sine: bool, prec: u32) -> CertifiedScalar {
    if let Some(iv) = closed_form(w, sine, prec) {
        return iv;
    }
    let guard = 64;
    let wbits = prec as u64 + guard;
    let pi = pi_fixed(wbits);
    let num = BigInt::from(*w.numer()) * 2;
    let den = BigInt::from(*w.denom());
    let x: BigInt = Integer::div_floor(&(&pi.v * &num), &den);
    let x_err = (&pi.err * &num) / &den + 2;
    let s = series(&x, wbits, sine);
    // Both sin and cos are 1-Lipschitz.
    let total = Fixed {
        v: s.v,
        err: s.err + x_err,
    };
    fixed_to_interval(total, wbits, prec)
}


/// Enclosure of `cos(2πω)` for any rational `ω`.
pub fn cos_turn_interval(w: Turn, prec: u32) -> CertifiedScalar {
    let (r, s) = reduce_half(w);
    let quarter = Turn::new(1, 4);
    let iv = if r <= quarter {
        if r > Turn::new(1, 8) {
            eval_reduced(quarter - r, true, prec)
        } else {
            eval_reduced(r, false, prec)
        }
    } else {
        let r = Turn::new(1, 2) - r;
        let v = if r > Turn::new(1, 8) {
            eval_reduced(quarter - r, true, prec)
        } else {
            eval_reduced(r, false, prec)
        };
        v.neg()
    };
    if s > 0 {
        iv
    } else {
        iv.neg()
    }
}

/// Enclosure of `sin(2πω)` for any rational `ω`.
pub fn sin_turn_interval(w: Turn, prec: u32) -> CertifiedScalar {
    cos_turn_interval(Turn::new(1, 4) - w, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: i64, d: i64) -> Turn {
        Turn::new(n, d)
    }

    fn approx(x: &Trig) -> f64 {
        x.terms()
            .map(|(j, l, c)| {
                let c = c.to_big();
                let c = c.numer().to_string().parse::<f64>().unwrap() / c.denom().to_string().parse::<f64>().unwrap();
                c * (2.0 * std::f64::consts::PI * j as f64 / l as f64).cos()
            })
            .sum()
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic(24).len() - 1, 8);
        assert_eq!(table(24).dim, 4);
        assert_eq!(table(44).dim, 10);
        assert_eq!(cyclotomic(105).iter().filter(|&&c| c == -2).count(), 2);
    }

    #[test]
    fn structural_zeros_and_rationals() {
        assert!(Trig::cos(t(1, 4)).is_zero());
        assert!(Trig::cos(t(3, 4)).is_zero());
        assert!(Trig::sin(t(0, 1)).is_zero());
        assert!(Trig::sin(t(1, 2)).is_zero());
        assert_eq!(Trig::cos(t(1, 2)), Trig::constant(Q::from_int(-1)));
        assert_eq!(Trig::cos(t(1, 6)), Trig::constant(Q::half()));
        assert_eq!(Trig::cos(t(1, 3)).as_constant(), Some(Q::half().neg()));
        assert_eq!(Trig::sin(t(1, 8)), Trig::cos(t(1, 8)));
    }

    #[test]
    fn hidden_linear_relations_vanish() {
        // cos 15° - cos 75° - cos 45° = 0
        let mut x = Trig::cos(t(1, 24));
        x.add_assign(&Trig::cos(t(5, 24)).neg());
        x.add_assign(&Trig::cos(t(3, 24)).neg());
        assert!(x.is_zero());
        // cos 72° + cos 144° = -1/2
        let mut y = Trig::cos(t(1, 5));
        y.add_assign(&Trig::cos(t(2, 5)));
        assert_eq!(y, Trig::constant(Q::half().neg()));
    }

    #[test]
    fn values_match_floats() {
        for num in -50..50 {
            for den in [5, 8, 12, 24, 44] {
                let x = 2.0 * std::f64::consts::PI * (num as f64) / den as f64;
                assert!((approx(&Trig::cos(t(num, den))) - x.cos()).abs() < 1e-12);
                assert!((approx(&Trig::sin(t(num, den))) - x.sin()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cos_squared_plus_sin_squared_is_one() {
        for num in 1..24 {
            let c = Trig::cos(t(num, 24));
            let s = Trig::sin(t(num, 24));
            let mut sum = c.mul(&c);
            sum.add_assign(&s.mul(&s));
            assert_eq!(sum, Trig::constant(Q::one()));
        }
    }

    #[test]
    fn mixed_orders_combine() {
        // 2 cos(1/10) cos(1/5) = cos(3/10) + cos(1/10)
        let lhs = Trig::cos(t(1, 10)).mul(&Trig::cos(t(1, 5))).scale(&Q::from_int(2));
        let mut rhs = Trig::cos(t(3, 10));
        rhs.add_assign(&Trig::cos(t(1, 10)));
        let mut diff = lhs;
        diff.add_assign(&rhs.neg());
        assert!(diff.is_zero());
    }

    #[test]
    fn cos_fifteen_degrees_matches_closed_form() {
        let iv = cos_turn_interval(t(1, 24), 200);
        let expect = (6f64.sqrt() + 2f64.sqrt()) / 4.0;
        assert!((iv.midpoint_f64() - expect).abs() < 1e-15);
        assert!(iv.width() < BigRational::new(BigInt::one(), BigInt::one() << 199u32));
    }

    #[test]
    fn high_precision_cos_contains_double_value() {
        for num in -60..=160 {
            let w = t(num, 97);
            let iv = cos_turn_interval(w, 128);
            let x = 2.0 * std::f64::consts::PI * num as f64 / 97.0;
            assert!((iv.midpoint_f64() - x.cos()).abs() < 1e-14);
            let s = sin_turn_interval(w, 128);
            assert!((s.midpoint_f64() - x.sin()).abs() < 1e-14);
        }
    }
}
