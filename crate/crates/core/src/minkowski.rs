//! The form space of signature `− − − − +`: vectors, the bilinear form,
//! reflections and explicit 5×5 isometries over exact scalars.

use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{CertifiedScalar, Precision, Real, Sign};

pub const DIM: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vec5(pub [Real; DIM]);

impl Vec5 {
    pub fn zero() -> Self {
        Vec5(std::array::from_fn(|_| Real::zero()))
    }

    /// The `i`-th basis vector; index 4 is the timelike axis.
    pub fn basis(i: usize) -> Self {
        let mut v = Vec5::zero();
        v.0[i] = Real::one();
        v
    }

    pub fn from_ints(c: [i64; DIM]) -> Self {
        Vec5(c.map(Real::from_int))
    }

    pub fn scale(&self, s: &Real) -> Vec5 {
        Vec5(std::array::from_fn(|i| &self.0[i] * s))
    }

    /// Every coordinate is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Real::is_zero)
    }

    /// Coordinatewise differences vanish exactly. Structural `==` may miss
    /// equal values written with different uncancelled factors.
    pub fn exactly_equals(&self, other: &Vec5) -> bool {
        (0..DIM).all(|i| (&self.0[i] - &other.0[i]).is_zero())
    }

    pub fn enclose(&self, bits: u32) -> Result<[CertifiedScalar; DIM]> {
        let mut out = Vec::with_capacity(DIM);
        for c in &self.0 {
            out.push(c.enclose(bits)?);
        }
        Ok(out.try_into().expect("five coordinates"))
    }

    pub fn to_f64(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[i].to_f64())
    }
}

impl Add for &Vec5 {
    type Output = Vec5;
    fn add(self, o: &Vec5) -> Vec5 {
        Vec5(std::array::from_fn(|i| &self.0[i] + &o.0[i]))
    }
}

impl Sub for &Vec5 {
    type Output = Vec5;
    fn sub(self, o: &Vec5) -> Vec5 {
        Vec5(std::array::from_fn(|i| &self.0[i] - &o.0[i]))
    }
}

impl Neg for &Vec5 {
    type Output = Vec5;
    fn neg(self) -> Vec5 {
        Vec5(std::array::from_fn(|i| -&self.0[i]))
    }
}

/// `⟨u,v⟩ = −u1v1 − u2v2 − u3v3 − u4v4 + u5v5`.
pub fn form(u: &Vec5, v: &Vec5) -> Real {
    let mut acc = &u.0[4] * &v.0[4];
    for i in 0..4 {
        acc = acc - &u.0[i] * &v.0[i];
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    Ideal,
    Exterior,
}

pub fn classify_point(v: &Vec5, policy: Precision) -> Result<PointClass> {
    if v.is_zero() {
        return Err(Error::Precondition("zero vector has no projective class".into()));
    }
    match form(v, v).sign(policy).verdict {
        Sign::StrictlyPositive => Ok(PointClass::Interior),
        Sign::Zero => Ok(PointClass::Ideal),
        Sign::StrictlyNegative => Ok(PointClass::Exterior),
        Sign::Undecided => Err(Error::Undecided("sign of ⟨v,v⟩".into())),
    }
}

fn require_unit_normal(p: &Vec5) -> Result<()> {
    if (form(p, p) + Real::one()).is_zero() {
        Ok(())
    } else {
        Err(Error::Precondition("normal is not exactly of norm −1".into()))
    }
}

/// `v + 2⟨v,p⟩p` for a normal with `⟨p,p⟩ = −1`.
pub fn reflect(p: &Vec5, v: &Vec5) -> Result<Vec5> {
    require_unit_normal(p)?;
    let c = form(v, p).scale_ratio(2, 1);
    Ok(v + &p.scale(&c))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairClass {
    /// Hyperplanes meet; carries `|⟨p,q⟩|`, the cosine of the dihedral angle.
    Intersecting { cos_angle: Real },
    Asymptotic,
    Ultraparallel,
}

pub fn classify_pair(p: &Vec5, q: &Vec5, policy: Precision) -> Result<PairClass> {
    require_unit_normal(p)?;
    require_unit_normal(q)?;
    let g = form(p, q);
    let excess = &g * &g - Real::one();
    match excess.sign(policy).verdict {
        Sign::StrictlyNegative => {
            let cos_angle = match g.sign(policy).verdict {
                Sign::StrictlyNegative => -g,
                Sign::Undecided => return Err(Error::Undecided("sign of ⟨p,q⟩".into())),
                _ => g,
            };
            Ok(PairClass::Intersecting { cos_angle })
        }
        Sign::Zero => Ok(PairClass::Asymptotic),
        Sign::StrictlyPositive => Ok(PairClass::Ultraparallel),
        Sign::Undecided => Err(Error::Undecided("|⟨p,q⟩| against 1".into())),
    }
}

/// All 2×2 minors `u_i v_j − u_j v_i` vanish exactly.
pub fn projectively_equal(u: &Vec5, v: &Vec5) -> bool {
    for i in 0..DIM {
        for j in (i + 1)..DIM {
            if !(&u.0[i] * &v.0[j] - &u.0[j] * &v.0[i]).is_zero() {
                return false;
            }
        }
    }
    true
}

/// An explicit 5×5 matrix acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isometry5(pub [[Real; DIM]; DIM]);

impl Isometry5 {
    pub fn identity() -> Self {
        Isometry5(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { Real::one() } else { Real::zero() })
        }))
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> Real) -> Self {
        Isometry5(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    /// The reflection `v ↦ v + 2⟨v,p⟩p` as a matrix.
    pub fn reflection(p: &Vec5) -> Result<Self> {
        require_unit_normal(p)?;
        // column j of J p, with J = diag(−1,−1,−1,−1,1)
        let jp: [Real; DIM] = std::array::from_fn(|j| if j == 4 { p.0[j].clone() } else { -&p.0[j] });
        Ok(Isometry5::from_fn(|i, j| {
            let delta = if i == j { Real::one() } else { Real::zero() };
            delta + (&p.0[i] * &jp[j]).scale_ratio(2, 1)
        }))
    }

    pub fn entry(&self, i: usize, j: usize) -> &Real {
        &self.0[i][j]
    }

    pub fn column(&self, j: usize) -> Vec5 {
        Vec5(std::array::from_fn(|i| self.0[i][j].clone()))
    }

    pub fn apply(&self, v: &Vec5) -> Vec5 {
        Vec5(std::array::from_fn(|i| {
            let mut acc = Real::zero();
            for j in 0..DIM {
                if !v.0[j].is_zero() && !self.0[i][j].is_zero() {
                    acc = acc + &self.0[i][j] * &v.0[j];
                }
            }
            acc
        }))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry5) -> Isometry5 {
        Isometry5::from_fn(|i, j| {
            let mut acc = Real::zero();
            for l in 0..DIM {
                if !self.0[i][l].is_zero() && !other.0[l][j].is_zero() {
                    acc = acc + &self.0[i][l] * &other.0[l][j];
                }
            }
            acc
        })
    }

    pub fn power(&self, e: u32) -> Isometry5 {
        let mut acc = Isometry5::identity();
        for _ in 0..e {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn sub(&self, other: &Isometry5) -> Isometry5 {
        Isometry5::from_fn(|i, j| &self.0[i][j] - &other.0[i][j])
    }

    pub fn trace(&self) -> Real {
        (0..DIM).fold(Real::zero(), |acc, i| acc + &self.0[i][i])
    }

    /// Every entry of `self − other` is exactly zero.
    pub fn exactly_equals(&self, other: &Isometry5) -> bool {
        (0..DIM).all(|i| (0..DIM).all(|j| (&self.0[i][j] - &other.0[i][j]).is_zero()))
    }

    pub fn is_identity(&self) -> bool {
        self.exactly_equals(&Isometry5::identity())
    }

    /// `⟨Mu, Mv⟩ − ⟨u, v⟩` vanishes exactly on all basis pairs.
    pub fn preserves_form(&self) -> bool {
        let cols: Vec<Vec5> = (0..DIM).map(|j| self.column(j)).collect();
        for a in 0..DIM {
            for b in a..DIM {
                let expect = form(&Vec5::basis(a), &Vec5::basis(b));
                if !(form(&cols[a], &cols[b]) - expect).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_f64(&self) -> [[f64; DIM]; DIM] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j].to_f64()))
    }
}
