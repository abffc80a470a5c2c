//! The cyclic configuration of hyperplanes: the elliptic rotation `r`, the
//! normals `p_i = r^i p_0`, their Gram coefficients, the feasible region of
//! parameters and the right-angle conditions for the reflection group.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{form, Isometry5, Vec5};
use crate::scalar::{cos_frac, sin_frac, CertifiedScalar, Precision, Real, Sign, SignCertificate};

/// Checks `n` even and `1 < k < m < n/2`.
pub fn validate_triple(k: i64, m: i64, n: i64) -> Result<()> {
    if n % 2 != 0 || n < 2 {
        return Err(Error::Domain(format!("n = {n} must be even")));
    }
    if !(1 < k && k < m && 2 * m < n) {
        return Err(Error::Domain(format!(
            "need 1 < k < m < n/2, got k = {k}, m = {m}, n = {n}"
        )));
    }
    Ok(())
}

/// Identifies one of the defining inequalities of the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InequalityId {
    /// `0 < x1`
    X1Positive,
    /// `0 ≤ x2`
    X2NonNegative,
    /// `1 < x1 + x2`
    SumAboveOne,
    /// `(1−c_1)x1 + (1−c_m)x2 < 2`
    Upper,
    /// `2 < (1−c_i)x1 + (1−c_{mi})x2` for `2 ≤ i ≤ n/2`
    Lower(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalityCheck {
    pub id: InequalityId,
    /// The slack, oriented so that the inequality holds iff it is positive
    /// (or zero, for `x2 ≥ 0`).
    pub slack: Real,
    pub certificate: SignCertificate,
    /// Enclosure of the slack at `certificate.bits_used`.
    pub enclosure: Option<CertifiedScalar>,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        match self.certificate.verdict {
            Sign::StrictlyPositive => true,
            Sign::Zero => self.id == InequalityId::X2NonNegative,
            _ => false,
        }
    }

    pub fn decided(&self) -> bool {
        self.certificate.verdict.is_decided()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionVerdict {
    pub inside: bool,
    /// False when some check stayed undecided at the precision cap.
    pub certified: bool,
    pub checks: Vec<InequalityCheck>,
}

impl RegionVerdict {
    /// The first failing check, preferring certified failures in order.
    pub fn first_failure(&self) -> Option<&InequalityCheck> {
        self.checks.iter().find(|c| !c.holds())
    }
}

fn check(id: InequalityId, slack: Real, policy: Precision) -> InequalityCheck {
    let certificate = slack.sign(policy);
    let enclosure = if certificate.bits_used > 0 {
        slack.enclose(certificate.bits_used).ok()
    } else {
        None
    };
    InequalityCheck {
        id,
        slack,
        certificate,
        enclosure,
    }
}

/// `(1−c_i)x1 + (1−c_{mi})x2`, the quantity `g_i + 1`.
fn gram_plus_one(c: &[Real], m: i64, n: i64, i: i64, x1: &Real, x2: &Real) -> Real {
    let ci = &c[i.rem_euclid(n) as usize];
    let cmi = &c[(m * i).rem_euclid(n) as usize];
    (Real::one() - ci) * x1 + (Real::one() - cmi) * x2
}

fn cosines(n: i64) -> Result<Vec<Real>> {
    (0..n).map(|i| cos_frac(i, n).map_err(Error::from)).collect()
}

fn sines(n: i64) -> Result<Vec<Real>> {
    (0..n).map(|i| sin_frac(i, n).map_err(Error::from)).collect()
}

fn region_with(c: &[Real], m: i64, n: i64, x1: &Real, x2: &Real, policy: Precision) -> RegionVerdict {
    let two = Real::from_int(2);
    let mut checks = vec![
        check(InequalityId::X1Positive, x1.clone(), policy),
        check(InequalityId::X2NonNegative, x2.clone(), policy),
        check(InequalityId::SumAboveOne, x1 + x2 - Real::one(), policy),
        check(
            InequalityId::Upper,
            &two - gram_plus_one(c, m, n, 1, x1, x2),
            policy,
        ),
    ];
    for i in 2..=n / 2 {
        checks.push(check(
            InequalityId::Lower(i),
            gram_plus_one(c, m, n, i, x1, x2) - &two,
            policy,
        ));
    }
    RegionVerdict {
        inside: checks.iter().all(InequalityCheck::holds),
        certified: checks.iter().all(InequalityCheck::decided),
        checks,
    }
}

/// Certified membership of `(x1, x2)` in the feasible region.
pub fn region_membership(k: i64, m: i64, n: i64, x1: &Real, x2: &Real, policy: Precision) -> Result<RegionVerdict> {
    validate_triple(k, m, n)?;
    Ok(region_with(&cosines(n)?, m, n, x1, x2, policy))
}

/// The open segment `(2/(1−c_2), 2/(1−c_1)) × {0}` contained in the region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub lower: Real,
    pub upper: Real,
}

impl Segment {
    pub fn midpoint(&self) -> Real {
        (&self.lower + &self.upper).scale_ratio(1, 2)
    }

    /// The point `lower + t (upper − lower)`.
    pub fn at(&self, t: &Real) -> Real {
        &self.lower + t * (&self.upper - &self.lower)
    }
}

pub fn segment_s(k: i64, m: i64, n: i64) -> Result<Segment> {
    validate_triple(k, m, n)?;
    let two = Real::from_int(2);
    let lower = &two / (Real::one() - cos_frac(2, n)?);
    let upper = &two / (Real::one() - cos_frac(1, n)?);
    Ok(Segment { lower, upper })
}

/// A triple together with parameters and all derived data.
#[derive(Debug, Clone)]
pub struct NecklaceConfig {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub x1: Real,
    pub x2: Real,
    /// `c_i = cos(2πi/n)` for `0 ≤ i < n`.
    pub c: Vec<Real>,
    pub s: Vec<Real>,
    pub r: Isometry5,
    pub p: Vec<Vec5>,
    pub g: Vec<Real>,
    pub region: RegionVerdict,
}

impl NecklaceConfig {
    pub fn idx(&self, i: i64) -> usize {
        i.rem_euclid(self.n) as usize
    }

    pub fn p(&self, i: i64) -> &Vec5 {
        &self.p[self.idx(i)]
    }

    pub fn g(&self, i: i64) -> &Real {
        &self.g[self.idx(i)]
    }

    pub fn c(&self, i: i64) -> &Real {
        &self.c[self.idx(i)]
    }

    /// The timelike basis vector `b`.
    pub fn b(&self) -> Vec5 {
        Vec5::basis(4)
    }

    pub fn require_inside(&self) -> Result<()> {
        if self.region.inside {
            Ok(())
        } else if !self.region.certified {
            Err(Error::Undecided("membership in the feasible region".into()))
        } else {
            Err(Error::Precondition("parameters lie outside the feasible region".into()))
        }
    }
}

/// The block rotation by `2π/n` on the first plane and `2πm/n` on the second.
pub fn rotation(m: i64, n: i64) -> Result<Isometry5> {
    let (c1, s1) = (cos_frac(1, n)?, sin_frac(1, n)?);
    let (cm, sm) = (cos_frac(m, n)?, sin_frac(m, n)?);
    let z = Real::zero;
    Ok(Isometry5([
        [c1.clone(), -&s1, z(), z(), z()],
        [s1, c1, z(), z(), z()],
        [z(), z(), cm.clone(), -&sm, z()],
        [z(), z(), sm, cm, z()],
        [z(), z(), z(), z(), Real::one()],
    ]))
}

pub fn build_config(k: i64, m: i64, n: i64, x1: Real, x2: Real, policy: Precision) -> Result<NecklaceConfig> {
    validate_triple(k, m, n)?;
    let undecided = |what: &str| Error::Undecided(what.to_string());
    match x1.sign(policy).verdict {
        Sign::StrictlyPositive => {}
        Sign::Undecided => return Err(undecided("sign of x1")),
        _ => return Err(Error::Domain("x1 must be positive".into())),
    }
    match x2.sign(policy).verdict {
        Sign::StrictlyPositive | Sign::Zero => {}
        Sign::Undecided => return Err(undecided("sign of x2")),
        _ => return Err(Error::Domain("x2 must be non-negative".into())),
    }
    let excess = &x1 + &x2 - Real::one();
    match excess.sign(policy).verdict {
        Sign::StrictlyPositive => {}
        Sign::Undecided => return Err(undecided("sign of x1 + x2 - 1")),
        _ => return Err(Error::Domain("x1 + x2 must exceed 1".into())),
    }
    let c = cosines(n)?;
    let s = sines(n)?;
    let r = rotation(m, n)?;
    let a1 = x1.sqrt(policy)?;
    let a2 = x2.sqrt(policy)?;
    let ab = excess.sqrt(policy)?;
    let nu = n as usize;
    let p: Vec<Vec5> = (0..nu)
        .map(|i| {
            let mi = (m as usize * i) % nu;
            Vec5([&c[i] * &a1, &s[i] * &a1, &c[mi] * &a2, &s[mi] * &a2, ab.clone()])
        })
        .collect();
    for i in 0..nu {
        if !r.apply(&p[i]).exactly_equals(&p[(i + 1) % nu]) {
            return Err(Error::Precondition(format!("r p_{i} differs from p_{}", (i + 1) % nu)));
        }
    }
    let g: Vec<Real> = (0..n)
        .map(|i| gram_plus_one(&c, m, n, i, &x1, &x2) - Real::one())
        .collect();
    for (i, gi) in g.iter().enumerate() {
        if !(form(&p[0], &p[i]) - gi).is_zero() {
            return Err(Error::Precondition(format!("Gram coefficient g_{i} mismatch")));
        }
    }
    let region = region_with(&c, m, n, &x1, &x2, policy);
    Ok(NecklaceConfig {
        k,
        m,
        n,
        x1,
        x2,
        c,
        s,
        r,
        p,
        g,
        region,
    })
}

/// `g_i = (1−c_i)x1 + (1−c_{mi})x2 − 1`, indices mod `n`.
pub fn gram_coefficient(cfg: &NecklaceConfig, i: i64) -> Real {
    gram_plus_one(&cfg.c, cfg.m, cfg.n, i, &cfg.x1, &cfg.x2) - Real::one()
}

/// Outcome of checking the right-angle conditions of the reflection group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PptReport {
    pub ok: bool,
    pub g1_zero: bool,
    /// `⟨p_i, p_{i+1}⟩ = 0` for every `i`; `None` when not attempted.
    pub neighbours_orthogonal: Option<bool>,
    /// `(τ_{i+1} τ_i)² = 1` for every `i`; `None` when not attempted.
    pub pair_relations: Option<bool>,
    pub failing_indices: Vec<i64>,
    /// Length of each codimension-2 cycle.
    pub cycle_length: u32,
    /// Total angle of each cycle, in full turns.
    pub cycle_angle_turns: u32,
}

/// The reflection `τ_i` in the hyperplane with normal `p_i`.
pub fn tau(cfg: &NecklaceConfig, i: i64) -> Result<Isometry5> {
    Isometry5::reflection(cfg.p(i))
}

pub fn ppt_check(cfg: &NecklaceConfig) -> Result<PptReport> {
    cfg.require_inside()?;
    let g1_zero = cfg.g(1).is_zero();
    let mut report = PptReport {
        ok: false,
        g1_zero,
        neighbours_orthogonal: None,
        pair_relations: None,
        failing_indices: Vec::new(),
        cycle_length: 4,
        cycle_angle_turns: 1,
    };
    if !g1_zero {
        return Ok(report);
    }
    let taus: Vec<Isometry5> = (0..cfg.n).map(|i| tau(cfg, i)).collect::<Result<_>>()?;
    let mut orthogonal = true;
    let mut relations = true;
    for i in 0..cfg.n {
        let ortho = form(cfg.p(i), cfg.p(i + 1)).is_zero();
        let pair = taus[cfg.idx(i + 1)].compose(&taus[cfg.idx(i)]);
        let rel = pair.compose(&pair).is_identity();
        if !(ortho && rel) {
            report.failing_indices.push(i);
        }
        orthogonal &= ortho;
        relations &= rel;
    }
    report.neighbours_orthogonal = Some(orthogonal);
    report.pair_relations = Some(relations);
    report.ok = orthogonal && relations;
    Ok(report)
}
