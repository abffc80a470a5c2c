//! The middle-slice reflection `σ`, the composite `rσ`, its fixed point, the
//! rotation angle on the corner plane, the fibred predicate and the Euler
//! number obtained by deforming from the plane configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{form, projectively_equal, Isometry5, Vec5};
use crate::necklace::{build_config, segment_s, validate_triple, NecklaceConfig};
use crate::scalar::{cos_frac, Precision, Real, Sign};

/// The map `x ↦ u ⟨x, v⟩`.
fn outer(u: &Vec5, v: &Vec5) -> Isometry5 {
    Isometry5::from_fn(|i, j| {
        let vj = if j == 4 { v.0[j].clone() } else { -&v.0[j] };
        &u.0[i] * &vj
    })
}

fn add(a: &Isometry5, b: &Isometry5) -> Isometry5 {
    Isometry5::from_fn(|i, j| &a.0[i][j] + &b.0[i][j])
}

fn scaled(a: &Isometry5, s: &Real) -> Isometry5 {
    Isometry5::from_fn(|i, j| &a.0[i][j] * s)
}

/// `p_1 − p_{n−1}`, the second normal of the middle slice.
pub fn slice_normal(cfg: &NecklaceConfig) -> Vec5 {
    cfg.p(1) - cfg.p(-1)
}

fn inv_g2_plus_one(cfg: &NecklaceConfig) -> Result<Real> {
    Ok(Real::one().checked_div(&(cfg.g(2) + Real::one()))?)
}

/// `v ↦ v + 2⟨v,p_0⟩p_0 + ⟨v,w⟩/(g_2+1) · w` with `w = p_1 − p_{n−1}`.
pub fn sigma(cfg: &NecklaceConfig) -> Result<Isometry5> {
    cfg.require_inside()?;
    let w = slice_normal(cfg);
    let p0 = cfg.p(0);
    let m = add(
        &add(&Isometry5::identity(), &scaled(&outer(p0, p0), &Real::from_int(2))),
        &scaled(&outer(&w, &w), &inv_g2_plus_one(cfg)?),
    );
    Ok(m)
}

/// `v ↦ rv + 2⟨v,p_0⟩p_1 + ⟨v,w⟩/(g_2+1) · (p_2 − p_0)`.
pub fn r_sigma(cfg: &NecklaceConfig) -> Result<Isometry5> {
    cfg.require_inside()?;
    let w = slice_normal(cfg);
    let shifted = cfg.p(2) - cfg.p(0);
    Ok(add(
        &add(&cfg.r, &scaled(&outer(cfg.p(1), cfg.p(0)), &Real::from_int(2))),
        &scaled(&outer(&shifted, &w), &inv_g2_plus_one(cfg)?),
    ))
}

/// Coordinates of `v ∈ span(p_0, p_1)` in that basis, or `None` if `v` leaves the span.
fn coordinates_in_u(cfg: &NecklaceConfig, v: &Vec5) -> Result<Option<[Real; 2]>> {
    let g1 = cfg.g(1);
    let det = Real::one() - g1 * g1;
    let (a, b) = (form(v, cfg.p(0)), form(v, cfg.p(1)));
    let alpha = (-&a - g1 * &b).checked_div(&det)?;
    let beta = (-(g1 * &a) - &b).checked_div(&det)?;
    let back = &cfg.p(0).scale(&alpha) + &cfg.p(1).scale(&beta);
    Ok((&back - v).is_zero().then_some([alpha, beta]))
}

/// Matrix of `rσ` restricted to `U = span(p_0, p_1)`, computed from the map.
pub fn u_matrix(cfg: &NecklaceConfig, r_sigma: &Isometry5) -> Result<[[Real; 2]; 2]> {
    let not_invariant = || Error::Precondition("rσ does not preserve span(p_0, p_1)".into());
    let c0 = coordinates_in_u(cfg, &r_sigma.apply(cfg.p(0)))?.ok_or_else(not_invariant)?;
    let c1 = coordinates_in_u(cfg, &r_sigma.apply(cfg.p(1)))?.ok_or_else(not_invariant)?;
    let [a0, b0] = c0;
    let [a1, b1] = c1;
    Ok([[a0, a1], [b0, b1]])
}

/// `f_0 = (1−g_1) b + ⟨b,p_0⟩(p_0 + p_1)`.
pub fn fixed_point_f0(cfg: &NecklaceConfig) -> Result<Vec5> {
    cfg.require_inside()?;
    let b = cfg.b();
    let bp0 = form(&b, cfg.p(0));
    Ok(&b.scale(&(Real::one() - cfg.g(1))) + &(cfg.p(0) + cfg.p(1)).scale(&bp0))
}

/// `p_1 + p_{n−1} + 2g_1 p_0`, the direction of the midpoint of the common perpendicular.
pub fn midpoint_m0(cfg: &NecklaceConfig) -> Vec5 {
    &(cfg.p(1) + cfg.p(-1)) + &cfg.p(0).scale(&cfg.g(1).scale_ratio(2, 1))
}

/// `((1−c_1²)c_m x1 + c_1(1−c_m²)x2) / ((1−c_1²)x1 + (1−c_m²)x2)`.
pub fn rotation_cos_at(c1: &Real, cm: &Real, x1: &Real, x2: &Real) -> Result<Real> {
    let (a, b) = rotation_coefficients(c1, cm);
    let num = &a * cm * x1 + c1 * &b * x2;
    let den = &a * x1 + &b * x2;
    Ok(num.checked_div(&den)?)
}

fn rotation_coefficients(c1: &Real, cm: &Real) -> (Real, Real) {
    (Real::one() - c1 * c1, Real::one() - cm * cm)
}

/// Cosine of the rotation angle of `rσ` about `f_0`, by the closed form.
pub fn rotation_cos(cfg: &NecklaceConfig) -> Result<Real> {
    cfg.require_inside()?;
    rotation_cos_at(cfg.c(1), cfg.c(cfg.m), &cfg.x1, &cfg.x2)
}

/// `1 + 2c_1 + 2c_m + 2g_1 + (g_1 − g_3)/(g_2 + 1)`.
pub fn trace_closed_form(cfg: &NecklaceConfig) -> Result<Real> {
    let two = Real::from_int(2);
    let frac = (cfg.g(1) - cfg.g(3)).checked_div(&(cfg.g(2) + Real::one()))?;
    Ok(Real::one() + &two * cfg.c(1) + &two * cfg.c(cfg.m) + &two * cfg.g(1) + frac)
}

/// `(tr(rσ) − tr(u) − 1) / 2`.
pub fn rotation_cos_from_trace(r_sigma: &Isometry5, u: &[[Real; 2]; 2]) -> Real {
    (r_sigma.trace() - &u[0][0] - &u[1][1] - Real::one()).scale_ratio(1, 2)
}

/// Everything attached to `rσ` at one configuration.
#[derive(Debug, Clone)]
pub struct FibrationData {
    pub sigma: Isometry5,
    pub r_sigma: Isometry5,
    pub u_matrix: [[Real; 2]; 2],
    pub f0: Vec5,
    pub midpoint: Vec5,
    pub cos_a: Real,
    pub cos_a_from_trace: Real,
}

pub fn fibration_data(cfg: &NecklaceConfig) -> Result<FibrationData> {
    let sigma = sigma(cfg)?;
    let r_sigma = r_sigma(cfg)?;
    let u = u_matrix(cfg, &r_sigma)?;
    let cos_a_from_trace = rotation_cos_from_trace(&r_sigma, &u);
    Ok(FibrationData {
        f0: fixed_point_f0(cfg)?,
        midpoint: midpoint_m0(cfg),
        cos_a: rotation_cos(cfg)?,
        sigma,
        r_sigma,
        u_matrix: u,
        cos_a_from_trace,
    })
}

/// Named exact identities satisfied by the data; each entry is `(name, holds)`.
pub fn identity_checks(cfg: &NecklaceConfig, d: &FibrationData, policy: Precision) -> Result<Vec<(String, bool)>> {
    let g1 = cfg.g(1);
    let two_g1 = g1.scale_ratio(2, 1);
    let expected_u = [[Real::zero(), Real::one()], [Real::from_int(-1), two_g1.clone()]];
    let u_ok = (0..2).all(|i| (0..2).all(|j| (&d.u_matrix[i][j] - &expected_u[i][j]).is_zero()));
    let det_u = &d.u_matrix[0][0] * &d.u_matrix[1][1] - &d.u_matrix[0][1] * &d.u_matrix[1][0];
    let image_p0 = d.r_sigma.apply(cfg.p(0));
    let image_p1 = d.r_sigma.apply(cfg.p(1));
    let w = slice_normal(cfg);
    let trace = d.r_sigma.trace();
    let f0_interior = form(&d.f0, &d.f0).sign(policy).verdict == Sign::StrictlyPositive;
    Ok(vec![
        ("sigma is an involution".into(), d.sigma.compose(&d.sigma).is_identity()),
        ("sigma preserves the form".into(), d.sigma.preserves_form()),
        ("sigma negates p_0".into(), (&d.sigma.apply(cfg.p(0)) + cfg.p(0)).is_zero()),
        ("sigma negates p_1 - p_{n-1}".into(), (&d.sigma.apply(&w) + &w).is_zero()),
        ("sigma fixes the midpoint direction".into(), projectively_equal(&d.sigma.apply(&d.midpoint), &d.midpoint)),
        ("r_sigma equals r composed with sigma".into(), d.r_sigma.exactly_equals(&cfg.r.compose(&d.sigma))),
        ("r_sigma preserves the form".into(), d.r_sigma.preserves_form()),
        ("r_sigma p_0 = -p_1".into(), (&image_p0 + cfg.p(1)).is_zero()),
        ("r_sigma p_1 = p_0 + 2 g_1 p_1".into(), (&image_p1 - &(cfg.p(0) + &cfg.p(1).scale(&two_g1))).is_zero()),
        ("restriction to U is [[0,1],[-1,2g_1]]".into(), u_ok),
        ("restriction to U has determinant 1".into(), (det_u - Real::one()).is_zero()),
        ("<f_0,p_0> = 0".into(), form(&d.f0, cfg.p(0)).is_zero()),
        ("<f_0,p_1> = 0".into(), form(&d.f0, cfg.p(1)).is_zero()),
        ("f_0 is interior".into(), f0_interior),
        ("r_sigma f_0 = f_0 projectively".into(), projectively_equal(&d.r_sigma.apply(&d.f0), &d.f0)),
        ("trace(r_sigma) closed form".into(), (&trace - trace_closed_form(cfg)?).is_zero()),
        (
            "trace(r_sigma) = 2 g_1 + 1 + 2 cos a".into(),
            (&trace - &two_g1 - Real::one() - d.cos_a.scale_ratio(2, 1)).is_zero(),
        ),
        ("closed-form cos a equals trace-derived cos a".into(), (&d.cos_a - &d.cos_a_from_trace).is_zero()),
    ])
}

/// Outcome of the fibred test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fibred {
    /// `cos a = c_j` holds exactly.
    Exact(i64),
    /// `cos a` differs from every `c_j` by a certified margin.
    NotFibred,
    /// Some comparison stayed undecided; exact equality cannot be shown numerically.
    Inexact,
}

impl Fibred {
    pub fn index(self) -> Option<i64> {
        match self {
            Fibred::Exact(j) => Some(j),
            _ => None,
        }
    }
}

pub fn is_fibred(cfg: &NecklaceConfig, policy: Precision) -> Result<Fibred> {
    let cos_a = rotation_cos(cfg)?;
    let mut all_certified = true;
    for j in 1..=cfg.n / 2 {
        let diff = &cos_a - cfg.c(j);
        if diff.is_zero() {
            return Ok(Fibred::Exact(j));
        }
        all_certified &= diff.sign(policy).verdict.is_decided();
    }
    Ok(if all_certified {
        Fibred::NotFibred
    } else {
        Fibred::Inexact
    })
}

/// `cos a(t) = (a1 t + a2) / (a3 t + a4)` along a straight path.
#[derive(Debug, Clone)]
pub struct MobiusPath {
    pub a1: Real,
    pub a2: Real,
    pub a3: Real,
    pub a4: Real,
}

impl MobiusPath {
    pub fn new(c1: &Real, cm: &Real, start: (&Real, &Real), end: (&Real, &Real)) -> Self {
        let (a, b) = rotation_coefficients(c1, cm);
        let d1 = end.0 - start.0;
        let d2 = end.1 - start.1;
        MobiusPath {
            a1: &a * cm * &d1 + c1 * &b * &d2,
            a2: &a * cm * start.0 + c1 * &b * start.1,
            a3: &a * &d1 + &b * &d2,
            a4: &a * start.0 + &b * start.1,
        }
    }

    /// `a1 a4 − a2 a3`; its sign is the direction of monotonicity.
    pub fn determinant(&self) -> Real {
        &self.a1 * &self.a4 - &self.a2 * &self.a3
    }

    pub fn value(&self, t: &Real) -> Result<Real> {
        Ok((&self.a1 * t + &self.a2).checked_div(&(&self.a3 * t + &self.a4))?)
    }

    /// The parameter at which the value equals `c`, if the equation is not degenerate.
    pub fn preimage(&self, c: &Real) -> Result<Option<Real>> {
        let den = &self.a1 - c * &self.a3;
        if den.is_zero() {
            return Ok(None);
        }
        Ok(Some((c * &self.a4 - &self.a2).checked_div(&den)?))
    }
}

#[derive(Debug, Clone)]
pub struct Crossing {
    /// Index `i` of the grid value `c_i` that is crossed.
    pub index: i64,
    pub t: Real,
    pub sign: i64,
}

#[derive(Debug, Clone)]
pub struct EulerCount {
    /// Signed number of crossings with `t ∈ (0, 1]`.
    pub value: i64,
    /// The `j` with `cos a = c_j` at the end of the path.
    pub end_index: i64,
    pub monotonicity: Sign,
    pub crossings: Vec<Crossing>,
}

/// Start of the deformation path: the midpoint of the plane segment, `x2 = 0`.
pub fn path_start(k: i64, m: i64, n: i64) -> Result<(Real, Real)> {
    Ok((segment_s(k, m, n)?.midpoint(), Real::zero()))
}

/// Counts passages of `cos a(t)` through the grid `{c_i}` along the straight
/// path from the plane configuration to `end`.
pub fn euler_number(k: i64, m: i64, n: i64, end: (&Real, &Real), policy: Precision) -> Result<EulerCount> {
    validate_triple(k, m, n)?;
    let cfg = build_config(k, m, n, end.0.clone(), end.1.clone(), policy)?;
    cfg.require_inside()?;
    let end_index = is_fibred(&cfg, policy)?
        .index()
        .ok_or_else(|| Error::Precondition("the end of the path is not fibred".into()))?;
    let (sx1, sx2) = path_start(k, m, n)?;
    let path = MobiusPath::new(cfg.c(1), cfg.c(m), (&sx1, &sx2), end);
    let start_cos = path.value(&Real::zero())?;
    if !(&start_cos - cfg.c(m)).is_zero() {
        return Err(Error::Precondition("cos a at the plane configuration is not c_m".into()));
    }
    let monotonicity = path.determinant().sign(policy).verdict;
    let direction = match monotonicity {
        Sign::Zero => {
            return Ok(EulerCount {
                value: 0,
                end_index,
                monotonicity,
                crossings: Vec::new(),
            })
        }
        Sign::StrictlyPositive => 1,
        Sign::StrictlyNegative => -1,
        Sign::Undecided => return Err(Error::Undecided("monotonicity of cos a along the path".into())),
    };
    let one = Real::one();
    let mut crossings = Vec::new();
    for i in 0..=n / 2 {
        let Some(t) = path.preimage(cfg.c(i))? else {
            continue;
        };
        let after_start = t.sign(policy).verdict;
        let before_end = (&one - &t).sign(policy).verdict;
        if !after_start.is_decided() || !before_end.is_decided() {
            return Err(Error::Undecided(format!("position of the crossing with c_{i}")));
        }
        if after_start == Sign::StrictlyPositive && before_end != Sign::StrictlyNegative {
            crossings.push(Crossing {
                index: i,
                t,
                sign: direction,
            });
        }
    }
    Ok(EulerCount {
        value: crossings.iter().map(|c| c.sign).sum(),
        end_index,
        monotonicity,
        crossings,
    })
}

/// Grid value `c_j` as used by callers that only need the cosine.
pub fn grid_cos(j: i64, n: i64) -> Result<Real> {
    Ok(cos_frac(j, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::solve_system;

    fn p() -> Precision {
        Precision::default()
    }

    #[test]
    fn plane_point_has_cos_equal_to_c_m() {
        let cfg = build_config(2, 5, 24, Real::from_int(20), Real::zero(), p()).unwrap();
        let cos_a = rotation_cos(&cfg).unwrap();
        assert!((&cos_a - cfg.c(5)).is_zero());
        assert_eq!(is_fibred(&cfg, p()).unwrap(), Fibred::Exact(5));
    }

    #[test]
    fn identities_at_a_generic_point() {
        let cfg = build_config(2, 5, 24, Real::from_int(20), Real::from_ratio(1, 10), p()).unwrap();
        assert!(cfg.region.inside);
        let d = fibration_data(&cfg).unwrap();
        for (name, ok) in identity_checks(&cfg, &d, p()).unwrap() {
            assert!(ok, "{name}");
        }
        assert_eq!(is_fibred(&cfg, p()).unwrap(), Fibred::NotFibred);
    }

    #[test]
    fn solved_point_is_fibred_with_index_k() {
        let (x1, x2) = solve_system(2, 5, 24, p()).unwrap();
        let cfg = build_config(2, 5, 24, x1.clone(), x2.clone(), p()).unwrap();
        assert_eq!(is_fibred(&cfg, p()).unwrap(), Fibred::Exact(2));
        let d = fibration_data(&cfg).unwrap();
        for (name, ok) in identity_checks(&cfg, &d, p()).unwrap() {
            assert!(ok, "{name}");
        }
        let e = euler_number(2, 5, 24, (&x1, &x2), p()).unwrap();
        assert_eq!(e.value, 3);
        assert_eq!(e.end_index, 2);
        assert_eq!(e.monotonicity, Sign::StrictlyPositive);
    }

    #[test]
    fn end_on_the_segment_gives_zero() {
        let s = segment_s(2, 5, 24).unwrap();
        let x1 = s.at(&Real::from_ratio(1, 3));
        let e = euler_number(2, 5, 24, (&x1, &Real::zero()), p()).unwrap();
        assert_eq!(e.value, 0);
        assert_eq!(e.monotonicity, Sign::Zero);
    }
}
