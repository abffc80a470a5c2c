//! Randomized properties shared by the core property tests and the acceptance suite.

#![allow(dead_code)]

use necklace_core::fibration::{path_start, rotation_cos_at, MobiusPath};
use necklace_core::minkowski::{classify_pair, form, reflect, Isometry5, PairClass, Vec5};
use necklace_core::necklace::{build_config, region_membership, rotation, segment_s};
use necklace_core::oracle::sample_region_points;
use necklace_core::scalar::{cos_frac, sin_frac, Precision, Real, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

/// Minimum number of cases per suite.
pub const CASES: u32 = 128;

/// Triples used when a property needs a concrete configuration.
pub const TRIPLES: [(i64, i64, i64); 5] = [(2, 5, 24), (3, 6, 24), (5, 11, 44), (2, 4, 12), (3, 7, 20)];

pub type Suite = fn(&mut TestRunner) -> Result<(), String>;

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

pub fn suites() -> Vec<(&'static str, Suite)> {
    vec![
        ("interval containment", interval_containment),
        ("monotone refinement", monotone_refinement),
        ("angle symmetries", angle_symmetries),
        ("reflection involution", reflection_involution),
        ("form invariance", form_invariance),
        ("region convexity", region_convexity),
        ("pair classification matches region", pair_classification_matches_region),
        ("segment lies in region", segment_in_region),
        ("rotation cosine stays in [-1, 1]", rotation_cos_bounded),
        ("Mobius path monotonicity", mobius_monotone),
    ]
}

fn policy() -> Precision {
    Precision::default()
}

fn rat(n: i64, d: i64) -> Real {
    Real::from_ratio(n, d)
}

fn exact(x: f64) -> Real {
    Real::from_rational(BigRational::from_float(x).expect("finite"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (-1_000_000_000i64..1_000_000_000, 1i64..1_000_000_000)
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

pub fn interval_containment(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&(rational(), 32u32..600), |((n, d), bits)| {
        let q = BigRational::new(BigInt::from(n), BigInt::from(d));
        let iv = Real::from_rational(q.clone()).enclose(bits).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(iv.lower.to_rational() <= q && q <= iv.upper.to_rational(), format!("{q} not in {iv}"))
    }))
}

pub fn monotone_refinement(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (rational(), rational(), 1i64..48, (2i64..30).prop_map(|h| 2 * h));
    report(runner.run(&strat, |((a, b), (c, d), i, n)| {
        let x = rat(a, b) + rat(c, d) * cos_frac(i, n).unwrap() * sin_frac(i + 1, n).unwrap();
        let x = (&x * &x + Real::one()).sqrt(policy()).unwrap() - rat(c, b);
        let mut prev: Option<necklace_core::scalar::CertifiedScalar> = None;
        for bits in [64, 128, 256, 512] {
            let iv = x.enclose(bits).unwrap();
            if let Some(p) = &prev {
                ensure(iv.width() <= p.width(), "width grew with precision")?;
                ensure(
                    iv.lower.to_rational() <= p.upper.to_rational() && p.lower.to_rational() <= iv.upper.to_rational(),
                    "refined enclosure is disjoint from the coarse one",
                )?;
            }
            prev = Some(iv);
        }
        let fine = prev.unwrap();
        let approx = (a as f64 / b as f64)
            + (c as f64 / d as f64)
                * (std::f64::consts::TAU * i as f64 / n as f64).cos()
                * (std::f64::consts::TAU * (i + 1) as f64 / n as f64).sin();
        let approx = (approx * approx + 1.0).sqrt() - c as f64 / b as f64;
        ensure((fine.midpoint_f64() - approx).abs() <= 1e-6 * approx.abs().max(1.0), "midpoint far from double value")
    }))
}

pub fn angle_symmetries(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&((1i64..40).prop_map(|h| 2 * h), -100i64..100), |(n, i)| {
        let c = cos_frac(i, n).unwrap();
        let s = sin_frac(i, n).unwrap();
        ensure((&c - cos_frac(n - i, n).unwrap()).is_zero(), "cos(i) != cos(n - i)")?;
        ensure((&c - cos_frac(-i, n).unwrap()).is_zero(), "cos is not even")?;
        ensure((&s + sin_frac(-i, n).unwrap()).is_zero(), "sin is not odd")?;
        ensure((&c - cos_frac(2 * i, 2 * n).unwrap()).is_zero(), "cos depends on the representation")?;
        ensure((&c * &c + &s * &s - Real::one()).is_zero(), "cos^2 + sin^2 != 1")?;
        let double = cos_frac(2 * i, n).unwrap();
        ensure((&c * &c * Real::from_int(2) - Real::one() - double).is_zero(), "double angle fails")
    }))
}

/// A normal `p` with `⟨p,p⟩ = −1` built from four rationals of norm above 1.
fn unit_normal() -> impl Strategy<Value = [(i64, i64); 4]> {
    prop::array::uniform4((-40i64..40, 1i64..12)).prop_filter("norm above 1", |a| {
        a.iter().map(|(n, d)| (*n as f64 / *d as f64).powi(2)).sum::<f64>() > 1.05
    })
}

fn normal_from(a: &[(i64, i64); 4]) -> Vec5 {
    let coords: Vec<Real> = a.iter().map(|&(n, d)| rat(n, d)).collect();
    let sum = coords.iter().fold(Real::zero(), |s, c| s + c * c);
    let last = (sum - Real::one()).sqrt(policy()).unwrap();
    Vec5([coords[0].clone(), coords[1].clone(), coords[2].clone(), coords[3].clone(), last])
}

fn vector() -> impl Strategy<Value = [i64; 5]> {
    prop::array::uniform5(-50i64..50)
}

pub fn reflection_involution(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&(unit_normal(), vector()), |(a, v)| {
        let p = normal_from(&a);
        let v = Vec5::from_ints(v);
        let once = reflect(&p, &v).unwrap();
        ensure(reflect(&p, &once).unwrap().exactly_equals(&v), "reflection is not an involution")?;
        ensure(reflect(&p, &p).unwrap().exactly_equals(&-&p), "normal is not negated")?;
        let m = Isometry5::reflection(&p).unwrap();
        ensure(m.compose(&m).is_identity(), "matrix square is not the identity")?;
        ensure(m.apply(&v).exactly_equals(&once), "matrix and vector forms differ")
    }))
}

pub fn form_invariance(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (unit_normal(), vector(), vector(), 0usize..TRIPLES.len());
    report(runner.run(&strat, |(a, u, v, t)| {
        let p = normal_from(&a);
        let (u, v) = (Vec5::from_ints(u), Vec5::from_ints(v));
        let before = form(&u, &v);
        let after = form(&reflect(&p, &u).unwrap(), &reflect(&p, &v).unwrap());
        ensure((&before - after).is_zero(), "reflection changes the form")?;
        ensure(Isometry5::reflection(&p).unwrap().preserves_form(), "reflection matrix is not an isometry")?;
        let (_, m, n) = TRIPLES[t];
        let r = rotation(m, n).unwrap();
        ensure((before - form(&r.apply(&u), &r.apply(&v))).is_zero(), "rotation changes the form")
    }))
}

fn region_point() -> impl Strategy<Value = (usize, f64, f64)> {
    (0usize..TRIPLES.len(), any::<u64>()).prop_map(|(t, seed)| {
        let (k, m, n) = TRIPLES[t];
        let p = sample_region_points(k, m, n, 1, seed).unwrap()[0];
        (t, p.0, p.1)
    })
}

pub fn region_convexity(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (0usize..TRIPLES.len(), any::<u64>(), 0i64..=64);
    report(runner.run(&strat, |(t, seed, lam)| {
        let (k, m, n) = TRIPLES[t];
        let pts = sample_region_points(k, m, n, 2, seed).unwrap();
        let (a, b) = (pts[0], pts[1]);
        for (x1, x2) in [a, b] {
            let v = region_membership(k, m, n, &exact(x1), &exact(x2), policy()).unwrap();
            ensure(v.inside, format!("sample ({x1}, {x2}) rejected"))?;
        }
        let l = rat(lam, 64);
        let one_minus = Real::one() - &l;
        let x1 = &l * exact(a.0) + &one_minus * exact(b.0);
        let x2 = &l * exact(a.1) + &one_minus * exact(b.1);
        let v = region_membership(k, m, n, &x1, &x2, policy()).unwrap();
        ensure(v.inside && v.certified, "convex combination left the region")
    }))
}

pub fn pair_classification_matches_region(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (0usize..3, 1i64..6000, 0i64..3000);
    report(runner.run(&strat, |(t, a, b)| {
        let (k, m, n) = TRIPLES[t];
        // x1 ∈ (1, 61), x2 ∈ [0, 3): always admissible, often outside the region.
        let x1 = rat(100 + a, 100);
        let x2 = rat(b, 1000);
        let region = region_membership(k, m, n, &x1, &x2, policy()).unwrap();
        let cfg = build_config(k, m, n, x1, x2, policy()).unwrap();
        let neighbours = matches!(classify_pair(cfg.p(0), cfg.p(1), policy()).unwrap(), PairClass::Intersecting { .. });
        let others = (2..=n / 2)
            .all(|i| classify_pair(cfg.p(0), cfg.p(i), policy()).unwrap() == PairClass::Ultraparallel);
        ensure(region.inside == (neighbours && others), "pair classes disagree with the inequalities")
    }))
}

pub fn segment_in_region(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (0usize..TRIPLES.len(), 1i64..1000);
    report(runner.run(&strat, |(t, lam)| {
        let (k, m, n) = TRIPLES[t];
        let s = segment_s(k, m, n).unwrap();
        let x1 = s.at(&rat(lam, 1000));
        let v = region_membership(k, m, n, &x1, &Real::zero(), policy()).unwrap();
        ensure(v.inside && v.certified, "segment point outside the region")?;
        let c1 = cos_frac(1, n).unwrap();
        let cm = cos_frac(m, n).unwrap();
        let cos_a = rotation_cos_at(&c1, &cm, &x1, &Real::zero()).unwrap();
        ensure((cos_a - cm).is_zero(), "plane configuration does not rotate by 2πm/n")
    }))
}

pub fn rotation_cos_bounded(runner: &mut TestRunner) -> Result<(), String> {
    report(runner.run(&region_point(), |(t, x1, x2)| {
        let (_, m, n) = TRIPLES[t];
        let c1 = cos_frac(1, n).unwrap();
        let cm = cos_frac(m, n).unwrap();
        let c = rotation_cos_at(&c1, &cm, &exact(x1), &exact(x2)).unwrap();
        let above = (&c + Real::one()).sign(policy()).verdict;
        let below = (Real::one() - &c).sign(policy()).verdict;
        ensure(
            matches!(above, Sign::StrictlyPositive | Sign::Zero) && matches!(below, Sign::StrictlyPositive | Sign::Zero),
            format!("cos a = {} out of range", c.to_f64()),
        )
    }))
}

pub fn mobius_monotone(runner: &mut TestRunner) -> Result<(), String> {
    let strat = (region_point(), 0i64..=500, 0i64..=500);
    report(runner.run(&strat, |((t, x1, x2), u, w)| {
        let (k, m, n) = TRIPLES[t];
        let c1 = cos_frac(1, n).unwrap();
        let cm = cos_frac(m, n).unwrap();
        let (sx1, sx2) = path_start(k, m, n).unwrap();
        let (ex1, ex2) = (exact(x1), exact(x2));
        let path = MobiusPath::new(&c1, &cm, (&sx1, &sx2), (&ex1, &ex2));
        let det = path.determinant().sign(policy()).verdict;
        ensure(det.is_decided(), "determinant sign undecided")?;
        let (lo, hi) = (u.min(w), u.max(w));
        let (t0, t1) = (rat(lo, 500), rat(hi, 500));
        let v0 = path.value(&t0).unwrap();
        let v1 = path.value(&t1).unwrap();
        let step = (&v1 - &v0).sign(policy()).verdict;
        let expected = if lo == hi { Sign::Zero } else { det };
        ensure(step == expected, format!("step sign {step:?} but determinant {det:?}"))?;
        if det != Sign::Zero {
            let back = path.preimage(&v0).unwrap().expect("non-degenerate path");
            ensure((back - t0).is_zero(), "preimage does not invert the path")?;
        }
        Ok(())
    }))
}
