use necklace_core::necklace::{
    build_config, gram_coefficient, ppt_check, region_membership, segment_s, InequalityId,
};
use necklace_core::scalar::{Precision, Real};
use necklace_core::search::solve_system;
use necklace_core::Error;

fn p() -> Precision {
    Precision::default()
}

#[test]
fn plane_configuration() {
    let cfg = build_config(2, 5, 24, Real::from_int(20), Real::zero(), p()).unwrap();
    assert!((cfg.g(1).to_f64() + 0.318_516_525_781_365_73).abs() < 1e-12);
    assert_eq!(gram_coefficient(&cfg, 0).as_rational().unwrap(), num_rational::BigRational::from_integer((-1).into()));
    assert!((gram_coefficient(&cfg, 2).to_f64() - 1.679_491_924_311_227).abs() < 1e-12);
    for i in 1..24 {
        assert!((gram_coefficient(&cfg, i) - gram_coefficient(&cfg, 24 - i)).is_zero());
    }
    let report = ppt_check(&cfg).unwrap();
    assert!(!report.ok);
    assert!(!report.g1_zero);
}

#[test]
fn solved_configuration() {
    let (x1, x2) = solve_system(2, 5, 24, p()).unwrap();
    let cfg = build_config(2, 5, 24, x1, x2, p()).unwrap();
    assert!(cfg.g(1).is_zero());
    let report = ppt_check(&cfg).unwrap();
    assert!(report.ok);
    assert_eq!(report.neighbours_orthogonal, Some(true));
    assert_eq!(report.pair_relations, Some(true));
    assert!(report.failing_indices.is_empty());
}

#[test]
fn domain_errors() {
    let err = build_config(5, 2, 24, Real::from_int(20), Real::zero(), p()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    assert!(matches!(region_membership(2, 5, 25, &Real::one(), &Real::one(), p()), Err(Error::Domain(_))));
}

#[test]
fn region_examples() {
    let v = region_membership(2, 5, 24, &Real::from_int(20), &Real::zero(), p()).unwrap();
    assert!(v.inside && v.certified);
    assert_eq!(v.checks.len(), 15);
    let v = region_membership(2, 5, 24, &Real::one(), &Real::zero(), p()).unwrap();
    assert!(!v.inside);
    assert_eq!(v.first_failure().unwrap().id, InequalityId::SumAboveOne);
    let (x1, x2) = solve_system(2, 5, 24, p()).unwrap();
    let v = region_membership(2, 5, 24, &x1, &x2, p()).unwrap();
    assert!(v.inside && v.certified);
    assert!(v.checks.iter().all(|c| c.certificate.bits_used <= 512));
}

#[test]
fn plane_segment() {
    let s = segment_s(2, 5, 24).unwrap();
    assert!((s.lower.to_f64() - 14.928_203_230_275_509).abs() < 1e-12);
    assert!((s.upper.to_f64() - 58.695_480_540_981_037).abs() < 1e-11);
    let v = region_membership(2, 5, 24, &s.midpoint(), &Real::zero(), p()).unwrap();
    assert!(v.inside);
    let s8 = segment_s(2, 3, 8).unwrap();
    assert_eq!(s8.lower.as_rational().unwrap(), num_rational::BigRational::from_integer(2.into()));
    assert!((s8.upper.to_f64() - 6.828_427_124_746_19).abs() < 1e-12);
    // The endpoints themselves are not in the open region.
    let v = region_membership(2, 5, 24, &s.lower, &Real::zero(), p()).unwrap();
    assert!(!v.inside);
}
