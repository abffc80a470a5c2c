#[path = "support/properties.rs"]
mod support;

use support::runner;

macro_rules! suite_test {
    ($name:ident) => {
        #[test]
        fn $name() {
            support::$name(&mut runner()).unwrap();
        }
    };
}

suite_test!(interval_containment);
suite_test!(monotone_refinement);
suite_test!(angle_symmetries);
suite_test!(reflection_involution);
suite_test!(form_invariance);
suite_test!(region_convexity);
suite_test!(pair_classification_matches_region);
suite_test!(segment_in_region);
suite_test!(rotation_cos_bounded);
suite_test!(mobius_monotone);

#[test]
fn every_suite_is_registered() {
    assert_eq!(support::suites().len(), 10);
}
