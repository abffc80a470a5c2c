use necklace_core::oracle::{
    corner_signature, corner_subspace, euler_via_angle_tracking, form64, ideal_point_on_corner, sample_region_points,
    segment_midpoint64, solve_system64, trace_string, write_samples_csv, OracleConfig, V5,
};

const REFERENCE: [(i64, i64, i64); 3] = [(2, 5, 24), (3, 6, 24), (5, 11, 44)];

fn solved(k: i64, m: i64, n: i64) -> OracleConfig {
    let (x1, x2) = solve_system64(k, m, n).unwrap();
    OracleConfig::new(k, m, n, x1, x2).unwrap()
}

#[test]
fn frozen_solutions() {
    let expect = [
        (2.797_066_183_733_422_5, 1.220_609_184_567_663_8),
        (4.606_450_745_682_411_5, 0.843_038_997_100_766_6),
        (13.232_549_587_219_079, 0.865_311_724_963_051_0),
    ];
    for ((k, m, n), (e1, e2)) in REFERENCE.into_iter().zip(expect) {
        let (x1, x2) = solve_system64(k, m, n).unwrap();
        assert!((x1 - e1).abs() < 1e-12 * e1 && (x2 - e2).abs() < 1e-12, "({k},{m},{n})");
    }
}

#[test]
fn corner_subspace_examples() {
    let cfg = solved(2, 5, 24);
    let basis = corner_subspace(&cfg, 0);
    for v in &basis {
        assert!(form64(v, cfg.p(0)).abs() < 1e-12 && form64(v, cfg.p(1)).abs() < 1e-12);
    }
    assert_eq!(corner_signature(&basis), (2, 1));
    // f_0 = (1−g_1) b + ⟨b,p_0⟩(p_0 + p_1) with g_1 = 0 and b the timelike axis.
    let b = V5::new(0.0, 0.0, 0.0, 0.0, 1.0);
    let f0 = b + (cfg.p(0) + cfg.p(1)) * form64(&b, cfg.p(0));
    let mut residual = f0;
    for v in &basis {
        residual -= v * v.dot(&f0);
    }
    assert!(residual.norm() < 1e-12);
}

#[test]
fn ideal_points_and_closure() {
    for (k, m, n) in REFERENCE {
        let cfg = solved(k, m, n);
        for choice in 0..2 {
            let q = ideal_point_on_corner(&cfg, choice).unwrap();
            assert!(form64(&q, &q).abs() < 1e-12);
            assert!(form64(&q, cfg.p(0)).abs() < 1e-12 && form64(&q, cfg.p(1)).abs() < 1e-12);
            let t = trace_string(&cfg, &q);
            assert_eq!(t.steps, n as usize);
            assert_eq!(t.points.len(), n as usize + 1);
            assert!(t.closure_residual < 1e-9, "({k},{m},{n}) choice {choice}: {}", t.closure_residual);
        }
    }
}

#[test]
fn plane_configuration_closes() {
    let cfg = OracleConfig::new(2, 5, 24, segment_midpoint64(24), 0.0).unwrap();
    let q = ideal_point_on_corner(&cfg, 0).unwrap();
    assert!(trace_string(&cfg, &q).closure_residual < 1e-9);
}

#[test]
fn generic_points_do_not_close() {
    for (x1, x2) in sample_region_points(2, 5, 24, 5, 11).unwrap() {
        let cfg = OracleConfig::new(2, 5, 24, x1, x2).unwrap();
        let q = ideal_point_on_corner(&cfg, 0).unwrap();
        assert!(trace_string(&cfg, &q).closure_residual > 1e-3, "({x1}, {x2})");
    }
}

#[test]
fn angle_tracking_counts() {
    for ((k, m, n), e) in REFERENCE.into_iter().zip([3, 3, 6]) {
        let end = solve_system64(k, m, n).unwrap();
        let t = euler_via_angle_tracking(k, m, n, end, 16 * n as usize).unwrap();
        assert_eq!(t.count, e);
        assert!(t.samples.len() > 16 * n as usize);
    }
    assert!(euler_via_angle_tracking(2, 5, 24, (20.0, 0.0), 100).is_err());
}

#[test]
fn sample_csv_header() {
    let end = solve_system64(2, 5, 24).unwrap();
    let t = euler_via_angle_tracking(2, 5, 24, end, 384).unwrap();
    let mut buf = Vec::new();
    write_samples_csv(&t.samples, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t,cos_a,a_unwrapped"));
    assert_eq!(text.lines().count(), t.samples.len() + 1);
}
