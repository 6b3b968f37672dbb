use geocensus_core::compare::{compare, isometry_test, length_ratio_extremes, rn_weight, Verdict, DEFAULT_TOLERANCE};
use geocensus_core::hyperbolic::{build_surface, modular_torus, SurfaceStructure};
use geocensus_core::orbits::{enumerate_simple, enumerate_type, Census, CensusEntry};
use geocensus_core::words::{curve_length, CurveClass};
use geocensus_core::CompareError;
use proptest::prelude::*;

/// The same classes with lengths measured on `t`.
fn transplant(census: &Census, t: &SurfaceStructure) -> Census {
    let entries = census
        .entries()
        .iter()
        .map(|e| CensusEntry { length: curve_length(t, &e.class).unwrap(), ..e.clone() })
        .collect();
    Census::new(t.label(), census.seed.clone(), f64::INFINITY, census.mode, census.margin, entries)
}

#[test]
fn identical_structures() {
    let s = modular_torus();
    let census = enumerate_simple(&s, 30.0).unwrap();
    assert_eq!(length_ratio_extremes(&s, &s, &census).unwrap(), (1.0, 1.0));
    for tol in [0.0, DEFAULT_TOLERANCE, 1.0] {
        assert_eq!(isometry_test(&s, &s, &census, tol).unwrap(), Verdict::IsometricWithinTol);
    }
}

#[test]
fn modular_and_34_torus_are_distinct() {
    let s = modular_torus();
    let t = build_surface(3.0, 4.0).unwrap();
    let census = enumerate_simple(&s, 30.0).unwrap();
    let (inf, sup) = length_ratio_extremes(&s, &t, &census).unwrap();
    assert!(sup > 1.01 && inf < 0.99, "{inf} {sup}");
    assert_eq!(isometry_test(&s, &t, &census, DEFAULT_TOLERANCE).unwrap(), Verdict::Distinct);
    // a vacuous tolerance accepts them
    assert_eq!(isometry_test(&s, &t, &census, 1.0).unwrap(), Verdict::IsometricWithinTol);

    let report = compare(&s, &t, &census, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(report.verdict, Verdict::Distinct);
    assert_eq!(report.rows.len(), census.len());
    for (row, e) in report.rows.iter().zip(census.entries()) {
        // identity marking: the same word on both sides
        assert_eq!(row.class, e.class);
        assert!(report.ratio_inf <= row.ratio && row.ratio <= report.ratio_sup);
        assert!((row.xi - row.ratio.powi(3)).abs() <= 1e-12 * row.xi);
        assert!((row.target_length - curve_length(&t, &row.class).unwrap()).abs() < 1e-12 * row.target_length);
    }
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["verdict"], "distinct");
    assert!(report.rows_to_csv().starts_with("word,length,target_length,ratio,xi\n"));
}

#[test]
fn weight_examples() {
    let s = modular_torus();
    let t = build_surface(3.0, 4.0).unwrap();
    let b = CurveClass::parse("b").unwrap();
    let oracle = (2.0 * 2.0f64.acosh() / (2.0 * 1.5f64.acosh())).powi(3);
    assert!((rn_weight(&s, &t, &b).unwrap() - oracle).abs() < 1e-9);
    let peripheral = CurveClass::parse("abAB").unwrap();
    assert!(rn_weight(&s, &t, &peripheral).is_err());
}

#[test]
fn single_curve_and_empty_census() {
    let s = modular_torus();
    let t = build_surface(3.0, 4.0).unwrap();
    let one = enumerate_type(&s, &CurveClass::parse("aabb").unwrap(), 7.3, 0.5).unwrap();
    let first = Census::new("one", one.seed.clone(), 7.3, one.mode, None, one.entries()[..1].to_vec());
    let (inf, sup) = length_ratio_extremes(&s, &t, &first).unwrap();
    assert_eq!(inf, sup);
    let empty = Census::new("empty", one.seed.clone(), 7.3, one.mode, None, vec![]);
    assert!(matches!(length_ratio_extremes(&s, &t, &empty), Err(CompareError::EmptyCensus)));
}

fn surface() -> impl Strategy<Value = SurfaceStructure> {
    (2.2f64..6.0, 2.2f64..6.0).prop_filter_map("no cusp", |(x, y)| build_surface(x, y).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn extremes_are_reciprocal(s in surface(), t in surface(), cutoff in 8.0f64..16.0) {
        let census = enumerate_simple(&s, cutoff).unwrap();
        let (inf, sup) = length_ratio_extremes(&s, &t, &census).unwrap();
        let (inf2, sup2) = length_ratio_extremes(&t, &s, &transplant(&census, &t)).unwrap();
        prop_assert!((inf * sup2 - 1.0).abs() < 1e-9);
        prop_assert!((sup * inf2 - 1.0).abs() < 1e-9);
        prop_assert!(inf <= sup);
    }

    #[test]
    fn xi_increases_with_the_ratio(s in surface(), t in surface()) {
        let census = enumerate_simple(&s, 10.0).unwrap();
        let mut rows = compare(&s, &t, &census, DEFAULT_TOLERANCE).unwrap().rows;
        rows.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
        for w in rows.windows(2) {
            if w[0].ratio < w[1].ratio {
                prop_assert!(w[0].xi < w[1].xi);
            }
            prop_assert!(w[0].xi > 0.0);
        }
    }
}
