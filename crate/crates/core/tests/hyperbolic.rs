use geocensus_core::error::GeometryError;
use geocensus_core::hyperbolic::{build_surface, modular_torus, translation_length, Moebius, UpperHalfPoint};
use geocensus_core::words::{evaluate, Letter};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rotation(theta: f64) -> Moebius {
    let (s, c) = (theta / 2.0).sin_cos();
    Moebius::new(c, s, -s, c).unwrap()
}

#[test]
fn determinant_survives_long_products() {
    // Conjugates of rotations by a fixed g stay in a compact group, so the
    // product stays bounded and can be compared with the closed form.
    let g = Moebius::new(2.0, 1.0, 1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut product = Moebius::IDENTITY;
    let mut total = 0.0;
    for _ in 0..100_000 {
        let theta = rng.gen_range(-3.0..3.0);
        total += theta;
        product = product.compose(&g.conjugate(&rotation(theta)));
    }
    assert!((product.det() - 1.0).abs() <= 1e-6);
    assert!(product.approx_eq(&g.conjugate(&rotation(total)), 1e-6));
}

fn arb_matrix() -> impl Strategy<Value = Moebius> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_filter_map("singular", |(a, b, c)| {
        // solve ad - bc = 1 for d
        (a.abs() > 0.1).then(|| Moebius::new(a, b, c, (1.0 + b * c) / a)).flatten()
    })
}

fn arb_point() -> impl Strategy<Value = UpperHalfPoint> {
    (-3.0f64..3.0, 0.05f64..5.0).prop_map(|(u, v)| UpperHalfPoint { u, v })
}

fn arb_word(max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop::sample::select(Letter::ALL.to_vec()), 0..=max)
}

/// All words of length 1..=n (unreduced ones are harmless here).
fn short_words(n: usize) -> Vec<Vec<Letter>> {
    let mut out: Vec<Vec<Letter>> = vec![vec![]];
    let mut layer = out.clone();
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|w| Letter::ALL.into_iter().map(move |l| [w.as_slice(), &[l]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out.remove(0);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn trace_is_conjugation_invariant(m in arb_matrix(), g in arb_matrix()) {
        let t = m.trace().abs();
        let conj = g.compose(&m).compose(&g.inverse()).trace().abs();
        prop_assert!((t - conj).abs() <= 1e-9 * t.max(1.0) * 100.0);
    }

    #[test]
    fn length_is_inversion_symmetric(m in arb_matrix()) {
        if let Ok(l) = translation_length(&m) {
            prop_assert_eq!(l, translation_length(&m.inverse()).unwrap());
        }
    }

    #[test]
    fn built_surfaces_have_a_cusp(x in 2.1f64..20.0, y in 2.1f64..20.0) {
        match build_surface(x, y) {
            Ok(s) => prop_assert!((s.commutator_trace() + 2.0).abs() <= 1e-6),
            Err(e) => prop_assert!(matches!(e, GeometryError::NoRealSolution { .. }), "{e}"),
        }
    }

    #[test]
    fn reduction_is_idempotent(p in arb_point()) {
        for s in [modular_torus(), build_surface(3.0, 4.0).unwrap()] {
            let (q, _) = s.reduce_to_domain(p).unwrap();
            let (r, g) = s.reduce_to_domain(q).unwrap();
            prop_assert_eq!(q, r);
            prop_assert!(g.approx_eq(&Moebius::IDENTITY, 0.0));
        }
    }

    #[test]
    fn reduction_is_equivariant(p in arb_point(), w in arb_word(6)) {
        for s in [modular_torus(), build_surface(3.0, 4.0).unwrap()] {
            let g = evaluate(&s, &w);
            let (q1, _) = s.reduce_to_domain(p).unwrap();
            let (q2, _) = s.reduce_to_domain(g.apply(p)).unwrap();
            prop_assert!(q1.distance(&q2) <= 1e-7, "{:?} {:?}", q1, q2);
        }
    }
}

#[test]
fn reduced_points_beat_all_short_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let words = short_words(3);
    for s in [modular_torus(), build_surface(3.0, 4.0).unwrap(), build_surface(13.4, 9.8).unwrap()] {
        let base = s.basepoint();
        let elements: Vec<Moebius> = words.iter().map(|w| evaluate(&s, w)).collect();
        for _ in 0..200 {
            let p = UpperHalfPoint { u: rng.gen_range(-3.0..3.0), v: rng.gen_range(0.05..5.0) };
            let depth = rng.gen_range(3..9);
            let w: Vec<Letter> = (0..depth).map(|_| Letter::ALL[rng.gen_range(0..4)]).collect();
            let deep = evaluate(&s, &w).apply(p);
            let (q, g) = s.reduce_to_domain(deep).unwrap();
            // rounding of the input alone moves it by about ε(|u|+1)/v, and
            // applying g amplifies that by up to its squared norm
            let [a, b, c, dd] = g.entries();
            let norm2 = a * a + b * b + c * c + dd * dd;
            let tol = 1e-9 + 1e3 * f64::EPSILON * norm2 * (deep.u.abs() + 1.0) / deep.v;
            assert!(g.apply(deep).distance(&q) < tol, "{w:?}");
            let d = q.distance(&base);
            for h in &elements {
                assert!(h.apply(q).distance(&base) >= d - 1e-9);
            }
        }
    }
}

#[test]
fn extreme_surfaces_refuse_to_reduce() {
    // The domain is not certified in double precision when both traces are large.
    let s = build_surface(18.06, 13.05).unwrap();
    assert!(matches!(
        s.reduce_to_domain(UpperHalfPoint::BASEPOINT),
        Err(GeometryError::UncertifiedDomain { .. })
    ));
}
