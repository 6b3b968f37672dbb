use std::f64::consts::FRAC_PI_2;

use geocensus_core::hyperbolic::{build_surface, modular_torus, wrap_angle, Moebius, SurfaceStructure, UpperHalfPoint};
use geocensus_core::orbits::{enumerate_all_primitive, enumerate_simple, enumerate_type, Census};
use geocensus_core::phase::{
    build_histogram, occupancy_profile, sample_orbit, tv_distance, BinningSpec, PhaseHistogram,
};
use geocensus_core::words::{curve_length, evaluate, CurveClass, Letter};
use geocensus_core::PhaseError;
use proptest::prelude::*;

fn class(w: &str) -> CurveClass {
    CurveClass::parse(w).unwrap()
}

fn assert_flip_exact(h: &PhaseHistogram) {
    for c in 0..h.binning().cell_count() {
        assert_eq!(h.mass(c), h.mass(h.flip_cell(c)));
    }
}

/// Point and direction after flowing for time `t` from `(p, theta)`,
/// computed directly in the upper half-plane.
fn flow(p: UpperHalfPoint, theta: f64, t: f64) -> (UpperHalfPoint, f64) {
    let r = p.v.sqrt();
    let to_p = Moebius::new(r, p.u / r, 0.0, 1.0 / r).unwrap();
    // rotation about i turning the upward direction to theta
    let (sn, cs) = ((theta - FRAC_PI_2) / 2.0).sin_cos();
    let f = to_p.compose(&Moebius::new(cs, sn, -sn, cs).unwrap());
    let z = UpperHalfPoint { u: 0.0, v: t.exp() };
    (f.apply(z), wrap_angle(FRAC_PI_2 + f.derivative_angle(z)))
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(std::f64::consts::TAU - d)
}

/// Words of length 0..=3.
fn short_words() -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    for n in 0..3 {
        let longer: Vec<Vec<Letter>> = out
            .iter()
            .filter(|w| w.len() == n)
            .flat_map(|w| Letter::ALL.into_iter().map(move |l| [w.as_slice(), &[l]].concat()))
            .collect();
        out.extend(longer);
    }
    out
}

#[test]
fn samples_lie_on_the_closed_geodesic() {
    // Flowing a sample for one full period and reducing again must return
    // to the same unit tangent vector, up to a short element of the group
    // (a geodesic can run along a face of the domain, where two orbit
    // points tie).
    let words = short_words();
    for s in [modular_torus(), build_surface(3.0, 4.0).unwrap()] {
        let elements: Vec<Moebius> = words.iter().map(|w| evaluate(&s, w)).collect();
        let same_vector = |p: UpperHalfPoint, a: f64, q: UpperHalfPoint, b: f64| {
            elements.iter().any(|h| {
                h.apply(p).distance(&q) < 1e-6 && angle_gap(wrap_angle(a + h.derivative_angle(p)), b) < 1e-6
            })
        };
        for w in ["a", "aB", "aabb", "abAAB", "aabaB"] {
            let c = class(w);
            let l = curve_length(&s, &c).unwrap();
            let samples = sample_orbit(&s, &c, 0.1).unwrap();
            for smp in samples.iter().step_by(14) {
                let (q, theta) = flow(smp.position, smp.angle, l);
                let (r, g) = s.reduce_to_domain(q).unwrap();
                let back = wrap_angle(theta + g.derivative_angle(q));
                assert!(same_vector(smp.position, smp.angle, r, back), "{w}");
                // a fraction of the period does not come back
                let (q, theta) = flow(smp.position, smp.angle, 0.37 * l);
                let (r, g) = s.reduce_to_domain(q).unwrap();
                let back = wrap_angle(theta + g.derivative_angle(q));
                assert!(!same_vector(smp.position, smp.angle, r, back), "{w}");
            }
        }
    }
}

#[test]
fn samples_are_reduced_and_paired() {
    let s = modular_torus();
    let samples = sample_orbit(&s, &class("aabb"), 0.05).unwrap();
    for pair in samples.chunks(2) {
        assert_eq!(pair[0].position, pair[1].position);
        assert_eq!(pair[0].weight, pair[1].weight);
        assert!((angle_gap(pair[0].angle, pair[1].angle) - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(s.reduce_to_domain(pair[0].position).unwrap().0, pair[0].position);
    }
}

#[test]
fn histograms_are_flip_symmetric() {
    let s = modular_torus();
    let b = BinningSpec::default();
    let censuses = [
        enumerate_simple(&s, 20.0).unwrap(),
        enumerate_type(&s, &class("aabb"), 20.0, 0.5).unwrap(),
        enumerate_all_primitive(&s, 6.0).unwrap(),
    ];
    for census in &censuses {
        let h = build_histogram(&s, census, 0.05, &b).unwrap();
        assert_flip_exact(&h);
        let rel = (h.total_mass() - census.total_length()).abs() / census.total_length();
        assert!(rel < 1e-6, "{rel}");
    }
}

#[test]
fn histograms_are_additive() {
    let s = modular_torus();
    let b = BinningSpec::default();
    let census = enumerate_simple(&s, 20.0).unwrap();
    let split = |keep: bool| {
        let entries = census.entries().iter().enumerate().filter(|(i, _)| (i % 3 == 0) == keep);
        Census::new(
            census.surface_label.clone(),
            census.seed.clone(),
            census.cutoff,
            census.mode,
            None,
            entries.map(|(_, e)| e.clone()).collect(),
        )
    };
    let whole = build_histogram(&s, &census, 0.05, &b).unwrap();
    let mut sum = build_histogram(&s, &split(true), 0.05, &b).unwrap();
    sum.merge(&build_histogram(&s, &split(false), 0.05, &b).unwrap()).unwrap();
    for c in 0..b.cell_count() {
        assert!((whole.mass(c) - sum.mass(c)).abs() <= 1e-12 * whole.total_mass());
    }
    let coarse = PhaseHistogram::new(BinningSpec::new(6, 6, 8).unwrap(), "x").unwrap();
    assert!(matches!(sum.merge(&coarse), Err(PhaseError::BinningMismatch)));
    assert!(matches!(tv_distance(&whole, &coarse), Err(PhaseError::BinningMismatch)));
}

#[test]
fn step_robustness() {
    let s = modular_torus();
    let b = BinningSpec::default();
    for census in [enumerate_simple(&s, 30.0).unwrap(), enumerate_type(&s, &class("aabb"), 30.0, 0.5).unwrap()] {
        let h1 = build_histogram(&s, &census, 0.05, &b).unwrap();
        let h2 = build_histogram(&s, &census, 0.025, &b).unwrap();
        assert!(tv_distance(&h1, &h2).unwrap() < 0.02);
        assert!((h1.total_mass() - h2.total_mass()).abs() < 1e-9 * h1.total_mass());
    }
}

#[test]
fn tv_bounds() {
    let s = modular_torus();
    let b = BinningSpec::default();
    let h = build_histogram(&s, &enumerate_simple(&s, 10.0).unwrap(), 0.05, &b).unwrap();
    assert_eq!(tv_distance(&h, &h).unwrap(), 0.0);
    // a single sample pair and its complement in a coarse grid
    let one = |u: f64| {
        let mut x = PhaseHistogram::new(b.clone(), "one").unwrap();
        let p = UpperHalfPoint { u, v: s.basepoint().v };
        x.add_samples(&s, &[geocensus_core::PhaseSample { position: p, angle: 0.3, weight: 1.0 }]);
        x
    };
    let (left, right) = (one(s.basepoint().u - 0.5), one(s.basepoint().u + 0.5));
    assert_eq!(tv_distance(&left, &right).unwrap(), 1.0);
}

#[test]
fn single_curve_occupancy_is_one_dimensional() {
    let s = modular_torus();
    let one = |b: &BinningSpec| {
        let mut h = PhaseHistogram::new(b.clone(), "aabb").unwrap();
        h.add_samples(&s, &sample_orbit(&s, &class("aabb"), 0.01).unwrap());
        h
    };
    let base = BinningSpec::new(8, 8, 8).unwrap();
    let occ = occupancy_profile(&[one(&base), one(&base.refined(2).unwrap()), one(&base.refined(4).unwrap())]);
    for w in occ.windows(2) {
        assert!(w[1] >= w[0]);
        // a surface-filling set would grow by 2^3 per doubling
        assert!((w[1] as f64) <= 3.0 * w[0] as f64, "{occ:?}");
    }
}

#[test]
fn histograms_do_not_depend_on_thread_count() {
    let s = modular_torus();
    let census = enumerate_simple(&s, 25.0).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| build_histogram(&s, &census, 0.05, &BinningSpec::default()).unwrap().to_csv())
    };
    assert_eq!(run(1), run(4));
}

fn surfaces() -> impl Strategy<Value = SurfaceStructure> {
    prop::sample::select(vec![(3.0, 3.0), (3.0, 4.0), (2.5, 7.0)]).prop_map(|(x, y)| build_surface(x, y).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_is_conserved(
        s in surfaces(),
        step in 0.01f64..=0.1,
        bins in prop::sample::select(vec![(12, 12, 16), (5, 7, 2), (20, 20, 32)]),
        cutoff in 6.0f64..14.0,
    ) {
        let census = enumerate_simple(&s, cutoff).unwrap();
        let b = BinningSpec::new(bins.0, bins.1, bins.2).unwrap();
        let h = build_histogram(&s, &census, step, &b).unwrap();
        let rel = (h.total_mass() - census.total_length()).abs() / census.total_length();
        prop_assert!(rel < 1e-6);
        for c in 0..b.cell_count() {
            prop_assert_eq!(h.mass(c), h.mass(h.flip_cell(c)));
        }
        let smp = sample_orbit(&s, &census.entries()[0].class, step).unwrap();
        let w: f64 = smp.iter().map(|x| x.weight).sum();
        prop_assert!((w - census.entries()[0].length).abs() < 1e-12 * w);
    }
}
