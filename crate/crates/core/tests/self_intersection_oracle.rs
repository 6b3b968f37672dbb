
use geocensus_core::oracle::{classes_up_to, geometric_self_intersection};
use geocensus_core::hyperbolic::{build_surface, modular_torus};
use geocensus_core::words::{self_intersection, CurveClass};

#[test]
fn small_classes_match_geometry() {
    let s = modular_torus();
    let generic = build_surface(3.1, 4.7).unwrap();
    let mut checked = 0;
    let mut via_generic = 0;
    for c in classes_up_to(&s, 8) {
        if !c.is_primitive() {
            continue;
        }
        let combinatorial = self_intersection(&c);
        let geometric = match geometric_self_intersection(&s, &c) {
            Some(v) => v,
            None => {
                // crossing on a side of the domain: same marking, generic metric
                via_generic += 1;
                geometric_self_intersection(&generic, &c)
                    .unwrap_or_else(|| panic!("no geometric count for {c}"))
            }
        };
        assert_eq!(combinatorial, geometric, "class {c}");
        checked += 1;
    }
    assert!(checked > 600, "only {checked} classes");
    assert!(via_generic * 10 < checked, "{via_generic} of {checked} needed the generic metric");
}

#[test]
fn named_classes() {
    let s = modular_torus();
    for (w, expected) in [("a", 0), ("aB", 0), ("aab", 0), ("aabb", 1)] {
        let c = CurveClass::parse(w).unwrap();
        assert_eq!(geometric_self_intersection(&s, &c), Some(expected), "{w}");
    }
}
