//! Brute-force checks used by `verify` and the tests. They do not share
//! code paths with the algorithms they check.

use std::collections::BTreeSet;

use crate::hyperbolic::{axis, Moebius, SurfaceStructure};
use crate::words::{curve_length, evaluate, is_peripheral, simple_from_slope, CurveClass, Letter, Slope};

/// Boundary point `t ∈ R ∪ {∞}` as a point of the unit circle in the Klein
/// model, via `t ↦ (t - i)/(t + i)`.
fn klein(t: f64) -> (f64, f64) {
    if t.is_infinite() {
        return (1.0, 0.0);
    }
    let den = t * t + 1.0;
    ((t * t - 1.0) / den, -2.0 * t / den)
}

fn angle(t: f64) -> f64 {
    let (x, y) = klein(t);
    y.atan2(x).rem_euclid(std::f64::consts::TAU)
}

fn parabolic_fixed_point(m: &Moebius) -> f64 {
    let [a, _, c, d] = m.entries();
    if c.abs() < 1e-14 {
        f64::INFINITY
    } else {
        (a - d) / (2.0 * c)
    }
}

/// Ideal quadrilateral fundamental domain with vertices `p, A^-1 p,
/// A^-1 B^-1 p, B^-1 p`, `p` the cusp of `ABA^-1B^-1`. Side `k` joins
/// vertex `k` to vertex `k + 1`.
pub struct IdealQuadrilateral {
    vertices: [f64; 4],
    angles: [f64; 4],
}

impl IdealQuadrilateral {
    pub fn new(s: &SurfaceStructure) -> IdealQuadrilateral {
        let a = *s.gen_a();
        let b = *s.gen_b();
        let p = parabolic_fixed_point(&s.commutator());
        let ai = a.inverse();
        let bi = b.inverse();
        let vertices = [
            p,
            ai.apply_boundary(p),
            ai.compose(&bi).apply_boundary(p),
            bi.apply_boundary(p),
        ];
        let angles = vertices.map(angle);
        IdealQuadrilateral { vertices, angles }
    }

    pub fn vertices(&self) -> [f64; 4] {
        self.vertices
    }

    /// Index of the boundary arc between vertex k and k+1 containing `t`.
    fn arc_of(&self, t: f64) -> Option<usize> {
        let phi = angle(t);
        (0..4).find(|&k| {
            let from = self.angles[k];
            let to = self.angles[(k + 1) % 4];
            let span = (to - from).rem_euclid(std::f64::consts::TAU);
            let off = (phi - from).rem_euclid(std::f64::consts::TAU);
            // orientation of the vertex cycle may be either way round
            let other = self.angles[(k + 2) % 4];
            let off_other = (other - from).rem_euclid(std::f64::consts::TAU);
            if off_other > span {
                off > 1e-12 && off < span - 1e-12
            } else {
                let rspan = std::f64::consts::TAU - span;
                let roff = (from - phi).rem_euclid(std::f64::consts::TAU);
                roff > 1e-12 && roff < rspan - 1e-12
            }
        })
    }

    /// Position where the geodesic `(x, y)` crosses side `k`, as the log
    /// of the height after moving the side to the imaginary axis with
    /// vertex `k` at 0 and vertex `k + 1` at ∞.
    fn side_parameter(&self, k: usize, x: f64, y: f64) -> f64 {
        let e1 = self.vertices[k];
        let e2 = self.vertices[(k + 1) % 4];
        let t = |z: f64| if z.is_infinite() { 1.0 } else { (z - e1) / (z - e2) };
        0.5 * (-(t(x) * t(y))).ln()
    }

    /// Chords of the closed geodesic of `letters` inside the domain, as
    /// endpoint pairs on the boundary. Crossing into the tile `w_0 Q` and
    /// pulling back by `w_0` turns the axis of `w` into the axis of its
    /// rotation, so the chords are the axes of the rotations; each must
    /// cross the domain. `None` if one misses it.
    pub fn chords(&self, s: &SurfaceStructure, letters: &[Letter]) -> Option<Vec<(f64, f64)>> {
        let n = letters.len();
        let mut chords = Vec::with_capacity(n);
        for k in 0..n {
            let mut rot = letters[k..].to_vec();
            rot.extend_from_slice(&letters[..k]);
            let gamma = axis(&evaluate(s, &rot)).ok()?;
            let entry = self.arc_of(gamma.0)?;
            let exit = self.arc_of(gamma.1)?;
            if entry == exit {
                return None;
            }
            chords.push(gamma);
        }
        Some(chords)
    }
}

/// Crossing pairs of chords inside the domain, from the interleaving of
/// their endpoints along the boundary of the domain.
///
/// Two chords meeting at the same boundary point cross there; this happens
/// at the fixed points of the hyperelliptic involution, which sit on the
/// sides. Each such point shows up once on each of two paired sides, so it
/// is counted on sides 0 and 1 only.
pub fn count_chord_crossings(q: &IdealQuadrilateral, chords: &[(f64, f64)]) -> Option<u64> {
    let mut ends: Vec<[(usize, f64); 2]> = Vec::with_capacity(chords.len());
    for &(x, y) in chords {
        let i = q.arc_of(x)?;
        let j = q.arc_of(y)?;
        ends.push([(i, q.side_parameter(i, x, y)), (j, q.side_parameter(j, x, y))]);
    }
    let same = |a: (usize, f64), b: (usize, f64)| a.0 == b.0 && (a.1 - b.1).abs() < 1e-9;
    let less = |a: (usize, f64), b: (usize, f64)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    let between = |lo: (usize, f64), hi: (usize, f64), t: (usize, f64)| {
        let (lo, hi) = if less(lo, hi) { (lo, hi) } else { (hi, lo) };
        less(lo, t) && less(t, hi)
    };
    let mut count = 0;
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let shared: Vec<(usize, f64)> = ends[i]
                .iter()
                .flat_map(|&a| ends[j].iter().filter(move |&&b| same(a, b)).map(move |_| a))
                .collect();
            match shared.len() {
                0 => {
                    let [a, b] = ends[i];
                    let [c, d] = ends[j];
                    if between(a, b, c) != between(a, b, d) {
                        count += 1;
                    }
                }
                1 => {
                    if shared[0].0 <= 1 {
                        count += 1;
                    }
                }
                _ => return None,
            }
        }
    }
    Some(count)
}

/// Self-intersection of a primitive class from the geometry of its
/// closed geodesic.
pub fn geometric_self_intersection(s: &SurfaceStructure, c: &CurveClass) -> Option<u64> {
    let q = IdealQuadrilateral::new(s);
    let chords = q.chords(s, c.letters())?;
    if chords.len() != c.word_length() {
        return None;
    }
    count_chord_crossings(&q, &chords)
}

/// All cyclically reduced words of exactly `n` letters.
pub fn cyclically_reduced_words(n: usize) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(n: usize, cur: &mut Vec<Letter>, out: &mut Vec<Vec<Letter>>) {
        if cur.len() == n {
            if n == 1 || cur[0] != cur[n - 1].inverse() {
                out.push(cur.clone());
            }
            return;
        }
        for l in Letter::ALL {
            if cur.last().is_some_and(|&p| p == l.inverse()) {
                continue;
            }
            cur.push(l);
            rec(n, cur, out);
            cur.pop();
        }
    }
    rec(n, &mut cur, &mut out);
    out
}

/// Distinct non-peripheral classes with word length at most `max_len`.
pub fn classes_up_to(s: &SurfaceStructure, max_len: usize) -> BTreeSet<CurveClass> {
    let mut set = BTreeSet::new();
    for n in 1..=max_len {
        for w in cyclically_reduced_words(n) {
            let c = CurveClass::from_letters(&w).expect("cyclically reduced words are nontrivial");
            if !is_peripheral(s, &c) {
                set.insert(c);
            }
        }
    }
    set
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Integral multicurves `(p, q)` with length at most `cutoff`, counted
/// directly on the lattice: `(p, q) = k (p', q')` has length `k ℓ(p', q')`.
/// `None` if the search box is too small for `cutoff`.
pub fn lattice_count(s: &SurfaceStructure, cutoff: f64) -> Option<u64> {
    let size = 40i64;
    let length = |p: i64, q: i64| {
        let k = gcd(p, q);
        let slope = Slope::normalized(p / k, q / k).expect("coprime after division");
        k as f64 * curve_length(s, &simple_from_slope(slope)).expect("simple classes are hyperbolic")
    };
    let mut count = 0;
    for p in -size..=size {
        for q in 0..=size {
            if q == 0 && p <= 0 {
                continue;
            }
            if length(p, q) <= cutoff {
                if p.abs() == size || q == size {
                    return None;
                }
                count += 1;
            }
        }
    }
    Some(count)
}
