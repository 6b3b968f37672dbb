//! Free homotopy classes on the punctured torus as cyclic words in the free
//! group on `a`, `b`.
//!
//! Letters are written `a`, `A`, `b`, `B` with `A = a^-1`, `B = b^-1`, and
//! ordered `a < A < b < B`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GeometryError, WordError};
use crate::hyperbolic::{length_from_trace, Moebius, SurfaceStructure};

/// Peripheral classes have `|tr| <= 2 + PERIPHERAL_SLACK`.
pub const PERIPHERAL_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Result<Letter, WordError> {
        match c {
            'a' => Ok(Letter::A),
            'A' => Ok(Letter::AInv),
            'b' => Ok(Letter::B),
            'B' => Ok(Letter::BInv),
            other => Err(WordError::InvalidLetter(other)),
        }
    }

    /// Position of the outgoing half-edge in the counterclockwise order
    /// `a, b, a^-1, b^-1` around the single vertex of the spine. The two
    /// loops interleave, which is what makes the ribbon graph a torus with
    /// one boundary component.
    fn ribbon_position(self) -> u8 {
        match self {
            Letter::A => 0,
            Letter::B => 1,
            Letter::AInv => 2,
            Letter::BInv => 3,
        }
    }
}

/// Parses `a`, `A`, `b`, `B`, allowing whitespace and `a⁻¹` / `a^-1`
/// spellings of inverses.
pub fn parse_letters(text: &str) -> Result<Vec<Letter>, WordError> {
    let mut out: Vec<Letter> = Vec::with_capacity(text.len());
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        rest = &rest[c.len_utf8()..];
        if c.is_whitespace() {
            continue;
        }
        let inverted = if let Some(r) = rest.strip_prefix("⁻¹") {
            rest = r;
            true
        } else if let Some(r) = rest.strip_prefix("^-1") {
            rest = r;
            true
        } else {
            false
        };
        let letter = Letter::from_char(c)?;
        out.push(if inverted { letter.inverse() } else { letter });
    }
    Ok(out)
}

/// Free and cyclic reduction.
fn cyclically_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if stack.last() == Some(&l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    let mut lo = 0;
    let mut hi = stack.len();
    while hi - lo >= 2 && stack[lo] == stack[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    stack[lo..hi].to_vec()
}

/// Start index of the lexicographically least rotation.
fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let x = s[(i + k) % n];
        let y = s[(j + k) % n];
        match x.cmp(&y) {
            Ordering::Equal => k += 1,
            Ordering::Greater => {
                i += k + 1;
                if i == j {
                    i += 1;
                }
                k = 0;
            }
            Ordering::Less => {
                j += k + 1;
                if i == j {
                    j += 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// Cyclically reduced word in canonical (least) rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord {
    letters: Vec<Letter>,
}

impl CyclicWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> CyclicWord {
        let inv: Vec<Letter> = self.letters.iter().rev().map(|l| l.inverse()).collect();
        canonicalize(&inv).expect("inverse of a nontrivial word is nontrivial")
    }

    /// Smallest `p` such that the word is `(prefix of length p)^(n/p)`.
    pub fn period(&self) -> usize {
        let n = self.letters.len();
        (1..=n)
            .filter(|p| n.is_multiple_of(*p))
            .find(|&p| (p..n).all(|i| self.letters[i] == self.letters[i - p]))
            .unwrap_or(n)
    }

    pub fn is_primitive(&self) -> bool {
        self.period() == self.letters.len()
    }
}

/// Reduces and rotates to the canonical representative.
pub fn canonicalize(letters: &[Letter]) -> Result<CyclicWord, WordError> {
    let reduced = cyclically_reduce(letters);
    if reduced.is_empty() {
        return Err(WordError::TrivialWord);
    }
    let start = least_rotation(&reduced);
    let mut rotated = Vec::with_capacity(reduced.len());
    rotated.extend_from_slice(&reduced[start..]);
    rotated.extend_from_slice(&reduced[..start]);
    Ok(CyclicWord { letters: rotated })
}

/// Unoriented free homotopy class: the lesser of the canonical forms of a
/// word and its inverse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveClass {
    rep: CyclicWord,
}

impl CurveClass {
    pub fn rep(&self) -> &CyclicWord {
        &self.rep
    }

    pub fn letters(&self) -> &[Letter] {
        &self.rep.letters
    }

    pub fn word_length(&self) -> usize {
        self.rep.len()
    }

    pub fn parse(text: &str) -> Result<CurveClass, WordError> {
        Ok(unoriented(&canonicalize(&parse_letters(text)?)?))
    }

    pub fn from_letters(letters: &[Letter]) -> Result<CurveClass, WordError> {
        Ok(unoriented(&canonicalize(letters)?))
    }

    /// Exponent sums `(#a - #A, #b - #B)`, normalized like a [`Slope`]
    /// (second coordinate non-negative, `(1, 0)` for the horizontal class).
    pub fn homology(&self) -> (i64, i64) {
        let mut p = 0i64;
        let mut q = 0i64;
        for l in &self.rep.letters {
            match l {
                Letter::A => p += 1,
                Letter::AInv => p -= 1,
                Letter::B => q += 1,
                Letter::BInv => q -= 1,
            }
        }
        if q < 0 || (q == 0 && p < 0) {
            (-p, -q)
        } else {
            (p, q)
        }
    }

    pub fn is_primitive(&self) -> bool {
        self.rep.is_primitive()
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.rep.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for CurveClass {
    type Err = WordError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CurveClass::parse(s)
    }
}

impl Serialize for CurveClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CurveClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        CurveClass::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn unoriented(w: &CyclicWord) -> CurveClass {
    let inv = w.inverse();
    CurveClass { rep: if inv < *w { inv } else { w.clone() } }
}

/// Coprime `(p, q)` with `q >= 0`, and `p = 1` when `q = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub fn new(p: i64, q: i64) -> Result<Slope, WordError> {
        let g = gcd(p.unsigned_abs(), q.unsigned_abs());
        if g != 1 || q < 0 || (q == 0 && p != 1) {
            return Err(WordError::InvalidSlope { p, q });
        }
        Ok(Slope { p, q })
    }

    /// Normalizes any nonzero pair `(p, q)` up to sign and common factor.
    pub fn normalized(p: i64, q: i64) -> Result<Slope, WordError> {
        let g = gcd(p.unsigned_abs(), q.unsigned_abs()) as i64;
        if g == 0 {
            return Err(WordError::InvalidSlope { p, q });
        }
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 || (q == 0 && p < 0) {
            p = -p;
            q = -q;
        }
        Slope::new(p, q)
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Christoffel word of the slope: `|p|` copies of `a^±1` and `q` copies of
/// `b`, spread as evenly as possible.
pub fn christoffel_letters(s: Slope) -> Vec<Letter> {
    let horizontal = if s.p >= 0 { Letter::A } else { Letter::AInv };
    let p = s.p.unsigned_abs();
    let q = s.q as u64;
    let n = p + q;
    (1..=n)
        .map(|i| {
            if (i * q) / n > ((i - 1) * q) / n {
                Letter::B
            } else {
                horizontal
            }
        })
        .collect()
}

/// The simple class with homology `(p, q)`.
pub fn simple_from_slope(s: Slope) -> CurveClass {
    CurveClass::from_letters(&christoffel_letters(s)).expect("Christoffel words are nontrivial")
}

/// Orders two boundary rays leaving the base vertex of the Cayley tree by
/// the counterclockwise order inherited from the ribbon structure.
fn compare_rays(r: impl Fn(usize) -> Letter, s: impl Fn(usize) -> Letter, len: usize) -> Ordering {
    for k in 0..len {
        let (x, y) = (r(k), s(k));
        if x == y {
            continue;
        }
        if k == 0 {
            return x.ribbon_position().cmp(&y.ribbon_position());
        }
        // Rotate so the edge back to the parent sits at offset 0.
        let back = r(k - 1).inverse().ribbon_position();
        let offset = |l: Letter| (l.ribbon_position() + 4 - back) % 4;
        return offset(x).cmp(&offset(y));
    }
    Ordering::Equal
}

/// Self-intersection of a primitive cyclic word by counting linked pairs of
/// lifts through the base vertex of the Cayley tree.
fn primitive_self_intersection(w: &[Letter]) -> u64 {
    let n = w.len();
    let letter = |i: isize| w[i.rem_euclid(n as isize) as usize];
    let forward = |i: usize| move |k: usize| letter(i as isize + k as isize);
    let backward = |i: usize| move |k: usize| letter(i as isize - 1 - k as isize).inverse();
    let between = |lo: &dyn Fn(usize) -> Letter, hi: &dyn Fn(usize) -> Letter, t: &dyn Fn(usize) -> Letter| {
        let (lo, hi): (&dyn Fn(usize) -> Letter, &dyn Fn(usize) -> Letter) =
            if compare_rays(lo, hi, n) == Ordering::Less { (lo, hi) } else { (hi, lo) };
        compare_rays(lo, t, n) == Ordering::Less && compare_rays(t, hi, n) == Ordering::Less
    };
    let mut count = 0u64;
    for i in 0..n {
        let in_i = letter(i as isize - 1).inverse();
        let (bi, fi) = (backward(i), forward(i));
        for j in 0..n {
            if j == i {
                continue;
            }
            let in_j = letter(j as isize - 1).inverse();
            let out_j = letter(j as isize);
            // Count the pair only where lift i first meets lift j.
            if in_i == in_j || in_i == out_j {
                continue;
            }
            let (bj, fj) = (backward(j), forward(j));
            if between(&bi, &fi, &bj) != between(&bi, &fi, &fj) {
                count += 1;
            }
        }
    }
    debug_assert!(count.is_multiple_of(2));
    count / 2
}

/// Minimal self-intersection number of the class. Proper powers use
/// `i(u^k) = k^2 i(u) + k - 1`.
pub fn self_intersection(c: &CurveClass) -> u64 {
    let letters = c.letters();
    let period = c.rep.period();
    let k = (letters.len() / period) as u64;
    let root = primitive_self_intersection(&letters[..period]);
    k * k * root + k - 1
}

/// `ρ(w)` as a product of generator matrices, left to right.
pub fn evaluate(s: &SurfaceStructure, letters: &[Letter]) -> Moebius {
    let gens = [*s.gen_a(), s.gen_a().inverse(), *s.gen_b(), s.gen_b().inverse()];
    letters.iter().fold(Moebius::IDENTITY, |acc, l| {
        let g = match l {
            Letter::A => &gens[0],
            Letter::AInv => &gens[1],
            Letter::B => &gens[2],
            Letter::BInv => &gens[3],
        };
        acc.compose(g)
    })
}

pub fn trace_of(s: &SurfaceStructure, c: &CurveClass) -> f64 {
    evaluate(s, c.letters()).trace()
}

pub fn is_peripheral(s: &SurfaceStructure, c: &CurveClass) -> bool {
    trace_of(s, c).abs() <= 2.0 + PERIPHERAL_SLACK
}

pub fn curve_length(s: &SurfaceStructure, c: &CurveClass) -> Result<f64, GeometryError> {
    let tr = trace_of(s, c);
    if tr.abs() <= 2.0 + PERIPHERAL_SLACK {
        return Err(GeometryError::NotHyperbolic { trace: tr });
    }
    length_from_trace(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{build_surface, modular_torus};
    use proptest::prelude::*;

    fn cw(s: &str) -> CyclicWord {
        canonicalize(&parse_letters(s).unwrap()).unwrap()
    }

    fn word_string(w: &CyclicWord) -> String {
        w.letters().iter().map(|l| l.to_char()).collect()
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(word_string(&cw("a b b⁻¹ a")), "aa");
        assert_eq!(word_string(&cw("b a")), "ab");
        assert_eq!(
            canonicalize(&parse_letters("a⁻¹ b a a⁻¹ b⁻¹ a").unwrap()),
            Err(WordError::TrivialWord)
        );
        assert_eq!(word_string(&cw("B a b^-1")), "aBB");
        assert!(matches!(parse_letters("ax"), Err(WordError::InvalidLetter('x'))));
    }

    #[test]
    fn unoriented_examples() {
        let c = |s: &str| unoriented(&cw(s));
        assert_eq!(c("a"), c("a⁻¹"));
        assert_eq!(c("a b"), c("b⁻¹ a⁻¹"));
        assert_eq!(c("a a b"), c("a b a"));
        assert_ne!(c("a b"), c("a B"));
    }

    #[test]
    fn slope_validation() {
        assert!(Slope::new(1, 0).is_ok());
        assert!(Slope::new(-1, 0).is_err());
        assert!(Slope::new(2, 4).is_err());
        assert!(Slope::new(1, -2).is_err());
        assert_eq!(Slope::normalized(-2, -6).unwrap(), Slope::new(1, 3).unwrap());
    }

    #[test]
    fn simple_from_slope_examples() {
        assert_eq!(simple_from_slope(Slope::new(1, 0).unwrap()).to_string(), "a");
        assert_eq!(simple_from_slope(Slope::new(0, 1).unwrap()).to_string(), "b");
        let ab = simple_from_slope(Slope::new(1, 1).unwrap());
        assert_eq!(ab.to_string(), "ab");
        assert_eq!(self_intersection(&ab), 0);
        assert_eq!(ab.homology(), (1, 1));
    }

    #[test]
    fn self_intersection_small_cases() {
        let si = |s: &str| self_intersection(&CurveClass::parse(s).unwrap());
        assert_eq!(si("a"), 0);
        assert_eq!(si("ab"), 0);
        assert_eq!(si("aB"), 0);
        // commutator is the boundary curve
        assert_eq!(si("abAB"), 0);
        // a a b is a primitive element of the free group, hence simple
        assert_eq!(si("aab"), 0);
        assert_eq!(si("aa"), 1);
        assert_eq!(si("aaa"), 2);
        // homology (0, 2) is not primitive so the curve cannot be simple
        assert!(si("abAb") > 0);
    }

    #[test]
    fn peripheral_and_length() {
        let s = modular_torus();
        let c = |w: &str| CurveClass::parse(w).unwrap();
        assert!(is_peripheral(&s, &c("abAB")));
        assert!(!is_peripheral(&s, &c("a")));
        assert!(!is_peripheral(&s, &c("aB")));
        assert!((trace_of(&s, &c("ab")).abs() - 6.0).abs() < 1e-9);
        let la = curve_length(&s, &c("a")).unwrap();
        assert!((la - 1.924847300238).abs() < 1e-9);
        assert!((curve_length(&s, &c("aB")).unwrap() - la).abs() < 1e-9);
        assert_eq!(curve_length(&s, &c("a")), curve_length(&s, &c("A")));
        assert!(curve_length(&s, &c("abAB")).is_err());
    }

    #[test]
    fn serde_as_string() {
        let c = CurveClass::parse("b a A B b a").unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, format!("\"{c}\""));
        let back: CurveClass = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn simple_slopes_are_simple() {
        for p in -30i64..=30 {
            for q in 0i64..=30 {
                let Ok(s) = Slope::new(p, q) else { continue };
                let c = simple_from_slope(s);
                assert_eq!(self_intersection(&c), 0, "slope {p}/{q} gave {c}");
                assert_eq!(c.homology(), (p, q));
            }
        }
    }

    fn arb_letters() -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec(prop::sample::select(Letter::ALL.to_vec()), 1..24)
    }

    proptest! {
        #[test]
        fn canonicalize_idempotent(letters in arb_letters()) {
            if let Ok(w) = canonicalize(&letters) {
                prop_assert_eq!(canonicalize(w.letters()).unwrap(), w.clone());
                prop_assert_eq!(unoriented(&w.inverse()), unoriented(&w));
                let n = w.len();
                for r in 0..n {
                    let mut rot = w.letters()[r..].to_vec();
                    rot.extend_from_slice(&w.letters()[..r]);
                    prop_assert_eq!(canonicalize(&rot).unwrap(), w.clone());
                }
            }
        }

        #[test]
        fn length_invariant_under_rotation(letters in arb_letters(), r in 0usize..24) {
            let s = build_surface(3.0, 4.0).unwrap();
            if let Ok(c) = CurveClass::from_letters(&letters) {
                if !is_peripheral(&s, &c) {
                    let l = curve_length(&s, &c).unwrap();
                    let n = c.word_length();
                    let r = r % n;
                    let mut rot = c.letters()[r..].to_vec();
                    rot.extend_from_slice(&c.letters()[..r]);
                    let l2 = length_from_trace(evaluate(&s, &rot).trace()).unwrap();
                    prop_assert!((l - l2).abs() <= 1e-9 * l.max(1.0), "{} {} {} {:?}", c, l, l2, rot);
                }
            }
        }
    }
}
