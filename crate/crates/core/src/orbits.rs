//! Censuses of curves below a length cutoff: exact enumeration of simple
//! classes, breadth-first search over a mapping class group orbit, and
//! brute-force enumeration of all primitive classes.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::IdealDomain;
use crate::error::CensusError;
use crate::hyperbolic::{axis, length_from_trace, Moebius, SurfaceStructure};
use crate::words::{
    curve_length, is_peripheral, self_intersection, simple_from_slope, trace_of,
    CurveClass, Letter, Slope, PERIPHERAL_SLACK,
};

/// Guard band added to cutoffs so that census membership does not flicker
/// with last-bit differences in computed lengths.
pub const CUTOFF_GUARD: f64 = 1e-9;
pub const DEFAULT_MARGIN: f64 = 0.5;
pub const DEFAULT_VISITED_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CensusMode {
    SimpleExact,
    OrbitBfs,
    AllPrimitive,
}

impl fmt::Display for CensusMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CensusMode::SimpleExact => "simple-exact",
            CensusMode::OrbitBfs => "orbit-bfs",
            CensusMode::AllPrimitive => "all-primitive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub class: CurveClass,
    pub length: f64,
    pub self_intersection: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub surface_label: String,
    pub seed: CurveClass,
    pub cutoff: f64,
    pub mode: CensusMode,
    pub margin: Option<f64>,
    entries: Vec<CensusEntry>,
}

impl Census {
    /// Sorts by `(length, rep)` and drops duplicate classes.
    pub fn new(
        surface_label: impl Into<String>,
        seed: CurveClass,
        cutoff: f64,
        mode: CensusMode,
        margin: Option<f64>,
        mut entries: Vec<CensusEntry>,
    ) -> Census {
        entries.sort_by(|x, y| x.length.total_cmp(&y.length).then_with(|| x.class.cmp(&y.class)));
        let mut seen = std::collections::HashSet::new();
        entries.retain(|e| seen.insert(e.class.clone()));
        Census { surface_label: surface_label.into(), seed, cutoff, mode, margin, entries }
    }

    pub fn entries(&self) -> &[CensusEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn classes(&self) -> std::collections::BTreeSet<CurveClass> {
        self.entries.iter().map(|e| e.class.clone()).collect()
    }

    pub fn contains(&self, c: &CurveClass) -> bool {
        self.entries.iter().any(|e| &e.class == c)
    }

    /// Entries with length at most `cutoff` (guard band included).
    pub fn up_to(&self, cutoff: f64) -> impl Iterator<Item = &CensusEntry> {
        self.entries.iter().take_while(move |e| e.length <= cutoff + CUTOFF_GUARD)
    }

    pub fn total_length(&self) -> f64 {
        self.entries.iter().map(|e| e.length).sum()
    }

    /// Sub-census with a smaller cutoff.
    pub fn restrict(&self, cutoff: f64) -> Census {
        let entries = self.up_to(cutoff).cloned().collect();
        Census { cutoff, entries, ..self.clone_header() }
    }

    fn clone_header(&self) -> Census {
        Census {
            surface_label: self.surface_label.clone(),
            seed: self.seed.clone(),
            cutoff: self.cutoff,
            mode: self.mode,
            margin: self.margin,
            entries: Vec::new(),
        }
    }

    /// CSV with a commented header row carrying the census metadata.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let margin = self.margin.map_or_else(|| "none".to_string(), |m| m.to_string());
        writeln!(
            out,
            "# surface={},seed={},L={},mode={},margin={}",
            self.surface_label, self.seed, self.cutoff, self.mode, margin
        )
        .unwrap();
        out.push_str("word,length,self_intersection\n");
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.class, format_sig17(e.length), e.self_intersection).unwrap();
        }
        out
    }
}

/// Fixed-point decimal with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn within(length: f64, cutoff: f64) -> bool {
    length <= cutoff + CUTOFF_GUARD
}

fn trace_bound(cutoff: f64) -> f64 {
    2.0 * ((cutoff + CUTOFF_GUARD) / 2.0).cosh()
}

/// All simple classes of length at most `cutoff`.
///
/// Simple classes are indexed by slopes; each half of the slope circle is a
/// Farey tree whose traces follow `tr(uv') = tr(u) tr(v) - tr(w)` from the
/// parent triple. Below a node whose trace is at least both parents' traces
/// (an ascending node) traces only grow, so such a subtree is pruned once
/// its root exceeds `2 cosh(L/2)`. Non-ascending nodes form a finite subtree
/// around the shortest curves and are always expanded.
pub fn enumerate_simple(s: &SurfaceStructure, cutoff: f64) -> Result<Census, CensusError> {
    if !(cutoff > 0.0) {
        return Err(CensusError::InvalidCutoff(cutoff));
    }
    // Since xyz = x² + y² + z² > 0, the generators can be lifted so that
    // all three traces are positive.
    let (x, y, z) = s.traces();
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    let bound = trace_bound(cutoff);
    let mut found: Vec<(Slope, f64)> = Vec::new();
    for (slope, tr) in [((1, 0), x), ((0, 1), y)] {
        if tr <= bound {
            found.push((Slope::new(slope.0, slope.1)?, tr));
        }
    }
    // Slopes p, q > 0 are spanned by (a, b); slopes p < 0 < q by (a, b^-1),
    // written with q negated and normalized on output. Traces stay positive
    // since a trace and its Vieta partner multiply to a sum of squares.
    let roots = [((1i64, 0i64), x, (0i64, 1i64), y, z), ((1, 0), x, (0, -1), y, x * y - z)];
    for (u, tu, v, tv, tm) in roots {
        let mut stack = vec![(u, tu, v, tv, tm)];
        while let Some((u, tu, v, tv, tm)) = stack.pop() {
            let ascending = tm >= tu.max(tv);
            if tm > bound && ascending {
                continue;
            }
            let m = (u.0 + v.0, u.1 + v.1);
            if tm <= bound {
                found.push((Slope::normalized(m.0, m.1)?, tm));
            }
            let left = tu * tm - tv;
            let right = tm * tv - tu;
            if ascending && (left < tm || right < tm) {
                return Err(CensusError::NonMonotoneTrace { p: m.0, q: m.1 });
            }
            stack.push((m, tm, v, tv, right));
            stack.push((u, tu, m, tm, left));
        }
    }
    let entries: Vec<CensusEntry> = found
        .into_par_iter()
        .map(|(slope, tr)| {
            let class = simple_from_slope(slope);
            let length = length_from_trace(tr).expect("simple classes are hyperbolic");
            let si = self_intersection(&class);
            assert_eq!(si, 0, "Christoffel word {class} is not simple");
            CensusEntry { class, length, self_intersection: si }
        })
        .filter(|e| within(e.length, cutoff))
        .collect();
    if entries.is_empty() {
        return Err(CensusError::CutoffTooSmall { cutoff });
    }
    let seed = CurveClass::parse("a").expect("valid");
    Ok(Census::new(s.label(), seed, cutoff, CensusMode::SimpleExact, None, entries))
}

/// Generators of the extended mapping class group of the punctured torus,
/// acting on words as free group automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MCGMove {
    /// a ↦ ab
    RightMulAB,
    /// a ↦ ab⁻¹
    RightMulAInvB,
    /// b ↦ ba
    RightMulBA,
    /// b ↦ ba⁻¹
    RightMulBInvA,
    /// a ↔ b
    Swap,
    /// a ↦ a⁻¹
    InvertA,
    /// b ↦ b⁻¹
    InvertB,
}

impl MCGMove {
    pub const ALL: [MCGMove; 7] = [
        MCGMove::RightMulAB,
        MCGMove::RightMulAInvB,
        MCGMove::RightMulBA,
        MCGMove::RightMulBInvA,
        MCGMove::Swap,
        MCGMove::InvertA,
        MCGMove::InvertB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MCGMove::RightMulAB => "a->ab",
            MCGMove::RightMulAInvB => "a->aB",
            MCGMove::RightMulBA => "b->ba",
            MCGMove::RightMulBInvA => "b->bA",
            MCGMove::Swap => "a<->b",
            MCGMove::InvertA => "a->A",
            MCGMove::InvertB => "b->B",
        }
    }

    /// Images of `a` and `b`.
    fn images(self) -> (&'static [Letter], &'static [Letter]) {
        use Letter::*;
        match self {
            MCGMove::RightMulAB => (&[A, B], &[B]),
            MCGMove::RightMulAInvB => (&[A, BInv], &[B]),
            MCGMove::RightMulBA => (&[A], &[B, A]),
            MCGMove::RightMulBInvA => (&[A], &[B, AInv]),
            MCGMove::Swap => (&[B], &[A]),
            MCGMove::InvertA => (&[AInv], &[B]),
            MCGMove::InvertB => (&[A], &[BInv]),
        }
    }

    /// Applies the substitution letter by letter (not reduced).
    pub fn substitute(self, letters: &[Letter]) -> Vec<Letter> {
        let (ia, ib) = self.images();
        let mut out = Vec::with_capacity(letters.len() * 2);
        for &l in letters {
            match l {
                Letter::A => out.extend_from_slice(ia),
                Letter::B => out.extend_from_slice(ib),
                Letter::AInv => out.extend(ia.iter().rev().map(|x| x.inverse())),
                Letter::BInv => out.extend(ib.iter().rev().map(|x| x.inverse())),
            }
        }
        out
    }

    pub fn apply(self, c: &CurveClass) -> CurveClass {
        CurveClass::from_letters(&self.substitute(c.letters()))
            .expect("automorphisms do not kill nontrivial classes")
    }
}

/// Orbit census together with the BFS tree that produced it.
#[derive(Clone, Debug)]
pub struct OrbitSearch {
    pub census: Census,
    /// Every visited class with its BFS parent index and move.
    pub visited: Vec<(CurveClass, Option<(usize, MCGMove)>)>,
}

impl OrbitSearch {
    /// Sequence of moves leading from the seed to visited class `idx`.
    pub fn moves_to(&self, mut idx: usize) -> Vec<MCGMove> {
        let mut moves = Vec::new();
        while let Some((parent, mv)) = self.visited[idx].1 {
            moves.push(mv);
            idx = parent;
        }
        moves.reverse();
        moves
    }

    /// Re-applies the recorded moves to the seed.
    pub fn replay(&self, idx: usize) -> CurveClass {
        self.moves_to(idx).into_iter().fold(self.visited[0].0.clone(), |c, mv| mv.apply(&c))
    }

    pub fn index_of(&self, c: &CurveClass) -> Option<usize> {
        self.visited.iter().position(|(v, _)| v == c)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OrbitOptions {
    pub margin: f64,
    pub visited_cap: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { margin: DEFAULT_MARGIN, visited_cap: DEFAULT_VISITED_CAP }
    }
}

/// Curves of the same type as `seed` with length at most `cutoff`, reached
/// by BFS through classes of length at most `cutoff * (1 + margin)`.
pub fn enumerate_type(
    s: &SurfaceStructure,
    seed: &CurveClass,
    cutoff: f64,
    margin: f64,
) -> Result<Census, CensusError> {
    search_type(s, seed, cutoff, OrbitOptions { margin, ..OrbitOptions::default() })
        .map(|r| r.census)
}

pub fn search_type(
    s: &SurfaceStructure,
    seed: &CurveClass,
    cutoff: f64,
    opts: OrbitOptions,
) -> Result<OrbitSearch, CensusError> {
    if is_peripheral(s, seed) {
        return Err(CensusError::SeedPeripheral(seed.to_string()));
    }
    let seed_length = curve_length(s, seed)?;
    if !(cutoff > 0.0) || seed_length > cutoff + CUTOFF_GUARD {
        return Err(CensusError::CutoffBelowSeed { seed_length, cutoff });
    }
    let expand_bound = cutoff * (1.0 + opts.margin);
    let mut index: HashMap<CurveClass, usize> = HashMap::new();
    let mut visited: Vec<(CurveClass, Option<(usize, MCGMove)>)> = vec![(seed.clone(), None)];
    let mut lengths = vec![seed_length];
    index.insert(seed.clone(), 0);
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let proposals: Vec<Vec<(CurveClass, f64, usize, MCGMove)>> = frontier
            .par_iter()
            .map(|&idx| {
                let (class, _) = &visited[idx];
                MCGMove::ALL
                    .iter()
                    .filter_map(|&mv| {
                        let next = mv.apply(class);
                        if index.contains_key(&next) {
                            return None;
                        }
                        let tr = trace_of(s, &next);
                        if tr.abs() <= 2.0 + PERIPHERAL_SLACK {
                            return None;
                        }
                        let len = length_from_trace(tr).ok()?;
                        within(len, expand_bound).then_some((next, len, idx, mv))
                    })
                    .collect()
            })
            .collect();
        let mut next_frontier = Vec::new();
        for (class, len, parent, mv) in proposals.into_iter().flatten() {
            if index.contains_key(&class) {
                continue;
            }
            index.insert(class.clone(), visited.len());
            next_frontier.push(visited.len());
            visited.push((class, Some((parent, mv))));
            lengths.push(len);
            if visited.len() > opts.visited_cap {
                return Err(CensusError::BudgetExceeded { cap: opts.visited_cap });
            }
        }
        frontier = next_frontier;
    }
    let seed_si = self_intersection(seed);
    let entries: Vec<CensusEntry> = visited
        .par_iter()
        .zip(lengths.par_iter())
        .filter(|(_, &len)| within(len, cutoff))
        .map(|((class, _), &length)| {
            let si = self_intersection(class);
            assert_eq!(si, seed_si, "{class} is in the orbit of {seed} but has different self-intersection");
            CensusEntry { class: class.clone(), length, self_intersection: si }
        })
        .collect();
    let census =
        Census::new(s.label(), seed.clone(), cutoff, CensusMode::OrbitBfs, Some(opts.margin), entries);
    Ok(OrbitSearch { census, visited })
}

/// Every primitive non-peripheral class with length at most `cutoff`.
///
/// A closed geodesic meets the part of the domain `Q` outside the embedded
/// cusp neighbourhood, which lies within the core radius of `i`. Conjugating
/// so that the axis passes through that part, one period later the geodesic
/// is in a tile `gQ` within `cutoff + core radius` of `i`. Tiles meeting a
/// ball are connected across sides, and crossing a side appends a letter,
/// so a pruned walk of the tree of reduced words finds every class.
pub fn enumerate_all_primitive(s: &SurfaceStructure, cutoff: f64) -> Result<Census, CensusError> {
    enumerate_all_primitive_with(s, cutoff, DEFAULT_VISITED_CAP)
}

pub fn enumerate_all_primitive_with(
    s: &SurfaceStructure,
    cutoff: f64,
    visited_cap: usize,
) -> Result<Census, CensusError> {
    if !(cutoff > 0.0) {
        return Err(CensusError::InvalidCutoff(cutoff));
    }
    let domain = IdealDomain::new(s);
    let radius = cutoff + domain.core_radius() + CUTOFF_GUARD;
    let bound = trace_bound(cutoff);
    let gens = [*s.gen_a(), s.gen_a().inverse(), *s.gen_b(), s.gen_b().inverse()];
    let visited = AtomicUsize::new(0);

    let walker = TileWalk { gens, domain, radius, bound, cap: visited_cap, visited: &visited };
    // Expand breadth-first until there is enough work to split.
    let mut frontier: Vec<(Vec<Letter>, Moebius)> = vec![(Vec::new(), Moebius::IDENTITY)];
    let mut found: HashSet<CurveClass> = HashSet::new();
    while !frontier.is_empty() && frontier.len() < 256 {
        let mut next = Vec::new();
        for (mut word, g) in frontier {
            walker.visit(&word, &g, &mut found);
            for (l, h) in walker.children(&word, &g) {
                word.push(l);
                next.push((word.clone(), h));
                word.pop();
            }
        }
        frontier = next;
    }
    let partial: Vec<Result<HashSet<CurveClass>, CensusError>> = frontier
        .into_par_iter()
        .map(|(mut word, g)| {
            let mut found = HashSet::new();
            walker.walk(&mut word, &g, &mut found)?;
            Ok(found)
        })
        .collect();
    for part in partial {
        found.extend(part?);
    }
    let entries: Vec<CensusEntry> = found
        .into_par_iter()
        .filter_map(|class| {
            let length = curve_length(s, &class).ok()?;
            within(length, cutoff).then(|| {
                let si = self_intersection(&class);
                CensusEntry { class, length, self_intersection: si }
            })
        })
        .collect();
    if entries.is_empty() {
        return Err(CensusError::CutoffTooSmall { cutoff });
    }
    let seed = CurveClass::parse("a").expect("valid");
    Ok(Census::new(s.label(), seed, cutoff, CensusMode::AllPrimitive, None, entries))
}

struct TileWalk<'a> {
    gens: [Moebius; 4],
    domain: IdealDomain,
    radius: f64,
    bound: f64,
    cap: usize,
    visited: &'a AtomicUsize,
}

impl TileWalk<'_> {
    fn visit(&self, word: &[Letter], g: &Moebius, found: &mut HashSet<CurveClass>) {
        let tr = g.trace().abs();
        if word.is_empty() || tr <= 2.0 + PERIPHERAL_SLACK || tr > self.bound * (1.0 + 1e-9) {
            return;
        }
        // The conjugate found by the walk is the cutting sequence of one
        // period of a geodesic crossing the domain, so it is cyclically
        // reduced and its axis crosses the domain.
        if word.len() > 1 && word[0] == word[word.len() - 1].inverse() {
            return;
        }
        if !axis(g).is_ok_and(|ends| self.domain.crossed_by(ends)) {
            return;
        }
        if let Ok(class) = CurveClass::from_letters(word) {
            if class.is_primitive() {
                found.insert(class);
            }
        }
    }

    fn children(&self, word: &[Letter], g: &Moebius) -> Vec<(Letter, Moebius)> {
        Letter::ALL
            .iter()
            .filter(|&&l| word.last().is_none_or(|&last| last != l.inverse()))
            .filter_map(|&l| {
                let h = g.compose(&self.gens[l as usize]);
                (self.domain.tile_distance(&h) <= self.radius).then_some((l, h))
            })
            .collect()
    }

    /// Depth-first walk below `word`, reusing one word buffer. Cusp-winding
    /// branches run thousands of letters deep, so the stack is explicit.
    fn walk(
        &self,
        word: &mut Vec<Letter>,
        g: &Moebius,
        found: &mut HashSet<CurveClass>,
    ) -> Result<(), CensusError> {
        let base = word.len();
        self.visit(word, g, found);
        let mut stack: Vec<(usize, Letter, Moebius)> =
            self.children(word, g).into_iter().map(|(l, h)| (base, l, h)).collect();
        while let Some((depth, l, h)) = stack.pop() {
            if self.visited.fetch_add(1, Ordering::Relaxed) >= self.cap {
                return Err(CensusError::BudgetExceeded { cap: self.cap });
            }
            word.truncate(depth);
            word.push(l);
            self.visit(word, &h, found);
            stack.extend(self.children(word, &h).into_iter().map(|(l, h2)| (depth + 1, l, h2)));
        }
        Ok(())
    }
}
