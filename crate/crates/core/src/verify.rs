//! The acceptance suite: one pass/fail line per criterion, computed from a
//! single pipeline run on the modular torus. Tolerances are fixed here.

use std::fmt;
use std::time::Instant;

use crate::compare::{compare, CompareReport, Verdict};
use crate::error::VerifyError;
use crate::hyperbolic::{build_surface, modular_torus, SurfaceStructure};
use crate::oracle::{classes_up_to, geometric_self_intersection, lattice_count};
use crate::orbits::{enumerate_all_primitive, enumerate_simple, enumerate_type, Census};
use crate::phase::{build_histogram, tv_distance, BinningSpec, PhaseHistogram};
use crate::stats::{
    counting_curve, estimate_c, fit_exponent, total_length_ratio, rows_to_csv, stats_rows, thurston_ball_from,
    uniform_grid, CountingCurve,
};
use crate::words::{self_intersection, CurveClass};

pub const EXPONENT_RANGE: (f64, f64) = (1.85, 2.15);
pub const MIN_R_SQUARED: f64 = 0.99;
pub const EXPONENT_WINDOW: (f64, f64) = (15.0, 45.0);
pub const RUNTIME_TARGET_SECS: f64 = 30.0;
pub const RATIO_TARGET: f64 = 2.0 / 3.0;
pub const RATIO_TOL: f64 = 0.05;
pub const C_TOL: f64 = 0.05;
pub const C_DRIFT: f64 = 0.10;
pub const LATTICE_CUTOFFS: [f64; 6] = [2.5, 5.0, 10.0, 15.0, 20.0, 25.0];
pub const TV_CUTOFFS: [f64; 4] = [15.0, 25.0, 35.0, 45.0];
pub const TV_SLACK: f64 = 0.01;
pub const TV_FINAL: f64 = 0.2;
pub const SI_ORACLE_WORD_LENGTH: usize = 8;
pub const ORACLE_EQUIVALENCE_CUTOFFS: [f64; 6] = [5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
pub const OCCUPANCY_FACTOR: f64 = 2.0;
pub const ISOMETRY_TOL: f64 = 0.005;
pub const STRADDLE: f64 = 0.01;
pub const DETERMINISM_WORKERS: (usize, usize) = (1, 8);

/// Scale of a verification run.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub name: String,
    pub max_cutoff: f64,
    pub step: f64,
    pub margin: f64,
    pub binning: BinningSpec,
    /// Seed named by the equidistribution criteria.
    pub seed: String,
    /// Non-simple seeds reported alongside it.
    pub extra_seeds: Vec<String>,
    /// Cutoff of the complete all-primitive census bounding b_L occupancy.
    pub bowen_cutoff: f64,
    pub occupancy_cutoff: f64,
    pub compare_cutoff: f64,
    pub compare_target: (f64, f64),
}

impl Profile {
    pub fn named(name: &str) -> Result<Profile, VerifyError> {
        match name {
            "desk" => Ok(Profile {
                name: "desk".into(),
                max_cutoff: 45.0,
                step: 0.05,
                margin: 0.5,
                binning: BinningSpec::default(),
                seed: "aab".into(),
                extra_seeds: vec!["aabb".into(), "abAAB".into()],
                bowen_cutoff: 10.0,
                occupancy_cutoff: 30.0,
                compare_cutoff: 30.0,
                compare_target: (3.0, 4.0),
            }),
            _ => Err(VerifyError::UnknownProfile(name.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {:<8} {:<28} {}", self.id, self.name, self.detail)
    }
}

fn criterion(id: &str, name: &str, passed: bool, detail: String) -> Criterion {
    Criterion { id: id.into(), name: name.into(), passed, detail }
}

/// A named output file of the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

struct TypeRun {
    seed: CurveClass,
    census: Census,
    hists: Vec<PhaseHistogram>,
}

struct Pipeline {
    simple: Census,
    simple_curve: CountingCurve,
    simple_secs: f64,
    simple_hists: Vec<PhaseHistogram>,
    types: Vec<TypeRun>,
    orbit_a: Census,
    bowen: Census,
    bowen_hist: PhaseHistogram,
    occupancy_hist: PhaseHistogram,
    same: CompareReport,
    other: CompareReport,
    artifacts: Vec<Artifact>,
}

fn pipeline(p: &Profile, s: &SurfaceStructure) -> Result<Pipeline, VerifyError> {
    let l = p.max_cutoff;
    let start = Instant::now();
    let simple = enumerate_simple(s, l)?;
    let simple_curve = counting_curve(&simple, &uniform_grid(1.0, l, 1.0))?;
    fit_exponent(&simple_curve, EXPONENT_WINDOW)?;
    let simple_secs = start.elapsed().as_secs_f64();

    let hists_at = |census: &Census| -> Result<Vec<PhaseHistogram>, VerifyError> {
        TV_CUTOFFS
            .iter()
            .map(|&c| Ok(build_histogram(s, &census.restrict(c), p.step, &p.binning)?))
            .collect()
    };
    let simple_hists = hists_at(&simple)?;
    let mut types = Vec::new();
    for seed in std::iter::once(&p.seed).chain(&p.extra_seeds) {
        let seed = CurveClass::parse(seed)?;
        let census = enumerate_type(s, &seed, l, p.margin)?;
        let hists = hists_at(&census)?;
        types.push(TypeRun { seed, census, hists });
    }
    let orbit_a = enumerate_type(s, &CurveClass::parse("a")?, p.occupancy_cutoff, p.margin)?;
    let bowen = enumerate_all_primitive(s, p.bowen_cutoff)?;
    let bowen_hist = build_histogram(s, &bowen, p.step, &p.binning)?;
    let occupancy_hist = build_histogram(s, &simple.restrict(p.occupancy_cutoff), p.step, &p.binning)?;

    let target = build_surface(p.compare_target.0, p.compare_target.1)?;
    let compare_census = simple.restrict(p.compare_cutoff);
    let same = compare(s, s, &compare_census, ISOMETRY_TOL)?;
    let other = compare(s, &target, &compare_census, ISOMETRY_TOL)?;

    let mut artifacts = vec![
        Artifact { name: format!("census_simple_L{l}.csv"), contents: simple.to_csv() },
        Artifact { name: format!("census_orbit_a_L{}.csv", p.occupancy_cutoff), contents: orbit_a.to_csv() },
        Artifact { name: format!("census_all_primitive_L{}.csv", p.bowen_cutoff), contents: bowen.to_csv() },
        Artifact {
            name: "stats_simple.csv".into(),
            contents: rows_to_csv(&stats_rows(&simple_curve, &simple_curve, s.complexity())?),
        },
        Artifact { name: format!("histogram_all_primitive_L{}.csv", p.bowen_cutoff), contents: bowen_hist.to_csv() },
        Artifact { name: "compare_self.json".into(), contents: same.to_json() },
        Artifact { name: "compare_target.json".into(), contents: other.to_json() },
    ];
    for (c, h) in TV_CUTOFFS.iter().zip(&simple_hists) {
        artifacts.push(Artifact { name: format!("histogram_simple_L{c}.csv"), contents: h.to_csv() });
    }
    for t in &types {
        artifacts.push(Artifact { name: format!("census_orbit_{}_L{l}.csv", t.seed), contents: t.census.to_csv() });
        let cc = counting_curve(&t.census, &uniform_grid(1.0, l, 1.0))?;
        artifacts.push(Artifact {
            name: format!("stats_orbit_{}.csv", t.seed),
            contents: rows_to_csv(&stats_rows(&cc, &simple_curve, s.complexity())?),
        });
        for (c, h) in TV_CUTOFFS.iter().zip(&t.hists) {
            artifacts.push(Artifact { name: format!("histogram_orbit_{}_L{c}.csv", t.seed), contents: h.to_csv() });
        }
    }
    Ok(Pipeline {
        simple,
        simple_curve,
        simple_secs,
        simple_hists,
        types,
        orbit_a,
        bowen,
        bowen_hist,
        occupancy_hist,
        same,
        other,
        artifacts,
    })
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, VerifyError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| VerifyError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Result of a verification run.
#[derive(Clone, Debug)]
pub struct Report {
    pub profile: String,
    pub criteria: Vec<Criterion>,
    /// Artifacts of the run with the first worker count.
    pub artifacts: Vec<Artifact>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.criteria {
            writeln!(f, "{c}")?;
        }
        let failed = self.criteria.iter().filter(|c| !c.passed).count();
        write!(f, "profile {}: {} criteria, {failed} failed", self.profile, self.criteria.len())
    }
}

/// Runs the pipeline once per worker count in `DETERMINISM_WORKERS` and
/// checks every criterion.
pub fn run(profile: &Profile) -> Result<Report, VerifyError> {
    let s = modular_torus();
    let first = with_workers(DETERMINISM_WORKERS.0, || pipeline(profile, &s))??;
    let second = with_workers(DETERMINISM_WORKERS.1, || pipeline(profile, &s))??;

    let mut criteria = Vec::new();
    criteria.push(counting_exponent(&first)?);
    criteria.extend(length_ratio(profile, &first)?);
    criteria.push(thurston_constant(&s, &first)?);
    criteria.extend(equidistribution(&first)?);
    criteria.push(flip_invariance(&first));
    criteria.push(type_invariant(&s, &first));
    criteria.push(oracle_equivalence(&first));
    criteria.push(sparse_support(profile, &first));
    criteria.push(rigidity(&first));
    criteria.push(determinism(&first.artifacts, &second.artifacts));
    Ok(Report { profile: profile.name.clone(), criteria, artifacts: first.artifacts })
}

fn counting_exponent(p: &Pipeline) -> Result<Criterion, VerifyError> {
    let fit = fit_exponent(&p.simple_curve, EXPONENT_WINDOW)?;
    let passed = (EXPONENT_RANGE.0..=EXPONENT_RANGE.1).contains(&fit.slope)
        && fit.r_squared >= MIN_R_SQUARED
        && p.simple_secs < RUNTIME_TARGET_SECS;
    Ok(criterion(
        "1",
        "counting exponent",
        passed,
        format!("slope {:.4}, r2 {:.5}, {} points, {:.2} s", fit.slope, fit.r_squared, fit.points, p.simple_secs),
    ))
}

fn length_ratio(profile: &Profile, p: &Pipeline) -> Result<Vec<Criterion>, VerifyError> {
    let l = profile.max_cutoff;
    let ok = |r: f64| (r - RATIO_TARGET).abs() <= RATIO_TOL;
    let simple = total_length_ratio(&p.simple_curve, l)?;
    let named = &p.types[0];
    let named_ratio = total_length_ratio(&counting_curve(&named.census, &[])?, l)?;
    let mut out = vec![criterion(
        "2",
        "total length ratio",
        ok(simple) && ok(named_ratio),
        format!("L = {l}: simple {simple:.4}, {} {named_ratio:.4}, target 2/3", named.seed),
    )];
    for t in &p.types[1..] {
        let r = total_length_ratio(&counting_curve(&t.census, &[])?, l)?;
        out.push(criterion(&format!("2+{}", t.seed), "total length ratio", ok(r), format!("L = {l}: {r:.4}")));
    }
    Ok(out)
}

fn thurston_constant(s: &SurfaceStructure, p: &Pipeline) -> Result<Criterion, VerifyError> {
    let d = s.complexity();
    let c_at = |l: f64| -> Result<f64, VerifyError> {
        Ok(estimate_c(&p.simple_curve, &thurston_ball_from(&p.simple_curve, l, d)?, l)?)
    };
    let target = 6.0 / std::f64::consts::PI.powi(2);
    let (c30, c40, c45) = (c_at(30.0)?, c_at(40.0)?, c_at(45.0)?);
    let drift = (c45 / c30 - 1.0).abs();
    let mut mismatches = 0;
    for &l in &LATTICE_CUTOFFS {
        let weighted = thurston_ball_from(&p.simple_curve, l, d)?.weighted_count;
        if lattice_count(s, l) != Some(weighted) {
            mismatches += 1;
        }
    }
    Ok(criterion(
        "3",
        "thurston ball constant",
        (c40 - target).abs() <= C_TOL && drift < C_DRIFT && mismatches == 0,
        format!(
            "C(40) {c40:.4} vs {target:.4}, drift 30..45 {:.2}%, lattice mismatches {mismatches}/{}",
            100.0 * drift,
            LATTICE_CUTOFFS.len()
        ),
    ))
}

fn equidistribution(p: &Pipeline) -> Result<Vec<Criterion>, VerifyError> {
    let mut out = Vec::new();
    for (i, t) in p.types.iter().enumerate() {
        let tv = p
            .simple_hists
            .iter()
            .zip(&t.hists)
            .map(|(a, b)| tv_distance(a, b))
            .collect::<Result<Vec<f64>, _>>()?;
        let monotone = tv.windows(2).all(|w| w[1] <= w[0] + TV_SLACK);
        let last = *tv.last().expect("at least one cutoff");
        let id = if i == 0 { "4".to_string() } else { format!("4+{}", t.seed) };
        let shown: Vec<String> = tv.iter().map(|x| format!("{x:.4}")).collect();
        out.push(criterion(
            &id,
            "equidistribution",
            monotone && last < TV_FINAL,
            format!("tv(simple, {}) at L = 15/25/35/45: {}", t.seed, shown.join(" ")),
        ));
    }
    Ok(out)
}

fn flip_invariance(p: &Pipeline) -> Criterion {
    let all = p
        .simple_hists
        .iter()
        .chain(p.types.iter().flat_map(|t| &t.hists))
        .chain([&p.bowen_hist, &p.occupancy_hist]);
    let (mut count, mut broken) = (0, 0);
    for h in all {
        count += 1;
        if (0..h.binning().cell_count()).any(|c| h.mass(c) != h.mass(h.flip_cell(c))) {
            broken += 1;
        }
    }
    criterion("5", "flip invariance", broken == 0, format!("{count} histograms, {broken} asymmetric"))
}

fn type_invariant(s: &SurfaceStructure, p: &Pipeline) -> Criterion {
    let mut off_type = 0;
    let mut entries = 0;
    for census in p.types.iter().map(|t| &t.census).chain([&p.orbit_a]) {
        let si = self_intersection(&census.seed);
        entries += census.len();
        off_type += census.entries().iter().filter(|e| e.self_intersection != si).count();
    }
    // A geodesic through a side of the quadrilateral on the modular torus
    // is counted on a generic structure with the same marking.
    let generic = build_surface(3.1, 4.7).ok();
    let (mut checked, mut disagree, mut unresolved) = (0, 0, 0);
    for c in classes_up_to(s, SI_ORACLE_WORD_LENGTH) {
        if !c.is_primitive() {
            continue;
        }
        let geometric = geometric_self_intersection(s, &c)
            .or_else(|| generic.as_ref().and_then(|g| geometric_self_intersection(g, &c)));
        match geometric {
            Some(g) if g == self_intersection(&c) => {}
            Some(_) => disagree += 1,
            None => unresolved += 1,
        }
        checked += 1;
    }
    criterion(
        "6",
        "type invariant",
        off_type == 0 && disagree == 0 && unresolved == 0,
        format!(
            "{off_type} of {entries} orbit entries off type; oracle on {checked} classes: {disagree} disagree, {unresolved} unresolved"
        ),
    )
}

fn oracle_equivalence(p: &Pipeline) -> Criterion {
    let differing: Vec<f64> = ORACLE_EQUIVALENCE_CUTOFFS
        .iter()
        .copied()
        .filter(|&l| p.orbit_a.restrict(l).classes() != p.simple.restrict(l).classes())
        .collect();
    criterion(
        "7",
        "orbit of a equals simple",
        differing.is_empty(),
        format!(
            "{} classes at L = {}, cutoffs differing: {differing:?}",
            p.orbit_a.len(),
            p.orbit_a.cutoff
        ),
    )
}

fn sparse_support(profile: &Profile, p: &Pipeline) -> Criterion {
    let bowen = p.bowen_hist.occupied_cells();
    let simple = p.occupancy_hist.occupied_cells();
    criterion(
        "8",
        "sparse support",
        bowen as f64 >= OCCUPANCY_FACTOR * simple as f64,
        format!(
            "b_{} occupies at least {bowen} cells (all {} primitive classes to L = {}), simple {simple} of {}",
            profile.occupancy_cutoff,
            p.bowen.len(),
            profile.bowen_cutoff,
            p.bowen_hist.binning().cell_count()
        ),
    )
}

fn rigidity(p: &Pipeline) -> Criterion {
    let (same, other) = (&p.same, &p.other);
    let passed = same.verdict == Verdict::IsometricWithinTol
        && other.verdict == Verdict::Distinct
        && other.ratio_sup > 1.0 + STRADDLE
        && other.ratio_inf < 1.0 - STRADDLE;
    criterion(
        "9",
        "rigidity",
        passed,
        format!(
            "self [{}, {}] {:?}; vs {} [{:.4}, {:.4}] {:?}",
            same.ratio_inf, same.ratio_sup, same.verdict, other.labels.1, other.ratio_inf, other.ratio_sup, other.verdict
        ),
    )
}

fn determinism(a: &[Artifact], b: &[Artifact]) -> Criterion {
    let differing: Vec<&str> =
        a.iter().zip(b).filter(|(x, y)| x != y).map(|(x, _)| x.name.as_str()).collect();
    let passed = a.len() == b.len() && differing.is_empty();
    criterion(
        "10",
        "determinism",
        passed,
        format!(
            "{} artifacts, workers {} vs {}, differing: {differing:?}",
            a.len(),
            DETERMINISM_WORKERS.0,
            DETERMINISM_WORKERS.1
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(Profile::named("desk").unwrap().max_cutoff, 45.0);
        assert!(matches!(Profile::named("cluster"), Err(VerifyError::UnknownProfile(_))));
    }

    #[test]
    fn lines() {
        let c = criterion("4", "equidistribution", false, "tv 0.3".into());
        assert!(c.to_string().starts_with("FAIL 4 "));
        let a = [Artifact { name: "x".into(), contents: "1".into() }];
        let b = [Artifact { name: "x".into(), contents: "2".into() }];
        assert!(determinism(&a, &a).passed);
        assert!(!determinism(&a, &b).passed);
    }
}
