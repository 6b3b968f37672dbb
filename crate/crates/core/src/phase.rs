//! Empirical flip-invariant measures on the unit tangent bundle, built by
//! sampling closed geodesics at fixed arc-length steps.
//!
//! A closed geodesic is sampled through the ideal quadrilateral domain: its
//! cyclically reduced word is its cutting sequence there, so the geodesic is
//! the union of one chord per rotation of the word, each a piece of the axis
//! of that rotation. Every sampled point is then reduced to the Dirichlet
//! domain. This never follows a lift far from the domain, where positions
//! lose all precision.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::IdealDomain;
use crate::error::{GeometryError, PhaseError};
use crate::hyperbolic::{axis, wrap_angle, Moebius, SurfaceStructure, UpperHalfPoint};
use crate::orbits::{format_sig17, Census};
use crate::words::{curve_length, evaluate, CurveClass, Letter};

pub const MAX_STEP: f64 = 0.1;
/// Curves per parallel batch in `build_histograms`.
const BATCH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    /// Reduced point.
    pub position: UpperHalfPoint,
    /// Direction of the geodesic there, in `[0, 2π)`.
    pub angle: f64,
    pub weight: f64,
}

/// Boxes over the disk chart centred at the surface basepoint, times
/// angle bins. The angle bin count is even so that `θ ↦ θ + π` permutes
/// the bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub u_bins: usize,
    pub v_bins: usize,
    pub angle_bins: usize,
}

impl Default for BinningSpec {
    fn default() -> BinningSpec {
        BinningSpec::new(12, 12, 16).expect("valid default")
    }
}

impl BinningSpec {
    /// Bins over the square `[-1, 1]^2` enclosing the disk.
    pub fn new(u_bins: usize, v_bins: usize, angle_bins: usize) -> Result<BinningSpec, PhaseError> {
        let spec = BinningSpec { u_range: (-1.0, 1.0), v_range: (-1.0, 1.0), u_bins, v_bins, angle_bins };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), PhaseError> {
        let bad = |m: &str| Err(PhaseError::InvalidBinning(m.to_string()));
        if self.u_bins == 0 || self.v_bins == 0 || self.angle_bins == 0 {
            return bad("bin counts must be positive");
        }
        if !self.angle_bins.is_multiple_of(2) {
            return bad("angle bin count must be even");
        }
        for (lo, hi) in [self.u_range, self.v_range] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad("ranges must be finite with lo < hi");
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.u_bins * self.v_bins * self.angle_bins
    }

    /// The same ranges at `factor` times the resolution in every direction.
    pub fn refined(&self, factor: usize) -> Result<BinningSpec, PhaseError> {
        let spec = BinningSpec {
            u_bins: self.u_bins * factor,
            v_bins: self.v_bins * factor,
            angle_bins: self.angle_bins * factor,
            ..self.clone()
        };
        spec.validate()?;
        Ok(spec)
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.v_bins + j) * self.angle_bins + k
    }

    fn bin(x: f64, (lo, hi): (f64, f64), n: usize) -> usize {
        (((x - lo) / (hi - lo) * n as f64).floor().max(0.0) as usize).min(n - 1)
    }

    fn cell(&self, chart: (f64, f64), angle: f64) -> usize {
        let i = Self::bin(chart.0, self.u_range, self.u_bins);
        let j = Self::bin(chart.1, self.v_range, self.v_bins);
        let k = Self::bin(wrap_angle(angle), (0.0, TAU), self.angle_bins);
        self.index(i, j, k)
    }

    fn flip(&self, cell: usize) -> usize {
        let k = cell % self.angle_bins;
        cell - k + (k + self.angle_bins / 2) % self.angle_bins
    }
}

/// Poincaré disk coordinates of `p` with the basepoint at the origin.
pub fn chart(s: &SurfaceStructure, p: UpperHalfPoint) -> (f64, f64) {
    let o = s.basepoint();
    let (x, y) = (p.u - o.u, p.v);
    // (z - o) / (z - conj(o))
    let (nr, ni) = (x, y - o.v);
    let (dr, di) = (x, y + o.v);
    let den = dr * dr + di * di;
    ((nr * dr + ni * di) / den, (ni * dr - nr * di) / den)
}

/// Sampled measure on the unit tangent bundle.
///
/// Only half of every sample is stored, at its own cell; the mass of a cell
/// is that plus the half stored at its flip. Flip symmetry is then exact.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseHistogram {
    binning: BinningSpec,
    provenance: String,
    half: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramSidecar {
    pub binning: BinningSpec,
    pub provenance: String,
    pub total_mass: f64,
    pub occupied_cells: usize,
}

impl PhaseHistogram {
    pub fn new(binning: BinningSpec, provenance: impl Into<String>) -> Result<PhaseHistogram, PhaseError> {
        binning.validate()?;
        let half = vec![0.0; binning.cell_count()];
        Ok(PhaseHistogram { binning, provenance: provenance.into(), half })
    }

    pub fn binning(&self) -> &BinningSpec {
        &self.binning
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn add_samples(&mut self, s: &SurfaceStructure, samples: &[PhaseSample]) {
        for smp in samples {
            let cell = self.binning.cell(chart(s, smp.position), smp.angle);
            self.half[cell] += 0.5 * smp.weight;
        }
    }

    /// Cellwise sum; the order of merges fixes the rounding.
    pub fn merge(&mut self, other: &PhaseHistogram) -> Result<(), PhaseError> {
        if self.binning != other.binning {
            return Err(PhaseError::BinningMismatch);
        }
        for (x, y) in self.half.iter_mut().zip(&other.half) {
            *x += y;
        }
        Ok(())
    }

    pub fn mass(&self, cell: usize) -> f64 {
        self.half[cell] + self.half[self.binning.flip(cell)]
    }

    pub fn mass_at(&self, u_bin: usize, v_bin: usize, angle_bin: usize) -> f64 {
        self.mass(self.binning.index(u_bin, v_bin, angle_bin))
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.half.len()).map(|c| self.mass(c)).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses().iter().sum()
    }

    pub fn occupied_cells(&self) -> usize {
        self.masses().iter().filter(|&&m| m > 0.0).count()
    }

    /// The cell of the flipped direction.
    pub fn flip_cell(&self, cell: usize) -> usize {
        self.binning.flip(cell)
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let b = &self.binning;
        (0..b.u_bins).flat_map(move |i| {
            (0..b.v_bins).flat_map(move |j| (0..b.angle_bins).map(move |k| (i, j, k, b.index(i, j, k))))
        })
    }

    /// Every cell, zero or not, in `(u, v, θ)` order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u_bin,v_bin,theta_bin,mass\n");
        for (i, j, k, c) in self.cells() {
            out.push_str(&format!("{i},{j},{k},{}\n", format_sig17(self.mass(c))));
        }
        out
    }

    pub fn sidecar(&self) -> HistogramSidecar {
        HistogramSidecar {
            binning: self.binning.clone(),
            provenance: self.provenance.clone(),
            total_mass: self.total_mass(),
            occupied_cells: self.occupied_cells(),
        }
    }

    /// Mass per angle bin.
    pub fn angle_marginal_csv(&self) -> String {
        let b = &self.binning;
        let mut marginal = vec![0.0; b.angle_bins];
        for (_, _, k, c) in self.cells() {
            marginal[k] += self.mass(c);
        }
        let width = TAU / b.angle_bins as f64;
        let mut out = String::from("theta_bin,theta_lo,theta_hi,mass\n");
        for (k, m) in marginal.iter().enumerate() {
            let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
            out.push_str(&format!("{k},{},{},{}\n", format_sig17(lo), format_sig17(hi), format_sig17(*m)));
        }
        out
    }

    /// Mass per position box.
    pub fn position_marginal_csv(&self) -> String {
        let b = &self.binning;
        let mut marginal = vec![0.0; b.u_bins * b.v_bins];
        for (i, j, _, c) in self.cells() {
            marginal[i * b.v_bins + j] += self.mass(c);
        }
        let edge = |(lo, hi): (f64, f64), n: usize, i: usize| lo + (hi - lo) * i as f64 / n as f64;
        let mut out = String::from("u_bin,v_bin,u_lo,u_hi,v_lo,v_hi,mass\n");
        for i in 0..b.u_bins {
            for j in 0..b.v_bins {
                let cols = [
                    edge(b.u_range, b.u_bins, i),
                    edge(b.u_range, b.u_bins, i + 1),
                    edge(b.v_range, b.v_bins, j),
                    edge(b.v_range, b.v_bins, j + 1),
                    marginal[i * b.v_bins + j],
                ]
                .map(format_sig17);
                out.push_str(&format!("{i},{j},{}\n", cols.join(",")));
            }
        }
        out
    }
}

/// Maps the imaginary axis onto the geodesic `rep → att`, with 0 going to
/// `rep` and ∞ to `att`.
fn axis_frame(rep: f64, att: f64) -> Moebius {
    if att.is_infinite() {
        return Moebius::new(1.0, rep, 0.0, 1.0).expect("unit determinant");
    }
    if rep.is_infinite() {
        return Moebius::new(att, -1.0, 1.0, 0.0).expect("unit determinant");
    }
    let det = att - rep;
    let r = det.abs().sqrt();
    if det > 0.0 {
        Moebius::new(att / r, rep / r, 1.0 / r, 1.0 / r)
    } else {
        Moebius::new(att / r, -rep / r, 1.0 / r, -1.0 / r)
    }
    .expect("unit determinant")
}

struct Chord {
    frame: Moebius,
    start: f64,
    length: f64,
}

/// The piece of the geodesic `frame(i e^t)` inside the domain, as the range
/// of `t` between the two sides it crosses.
fn chord(domain: &IdealDomain, frame: Moebius) -> Option<Chord> {
    let back = frame.inverse();
    let v = domain.vertices();
    let mut ts: Vec<f64> = (0..4)
        .filter_map(|k| {
            let f = back.apply_boundary(v[k]) * back.apply_boundary(v[(k + 1) % 4]);
            (f.is_finite() && f < 0.0).then(|| 0.5 * (-f).ln())
        })
        .collect();
    if ts.len() != 2 {
        return None;
    }
    ts.sort_by(f64::total_cmp);
    Some(Chord { frame, start: ts[0], length: ts[1] - ts[0] })
}

/// Axes of all rotations of a cyclic word, as (repelling, attracting).
///
/// Rotation `k + 1` is rotation `k` conjugated by its first letter, so its
/// axis is the image of the previous one under that letter's inverse. Long
/// rotations are badly conditioned, so only the best one is solved directly;
/// repelling ends are carried forward and attracting ends backward, the
/// directions in which the letters contract errors.
fn rotation_axes(s: &SurfaceStructure, letters: &[Letter]) -> Result<Vec<(f64, f64)>, GeometryError> {
    let n = letters.len();
    let letter = |l: Letter| evaluate(s, &[l]);
    let size = |m: &Moebius| m.entries().iter().map(|x| x * x).sum::<f64>();
    let mut best = (f64::INFINITY, 0, Moebius::IDENTITY);
    for k in 0..n {
        let rot: Vec<Letter> = letters[k..].iter().chain(&letters[..k]).copied().collect();
        let m = evaluate(s, &rot);
        if size(&m) < best.0 {
            best = (size(&m), k, m);
        }
    }
    let (_, k0, m) = best;
    let (rep0, att0) = axis(&m)?;
    let mut ends = vec![(rep0, att0); n];
    let mut rep = rep0;
    for j in 1..n {
        let k = (k0 + j) % n;
        rep = letter(letters[(k + n - 1) % n]).inverse().apply_boundary(rep);
        ends[k].0 = rep;
    }
    let mut att = att0;
    for j in 1..n {
        let k = (k0 + n - j) % n;
        att = letter(letters[k]).apply_boundary(att);
        ends[k].1 = att;
    }
    Ok(ends)
}

fn chords(s: &SurfaceStructure, domain: &IdealDomain, c: &CurveClass) -> Result<Vec<Chord>, PhaseError> {
    rotation_axes(s, c.letters())?
        .into_iter()
        .map(|(rep, att)| {
            chord(domain, axis_frame(rep, att)).ok_or_else(|| PhaseError::DomainMiss(c.to_string()))
        })
        .collect()
}

/// Reduces a point with its direction.
fn reduced_sample(s: &SurfaceStructure, p: UpperHalfPoint, angle: f64) -> Result<(UpperHalfPoint, f64), GeometryError> {
    let (q, g) = s.reduce_to_domain(p)?;
    Ok((q, wrap_angle(angle + g.derivative_angle(p))))
}

fn sample_with(
    s: &SurfaceStructure,
    domain: &IdealDomain,
    c: &CurveClass,
    step: f64,
) -> Result<Vec<PhaseSample>, PhaseError> {
    if !(step > 0.0 && step <= MAX_STEP) {
        return Err(PhaseError::InvalidStep(step));
    }
    let length = curve_length(s, c)?;
    let pieces = chords(s, domain, c)?;
    // Chord lengths add up to the length up to rounding; rescale so the
    // arc-length parameter runs over exactly [0, ℓ).
    let scale = length / pieces.iter().map(|p| p.length).sum::<f64>();
    let count = (length / step).ceil() as usize;
    let mut out = Vec::with_capacity(2 * count);
    let (mut k, mut offset) = (0, 0.0);
    for j in 0..count {
        let at = j as f64 * step;
        let weight = step.min(length - at);
        while k + 1 < pieces.len() && at >= offset + pieces[k].length * scale {
            offset += pieces[k].length * scale;
            k += 1;
        }
        let piece = &pieces[k];
        let t = piece.start + (at - offset) / scale;
        let e = t.exp();
        let p = piece.frame.apply(UpperHalfPoint { u: 0.0, v: e });
        let [_, _, fc, fd] = piece.frame.entries();
        let angle = FRAC_PI_2 - 2.0 * (fc * e).atan2(fd);
        let (q, theta) = reduced_sample(s, p, angle)?;
        out.push(PhaseSample { position: q, angle: theta, weight: 0.5 * weight });
        out.push(PhaseSample { position: q, angle: wrap_angle(theta + PI), weight: 0.5 * weight });
    }
    Ok(out)
}

/// Samples of the closed geodesic of `c` every `step` of arc length, each
/// emitted with both directions at half weight. Total weight is `ℓ(c)`.
pub fn sample_orbit(s: &SurfaceStructure, c: &CurveClass, step: f64) -> Result<Vec<PhaseSample>, PhaseError> {
    sample_with(s, &IdealDomain::new(s), c, step)
}

pub fn census_id(census: &Census) -> String {
    format!(
        "{}:{}:{}:L={}",
        census.surface_label,
        census.mode,
        census.seed,
        format_sig17(census.cutoff)
    )
}

/// One histogram per binning from a single pass of sampling. Curves are
/// sampled in parallel and added in census order, so the result does not
/// depend on the thread count.
pub fn build_histograms(
    s: &SurfaceStructure,
    census: &Census,
    step: f64,
    binnings: &[BinningSpec],
) -> Result<Vec<PhaseHistogram>, PhaseError> {
    if !(step > 0.0 && step <= MAX_STEP) {
        return Err(PhaseError::InvalidStep(step));
    }
    let id = census_id(census);
    let mut hists = binnings
        .iter()
        .map(|b| PhaseHistogram::new(b.clone(), id.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let domain = IdealDomain::new(s);
    for batch in census.entries().chunks(BATCH) {
        let samples = batch
            .par_iter()
            .map(|e| sample_with(s, &domain, &e.class, step))
            .collect::<Result<Vec<_>, _>>()?;
        for curve in &samples {
            for h in hists.iter_mut() {
                h.add_samples(s, curve);
            }
        }
    }
    Ok(hists)
}

pub fn build_histogram(
    s: &SurfaceStructure,
    census: &Census,
    step: f64,
    binning: &BinningSpec,
) -> Result<PhaseHistogram, PhaseError> {
    Ok(build_histograms(s, census, step, std::slice::from_ref(binning))?.remove(0))
}

/// Total variation distance between the normalized histograms.
pub fn tv_distance(h1: &PhaseHistogram, h2: &PhaseHistogram) -> Result<f64, PhaseError> {
    if h1.binning != h2.binning {
        return Err(PhaseError::BinningMismatch);
    }
    let (m1, m2) = (h1.masses(), h2.masses());
    let (t1, t2): (f64, f64) = (m1.iter().sum(), m2.iter().sum());
    if t1 <= 0.0 || t2 <= 0.0 {
        return Err(PhaseError::EmptyHistogram);
    }
    let sum: f64 = m1.iter().zip(&m2).map(|(a, b)| (a / t1 - b / t2).abs()).sum();
    Ok((0.5 * sum).min(1.0))
}

/// Occupied cells of each histogram, typically the same samples at
/// increasing resolution.
pub fn occupancy_profile(hists: &[PhaseHistogram]) -> Vec<usize> {
    hists.iter().map(PhaseHistogram::occupied_cells).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::modular_torus;

    #[test]
    fn frames_send_axis_ends() {
        for (rep, att) in [(0.3, -2.0), (-1.0, 4.0), (f64::INFINITY, 1.5), (2.0, f64::INFINITY)] {
            let f = axis_frame(rep, att);
            assert!((f.det() - 1.0).abs() < 1e-12);
            let close = |x: f64, y: f64| (x.is_infinite() && y.is_infinite()) || (x - y).abs() < 1e-12;
            assert!(close(f.apply_boundary(0.0), rep));
            assert!(close(f.apply_boundary(f64::INFINITY), att));
        }
    }

    #[test]
    fn chords_add_up_to_the_length() {
        let s = modular_torus();
        let domain = IdealDomain::new(&s);
        for w in ["a", "aB", "aab", "aabb", "abAAB", "aaabbAbbaB", "ababababababababababababb"] {
            let c = CurveClass::parse(w).unwrap();
            let total: f64 = chords(&s, &domain, &c).unwrap().iter().map(|p| p.length).sum();
            let l = curve_length(&s, &c).unwrap();
            assert!((total - l).abs() < 1e-9 * l, "{w}: {total} vs {l}");
        }
    }

    #[test]
    fn sample_weights() {
        let s = modular_torus();
        let a = CurveClass::parse("a").unwrap();
        let smp = sample_orbit(&s, &a, 0.05).unwrap();
        let l = curve_length(&s, &a).unwrap();
        assert_eq!(smp.len(), 2 * (l / 0.05).ceil() as usize);
        let total: f64 = smp.iter().map(|x| x.weight).sum();
        assert!((total - 1.924847).abs() < 1e-6);
        assert!(matches!(sample_orbit(&s, &a, 0.0), Err(PhaseError::InvalidStep(_))));
        assert!(matches!(sample_orbit(&s, &a, 0.2), Err(PhaseError::InvalidStep(_))));
        let peripheral = CurveClass::parse("abAB").unwrap();
        assert!(matches!(sample_orbit(&s, &peripheral, 0.05), Err(PhaseError::Geometry(_))));
    }

    #[test]
    fn binning_validation() {
        assert!(BinningSpec::new(12, 12, 15).is_err());
        assert!(BinningSpec::new(0, 12, 16).is_err());
        let b = BinningSpec::default();
        assert_eq!(b.cell_count(), 2304);
        for c in 0..b.cell_count() {
            assert_eq!(b.flip(b.flip(c)), c);
            assert_ne!(b.flip(c), c);
        }
    }

    #[test]
    fn empty_histograms() {
        let h = PhaseHistogram::new(BinningSpec::default(), "empty").unwrap();
        assert_eq!(h.total_mass(), 0.0);
        assert_eq!(occupancy_profile(&[h.clone(), h.clone()]), vec![0, 0]);
        assert!(matches!(tv_distance(&h, &h), Err(PhaseError::EmptyHistogram)));
    }
}
