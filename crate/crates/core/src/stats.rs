//! Counting statistics over censuses: N(L), total length, power-law fits,
//! the total-length ratio and Thurston unit-ball estimates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::hyperbolic::SurfaceStructure;
use crate::orbits::{enumerate_simple, format_sig17, Census, CUTOFF_GUARD};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountPoint {
    pub cutoff: f64,
    pub count: usize,
    pub total_length: f64,
}

/// Step functions `N(L)` and `Σ ℓ` of a census, tabulated on a grid and
/// available exactly at any `L` up to the census cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingCurve {
    pub points: Vec<CountPoint>,
    cutoff: f64,
    lengths: Vec<f64>,
    prefix: Vec<f64>,
}

impl CountingCurve {
    /// From raw lengths; `cutoff` is the largest `L` the lengths are
    /// complete up to.
    pub fn from_lengths(mut lengths: Vec<f64>, cutoff: f64, grid: &[f64]) -> Result<CountingCurve, StatsError> {
        lengths.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(lengths.len() + 1);
        prefix.push(0.0);
        for &l in &lengths {
            prefix.push(prefix.last().expect("nonempty") + l);
        }
        let mut curve = CountingCurve { points: Vec::new(), cutoff, lengths, prefix };
        curve.points = grid.iter().map(|&l| curve.point(l)).collect::<Result<_, _>>()?;
        Ok(curve)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Exact values at `cutoff`.
    pub fn point(&self, cutoff: f64) -> Result<CountPoint, StatsError> {
        if cutoff > self.cutoff + CUTOFF_GUARD {
            return Err(StatsError::GridExceedsCutoff { point: cutoff, cutoff: self.cutoff });
        }
        let count = self.lengths.partition_point(|&l| l <= cutoff + CUTOFF_GUARD);
        Ok(CountPoint { cutoff, count, total_length: self.prefix[count] })
    }

    pub fn count(&self, cutoff: f64) -> Result<usize, StatsError> {
        self.point(cutoff).map(|p| p.count)
    }
}

pub fn counting_curve(c: &Census, grid: &[f64]) -> Result<CountingCurve, StatsError> {
    CountingCurve::from_lengths(c.entries().iter().map(|e| e.length).collect(), c.cutoff, grid)
}

/// Points `start, start + step, …` up to and including `end`.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Least squares of `log N` against `log L` over grid points in `window`
/// with `N > 0`.
pub fn fit_exponent(cc: &CountingCurve, window: (f64, f64)) -> Result<ExponentFit, StatsError> {
    let xy: Vec<(f64, f64)> = cc
        .points
        .iter()
        .filter(|p| p.cutoff >= window.0 && p.cutoff <= window.1 && p.count > 0)
        .map(|p| (p.cutoff.ln(), (p.count as f64).ln()))
        .collect();
    if xy.len() < MIN_FIT_POINTS {
        return Err(StatsError::InsufficientData { needed: MIN_FIT_POINTS, found: xy.len() });
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ExponentFit { slope, intercept, r_squared, points: xy.len() })
}

/// `Σ ℓ / (L · N(L))`, which tends to `d / (d + 1)` when `N(L) ~ c L^d`.
pub fn total_length_ratio(cc: &CountingCurve, cutoff: f64) -> Result<f64, StatsError> {
    let p = cc.point(cutoff)?;
    if p.count == 0 {
        return Err(StatsError::EmptyCensus(cutoff));
    }
    Ok(p.total_length / (cutoff * p.count as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThurstonBallEstimate {
    pub cutoff: f64,
    pub weighted_count: u64,
    pub complexity: u32,
    pub estimate: f64,
}

/// Integral multicurves on the punctured torus are `k · γ` with `γ` simple,
/// so the lattice count in the ball of radius `L` is `Σ_k N_simple(L/k)`.
pub fn thurston_ball_from(simple: &CountingCurve, cutoff: f64, complexity: u32) -> Result<ThurstonBallEstimate, StatsError> {
    let mut weighted = 0u64;
    for k in 1.. {
        let n = simple.count(cutoff / k as f64)?;
        if n == 0 {
            break;
        }
        weighted += n as u64;
    }
    if weighted == 0 {
        return Err(StatsError::Census(crate::error::CensusError::CutoffTooSmall { cutoff }));
    }
    let estimate = weighted as f64 / cutoff.powi(complexity as i32);
    Ok(ThurstonBallEstimate { cutoff, weighted_count: weighted, complexity, estimate })
}

pub fn thurston_ball(s: &SurfaceStructure, cutoff: f64) -> Result<ThurstonBallEstimate, StatsError> {
    let census = enumerate_simple(s, cutoff)?;
    let cc = counting_curve(&census, &[])?;
    thurston_ball_from(&cc, cutoff, s.complexity())
}

/// `(N(L) / L^d) / ball estimate`, the constant in `N(L) ~ C · m_Thu(ball) · L^d`.
pub fn estimate_c(cc: &CountingCurve, tb: &ThurstonBallEstimate, cutoff: f64) -> Result<f64, StatsError> {
    let n = cc.count(cutoff)?;
    Ok(n as f64 / cutoff.powi(tb.complexity as i32) / tb.estimate)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub cutoff: f64,
    pub count: usize,
    pub total_length: f64,
    pub ratio: Option<f64>,
    pub ball_estimate: f64,
    pub c_estimate: f64,
}

/// One row per grid point of `cc`; ball estimates come from the simple
/// counting curve, which must reach the same cutoff.
pub fn stats_rows(cc: &CountingCurve, simple: &CountingCurve, complexity: u32) -> Result<Vec<StatsRow>, StatsError> {
    cc.points
        .iter()
        .filter(|p| p.cutoff > 0.0)
        .map(|p| {
            let ratio = total_length_ratio(cc, p.cutoff).ok();
            let (ball_estimate, c_estimate) = match thurston_ball_from(simple, p.cutoff, complexity) {
                Ok(tb) => (tb.estimate, estimate_c(cc, &tb, p.cutoff)?),
                Err(StatsError::Census(_)) => (0.0, 0.0),
                Err(e) => return Err(e),
            };
            Ok(StatsRow {
                cutoff: p.cutoff,
                count: p.count,
                total_length: p.total_length,
                ratio,
                ball_estimate,
                c_estimate,
            })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[StatsRow]) -> String {
    let mut out = String::from("L,N,total_length,ratio,ball_estimate,C_estimate\n");
    for r in rows {
        let ratio = r.ratio.map_or_else(String::new, format_sig17);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.cutoff,
            r.count,
            format_sig17(r.total_length),
            ratio,
            format_sig17(r.ball_estimate),
            format_sig17(r.c_estimate)
        )
        .unwrap();
    }
    out
}
