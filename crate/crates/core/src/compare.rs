//! Two structures on the same marked torus, compared through the marked
//! length spectrum of a census.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CompareError, GeometryError};
use crate::hyperbolic::SurfaceStructure;
use crate::orbits::{format_sig17, Census};
use crate::words::{curve_length, is_peripheral, CurveClass};

pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    IsometricWithinTol,
    Distinct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub class: CurveClass,
    pub length: f64,
    pub target_length: f64,
    pub ratio: f64,
    pub xi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub labels: (String, String),
    pub rows: Vec<CompareRow>,
    pub ratio_inf: f64,
    pub ratio_sup: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn target_length(t: &SurfaceStructure, c: &CurveClass) -> Result<f64, CompareError> {
    if is_peripheral(t, c) {
        return Err(CompareError::PeripheralOnTarget(c.to_string()));
    }
    Ok(curve_length(t, c)?)
}

/// `(ℓ_T(c) / ℓ_S(c))^(d+1)` with `d` the complexity of `S`.
pub fn rn_weight(s: &SurfaceStructure, t: &SurfaceStructure, c: &CurveClass) -> Result<f64, GeometryError> {
    let ratio = curve_length(t, c)? / curve_length(s, c)?;
    Ok(ratio.powi(s.complexity() as i32 + 1))
}

fn rows(s: &SurfaceStructure, t: &SurfaceStructure, census: &Census) -> Result<Vec<CompareRow>, CompareError> {
    let exponent = s.complexity() as i32 + 1;
    census
        .entries()
        .par_iter()
        .map(|e| {
            // Both lengths from the same word, so identical structures give
            // ratio exactly 1 (census lengths may come from another route).
            let length = curve_length(s, &e.class)?;
            let target_length = target_length(t, &e.class)?;
            let ratio = target_length / length;
            Ok(CompareRow { class: e.class.clone(), length, target_length, ratio, xi: ratio.powi(exponent) })
        })
        .collect()
}

fn extremes(rows: &[CompareRow]) -> Result<(f64, f64), CompareError> {
    if rows.is_empty() {
        return Err(CompareError::EmptyCensus);
    }
    Ok(rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.ratio), hi.max(r.ratio))))
}

/// Smallest and largest `ℓ_T / ℓ_S` over a census built on `S`.
pub fn length_ratio_extremes(
    s: &SurfaceStructure,
    t: &SurfaceStructure,
    census: &Census,
) -> Result<(f64, f64), CompareError> {
    extremes(&rows(s, t, census)?)
}

fn verdict((inf, sup): (f64, f64), tol: f64) -> Verdict {
    if sup <= 1.0 + tol && inf >= 1.0 - tol {
        Verdict::IsometricWithinTol
    } else {
        Verdict::Distinct
    }
}

/// Isometric within `tol` when every marked length ratio is within `tol`
/// of 1. A tolerance of 1 or more accepts nearly anything.
pub fn isometry_test(
    s: &SurfaceStructure,
    t: &SurfaceStructure,
    census: &Census,
    tol: f64,
) -> Result<Verdict, CompareError> {
    Ok(verdict(length_ratio_extremes(s, t, census)?, tol))
}

pub fn compare(
    s: &SurfaceStructure,
    t: &SurfaceStructure,
    census: &Census,
    tol: f64,
) -> Result<CompareReport, CompareError> {
    let rows = rows(s, t, census)?;
    let (ratio_inf, ratio_sup) = extremes(&rows)?;
    Ok(CompareReport {
        labels: (s.label().to_string(), t.label().to_string()),
        rows,
        ratio_inf,
        ratio_sup,
        tolerance: tol,
        verdict: verdict((ratio_inf, ratio_sup), tol),
    })
}

impl CompareReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn rows_to_csv(&self) -> String {
        let mut out = String::from("word,length,target_length,ratio,xi\n");
        for r in &self.rows {
            let cols = [r.length, r.target_length, r.ratio, r.xi].map(format_sig17);
            out.push_str(&format!("{},{}\n", r.class, cols.join(",")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{build_surface, modular_torus};

    #[test]
    fn weights() {
        let s = modular_torus();
        let t = build_surface(3.0, 4.0).unwrap();
        let b = CurveClass::parse("b").unwrap();
        let a = CurveClass::parse("a").unwrap();
        assert_eq!(rn_weight(&s, &s, &b).unwrap(), 1.0);
        assert!((rn_weight(&s, &t, &a).unwrap() - 1.0).abs() < 1e-12);
        let expected = (2.0f64.acosh() / 1.5f64.acosh()).powi(3);
        assert!((rn_weight(&s, &t, &b).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn verdicts() {
        assert_eq!(verdict((1.0, 1.0), 0.0), Verdict::IsometricWithinTol);
        assert_eq!(verdict((0.99, 1.0), 0.005), Verdict::Distinct);
        assert_eq!(verdict((0.2, 1.9), 1.0), Verdict::IsometricWithinTol);
        assert_eq!(serde_json::to_string(&Verdict::IsometricWithinTol).unwrap(), "\"isometric-within-tol\"");
    }
}
