//! Dirichlet domain of the surface group. Only its face pairings are kept:
//! greedy descent over them lands in the domain, which makes reduction
//! equivariant.
//!
//! The group is conjugated so the centre sits at `i`. Candidates are the
//! bisectors of `i` and `γ·i` for short words `γ`, clipped in the Klein model. The word bound grows until the clipped polygon has the
//! area of the surface, `2π`; a missing face would leave extra area.

use std::f64::consts::PI;

use crate::hyperbolic::{Moebius, UpperHalfPoint};

const MAX_WORD_LEN: usize = 11;
const AREA_TOL: f64 = 1e-6;
const IDEAL_TOL: f64 = 1e-7;
// Farther bisectors lose all precision in the Klein chart.
const MAX_COSH: f64 = 1e16;

type Vertex = ([f64; 2], Option<usize>);

/// Half-plane `n·x <= c` of Klein points closer to `i` than to `q`.
fn bisector(q: UpperHalfPoint) -> ([f64; 2], f64) {
    let (u, v) = (q.u, q.v);
    let q0 = (u * u + v * v + 1.0) / (2.0 * v);
    let n = [(u * u + v * v - 1.0) / (2.0 * v), -u / v];
    let norm = n[0].hypot(n[1]);
    ([n[0] / norm, n[1] / norm], (q0 - 1.0) / norm)
}

fn clip(poly: &[Vertex], n: [f64; 2], c: f64, label: usize) -> Vec<Vertex> {
    let side = |p: [f64; 2]| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for (k, &(cur, lab)) in poly.iter().enumerate() {
        let next = poly[(k + 1) % poly.len()].0;
        let (sc, sn) = (side(cur), side(next));
        let cross = || {
            let t = sc / (sc - sn);
            [cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]
        };
        match (sc <= 0.0, sn <= 0.0) {
            (true, true) => out.push((cur, lab)),
            (true, false) => {
                out.push((cur, lab));
                out.push((cross(), Some(label)));
            }
            (false, true) => out.push((cross(), lab)),
            (false, false) => {}
        }
    }
    out
}

fn minkowski(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Interior angle at a finite Klein vertex `v` between the geodesics to
/// `p` and `q` (either may be ideal).
fn angle(v: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let s = (1.0 - v[0] * v[0] - v[1] * v[1]).sqrt();
    let vh = [1.0 / s, v[0] / s, v[1] / s];
    let tangent = |w: [f64; 2]| {
        let wh = [1.0, w[0], w[1]];
        let k = minkowski(wh, vh);
        [wh[0] + k * vh[0], wh[1] + k * vh[1], wh[2] + k * vh[2]]
    };
    let (tp, tq) = (tangent(p), tangent(q));
    let cos = minkowski(tp, tq) / (minkowski(tp, tp) * minkowski(tq, tq)).sqrt();
    cos.clamp(-1.0, 1.0).acos()
}

/// Area of the clipped polygon, `None` if it is not a finite-area
/// hyperbolic polygon (a vertex outside the disk or an unclipped side).
fn area(poly: &[Vertex]) -> Option<f64> {
    if poly.iter().any(|(p, lab)| lab.is_none() || p[0] * p[0] + p[1] * p[1] > 1.0 + IDEAL_TOL) {
        return None;
    }
    let ideal = |p: [f64; 2]| 1.0 - p[0] * p[0] - p[1] * p[1] < IDEAL_TOL;
    // Runs of ideal vertices are one ideal vertex.
    let mut merged: Vec<[f64; 2]> = Vec::new();
    let n = poly.len();
    let start = (0..n).find(|&k| !ideal(poly[k].0)).unwrap_or(0);
    for j in 0..n {
        let p = poly[(start + j) % n].0;
        let prev_ideal = merged.last().is_some_and(|&m| ideal(m));
        if !(ideal(p) && prev_ideal) {
            merged.push(p);
        }
    }
    if merged.len() > 1 && ideal(merged[0]) && ideal(merged[merged.len() - 1]) {
        merged.pop();
    }
    let m = merged.len();
    let angles: f64 = (0..m)
        .filter(|&k| !ideal(merged[k]))
        .map(|k| angle(merged[k], merged[(k + m - 1) % m], merged[(k + 1) % m]))
        .sum();
    Some((m as f64 - 2.0) * PI - angles)
}

/// Face pairings of the Dirichlet domain centred at `centre`, closed under
/// inverses, or `None` if words up to the length bound do not certify it.
pub(crate) fn face_pairings(a: &Moebius, b: &Moebius, centre: UpperHalfPoint) -> Option<Vec<Moebius>> {
    let sv = centre.v.sqrt();
    // h·i = centre
    let h = Moebius::new(sv, centre.u / sv, 0.0, 1.0 / sv)?;
    let hi = h.inverse();
    let gens = [hi.conjugate(a), hi.conjugate(&a.inverse()), hi.conjugate(b), hi.conjugate(&b.inverse())];
    // (last generator index, element)
    let mut layer: Vec<(usize, Moebius)> = gens.iter().copied().enumerate().collect();
    let mut candidates: Vec<Moebius> = gens.to_vec();
    for _ in 1..MAX_WORD_LEN {
        let mut cands: Vec<(f64, usize)> = candidates
            .iter()
            .enumerate()
            .map(|(k, g)| (g.apply(UpperHalfPoint::BASEPOINT).cosh_distance(&UpperHalfPoint::BASEPOINT), k))
            .filter(|(d, _)| d.is_finite() && *d < MAX_COSH)
            .collect();
        cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut poly: Vec<Vertex> =
            vec![([-2.0, -2.0], None), ([2.0, -2.0], None), ([2.0, 2.0], None), ([-2.0, 2.0], None)];
        for &(_, k) in &cands {
            let (n, c) = bisector(candidates[k].apply(UpperHalfPoint::BASEPOINT));
            poly = clip(&poly, n, c, k);
        }
        if area(&poly).is_some_and(|s| (s - 2.0 * PI).abs() < AREA_TOL) {
            let mut labels: Vec<usize> = poly.iter().filter_map(|v| v.1).collect();
            labels.sort_unstable();
            labels.dedup();
            let mut moves = Vec::new();
            for k in labels {
                // the bisector of i and g·i is crossed by g^-1
                let g = candidates[k].inverse();
                for m in [h.conjugate(&g), h.conjugate(&g.inverse())] {
                    if !moves.iter().any(|x: &Moebius| x.approx_eq(&m, 1e-9)) {
                        moves.push(m);
                    }
                }
            }
            return Some(moves);
        }
        layer = layer
            .iter()
            .flat_map(|&(last, w)| {
                (0..4)
                    .filter(move |&j| j != (last ^ 1))
                    .map(move |j| (j, w.compose(&gens[j])))
            })
            .collect();
        candidates.extend(layer.iter().map(|&(_, g)| g));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{build_surface, modular_torus};

    #[test]
    fn certified_for_sample_surfaces() {
        let surfaces = [(3.0, 4.0), (2.5, 7.0), (13.4, 9.8), (20.0, 20.0), (2.9, 20.0)]
            .map(|(x, y)| build_surface(x, y).unwrap());
        for s in std::iter::once(modular_torus()).chain(surfaces) {
            let moves = face_pairings(s.gen_a(), s.gen_b(), s.basepoint()).unwrap();
            assert!(moves.len() >= 4 && moves.len().is_multiple_of(2), "{}", moves.len());
        }
    }
}
