//! Ideal quadrilateral fundamental domain of a marked punctured torus, used
//! to bound where closed geodesics of bounded length can be found.

use crate::hyperbolic::{Moebius, SurfaceStructure, UpperHalfPoint};

type Vec3 = [f64; 3];

fn minkowski(x: &Vec3, y: &Vec3) -> f64 {
    -x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// Hyperboloid model of a point of the upper half-plane.
fn hyperboloid(p: UpperHalfPoint) -> Vec3 {
    let s = p.u * p.u + p.v * p.v;
    [(1.0 + s) / (2.0 * p.v), p.u / p.v, (s - 1.0) / (2.0 * p.v)]
}

/// Light-like vector of a boundary point (∞ allowed).
fn light(t: f64) -> Vec3 {
    if t.is_infinite() {
        [1.0, 0.0, 1.0]
    } else {
        [1.0 + t * t, 2.0 * t, t * t - 1.0]
    }
}

fn parabolic_fixed_point(m: &Moebius) -> f64 {
    let [a, b, c, d] = m.entries();
    if c.abs() <= 1e-14 * (a.abs() + b.abs() + d.abs()) {
        f64::INFINITY
    } else {
        (a - d) / (2.0 * c)
    }
}

/// Möbius map sending `v` to ∞ (the identity when `v` already is ∞).
fn to_infinity(v: f64) -> Moebius {
    if v.is_infinite() {
        Moebius::IDENTITY
    } else {
        Moebius::new(0.0, -1.0, 1.0, -v).expect("unit determinant")
    }
}

fn cross(p: &Vec3, q: &Vec3) -> Vec3 {
    [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]]
}

/// Unit normal of the geodesic through two boundary points.
fn line_normal(p: &Vec3, q: &Vec3) -> Vec3 {
    let c = cross(p, q);
    let n = [-c[0], c[1], c[2]];
    let norm = minkowski(&n, &n).sqrt();
    n.map(|x| x / norm)
}

#[derive(Clone, Copy, Debug)]
struct Cusp {
    to_infinity: Moebius,
    strip: (f64, f64),
    height: f64,
}

impl Cusp {
    /// Distance from `p` to the box `strip × (0, height]`, which contains
    /// the part of the domain outside the horoballs.
    fn box_distance(&self, p: UpperHalfPoint) -> f64 {
        let q = self.to_infinity.apply(p);
        let dx = (self.strip.0 - q.u).max(q.u - self.strip.1).max(0.0);
        let t = dx.hypot(q.v);
        if t <= self.height {
            (dx / q.v).asinh()
        } else {
            let h = self.height;
            (1.0 + (dx * dx + (q.v - h) * (q.v - h)) / (2.0 * q.v * h)).acosh()
        }
    }
}

#[derive(Clone, Debug)]
pub struct IdealDomain {
    vertices: [f64; 4],
    /// Unit spacelike normals of the sides, `⟨X, n⟩ > 0` on the inside.
    normals: [Vec3; 4],
    /// Per vertex: a map sending it to ∞, the strip between the two sides
    /// there in those coordinates, and the height of the cusp horoball.
    cusps: [Cusp; 4],
    centre: UpperHalfPoint,
    core_radius: f64,
}

impl IdealDomain {
    /// Vertices `p, A⁻¹p, A⁻¹B⁻¹p, B⁻¹p` with `p` the fixed point of the
    /// commutator; sides are paired by the generators.
    pub fn new(s: &SurfaceStructure) -> IdealDomain {
        let k = s.commutator();
        let ai = s.gen_a().inverse();
        let bi = s.gen_b().inverse();
        let moves = [Moebius::IDENTITY, ai, ai.compose(&bi), bi];
        let p = parabolic_fixed_point(&k);
        let vertices = moves.map(|g| g.apply_boundary(p));
        let stabilizers = moves.map(|g| g.conjugate(&k));

        let lights = vertices.map(light);
        // The diagonals of a convex ideal quadrilateral cross inside it.
        let d02 = line_normal(&lights[0], &lights[2]);
        let d13 = line_normal(&lights[1], &lights[3]);
        let c = cross(&d02, &d13);
        let mut x = [-c[0], c[1], c[2]];
        let scale = (-minkowski(&x, &x)).sqrt() * x[0].signum();
        x = x.map(|t| t / scale);
        let v = 1.0 / (x[0] - x[2]);
        let centre = UpperHalfPoint { u: x[1] * v, v };
        let inside = hyperboloid(centre);
        let normals = std::array::from_fn(|i| {
            let n = line_normal(&lights[i], &lights[(i + 1) % 4]);
            let sign = minkowski(&n, &inside).signum();
            n.map(|t| t * sign)
        });

        // Cusp horoballs bounded by the horocycle of length 1/2. Those of
        // length 1 are embedded by Shimizu's lemma, so these are a positive
        // distance apart. The rest of the domain is compact and its farthest
        // points from the centre are the corners where the horocycles meet
        // the sides.
        let cusps: [Cusp; 4] = std::array::from_fn(|i| {
            let m = to_infinity(vertices[i]);
            let w = m.conjugate(&stabilizers[i]).entries()[1].abs();
            let x1 = m.apply_boundary(vertices[(i + 1) % 4]);
            let x2 = m.apply_boundary(vertices[(i + 3) % 4]);
            Cusp { to_infinity: m, strip: (x1.min(x2), x1.max(x2)), height: 2.0 * w }
        });
        let mut core_radius: f64 = 0.0;
        for c in &cusps {
            for foot in [c.strip.0, c.strip.1] {
                let corner = c.to_infinity.inverse().apply(UpperHalfPoint { u: foot, v: c.height });
                core_radius = core_radius.max(corner.distance(&centre));
            }
        }
        IdealDomain { vertices, normals, cusps, centre, core_radius }
    }

    pub fn vertices(&self) -> [f64; 4] {
        self.vertices
    }

    /// Point where the diagonals cross.
    pub fn centre(&self) -> UpperHalfPoint {
        self.centre
    }

    /// Distance from the centre to the farthest point of the domain outside
    /// the cusp horoballs. Every closed geodesic meets that region.
    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    /// Hyperbolic distance from `p` to the closed domain (0 inside).
    pub fn distance_to(&self, p: UpperHalfPoint) -> f64 {
        let x = hyperboloid(p);
        let worst = self.normals.iter().map(|n| minkowski(&x, n)).fold(f64::INFINITY, f64::min);
        if worst >= 0.0 {
            0.0
        } else {
            (-worst).asinh()
        }
    }

    /// Whether the geodesic with endpoints `ends` passes through the domain,
    /// i.e. the vertices are not all on one side of it.
    pub fn crossed_by(&self, ends: (f64, f64)) -> bool {
        let n = line_normal(&light(ends.0), &light(ends.1));
        let sides = self.vertices.map(|v| minkowski(&light(v), &n));
        let pos = sides.iter().any(|&x| x >= 0.0);
        let neg = sides.iter().any(|&x| x <= 0.0);
        pos && neg
    }

    /// Lower bound for the distance from `p` to the domain with the cusp
    /// horoballs removed.
    pub fn core_distance_bound(&self, p: UpperHalfPoint) -> f64 {
        self.cusps.iter().map(|c| c.box_distance(p)).fold(self.distance_to(p), f64::max)
    }

    /// Lower bound for the distance from the centre to the truncated tile
    /// `g Q`.
    pub fn tile_distance(&self, g: &Moebius) -> f64 {
        self.core_distance_bound(g.inverse().apply(self.centre))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::{build_surface, modular_torus};

    #[test]
    fn vertices_are_parabolic_fixed_points() {
        let s = modular_torus();
        let q = IdealDomain::new(&s);
        let v = q.vertices();
        assert!(v.iter().all(|t| t.is_finite()));
        // A maps side 1 = [A⁻¹p, A⁻¹B⁻¹p] onto side 3 = [p, B⁻¹p] reversed.
        let a = s.gen_a();
        assert!((a.apply_boundary(v[1]) - v[0]).abs() < 1e-9);
        assert!((a.apply_boundary(v[2]) - v[3]).abs() < 1e-9);
    }

    #[test]
    fn inside_points_have_distance_zero() {
        for s in [modular_torus(), build_surface(3.0, 4.0).unwrap()] {
            let q = IdealDomain::new(&s);
            let v = q.vertices();
            // midpoint of the diagonal from vertex 0 to vertex 2
            let c = (v[0] + v[2]) / 2.0;
            let r = (v[0] - v[2]).abs() / 2.0;
            let on_diagonal = UpperHalfPoint { u: c, v: r };
            assert_eq!(q.distance_to(on_diagonal), 0.0);
            assert!(q.core_radius() > 0.0 && q.core_radius() < 10.0);
        }
    }

    #[test]
    fn distance_matches_sampled_sides() {
        let s = build_surface(3.0, 4.0).unwrap();
        let q = IdealDomain::new(&s);
        let v = q.vertices();
        let side_points: Vec<UpperHalfPoint> = (0..4)
            .flat_map(|k| {
                let (e1, e2) = (v[k], v[(k + 1) % 4]);
                let (c, r) = ((e1 + e2) / 2.0, (e1 - e2).abs() / 2.0);
                (1..20000).map(move |j| {
                    let phi = std::f64::consts::PI * j as f64 / 20000.0;
                    UpperHalfPoint { u: c + r * phi.cos(), v: r * phi.sin() }
                })
            })
            .collect();
        let g = s.gen_a().compose(s.gen_b()).compose(s.gen_a());
        let mut outside = 0;
        for p in [UpperHalfPoint::BASEPOINT, g.apply(UpperHalfPoint::BASEPOINT), UpperHalfPoint { u: 3.0, v: 0.2 }] {
            let d = q.distance_to(p);
            if d == 0.0 {
                continue;
            }
            let sampled = side_points.iter().map(|x| x.distance(&p)).fold(f64::INFINITY, f64::min);
            assert!((sampled - d).abs() < 1e-3, "{d} vs {sampled}");
            outside += 1;
        }
        assert!(outside >= 2);
    }
}
