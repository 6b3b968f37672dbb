//! Isometries of the upper half-plane, cusped torus structures in trace
//! coordinates, and reduction of points to a fundamental region.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::IdealDomain;
use crate::error::GeometryError;

/// Tolerance on `|det - 1|` that every stored matrix satisfies.
pub const DET_TOLERANCE: f64 = 1e-9;
/// Drift beyond which a product is renormalized by `sqrt(det)`.
const DET_RENORMALIZE: f64 = 1e-12;
/// `|tr| <= 2 + HYPERBOLIC_SLACK` is treated as parabolic or elliptic.
pub const HYPERBOLIC_SLACK: f64 = 1e-12;
/// Iteration cap for greedy reduction.
pub const REDUCTION_CAP: usize = 10_000;

/// Unit-determinant real 2x2 matrix, identified with its negative.
#[derive(Clone, Copy, PartialEq)]
pub struct Moebius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl fmt::Debug for Moebius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// Builds a matrix from entries, normalizing the determinant to one and
    /// choosing the canonical sign. Returns `None` for a non-positive
    /// determinant or non-finite entries.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Option<Moebius> {
        let det = a * d - b * c;
        if !(det > 0.0) || ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return None;
        }
        Some(Moebius { a, b, c, d }.normalized())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Moebius {
        Moebius { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical_sign()
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        Moebius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    /// `self * other * self^-1`.
    pub fn conjugate(&self, other: &Moebius) -> Moebius {
        self.compose(other).compose(&self.inverse())
    }

    fn normalized(self) -> Moebius {
        let det = self.det();
        // For large entries `ad - bc` cancels catastrophically; drift that
        // is not clearly above that noise is not measurable and rescaling by
        // it would only inject error.
        let noise = 1024.0 * f64::EPSILON * (self.a * self.d).abs().max((self.b * self.c).abs());
        let drift = (det - 1.0).abs();
        let m = if drift > DET_RENORMALIZE && drift > noise {
            let s = det.sqrt();
            Moebius { a: self.a / s, b: self.b / s, c: self.c / s, d: self.d / s }
        } else {
            self
        };
        m.canonical_sign()
    }

    fn canonical_sign(self) -> Moebius {
        if self.a > 0.0 || (self.a == 0.0 && self.b > 0.0) {
            self
        } else {
            Moebius { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        }
    }

    /// Entrywise comparison up to the sign identification.
    pub fn approx_eq(&self, other: &Moebius, tol: f64) -> bool {
        let close = |s: f64| {
            (self.a - s * other.a).abs() <= tol
                && (self.b - s * other.b).abs() <= tol
                && (self.c - s * other.c).abs() <= tol
                && (self.d - s * other.d).abs() <= tol
        };
        close(1.0) || close(-1.0)
    }

    /// Action on the upper half-plane.
    pub fn apply(&self, p: UpperHalfPoint) -> UpperHalfPoint {
        // (a z + b)/(c z + d) with z = u + iv; Im = v / |cz + d|^2.
        let (u, v) = (p.u, p.v);
        let den_re = self.c * u + self.d;
        let den_im = self.c * v;
        let den = den_re * den_re + den_im * den_im;
        let num_re = self.a * u + self.b;
        let num_im = self.a * v;
        UpperHalfPoint {
            u: (num_re * den_re + num_im * den_im) / den,
            v: v / den,
        }
    }

    /// Action on the boundary `R ∪ {∞}`, with `f64::INFINITY` standing for ∞.
    pub fn apply_boundary(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return if self.c == 0.0 { f64::INFINITY } else { self.a / self.c };
        }
        let den = self.c * x + self.d;
        if den == 0.0 {
            f64::INFINITY
        } else {
            (self.a * x + self.b) / den
        }
    }

    /// Argument of the complex derivative at `p`; the rotation applied to
    /// tangent directions.
    pub fn derivative_angle(&self, p: UpperHalfPoint) -> f64 {
        // g'(z) = (cz + d)^-2
        let re = self.c * p.u + self.d;
        let im = self.c * p.v;
        -2.0 * im.atan2(re)
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + HYPERBOLIC_SLACK
    }
}

pub fn compose(m1: &Moebius, m2: &Moebius) -> Moebius {
    m1.compose(m2)
}

/// Hyperbolic translation length `2 arccosh(|tr|/2)`.
pub fn translation_length(m: &Moebius) -> Result<f64, GeometryError> {
    length_from_trace(m.trace())
}

pub fn length_from_trace(trace: f64) -> Result<f64, GeometryError> {
    let t = trace.abs();
    if t <= 2.0 + HYPERBOLIC_SLACK {
        return Err(GeometryError::NotHyperbolic { trace });
    }
    Ok(2.0 * (t / 2.0).acosh())
}

/// Fixed points of a hyperbolic element, `(repelling, attracting)`.
pub fn axis(m: &Moebius) -> Result<(f64, f64), GeometryError> {
    if !m.is_hyperbolic() {
        return Err(GeometryError::NotHyperbolic { trace: m.trace() });
    }
    let [a, b, c, d] = m.entries();
    let tr = a + d;
    if c == 0.0 {
        // z ↦ (a z + b)/d fixes b/(d - a) with multiplier a/d, and ∞.
        let finite = b / (d - a);
        return Ok(if (a / d).abs() < 1.0 {
            (f64::INFINITY, finite)
        } else {
            (finite, f64::INFINITY)
        });
    }
    // c z^2 + (d - a) z - b = 0, discriminant tr^2 - 4.
    let root = (tr * tr - 4.0).sqrt();
    let p = (a - d + root) / (2.0 * c);
    let q = (a - d - root) / (2.0 * c);
    // attracting: |g'(z)| = |cz + d|^-2 < 1
    if (c * p + d).abs() > (c * q + d).abs() {
        Ok((q, p))
    } else {
        Ok((p, q))
    }
}

/// Point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPoint {
    pub u: f64,
    pub v: f64,
}

impl UpperHalfPoint {
    pub const BASEPOINT: UpperHalfPoint = UpperHalfPoint { u: 0.0, v: 1.0 };

    pub fn new(u: f64, v: f64) -> Result<UpperHalfPoint, GeometryError> {
        if v > 0.0 && u.is_finite() && v.is_finite() {
            Ok(UpperHalfPoint { u, v })
        } else {
            Err(GeometryError::OutsideHalfPlane { u, v })
        }
    }

    /// `cosh` of the hyperbolic distance.
    pub fn cosh_distance(&self, other: &UpperHalfPoint) -> f64 {
        let du = self.u - other.u;
        let dv = self.v - other.v;
        1.0 + (du * du + dv * dv) / (2.0 * self.v * other.v)
    }

    pub fn distance(&self, other: &UpperHalfPoint) -> f64 {
        self.cosh_distance(other).max(1.0).acosh()
    }

    /// Image in the Poincaré disk under `z ↦ (z - i)/(z + i)`.
    pub fn to_disk(&self) -> (f64, f64) {
        let (u, v) = (self.u, self.v);
        let den = u * u + (v + 1.0) * (v + 1.0);
        ((u * u + v * v - 1.0) / den, -2.0 * u / den)
    }
}

/// Marked cusped torus given by a trace triple `(x, y, z)` on the Markov
/// cubic `x^2 + y^2 + z^2 = xyz`, with generators in a fixed normal form.
#[derive(Clone, Debug)]
pub struct SurfaceStructure {
    label: String,
    x: f64,
    y: f64,
    z: f64,
    gen_a: Moebius,
    gen_b: Moebius,
    /// Centre of the reduction domain.
    basepoint: UpperHalfPoint,
    /// Face pairings of the Dirichlet domain at `basepoint`, built on the
    /// first reduction.
    moves: OnceLock<Option<Vec<Moebius>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub label: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SurfaceStructure {
    /// Complexity `6g - 6 + 2r` for a once-punctured torus.
    pub const COMPLEXITY: u32 = 2;

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn traces(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }

    pub fn complexity(&self) -> u32 {
        Self::COMPLEXITY
    }

    pub fn gen_a(&self) -> &Moebius {
        &self.gen_a
    }

    pub fn gen_b(&self) -> &Moebius {
        &self.gen_b
    }

    /// Trace of `ABA^-1B^-1` taken in SL(2, R), where the sign is
    /// meaningful; equals -2 exactly when the commutator is a cusp.
    pub fn commutator_trace(&self) -> f64 {
        let (a, b) = (self.gen_a.entries(), self.gen_b.entries());
        let inv = |m: [f64; 4]| [m[3], -m[1], -m[2], m[0]];
        let mul = |m: [f64; 4], n: [f64; 4]| {
            [
                m[0] * n[0] + m[1] * n[2],
                m[0] * n[1] + m[1] * n[3],
                m[2] * n[0] + m[3] * n[2],
                m[2] * n[1] + m[3] * n[3],
            ]
        };
        let k = mul(mul(mul(a, b), inv(a)), inv(b));
        k[0] + k[3]
    }

    /// `ABA^-1B^-1`.
    /// The point reductions move orbits towards: the centre of the ideal
    /// quadrilateral spanned by the cusp and its images.
    pub fn basepoint(&self) -> UpperHalfPoint {
        self.basepoint
    }

    pub fn commutator(&self) -> Moebius {
        self.gen_a
            .compose(&self.gen_b)
            .compose(&self.gen_a.inverse())
            .compose(&self.gen_b.inverse())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> SurfaceStructure {
        self.label = label.into();
        self
    }

    pub fn spec(&self) -> SurfaceSpec {
        SurfaceSpec { label: self.label.clone(), x: self.x, y: self.y, z: self.z }
    }

    /// Rebuilds from the serialized form; `z` is recomputed and must agree.
    pub fn from_spec(spec: &SurfaceSpec) -> Result<SurfaceStructure, GeometryError> {
        let s = build_surface(spec.x, spec.y)?.with_label(spec.label.clone());
        if (s.z - spec.z).abs() > 1e-9 * s.z.abs().max(1.0) {
            return Err(GeometryError::InconsistentTraces { expected: s.z, found: spec.z });
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.spec()).expect("surface spec serializes")
    }

    pub fn from_json(text: &str) -> Result<SurfaceStructure, GeometryError> {
        let spec: SurfaceSpec =
            serde_json::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        SurfaceStructure::from_spec(&spec)
    }

    /// Greedy descent of `cosh d(·, o)` over the Dirichlet face pairings,
    /// `o` the basepoint, so the result lies in the Dirichlet domain at `o`. Returns the
    /// reduced point and the accumulated element `g` with `g·p = p'`.
    pub fn reduce_to_domain(
        &self,
        p: UpperHalfPoint,
    ) -> Result<(UpperHalfPoint, Moebius), GeometryError> {
        let moves = self
            .moves
            .get_or_init(|| crate::dirichlet::face_pairings(&self.gen_a, &self.gen_b, self.basepoint))
            .as_deref()
            .ok_or(GeometryError::UncertifiedDomain { x: self.x, y: self.y })?;
        let base = self.basepoint;
        let mut point = p;
        let mut g = Moebius::IDENTITY;
        let mut current = point.cosh_distance(&base);
        for _ in 0..REDUCTION_CAP {
            let mut best: Option<(f64, usize, UpperHalfPoint)> = None;
            for (k, m) in moves.iter().enumerate() {
                let q = m.apply(point);
                let val = q.cosh_distance(&base);
                if val < current * (1.0 - 1e-13)
                    && best.as_ref().is_none_or(|(bv, _, _)| val < *bv)
                {
                    best = Some((val, k, q));
                }
            }
            match best {
                None => return Ok((point, g)),
                Some((val, k, q)) => {
                    point = q;
                    current = val;
                    g = moves[k].compose(&g);
                }
            }
        }
        Err(GeometryError::NonTermination { cap: REDUCTION_CAP })
    }
}

/// Trace-coordinate construction of a cusped torus with `tr A = x`,
/// `tr B = y` and `tr AB = z`, `z` the larger root of the Markov cubic.
pub fn build_surface(x: f64, y: f64) -> Result<SurfaceStructure, GeometryError> {
    let disc = x * x * y * y - 4.0 * (x * x + y * y);
    if !(disc >= 0.0) {
        return Err(GeometryError::NoRealSolution { x, y });
    }
    if x.abs() <= 2.0 || y.abs() <= 2.0 {
        return Err(GeometryError::DegenerateTrace { trace: if x.abs() <= 2.0 { x } else { y } });
    }
    let z = (x * y + disc.sqrt()) / 2.0;
    if z.abs() <= 2.0 {
        return Err(GeometryError::DegenerateTrace { trace: z });
    }
    // η solves η^2 + zη + 1 = 0; the root with |η| >= 1.
    let eta = (-z - (z * z - 4.0).sqrt()) / 2.0;
    let gen_a = Moebius::new(x, 1.0, -1.0, 0.0).expect("det 1");
    let gen_b = Moebius::new(0.0, eta, -1.0 / eta, y).expect("det 1");
    let mut s = SurfaceStructure {
        label: format!("torus({x},{y})"),
        x,
        y,
        z,
        gen_a,
        gen_b,
        basepoint: UpperHalfPoint::BASEPOINT,
        moves: OnceLock::new(),
    };
    // i can lie far out in a thin part, where its Dirichlet domain needs
    // very long face pairings; the centre of the ideal quadrilateral cannot.
    s.basepoint = IdealDomain::new(&s).centre();
    Ok(s)
}

/// The maximally symmetric cusped torus, trace triple (3, 3, 6).
pub fn modular_torus() -> SurfaceStructure {
    build_surface(3.0, 3.0).expect("(3,3) is admissible").with_label("modular")
}

/// Normalizes an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}
