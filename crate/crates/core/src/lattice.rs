//! Two-dimensional lattices: Lagrange–Gauss reduction, the first successive
//! minimum, the normalized modulus τ and primitive-vector enumeration.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative tolerance used for boundary decisions in the modulus domain.
pub const REL_TOL: f64 = 1e-9;

/// A vector in the Euclidean plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A rank-2 lattice `Z·b1 + Z·b2` in the plane.
///
/// Construction rejects degenerate bases, so every operation on a
/// `Lattice2D` is infallible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice2D {
    b1: Vec2,
    b2: Vec2,
}

impl Lattice2D {
    pub fn new(b1: Vec2, b2: Vec2) -> Result<Self> {
        let scale = b1.norm() * b2.norm();
        let det = b1.cross(b2);
        if !(b1.x.is_finite() && b1.y.is_finite() && b2.x.is_finite() && b2.y.is_finite()) {
            return Err(Error::InvalidLattice("non-finite basis vector".into()));
        }
        if scale == 0.0 || det.abs() <= 1e-12 * scale {
            return Err(Error::InvalidLattice(format!(
                "degenerate basis {b1}, {b2} (det = {det:e})"
            )));
        }
        Ok(Self { b1, b2 })
    }

    pub fn from_arrays(b1: [f64; 2], b2: [f64; 2]) -> Result<Self> {
        Self::new(Vec2::new(b1[0], b1[1]), Vec2::new(b2[0], b2[1]))
    }

    /// The integer lattice Z².
    pub fn square() -> Self {
        Self {
            b1: Vec2::new(1.0, 0.0),
            b2: Vec2::new(0.0, 1.0),
        }
    }

    /// Eisenstein integers `Z + Z·e^{iπ/3}` (coarea √3/2).
    pub fn hexagonal() -> Self {
        Self {
            b1: Vec2::new(1.0, 0.0),
            b2: Vec2::new(0.5, 3f64.sqrt() / 2.0),
        }
    }

    /// Unit-coarea Eisenstein lattice.
    pub fn eisenstein() -> Self {
        normalize_coarea(&Self::hexagonal())
    }

    /// The unit-coarea lattice similar to `Zτ + Z`, with basis `{σ⁻¹, σ⁻¹τ}`.
    pub fn from_tau(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "modulus must have positive imaginary part, got {re} + {im}i"
            )));
        }
        let sigma = im.sqrt();
        Self::new(
            Vec2::new(1.0 / sigma, 0.0),
            Vec2::new(re / sigma, im / sigma),
        )
    }

    pub fn b1(&self) -> Vec2 {
        self.b1
    }

    pub fn b2(&self) -> Vec2 {
        self.b2
    }

    /// Signed determinant `det(b1, b2)`.
    pub fn det(&self) -> f64 {
        self.b1.cross(self.b2)
    }

    pub fn coarea(&self) -> f64 {
        self.det().abs()
    }

    /// Cartesian point with lattice coordinates `(u, v)`.
    pub fn point(&self, u: f64, v: f64) -> Vec2 {
        u * self.b1 + v * self.b2
    }

    /// Lattice coordinates `(u, v)` of a Cartesian point.
    pub fn coords(&self, p: Vec2) -> (f64, f64) {
        let det = self.det();
        (p.cross(self.b2) / det, self.b1.cross(p) / det)
    }

    /// Metric tensor of the coordinates `(u, v)`: `[g_uu, g_uv, g_vv]`.
    pub fn gram(&self) -> [f64; 3] {
        [
            self.b1.norm_sq(),
            self.b1.dot(self.b2),
            self.b2.norm_sq(),
        ]
    }

    /// Inverse metric `[g^uu, g^uv, g^vv]`.
    pub fn inverse_gram(&self) -> [f64; 3] {
        let [a, b, c] = self.gram();
        let d = a * c - b * b;
        [c / d, -b / d, a / d]
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.b1, c * self.b2)
    }

    /// Whether `p` is a lattice point, up to a relative tolerance on its coordinates.
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        let (u, v) = self.coords(p);
        (u - u.round()).abs() <= tol * (1.0 + u.abs())
            && (v - v.round()).abs() <= tol * (1.0 + v.abs())
    }
}

/// Normalized modulus `τ = re + i·im` in the standard fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauParameter {
    pub re: f64,
    pub im: f64,
}

impl TauParameter {
    /// The primitive sixth root of unity `1/2 + i√3/2`.
    pub fn hexagonal() -> Self {
        Self {
            re: 0.5,
            im: 3f64.sqrt() / 2.0,
        }
    }

    /// `σ² = Im τ`.
    pub fn sigma_sq(&self) -> f64 {
        self.im
    }

    pub fn sigma(&self) -> f64 {
        self.im.sqrt()
    }

    pub fn distance(&self, other: &TauParameter) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub fn is_pure_imaginary(&self, tol: f64) -> bool {
        self.re.abs() <= tol
    }
}

impl fmt::Display for TauParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}i", self.re, self.im)
    }
}

/// Lagrange–Gauss reduction together with the unimodular change of basis.
///
/// Returns the reduced lattice and `T` with `reduced.b_k = T[k][0]·b1 + T[k][1]·b2`.
pub fn gauss_reduce_with_transform(lattice: &Lattice2D) -> (Lattice2D, [[i64; 2]; 2]) {
    let (mut a, mut b) = (lattice.b1, lattice.b2);
    let mut ta = [1i64, 0];
    let mut tb = [0i64, 1];
    if a.norm_sq() > b.norm_sq() * (1.0 + 1e-12) {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut ta, &mut tb);
    }
    // Each pass shortens b by a nonzero multiple of a; stop once it no longer does.
    for _ in 0..10_000 {
        let mu = (a.dot(b) / a.norm_sq()).round();
        if mu == 0.0 {
            break;
        }
        let candidate = b - mu * a;
        if candidate.norm_sq() >= b.norm_sq() * (1.0 - 1e-12) {
            break;
        }
        b = candidate;
        let k = mu as i64;
        tb = [tb[0] - k * ta[0], tb[1] - k * ta[1]];
        if b.norm_sq() * (1.0 + 1e-12) < a.norm_sq() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut ta, &mut tb);
        }
    }
    (Lattice2D { b1: a, b2: b }, [ta, tb])
}

/// Reduced basis with `|b1| ≤ |b2|` and `|b1·b2| ≤ |b1|²/2`.
pub fn gauss_reduce(lattice: &Lattice2D) -> Lattice2D {
    gauss_reduce_with_transform(lattice).0
}

/// First successive minimum: the length of a shortest nonzero vector.
pub fn lambda1(lattice: &Lattice2D) -> f64 {
    gauss_reduce(lattice).b1.norm()
}

/// The modulus τ of the lattice in the standard fundamental domain.
///
/// On the boundary arcs (`|τ| = 1` or `Re τ = ±1/2`) the representative with
/// `Re τ ≥ 0` is chosen.
pub fn tau_of(lattice: &Lattice2D) -> TauParameter {
    let reduced = gauss_reduce(lattice);
    let (a, b) = (reduced.b1, reduced.b2);
    let n = a.norm_sq();
    let mut re = a.dot(b) / n;
    let im = a.cross(b) / n;
    // Replacing b2 by -b2 flips the orientation: τ ↦ -τ.
    let im = if im < 0.0 {
        re = -re;
        -im
    } else {
        im
    };
    if re < -0.5 {
        re += 1.0;
    } else if re > 0.5 {
        re -= 1.0;
    }
    if (re + 0.5).abs() <= REL_TOL {
        re = 0.5;
    }
    let modulus = re.hypot(im);
    if (modulus - 1.0).abs() <= REL_TOL && re < 0.0 {
        re = -re;
    }
    TauParameter { re, im }
}

/// Rescales the lattice to unit coarea; the shape is unchanged.
pub fn normalize_coarea(lattice: &Lattice2D) -> Lattice2D {
    let c = lattice.coarea().powf(-0.5);
    Lattice2D {
        b1: c * lattice.b1,
        b2: c * lattice.b2,
    }
}

/// A lattice vector `m·b1 + n·b2`, with coefficients in the lattice's own basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeVector {
    pub m: i64,
    pub n: i64,
    pub vec: Vec2,
}

impl LatticeVector {
    pub fn new(lattice: &Lattice2D, m: i64, n: i64) -> Self {
        Self {
            m,
            n,
            vec: lattice.point(m as f64, n as f64),
        }
    }

    pub fn length(&self) -> f64 {
        self.vec.norm()
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Sort key: length bucketed at 1e-9 relative resolution, then coefficients.
pub(crate) fn length_order(a: &LatticeVector, b: &LatticeVector) -> std::cmp::Ordering {
    let la = a.length();
    let lb = b.length();
    if (la - lb).abs() <= REL_TOL * la.max(lb) {
        (a.m, a.n).cmp(&(b.m, b.n))
    } else {
        la.total_cmp(&lb)
    }
}

/// All primitive vectors of length at most `bound`, one of each `±v` pair.
///
/// The representative has `n > 0`, or `n = 0` and `m > 0`. Results are
/// sorted by length, ties broken lexicographically on `(m, n)`.
pub fn primitive_vectors_up_to(lattice: &Lattice2D, bound: f64) -> Vec<LatticeVector> {
    if !(bound > 0.0) {
        return Vec::new();
    }
    let det = lattice.coarea();
    // Cramer: m = det(v, b2)/det(b1, b2), so |m| ≤ |v||b2|/|det|.
    let m_max = (bound * lattice.b2.norm() / det).floor() as i64;
    let n_max = (bound * lattice.b1.norm() / det).floor() as i64;
    let limit = bound * (1.0 + REL_TOL);
    let mut out = Vec::new();
    for n in 0..=n_max {
        let m_lo = if n == 0 { 1 } else { -m_max };
        for m in m_lo..=m_max {
            if gcd(m, n) != 1 {
                continue;
            }
            let v = LatticeVector::new(lattice, m, n);
            if v.length() <= limit {
                out.push(v);
            }
        }
    }
    out.sort_by(length_order);
    out
}
