//! Periodic scalar fields over a lattice fundamental domain, conformal
//! metrics `f²·g₀`, and the discrete operators acting on them.
//!
//! Samples live on the uniform grid `value[i][j] = field((i/nu)·b1 + (j/nv)·b2)`
//! and wrap modulo `(nu, nv)`. Integrals use the rectangle rule, which for
//! periodic integrands coincides with the trapezoidal rule.

mod family;
pub mod grid_file;

pub use family::{from_analytic, AnalyticFamily, ExpTrigMode, TrigMode};

use crate::error::{Error, Result};
use crate::lattice::{Lattice2D, Vec2};
use crate::sum::{pairwise_sum, shifted_mean};

/// Minimum number of samples along each lattice direction.
pub const MIN_GRID: usize = 8;

/// Conformal factors must exceed this everywhere.
pub const MIN_FACTOR: f64 = 1e-12;

/// Samples of a real function on the periodic grid of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    lattice: Lattice2D,
    nu: usize,
    nv: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(lattice: Lattice2D, nu: usize, nv: usize, values: Vec<f64>) -> Result<Self> {
        if nu < MIN_GRID || nv < MIN_GRID {
            return Err(Error::InvalidGrid(format!(
                "grid {nu}x{nv} is below the minimum {MIN_GRID}x{MIN_GRID}"
            )));
        }
        if values.len() != nu * nv {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                nu * nv,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite sample at ({}, {})",
                k / nv,
                k % nv
            )));
        }
        Ok(Self {
            lattice,
            nu,
            nv,
            values,
        })
    }

    /// Samples `g(u, v)` at the lattice coordinates of every grid node.
    pub fn from_fn(
        lattice: Lattice2D,
        nu: usize,
        nv: usize,
        g: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                values.push(g(i as f64 / nu as f64, j as f64 / nv as f64));
            }
        }
        Self::new(lattice, nu, nv, values)
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.lattice
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    /// Row-major samples (`i` outer, `j` inner).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nv + j]
    }

    /// Sample at a lifted (possibly negative or out-of-range) index.
    pub fn wrapped(&self, i: i64, j: i64) -> f64 {
        let i = i.rem_euclid(self.nu as i64) as usize;
        let j = j.rem_euclid(self.nv as i64) as usize;
        self.values[i * self.nv + j]
    }

    /// Cartesian position of a (lifted) grid node.
    pub fn node(&self, i: i64, j: i64) -> Vec2 {
        self.lattice
            .point(i as f64 / self.nu as f64, j as f64 / self.nv as f64)
    }

    /// Largest grid step length in Cartesian units.
    pub fn spacing(&self) -> f64 {
        (self.lattice.b1().norm() / self.nu as f64).max(self.lattice.b2().norm() / self.nv as f64)
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            lattice: self.lattice,
            nu: self.nu,
            nv: self.nv,
            values: self.values.iter().map(|&x| g(x)).collect(),
        }
    }

    /// Sample-wise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, g: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            lattice: self.lattice,
            nu: self.nu,
            nv: self.nv,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| g(a, b))
                .collect(),
        })
    }

    pub(crate) fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.nu != other.nu || self.nv != other.nv || self.lattice != other.lattice {
            return Err(Error::InvalidGrid(format!(
                "grid mismatch: {}x{} vs {}x{}",
                self.nu, self.nv, other.nu, other.nv
            )));
        }
        Ok(())
    }

    /// Average of the samples, i.e. the integral against the flat measure
    /// normalized to total mass one.
    pub fn average(&self) -> f64 {
        shifted_mean(&self.values)
    }

    /// Flat integral over the fundamental domain.
    pub fn integral(&self) -> f64 {
        self.lattice.coarea() * self.average()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Periodic bicubic (Catmull–Rom) interpolation at a Cartesian point.
    pub fn sample_at(&self, p: Vec2) -> f64 {
        let (u, v) = self.lattice.coords(p);
        let x = u * self.nu as f64;
        let y = v * self.nv as f64;
        let (i0, j0) = (x.floor(), y.floor());
        let (tx, ty) = (x - i0, y - j0);
        let (i0, j0) = (i0 as i64, j0 as i64);
        let wx = catmull_rom_weights(tx);
        let wy = catmull_rom_weights(ty);
        let mut acc = 0.0;
        for (a, wa) in wx.iter().enumerate() {
            for (b, wb) in wy.iter().enumerate() {
                acc += wa * wb * self.wrapped(i0 - 1 + a as i64, j0 - 1 + b as i64);
            }
        }
        acc
    }
}

fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

/// Second-order periodic finite-difference operators in lattice coordinates.
struct Stencil {
    /// `[g^uu, g^uv, g^vv]` scaled by the grid steps.
    cuu: f64,
    cuv: f64,
    cvv: f64,
    nu: f64,
    nv: f64,
    inv: [f64; 3],
}

impl Stencil {
    fn new(field: &ScalarField) -> Self {
        let inv = field.lattice.inverse_gram();
        let (nu, nv) = (field.nu as f64, field.nv as f64);
        Self {
            cuu: inv[0] * nu * nu,
            cuv: 2.0 * inv[1] * nu * nv / 4.0,
            cvv: inv[2] * nv * nv,
            nu,
            nv,
            inv,
        }
    }

    fn laplacian(&self, f: &ScalarField, i: i64, j: i64) -> f64 {
        let c = f.wrapped(i, j);
        let duu = f.wrapped(i + 1, j) - 2.0 * c + f.wrapped(i - 1, j);
        let dvv = f.wrapped(i, j + 1) - 2.0 * c + f.wrapped(i, j - 1);
        let mut acc = self.cuu * duu + self.cvv * dvv;
        if self.cuv != 0.0 {
            let duv = f.wrapped(i + 1, j + 1) - f.wrapped(i + 1, j - 1)
                - f.wrapped(i - 1, j + 1)
                + f.wrapped(i - 1, j - 1);
            acc += self.cuv * duv;
        }
        acc
    }

    fn gradient_sq(&self, f: &ScalarField, i: i64, j: i64) -> f64 {
        let fu = 0.5 * self.nu * (f.wrapped(i + 1, j) - f.wrapped(i - 1, j));
        let fv = 0.5 * self.nv * (f.wrapped(i, j + 1) - f.wrapped(i, j - 1));
        self.inv[0] * fu * fu + 2.0 * self.inv[1] * fu * fv + self.inv[2] * fv * fv
    }
}

/// Flat Laplacian `Δ₀ = g^uu ∂uu + 2g^uv ∂uv + g^vv ∂vv` by periodic central differences.
pub fn flat_laplacian(field: &ScalarField) -> ScalarField {
    let st = Stencil::new(field);
    let mut out = Vec::with_capacity(field.values.len());
    for i in 0..field.nu as i64 {
        for j in 0..field.nv as i64 {
            out.push(st.laplacian(field, i, j));
        }
    }
    ScalarField {
        lattice: field.lattice,
        nu: field.nu,
        nv: field.nv,
        values: out,
    }
}

/// `|∇f|²` with central first differences.
pub fn gradient_norm_sq(field: &ScalarField) -> ScalarField {
    let st = Stencil::new(field);
    let mut out = Vec::with_capacity(field.values.len());
    for i in 0..field.nu as i64 {
        for j in 0..field.nv as i64 {
            out.push(st.gradient_sq(field, i, j));
        }
    }
    ScalarField {
        lattice: field.lattice,
        nu: field.nu,
        nv: field.nv,
        values: out,
    }
}

/// First and second moments of a conformal factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// `E_μ(f)`
    pub mean: f64,
    /// `E_μ(f²)`, the area of `f²·g₀`
    pub second: f64,
    /// `E_μ(f²) − E_μ(f)²`
    pub variance_moment: f64,
    /// `E_μ((f − m)²)`
    pub variance_centered: f64,
}

/// Relative agreement required between the two variance formulas.
pub const VARIANCE_AGREEMENT: f64 = 1e-10;

/// A metric `f²(dx² + dy²)` on the torus `R²/L` with `L` of unit coarea.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    f: ScalarField,
}

impl ConformalMetric {
    pub fn new(f: ScalarField) -> Result<Self> {
        let coarea = f.lattice.coarea();
        if (coarea - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLattice(format!(
                "conformal metrics need a unit-coarea lattice, got coarea {coarea}"
            )));
        }
        if let Some(k) = f.values.iter().position(|&x| !(x > MIN_FACTOR)) {
            return Err(Error::InvalidFactor(format!(
                "factor {} at ({}, {}) is not positive",
                f.values[k],
                k / f.nv,
                k % f.nv
            )));
        }
        Ok(Self { f })
    }

    pub fn factor(&self) -> &ScalarField {
        &self.f
    }

    pub fn lattice(&self) -> &Lattice2D {
        &self.f.lattice
    }

    /// The metric with factor `c·f`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.f.map(|x| c * x))
    }

    /// `m = E_μ(f)`.
    pub fn mean(&self) -> f64 {
        self.f.average()
    }

    /// `area(g) = E_μ(f²)`.
    pub fn area(&self) -> f64 {
        let sq: Vec<f64> = self.f.values.iter().map(|x| x * x).collect();
        shifted_mean(&sq)
    }

    pub fn moments(&self) -> Moments {
        let mean = self.mean();
        let second = self.area();
        let dev: Vec<f64> = self
            .f
            .values
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .collect();
        let variance_centered = pairwise_sum(&dev) / dev.len() as f64;
        Moments {
            mean,
            second,
            variance_moment: second - mean * mean,
            variance_centered,
        }
    }

    /// `var(f)`, cross-checked between the moment and centered formulas.
    pub fn variance(&self) -> Result<f64> {
        let m = self.moments();
        let gap = (m.variance_moment - m.variance_centered).abs();
        if gap > VARIANCE_AGREEMENT * m.second.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "variance formulas disagree: {} vs {}",
                m.variance_moment, m.variance_centered
            )));
        }
        Ok(m.variance_centered)
    }

    /// Gaussian curvature `K = −Δ₀(log f)/f²`.
    pub fn gaussian_curvature(&self) -> ScalarField {
        let lap = flat_laplacian(&self.f.map(f64::ln));
        let mut k = lap;
        for (kv, &fv) in k.values.iter_mut().zip(&self.f.values) {
            *kv = -*kv / (fv * fv);
        }
        k
    }

    /// Gaussian curvature from the partial-derivative form
    /// `K = (−f·Δ₀f + |∇f|²)/f⁴`.
    pub fn gaussian_curvature_expanded(&self) -> ScalarField {
        let st = Stencil::new(&self.f);
        let mut out = Vec::with_capacity(self.f.values.len());
        for i in 0..self.f.nu as i64 {
            for j in 0..self.f.nv as i64 {
                let fv = self.f.wrapped(i, j);
                let num = -fv * st.laplacian(&self.f, i, j) + st.gradient_sq(&self.f, i, j);
                out.push(num / fv.powi(4));
            }
        }
        ScalarField {
            lattice: self.f.lattice,
            nu: self.f.nu,
            nv: self.f.nv,
            values: out,
        }
    }

    /// `∫ K dA = ∫ K f² dμ`; vanishes on a torus.
    pub fn total_curvature(&self) -> f64 {
        let k = self.gaussian_curvature();
        let kf2: Vec<f64> = k
            .values
            .iter()
            .zip(&self.f.values)
            .map(|(k, f)| k * f * f)
            .collect();
        pairwise_sum(&kf2) / kf2.len() as f64
    }
}

#[cfg(test)]
mod tests;
