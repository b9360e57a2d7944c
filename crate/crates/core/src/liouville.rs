//! Exact solutions of Liouville's equation and the radial operator `T` in
//! its polar, `ζ = r²` and `t = log ζ` forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::averaging::DiskField;
use crate::error::{Error, Result};
use crate::field::{
    flat_laplacian, from_analytic, gradient_norm_sq, AnalyticFamily, ConformalMetric, ScalarField,
};
use crate::lattice::{Lattice2D, Vec2};

/// Minimum node count for radial profiles.
pub const MIN_NODES: usize = 8;

/// Radial samples `f(rᵢ)` at cell-centred nodes `rᵢ = rmin + (i + 1/2)·Δr`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarProfile {
    rmin: f64,
    rmax: f64,
    values: Vec<f64>,
}

impl PolarProfile {
    pub fn new(rmin: f64, rmax: f64, values: Vec<f64>) -> Result<Self> {
        if !(rmin >= 0.0 && rmax > rmin && rmax.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "radial interval [{rmin}, {rmax}] is invalid"
            )));
        }
        if values.len() < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "radial profiles need at least {MIN_NODES} nodes, got {}",
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite radial sample at node {k}")));
        }
        Ok(Self { rmin, rmax, values })
    }

    pub fn from_fn(rmin: f64, rmax: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dr = (rmax - rmin) / n as f64;
        let values = (0..n).map(|i| f(rmin + (i as f64 + 0.5) * dr)).collect();
        Self::new(rmin, rmax, values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn rmin(&self) -> f64 {
        self.rmin
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn dr(&self) -> f64 {
        (self.rmax - self.rmin) / self.n() as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.rmin + (i as f64 + 0.5) * self.dr()
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.radius(i)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.rmin, self.rmax, self.values.iter().map(|&x| g(x)).collect())
    }

    fn require_positive(&self, what: &str) -> Result<()> {
        match self.values.iter().position(|&x| !(x > 0.0)) {
            Some(k) => Err(Error::InvalidFactor(format!(
                "{what} needs a positive profile, got {} at node {k}",
                self.values[k]
            ))),
            None => Ok(()),
        }
    }
}

/// `f″ + f′/r` by central differences, second-order one-sided at both ends.
pub fn polar_laplacian(profile: &PolarProfile) -> PolarProfile {
    let f = &profile.values;
    let n = f.len();
    let h = profile.dr();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (d2, d1) = if i == 0 {
            (
                (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h),
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            )
        } else if i == n - 1 {
            (
                (2.0 * f[i] - 5.0 * f[i - 1] + 4.0 * f[i - 2] - f[i - 3]) / (h * h),
                (3.0 * f[i] - 4.0 * f[i - 1] + f[i - 2]) / (2.0 * h),
            )
        } else {
            (
                (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h),
                (f[i + 1] - f[i - 1]) / (2.0 * h),
            )
        };
        out.push(d2 + d1 / profile.radius(i));
    }
    PolarProfile {
        rmin: profile.rmin,
        rmax: profile.rmax,
        values: out,
    }
}

/// `−f·Δ₀f + |∇f|² − K·f⁴`, which vanishes when `K` is the curvature of `f²ds²`.
pub fn liouville_residual_cartesian(metric: &ConformalMetric, k: &ScalarField) -> Result<ScalarField> {
    let f = metric.factor();
    let lap = flat_laplacian(f);
    let grad = gradient_norm_sq(f);
    let lhs = f.zip_map(&lap, |fv, l| -fv * l)?.zip_map(&grad, |a, g| a + g)?;
    let fk = f.zip_map(k, |fv, kv| kv * fv.powi(4))?;
    lhs.zip_map(&fk, |a, b| a - b)
}

/// Riemann's constant-curvature profile `f₀(r) = 1/(1 + (α/4)r²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannProfile {
    pub alpha: f64,
}

impl RiemannProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Radius where `f₀` blows up, for negative `α`.
    pub fn domain_limit(&self) -> Option<f64> {
        (self.alpha < 0.0).then(|| (-4.0 / self.alpha).sqrt())
    }

    pub fn value(&self, r: f64) -> f64 {
        1.0 / (1.0 + 0.25 * self.alpha * r * r)
    }

    pub fn sample(&self, rmax: f64, n: usize) -> Result<PolarProfile> {
        if let Some(lim) = self.domain_limit() {
            if rmax >= lim {
                return Err(Error::InvalidDomain(format!(
                    "alpha {} needs rmax < {lim}, got {rmax}",
                    self.alpha
                )));
            }
        }
        PolarProfile::from_fn(0.0, rmax, n, |r| self.value(r))
    }
}

pub fn riemann_profile(alpha: f64, rmax: f64, n: usize) -> Result<PolarProfile> {
    RiemannProfile::new(alpha)?.sample(rmax, n)
}

/// `f̃(ζ) = f(√ζ)` on the nodes `ζᵢ = rᵢ²`.
pub fn zeta_form(profile: &PolarProfile) -> (Vec<f64>, Vec<f64>) {
    let zeta = profile.radii().iter().map(|r| r * r).collect();
    (zeta, profile.values.clone())
}

/// Weighted mean and variance with weights summing to one.
fn weighted_moments(weights: &[f64], xs: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = weights.iter().zip(xs).map(|(w, x)| w * x).sum::<f64>() / total;
    let var = weights
        .iter()
        .zip(xs)
        .map(|(w, x)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    (mean, var)
}

/// Variance of `f̃` under the uniform probability measure on `[rmin², rmax²]`.
///
/// The ζ-cell around `ζᵢ` has width `2rᵢΔr`, so this is the same quadrature as
/// the midpoint rule for the normalized disk measure `r dr dθ`.
pub fn zeta_variance(profile: &PolarProfile) -> f64 {
    let dr = profile.dr();
    let w: Vec<f64> = profile.radii().iter().map(|r| 2.0 * r * dr).collect();
    weighted_moments(&w, &profile.values).1
}

/// Second derivative on a non-uniform grid at interior nodes `1..n−1`.
pub fn second_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    (1..x.len() - 1)
        .map(|i| {
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            2.0 * ((y[i + 1] - y[i]) / hp - (y[i] - y[i - 1]) / hm) / (hp + hm)
        })
        .collect()
}

/// `u = log f` against `t = log ζ = 2 log r`.
pub fn t_form(profile: &PolarProfile) -> Result<(Vec<f64>, Vec<f64>)> {
    profile.require_positive("t-form")?;
    let t = profile.radii().iter().map(|r| 2.0 * r.ln()).collect();
    let u = profile.values.iter().map(|f| f.ln()).collect();
    Ok((t, u))
}

/// Tolerance for the concavity flag on `u(t)`.
pub const CONCAVITY_TOL: f64 = 1e-9;

/// Outcome of the concavity and monotonicity checks on `ζ ∈ [ρ, 2ρ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TOperatorReport {
    pub alpha: f64,
    pub rho: f64,
    pub nodes_in_window: usize,
    /// `min(−u″ − (ζ/4)·α·f²)` over the window.
    pub pointwise_margin: f64,
    /// `min(−u″ − (ρ/4)·α·f²)` over the window.
    pub window_margin: f64,
    /// Largest `u″(t)` over all interior nodes.
    pub max_u_tt: f64,
    pub concave: bool,
    /// `f` strictly decreasing in `r`, sample-wise.
    pub decreasing: bool,
    /// Positive `α` forces `f` to decrease; false flags a violation.
    pub monotone_ok: bool,
    /// Variance of `f` over the window with respect to `dt`.
    pub t_variance: f64,
    /// Variance of `f` over the window with respect to `dζ`.
    pub zeta_variance: f64,
}

/// Checks `−u″(t) ≥ (ζ/4)·α·f²` and its window form on `ζ ∈ [ρ, 2ρ]`.
pub fn t_operator_check(profile: &PolarProfile, alpha: f64, rho: f64) -> Result<TOperatorReport> {
    t_operator_check_with(profile, profile, alpha, rho)
}

/// As [`t_operator_check`], with `u = log f` taken from `log_profile` and the
/// right-hand side from `rhs_profile` (e.g. `f_la` against `av(f²)^{1/2}`).
pub fn t_operator_check_with(
    log_profile: &PolarProfile,
    rhs_profile: &PolarProfile,
    alpha: f64,
    rho: f64,
) -> Result<TOperatorReport> {
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    if log_profile.n() != rhs_profile.n() || log_profile.radii() != rhs_profile.radii() {
        return Err(Error::InvalidGrid("profiles live on different radial grids".into()));
    }
    let (t, u) = t_form(log_profile)?;
    let utt = second_differences(&t, &u);
    let f = rhs_profile.values();
    let mut window = Vec::new();
    for i in 1..t.len() - 1 {
        let zeta = t[i].exp();
        if zeta >= rho * (1.0 - 1e-12) && zeta <= 2.0 * rho * (1.0 + 1e-12) {
            window.push(i);
        }
    }
    if window.len() < MIN_NODES {
        return Err(Error::InsufficientResolution(format!(
            "only {} nodes in ζ ∈ [{rho}, {}]",
            window.len(),
            2.0 * rho
        )));
    }
    let mut pointwise = f64::INFINITY;
    let mut windowed = f64::INFINITY;
    for &i in &window {
        let zeta = t[i].exp();
        let lhs = -utt[i - 1];
        pointwise = pointwise.min(lhs - 0.25 * zeta * alpha * f[i] * f[i]);
        windowed = windowed.min(lhs - 0.25 * rho * alpha * f[i] * f[i]);
    }
    let max_u_tt = utt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let vals = log_profile.values();
    let decreasing = vals.windows(2).all(|w| w[1] < w[0]);

    // cell widths of the window nodes in t and ζ
    let cell = |x: &dyn Fn(usize) -> f64, i: usize| 0.5 * (x(i + 1) - x(i - 1));
    let tw: Vec<f64> = window.iter().map(|&i| cell(&|k| t[k], i)).collect();
    let zw: Vec<f64> = window.iter().map(|&i| cell(&|k| t[k].exp(), i)).collect();
    let fw: Vec<f64> = window.iter().map(|&i| vals[i]).collect();

    Ok(TOperatorReport {
        alpha,
        rho,
        nodes_in_window: window.len(),
        pointwise_margin: pointwise,
        window_margin: windowed,
        max_u_tt,
        concave: max_u_tt <= CONCAVITY_TOL,
        decreasing,
        monotone_ok: alpha <= 0.0 || decreasing,
        t_variance: weighted_moments(&tw, &fw).1,
        zeta_variance: weighted_moments(&zw, &fw).1,
    })
}

/// The radial operator evaluated three ways at interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TForms {
    /// `f″ + f′/r`
    pub polar: Vec<f64>,
    /// `4 d/dζ(ζ df/dζ)` in flux form
    pub zeta: Vec<f64>,
    /// `(4/ζ) d²f/dt²`
    pub t: Vec<f64>,
}

pub fn t_operator_forms(profile: &PolarProfile) -> TForms {
    let n = profile.n();
    let f = profile.values();
    let polar = polar_laplacian(profile).values[1..n - 1].to_vec();
    let (zeta, _) = zeta_form(profile);
    let zeta_op = (1..n - 1)
        .map(|i| {
            let zp = 0.5 * (zeta[i] + zeta[i + 1]);
            let zm = 0.5 * (zeta[i] + zeta[i - 1]);
            let flux_p = zp * (f[i + 1] - f[i]) / (zeta[i + 1] - zeta[i]);
            let flux_m = zm * (f[i] - f[i - 1]) / (zeta[i] - zeta[i - 1]);
            4.0 * (flux_p - flux_m) / (zp - zm)
        })
        .collect();
    let t: Vec<f64> = zeta.iter().map(|z| z.ln()).collect();
    let t_op = second_differences(&t, f)
        .iter()
        .enumerate()
        .map(|(k, d2)| 4.0 * d2 / zeta[k + 1])
        .collect();
    TForms {
        polar,
        zeta: zeta_op,
        t: t_op,
    }
}

/// Riemann's linear solution `φ(ζ) = 1 + (K/4)ζ`.
pub fn linear_phi(k: f64, zeta: f64) -> f64 {
    1.0 + 0.25 * k * zeta
}

/// Largest ζ used for the linear-φ identity, keeping `φ ≥ 1/2`.
pub fn linear_phi_domain(k: f64) -> f64 {
    if k < 0.0 {
        0.5 * (4.0 / -k).min(2.0)
    } else {
        1.0
    }
}

/// Max deviation of `4φ²·d/dζ(ζ d/dζ) log φ` from `K` on `n` cell-centred nodes.
pub fn linear_phi_identity_error(k: f64, n: usize) -> Result<f64> {
    if n < MIN_NODES {
        return Err(Error::InsufficientResolution(format!("need at least {MIN_NODES} nodes")));
    }
    let zmax = linear_phi_domain(k);
    let h = zmax / n as f64;
    let zeta = |i: usize| (i as f64 + 0.5) * h;
    let log_phi = |z: f64| (0.25 * k * z).ln_1p();
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let (z, zp, zm) = (zeta(i), zeta(i) + 0.5 * h, zeta(i) - 0.5 * h);
        let flux_p = zp * (log_phi(zeta(i + 1)) - log_phi(z)) / h;
        let flux_m = zm * (log_phi(z) - log_phi(zeta(i - 1))) / h;
        let phi = linear_phi(k, z);
        let lhs = 4.0 * phi * phi * (flux_p - flux_m) / h;
        worst = worst.max((lhs - k).abs());
    }
    Ok(worst)
}

/// `φ = 1/f̃` next to Riemann's linear `φ` at each ζ-node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiComparison {
    pub zeta: f64,
    pub phi: f64,
    pub phi_linear: f64,
}

pub fn linear_phi_comparison(profile: &PolarProfile, k: f64) -> Result<Vec<PhiComparison>> {
    profile.require_positive("phi comparison")?;
    let (zeta, f) = zeta_form(profile);
    Ok(zeta
        .iter()
        .zip(&f)
        .map(|(&z, &fv)| PhiComparison {
            zeta: z,
            phi: 1.0 / fv,
            phi_linear: linear_phi(k, z),
        })
        .collect())
}

/// A polynomial `a(z) = Σ cₖ zᵏ`; `|a′|/(1 + |a|²)` has curvature `+4`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicSolution {
    coeffs: Vec<Complex64>,
}

impl HolomorphicSolution {
    /// `coeffs[k]` multiplies `zᵏ`; trailing zeros are dropped.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidArgument(
                "holomorphic solution needs degree at least 1".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn derivative_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect()
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.derivative_coeffs()
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `|a′(z)|/(1 + |a(z)|²)`
    pub fn factor(&self, z: Complex64) -> f64 {
        self.derivative(z).norm() / (1.0 + self.eval(z).norm_sqr())
    }

    /// Zeros of `a′`, where the factor vanishes.
    pub fn critical_points(&self) -> Vec<Complex64> {
        polynomial_roots(&self.derivative_coeffs())
    }
}

/// Roots of `Σ cₖ zᵏ` by Durand–Kerner iteration.
fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();
    let p = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..1000 {
        let mut change: f64 = 0.0;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = p(roots[i]) / denom;
            roots[i] -= step;
            change = change.max(step.norm());
        }
        if change < 1e-15 * radius {
            break;
        }
    }
    roots
}

/// Samples on a square Cartesian patch (non-periodic), nodes
/// `center + (−w + i·2w/n, −w + j·2w/n)` for `0 ≤ i, j ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianPatch {
    center: Vec2,
    half_width: f64,
    n: usize,
    values: Vec<f64>,
}

impl CartesianPatch {
    pub fn from_fn(center: Vec2, half_width: f64, n: usize, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        if n < MIN_NODES || !(half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "patch needs n ≥ {MIN_NODES} and positive half-width, got {n}, {half_width}"
            )));
        }
        let mut patch = Self {
            center,
            half_width,
            n,
            values: Vec::with_capacity((n + 1) * (n + 1)),
        };
        for i in 0..=n {
            for j in 0..=n {
                let v = f(patch.node(i, j));
                patch.values.push(v);
            }
        }
        Ok(patch)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        let h = self.spacing();
        Vec2::new(
            self.center.x - self.half_width + i as f64 * h,
            self.center.y - self.half_width + j as f64 * h,
        )
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.n + 1) + j]
    }

    /// `−Δ₀ log f / f²` by the 5-point stencil; `None` on the patch edge or
    /// where the stencil touches a non-positive sample.
    pub fn curvature_at(&self, i: usize, j: usize) -> Option<f64> {
        if i == 0 || j == 0 || i >= self.n || j >= self.n {
            return None;
        }
        let pts = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
        if pts.iter().any(|&(a, b)| !(self.at(a, b) > 0.0)) {
            return None;
        }
        let l = |a: usize, b: usize| self.at(a, b).ln();
        let h = self.spacing();
        let lap = (l(i + 1, j) + l(i - 1, j) + l(i, j + 1) + l(i, j - 1) - 4.0 * l(i, j)) / (h * h);
        let f = self.at(i, j);
        Some(-lap / (f * f))
    }
}

/// A sampled holomorphic factor and the zeros of `a′` that fall inside its patch.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicPatch {
    pub patch: CartesianPatch,
    pub critical_points_inside: Vec<Complex64>,
}

impl HolomorphicPatch {
    /// True when `a′` vanishes in the patch, so `f` touches zero there.
    pub fn is_degenerate(&self) -> bool {
        !self.critical_points_inside.is_empty()
    }
}

pub fn holomorphic_factor(
    sol: &HolomorphicSolution,
    center: Vec2,
    half_width: f64,
    n: usize,
) -> Result<HolomorphicPatch> {
    let patch = CartesianPatch::from_fn(center, half_width, n, |p| {
        sol.factor(Complex64::new(p.x, p.y))
    })?;
    let critical_points_inside = sol
        .critical_points()
        .into_iter()
        .filter(|c| (c.re - center.x).abs() <= half_width && (c.im - center.y).abs() <= half_width)
        .collect();
    Ok(HolomorphicPatch {
        patch,
        critical_points_inside,
    })
}

/// Max `|K − target|` over the nodes of a coarser `coarse × coarse` patch grid
/// lying within `check_radius` of the centre, skipping nodes closer than
/// `exclusion` to a zero of `a′`.
pub fn patch_curvature_error(
    hp: &HolomorphicPatch,
    target: f64,
    check_radius: f64,
    coarse: usize,
    exclusion: f64,
) -> Result<f64> {
    let p = &hp.patch;
    if coarse == 0 || !p.n.is_multiple_of(coarse) {
        return Err(Error::InvalidGrid(format!(
            "patch size {} is not a multiple of {coarse}",
            p.n
        )));
    }
    let stride = p.n / coarse;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for a in 0..=coarse {
        for b in 0..=coarse {
            let (i, j) = (a * stride, b * stride);
            let x = p.node(i, j);
            if (x - p.center).norm() > check_radius {
                continue;
            }
            let z = Complex64::new(x.x, x.y);
            if hp.critical_points_inside.iter().any(|c| (c - z).norm() < exclusion) {
                continue;
            }
            if let Some(k) = p.curvature_at(i, j) {
                worst = worst.max((k - target).abs());
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::InsufficientResolution("no curvature check points".into()));
    }
    Ok(worst)
}

/// Successive error ratios `e[k]/e[k+1]`.
pub fn convergence_ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

/// Max `|K − α|` for the Riemann bump on `Z²` centred at `(1/2, 1/2)`, on
/// each grid, evaluated at the nodes of the first grid within `check_radius`.
pub fn riemann_bump_curvature_errors(alpha: f64, grids: &[usize], check_radius: f64) -> Result<Vec<f64>> {
    let Some(&coarse) = grids.first() else {
        return Ok(Vec::new());
    };
    let lattice = Lattice2D::square();
    let center = Vec2::new(0.5, 0.5);
    let family = AnalyticFamily::riemann_bump(alpha, [0.5, 0.5]);
    let mut out = Vec::with_capacity(grids.len());
    for &n in grids {
        if n % coarse != 0 {
            return Err(Error::InvalidGrid(format!("{n} is not a multiple of {coarse}")));
        }
        let metric = ConformalMetric::new(from_analytic(&lattice, n, n, &family)?)?;
        let k = metric.gaussian_curvature();
        let stride = (n / coarse) as i64;
        let mut worst: f64 = 0.0;
        for a in 0..coarse as i64 {
            for b in 0..coarse as i64 {
                let (i, j) = (a * stride, b * stride);
                if (k.node(i, j) - center).norm() <= check_radius {
                    worst = worst.max((k.wrapped(i, j) - alpha).abs());
                }
            }
        }
        out.push(worst);
    }
    Ok(out)
}

/// Resolution of the disk grid used by the variance sweep.
pub const SWEEP_NR: usize = 64;
pub const SWEEP_NTHETA: usize = 64;
const MAX_REDRAWS: usize = 100;

/// One row of the variance sweep; `id` is `None` for Riemann's profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub id: Option<usize>,
    pub degree: usize,
    /// L² norm on `D(ρ)` before rescaling.
    pub l2norm: f64,
    /// Disk variance after rescaling to the Riemann L² norm.
    pub variance: f64,
}

fn l2_norm(field: &DiskField) -> f64 {
    field.map(|x| x * x).mean().sqrt()
}

/// Random polynomial of degree 1–4 with coefficients uniform in the square
/// `[−1, 1]²`, redrawn until `a′` has no zero in the closed disk `D(ρ)`.
pub fn random_holomorphic(rng: &mut ChaCha8Rng, rho: f64) -> Result<HolomorphicSolution> {
    for _ in 0..=MAX_REDRAWS {
        let degree = rng.random_range(1..=4usize);
        let coeffs: Vec<Complex64> = (0..=degree)
            .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
            .collect();
        let Ok(sol) = HolomorphicSolution::new(coeffs) else {
            continue;
        };
        if sol.degree() != degree {
            continue;
        }
        if sol.critical_points().iter().all(|c| c.norm() > rho) {
            return Ok(sol);
        }
    }
    Err(Error::Numerical(format!(
        "no admissible polynomial after {MAX_REDRAWS} redraws"
    )))
}

/// Disk variance of random holomorphic solutions against Riemann's profile.
///
/// Sample `i` draws from `ChaCha8Rng::seed_from_u64(seed ^ i)`. The first
/// row is Riemann's profile.
pub fn variance_sweep_experiment(alpha: f64, rho: f64, samples: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if !(alpha > 0.0) || !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs alpha > 0 and rho > 0, got {alpha}, {rho}"
        )));
    }
    let riemann = RiemannProfile::new(alpha)?;
    let disk = |f: &dyn Fn(Vec2) -> f64| {
        DiskField::from_cartesian(Vec2::new(0.0, 0.0), rho, SWEEP_NR, SWEEP_NTHETA, f)
    };
    let f0 = disk(&|p| riemann.value(p.norm()))?;
    let target = l2_norm(&f0);
    let mut rows = vec![SweepRow {
        id: None,
        degree: 1,
        l2norm: target,
        variance: f0.variance(),
    }];
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let sol = random_holomorphic(&mut rng, rho)?;
        let f = disk(&|p| sol.factor(Complex64::new(p.x, p.y)))?;
        let norm = l2_norm(&f);
        let c = target / norm;
        rows.push(SweepRow {
            id: Some(i),
            degree: sol.degree(),
            l2norm: norm,
            variance: c * c * f.variance(),
        });
    }
    Ok(rows)
}

/// CSV with columns `id,degree,l2norm,variance`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("id,degree,l2norm,variance\n");
    for r in rows {
        let id = r.id.map_or_else(|| "riemann".to_string(), |i| i.to_string());
        s.push_str(&format!("{id},{},{:.16e},{:.16e}\n", r.degree, r.l2norm, r.variance));
    }
    s
}
