//! Rotational averages on disks and the Jensen-type inequalities they satisfy.
//!
//! All disk integrals use the probability measure `r dr dθ / (π R²)`:
//! midpoint rule in `r`, periodic rectangle rule in `θ`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::lattice::Vec2;
use crate::liouville::{polar_laplacian, t_operator_check_with, PolarProfile, TOperatorReport};
use crate::sum::{pairwise_sum, shifted_mean};

pub const MIN_NTHETA: usize = 16;

/// Slack allowed in the exact identities of this module.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Polar samples `h(rᵢ, θⱼ)` on a disk, `rᵢ` cell-centred and `θⱼ = 2πj/nθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskField {
    center: Vec2,
    radius: f64,
    nr: usize,
    ntheta: usize,
    values: Vec<f64>,
}

impl DiskField {
    /// `values[i·nθ + j] = h(rᵢ, θⱼ)`.
    pub fn new(center: Vec2, radius: f64, nr: usize, ntheta: usize, values: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("disk radius must be positive, got {radius}")));
        }
        if nr < crate::liouville::MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {} radii, got {nr}",
                crate::liouville::MIN_NODES
            )));
        }
        if ntheta < MIN_NTHETA || !ntheta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "angular count must be even and at least {MIN_NTHETA}, got {ntheta}"
            )));
        }
        if values.len() != nr * ntheta {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                nr * ntheta,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite sample at ({}, {})",
                k / ntheta,
                k % ntheta
            )));
        }
        Ok(Self {
            center,
            radius,
            nr,
            ntheta,
            values,
        })
    }

    pub fn from_fn(
        center: Vec2,
        radius: f64,
        nr: usize,
        ntheta: usize,
        h: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let dr = radius / nr as f64;
        let mut values = Vec::with_capacity(nr * ntheta);
        for i in 0..nr {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..ntheta {
                values.push(h(r, TAU * j as f64 / ntheta as f64));
            }
        }
        Self::new(center, radius, nr, ntheta, values)
    }

    /// Samples a function of the Cartesian point.
    pub fn from_cartesian(
        center: Vec2,
        radius: f64,
        nr: usize,
        ntheta: usize,
        h: impl Fn(Vec2) -> f64,
    ) -> Result<Self> {
        Self::from_fn(center, radius, nr, ntheta, |r, th| {
            h(center + Vec2::new(r * th.cos(), r * th.sin()))
        })
    }

    /// The field constant in `θ` with radial values from `profile`.
    pub fn from_profile(center: Vec2, profile: &PolarProfile, ntheta: usize) -> Result<Self> {
        if profile.rmin() != 0.0 {
            return Err(Error::InvalidDomain("disk profiles must start at r = 0".into()));
        }
        let values = profile
            .values()
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, ntheta))
            .collect();
        Self::new(center, profile.rmax(), profile.n(), ntheta, values)
    }

    /// Interpolates a periodic field onto a disk in the plane.
    pub fn resample(field: &ScalarField, center: Vec2, radius: f64, nr: usize, ntheta: usize) -> Result<Self> {
        Self::from_cartesian(center, radius, nr, ntheta, |p| field.sample_at(p))
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.nr as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.ntheta as f64
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ntheta + j]
    }

    fn ring(&self, i: usize) -> &[f64] {
        &self.values[i * self.ntheta..(i + 1) * self.ntheta]
    }

    pub fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&x| g(x)).collect(),
            ..self.clone()
        }
    }

    fn ring_weights(&self) -> Vec<f64> {
        let total: f64 = (0..self.nr).map(|i| self.r(i)).sum();
        (0..self.nr).map(|i| self.r(i) / total).collect()
    }

    /// `E(h)` under the normalized disk measure.
    pub fn mean(&self) -> f64 {
        let w = self.ring_weights();
        let terms: Vec<f64> = (0..self.nr).map(|i| w[i] * shifted_mean(self.ring(i))).collect();
        pairwise_sum(&terms)
    }

    /// `E((h − E h)²)` under the normalized disk measure.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.map(|x| (x - m) * (x - m)).mean()
    }

    fn require_positive(&self) -> Result<()> {
        match self.values.iter().position(|&x| !(x > 0.0)) {
            Some(k) => Err(Error::InvalidFactor(format!(
                "factor {} at ({}, {}) is not positive",
                self.values[k],
                k / self.ntheta,
                k % self.ntheta
            ))),
            None => Ok(()),
        }
    }

    /// Curvature `−Δ₀ log f / f²` with the full polar Laplacian
    /// `∂ᵣ² + (1/r)∂ᵣ + (1/r²)∂θ²`, at radii `1..nr−1`.
    pub fn polar_curvature(&self) -> Result<Vec<Vec<f64>>> {
        self.require_positive()?;
        let h = self.map(f64::ln);
        let (dr, dt) = (self.dr(), TAU / self.ntheta as f64);
        let n = self.ntheta;
        let mut out = Vec::with_capacity(self.nr - 2);
        for i in 1..self.nr - 1 {
            let r = self.r(i);
            let row = (0..n)
                .map(|j| {
                    let (jp, jm) = ((j + 1) % n, (j + n - 1) % n);
                    let hrr = (h.at(i + 1, j) - 2.0 * h.at(i, j) + h.at(i - 1, j)) / (dr * dr);
                    let hr = (h.at(i + 1, j) - h.at(i - 1, j)) / (2.0 * dr);
                    let htt = (h.at(i, jp) - 2.0 * h.at(i, j) + h.at(i, jm)) / (dt * dt);
                    let f = self.at(i, j);
                    -(hrr + hr / r + htt / (r * r)) / (f * f)
                })
                .collect();
            out.push(row);
        }
        Ok(out)
    }
}

/// `h_av(r) = (1/2π)∫ h(r, θ) dθ`.
pub fn rotational_average(field: &DiskField) -> PolarProfile {
    let values = (0..field.nr).map(|i| shifted_mean(field.ring(i))).collect();
    PolarProfile::new(0.0, field.radius, values).expect("disk fields are valid profiles")
}

/// `f_la = exp(av(log f))`.
pub fn log_average(f: &DiskField) -> Result<PolarProfile> {
    f.require_positive()?;
    rotational_average(&f.map(f64::ln)).map(f64::exp)
}

/// Per-radius slack of `av(e^{2h}) ≥ e^{2h_av}` with `h = log f`.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenReport {
    pub slack: Vec<f64>,
    pub min_slack: f64,
    pub ok: bool,
}

pub fn jensen_exp_check(f: &DiskField) -> Result<JensenReport> {
    let la = log_average(f)?;
    let sq = rotational_average(&f.map(|x| x * x));
    let slack: Vec<f64> = sq
        .values()
        .iter()
        .zip(la.values())
        .map(|(a, g)| a - g * g)
        .collect();
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(JensenReport {
        ok: min_slack >= -IDENTITY_TOL,
        slack,
        min_slack,
    })
}

/// Discretization budget for the averaged differential inequality.
pub const AVERAGED_TOL: f64 = 1e-4;

/// `−(h_av″ + h_av′/r)` against `α e^{2h_av}` and `α e^{h_av}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedInequalityReport {
    pub alpha: f64,
    /// Smallest curvature of `f²ds²` on interior radii.
    pub min_curvature: f64,
    /// `K ≥ α` holds within [`AVERAGED_TOL`] (relative to `max(|α|, 1)`).
    pub hypothesis_ok: bool,
    /// `min(−Δ₀h_av − α e^{2h_av})` over interior radii.
    pub margin_squared: f64,
    /// `min(−Δ₀h_av − α e^{h_av})` over interior radii.
    pub margin_plain: f64,
    pub squared_ok: bool,
    pub plain_ok: bool,
}

pub fn averaged_inequality_check(f: &DiskField, alpha: f64) -> Result<AveragedInequalityReport> {
    let tol = AVERAGED_TOL * alpha.abs().max(1.0);
    let min_curvature = f
        .polar_curvature()?
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hav = rotational_average(&f.map(f64::ln));
    let lhs = polar_laplacian(&hav);
    let mut margin_squared = f64::INFINITY;
    let mut margin_plain = f64::INFINITY;
    for i in 1..hav.n() - 1 {
        let l = -lhs.values()[i];
        let h = hav.values()[i];
        margin_squared = margin_squared.min(l - alpha * (2.0 * h).exp());
        margin_plain = margin_plain.min(l - alpha * h.exp());
    }
    Ok(AveragedInequalityReport {
        alpha,
        min_curvature,
        hypothesis_ok: min_curvature >= alpha - tol,
        margin_squared,
        margin_plain,
        squared_ok: margin_squared >= -tol,
        plain_ok: margin_plain >= -tol,
    })
}

/// Mean and variance of `h` and of its rotational average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceMonotonicity {
    pub mean_h: f64,
    pub mean_hav: f64,
    pub var_h: f64,
    pub var_hav: f64,
    pub ok: bool,
}

/// `E(h)` as one flat weighted sum over all nodes.
fn flat_mean(h: &DiskField) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..h.nr {
        for j in 0..h.ntheta {
            num += h.r(i) * h.at(i, j);
            den += h.r(i);
        }
    }
    num / den
}

pub fn variance_monotonicity_check(h: &DiskField) -> Result<VarianceMonotonicity> {
    let hav = DiskField::from_profile(h.center, &rotational_average(h), h.ntheta)?;
    let mean_h = flat_mean(h);
    let mean_hav = hav.mean();
    let var_h = h.variance();
    let var_hav = hav.variance();
    let scale = mean_h.abs().max(1.0);
    Ok(VarianceMonotonicity {
        mean_h,
        mean_hav,
        var_h,
        var_hav,
        ok: (mean_h - mean_hav).abs() <= 1e-10 * scale && var_hav <= var_h + IDENTITY_TOL,
    })
}

/// Concavity of `log f_la` in `t` checked against `f_la²` and against `av(f²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogAverageConcavity {
    pub against_f_la: TOperatorReport,
    pub against_mean_square: TOperatorReport,
}

pub fn log_average_concavity_check(f: &DiskField, alpha: f64, rho: f64) -> Result<LogAverageConcavity> {
    let la = log_average(f)?;
    let rms = rotational_average(&f.map(|x| x * x)).map(f64::sqrt)?;
    Ok(LogAverageConcavity {
        against_f_la: t_operator_check_with(&la, &la, alpha, rho)?,
        against_mean_square: t_operator_check_with(&la, &rms, alpha, rho)?,
    })
}

/// Random smooth disk field `Σ c·rᵏ·cos(lθ + φ)` for `k ≤ 3`, `l ≤ 4`, with
/// `c` uniform in `[−1, 1]` and a uniform phase.
pub fn random_disk_field(seed: u64, nr: usize, ntheta: usize) -> Result<DiskField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = rng.random_range(0.5..=2.0);
    let mut terms = Vec::new();
    for k in 0..=3 {
        for l in 0..=4 {
            let c: f64 = rng.random_range(-1.0..=1.0);
            let phase: f64 = rng.random_range(0.0..TAU);
            terms.push((k, l as f64, c, phase));
        }
    }
    DiskField::from_fn(Vec2::new(0.0, 0.0), radius, nr, ntheta, |r, th| {
        terms
            .iter()
            .map(|&(k, l, c, ph)| c * (r / radius).powi(k) * (l * th + ph).cos())
            .sum()
    })
}

/// Smallest `av(f) − f_la` over radii (arithmetic against geometric mean).
pub fn am_gm_slack(f: &DiskField) -> Result<f64> {
    let la = log_average(f)?;
    let am = rotational_average(f);
    Ok(am
        .values()
        .iter()
        .zip(la.values())
        .map(|(a, g)| a - g)
        .fold(f64::INFINITY, f64::min))
}

/// Built-in positive factors on the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedDiskField {
    /// `f₀ = 1/(1 + r²)`, curvature 4.
    Riemann,
    /// `f₀·e^{0.01·r cos θ}`, curvature `4e^{−0.02x}`.
    RiemannPerturbed,
    /// `e^{r cos θ}`, flat.
    JensenCos,
    /// `f ≡ 1`.
    Constant,
}

impl NamedDiskField {
    pub const ALL: [Self; 4] = [Self::Riemann, Self::RiemannPerturbed, Self::JensenCos, Self::Constant];

    pub fn name(self) -> &'static str {
        match self {
            Self::Riemann => "riemann",
            Self::RiemannPerturbed => "riemann-perturbed",
            Self::JensenCos => "jensen-cos",
            Self::Constant => "constant",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown disk field {name:?}")))
    }

    pub fn sample(self, nr: usize, ntheta: usize) -> Result<DiskField> {
        let origin = Vec2::new(0.0, 0.0);
        DiskField::from_fn(origin, 1.0, nr, ntheta, |r, th| match self {
            Self::Riemann => 1.0 / (1.0 + r * r),
            Self::RiemannPerturbed => (0.01 * r * th.cos()).exp() / (1.0 + r * r),
            Self::JensenCos => (r * th.cos()).exp(),
            Self::Constant => 1.0,
        })
    }
}

/// Every disk check on one positive field `f`, with `h = log f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageCheckReport {
    pub jensen: JensenReport,
    pub averaged: AveragedInequalityReport,
    pub variance: VarianceMonotonicity,
    pub am_gm_slack: f64,
}

impl AverageCheckReport {
    /// The averaged inequality only counts when its curvature hypothesis
    /// holds; of its two margins the `e^{2h_av}` one is gated.
    pub fn all_pass(&self) -> bool {
        self.jensen.ok
            && self.variance.ok
            && self.am_gm_slack >= -IDENTITY_TOL
            && (!self.averaged.hypothesis_ok || self.averaged.squared_ok)
    }
}

/// Runs every check; `alpha` defaults to the smallest curvature of `f²ds²`.
pub fn average_check(f: &DiskField, alpha: Option<f64>) -> Result<AverageCheckReport> {
    let alpha = match alpha {
        Some(a) => a,
        None => f
            .polar_curvature()?
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min),
    };
    Ok(AverageCheckReport {
        jensen: jensen_exp_check(f)?,
        averaged: averaged_inequality_check(f, alpha)?,
        variance: variance_monotonicity_check(&f.map(f64::ln))?,
        am_gm_slack: am_gm_slack(f)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::riemann_profile;

    const O: Vec2 = Vec2::new(0.0, 0.0);

    fn disk(h: impl Fn(f64, f64) -> f64) -> DiskField {
        DiskField::from_fn(O, 1.0, 32, 32, h).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(DiskField::from_fn(O, 1.0, 32, 15, |_, _| 0.0).is_err());
        assert!(DiskField::from_fn(O, 1.0, 32, 18, |_, _| 0.0).is_ok());
        assert!(DiskField::from_fn(O, 1.0, 32, 17, |_, _| 0.0).is_err());
        assert!(DiskField::from_fn(O, 0.0, 32, 16, |_, _| 0.0).is_err());
        assert!(DiskField::from_fn(O, 1.0, 32, 16, |_, _| f64::NAN).is_err());
    }

    #[test]
    fn rotational_average_examples() {
        let a = rotational_average(&disk(|_, th| th.sin()));
        assert!(a.values().iter().all(|v| v.abs() < 1e-15));
        let b = rotational_average(&disk(|r, th| r * th.cos() + r * r));
        for (v, r) in b.values().iter().zip(b.radii()) {
            assert!((v - r * r).abs() < 1e-15);
        }
        let c = rotational_average(&disk(|r, _| r.exp()));
        for (v, r) in c.values().iter().zip(c.radii()) {
            assert_eq!(*v, r.exp());
        }
    }

    #[test]
    fn averaging_is_a_projection() {
        let f = random_disk_field(3, 24, 32).unwrap();
        let once = rotational_average(&f);
        let twice = rotational_average(&DiskField::from_profile(O, &once, 32).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn log_average_examples() {
        let c = log_average(&disk(|_, _| 2.5)).unwrap();
        assert!(c.values().iter().all(|&v| (v - 2.5).abs() < 1e-15));
        let s = log_average(&disk(|_, th| th.sin().exp())).unwrap();
        assert!(s.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let p = log_average(&disk(|r, th| (1.0 + r * r) * th.cos().exp())).unwrap();
        for (v, r) in p.values().iter().zip(p.radii()) {
            assert!((v - (1.0 + r * r)).abs() < 1e-14);
        }
        assert!(matches!(log_average(&disk(|_, th| th.cos())), Err(Error::InvalidFactor(_))));
    }

    #[test]
    fn jensen_examples() {
        let inv = jensen_exp_check(&disk(|r, _| 1.0 + r)).unwrap();
        assert!(inv.slack.iter().all(|&s| s == 0.0));
        let zero = jensen_exp_check(&disk(|_, _| 1.0)).unwrap();
        assert!(zero.slack.iter().all(|&s| s == 0.0));

        // av(e^{2cos θ}) = I₀(2) = Σ 1/(k!)²
        let mut i0 = 0.0;
        let mut term = 1.0;
        for k in 1..30 {
            i0 += term;
            term /= (k * k) as f64;
        }
        let cosine = jensen_exp_check(&disk(|_, th| th.cos().exp())).unwrap();
        assert!((i0 - 2.279_585_302_336_067).abs() < 1e-15);
        for s in &cosine.slack {
            assert!((s - (i0 - 1.0)).abs() < 1e-13, "{s}");
        }
        assert!(cosine.ok);
    }

    #[test]
    fn riemann_profile_is_equality_in_averaged_inequality() {
        let f0 = riemann_profile(4.0, 1.0, 400).unwrap();
        let f = DiskField::from_profile(O, &f0, 16).unwrap();
        let rep = averaged_inequality_check(&f, 4.0).unwrap();
        assert!(rep.hypothesis_ok, "{rep:?}");
        assert!(rep.margin_squared.abs() < 1e-4, "{rep:?}");
        assert!(rep.squared_ok);
        // e^{h} ≥ e^{2h} when h ≤ 0, so the displayed form is harder here
        assert!(rep.margin_plain < rep.margin_squared);
    }

    #[test]
    fn flat_factor_has_zero_margins() {
        let rep = averaged_inequality_check(&disk(|_, _| 3.0), 0.0).unwrap();
        assert!(rep.margin_squared.abs() < 1e-12 && rep.margin_plain.abs() < 1e-12);
        assert!(rep.hypothesis_ok && rep.squared_ok && rep.plain_ok);
    }

    #[test]
    fn perturbed_riemann_uses_recomputed_curvature() {
        // log f = log f₀ + 0.01·x, so K = 4e^{−0.02x} and h_av = log f₀
        let f = DiskField::from_fn(O, 1.0, 200, 64, |r, th| {
            (0.01 * r * th.cos()).exp() / (1.0 + r * r)
        })
        .unwrap();
        let k = f.polar_curvature().unwrap();
        let kmin = k.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        assert!((kmin - 4.0 * (-0.02f64).exp()).abs() < 1e-3, "{kmin}");
        let rep = averaged_inequality_check(&f, kmin).unwrap();
        assert!(rep.hypothesis_ok && rep.squared_ok, "{rep:?}");
        let too_strong = averaged_inequality_check(&f, 4.0).unwrap();
        assert!(!too_strong.hypothesis_ok);
    }

    #[test]
    fn named_fields_pass_every_check() {
        assert!(NamedDiskField::parse("nope").is_err());
        for named in NamedDiskField::ALL {
            assert_eq!(NamedDiskField::parse(named.name()).unwrap(), named);
            let f = named.sample(200, 64).unwrap();
            let rep = average_check(&f, None).unwrap();
            assert!(rep.averaged.hypothesis_ok, "{}: {rep:?}", named.name());
            assert!(rep.all_pass(), "{}: {rep:?}", named.name());
        }
        let riemann = NamedDiskField::Riemann.sample(200, 64).unwrap();
        assert!(average_check(&riemann, Some(4.0)).unwrap().all_pass());
        assert!(!average_check(&riemann, Some(5.0)).unwrap().averaged.hypothesis_ok);
    }

    #[test]
    fn am_gm_examples() {
        assert!(am_gm_slack(&disk(|r, _| 2.0 + r)).unwrap().abs() < 1e-15);
        // av(e^{cos θ}) = I₀(1) = Σ 1/(4ᵏ(k!)²)
        let i0 = 1.266_065_877_752_008_4;
        let s = am_gm_slack(&disk(|_, th| th.cos().exp())).unwrap();
        assert!((s - (i0 - 1.0)).abs() < 1e-13, "{s}");
    }

    #[test]
    fn variance_examples() {
        let inv = variance_monotonicity_check(&disk(|r, _| r * r)).unwrap();
        assert_eq!(inv.var_h, inv.var_hav);
        assert!(inv.ok);

        let s = variance_monotonicity_check(&disk(|_, th| th.sin())).unwrap();
        assert!((s.var_h - 0.5).abs() < 1e-14 && s.var_hav.abs() < 1e-28);

        let both = variance_monotonicity_check(&disk(|r, th| r + th.sin())).unwrap();
        let radial = variance_monotonicity_check(&disk(|r, _| r)).unwrap();
        assert!((both.var_h - radial.var_h - 0.5).abs() < 1e-14);
        assert!((both.var_hav - radial.var_h).abs() < 1e-14);
        assert!(both.ok);
    }

    /// `E(r)` on the unit disk is 2/3; `var(r) = 1/2 − 4/9 = 1/18`.
    #[test]
    fn disk_moments_converge() {
        let f = DiskField::from_fn(O, 1.0, 2000, 16, |r, _| r).unwrap();
        assert!((f.mean() - 2.0 / 3.0).abs() < 1e-6);
        assert!((f.variance() - 1.0 / 18.0).abs() < 1e-6);
    }

    #[test]
    fn log_average_concavity_reports_both_forms() {
        let f = DiskField::from_fn(O, 1.0, 4000, 32, |r, th| {
            (0.05 * r * th.cos()).exp() / (1.0 + r * r)
        })
        .unwrap();
        let rep = log_average_concavity_check(&f, 3.9, 0.25).unwrap();
        assert!(rep.against_f_la.pointwise_margin > 0.0);
        assert!(rep.against_mean_square.pointwise_margin <= rep.against_f_la.pointwise_margin);
        assert!(rep.against_f_la.concave && rep.against_f_la.decreasing);
    }

    #[test]
    fn resample_matches_cartesian_function() {
        use crate::field::ScalarField;
        use crate::lattice::Lattice2D;
        let g = ScalarField::from_fn(Lattice2D::square(), 128, 128, |u, v| {
            (TAU * u).cos() + (TAU * v).sin()
        })
        .unwrap();
        let c = Vec2::new(0.5, 0.5);
        let d = DiskField::resample(&g, c, 0.3, 16, 16).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let p = c + Vec2::new(d.r(i) * d.theta(j).cos(), d.r(i) * d.theta(j).sin());
                let exact = (TAU * p.x).cos() + (TAU * p.y).sin();
                assert!((d.at(i, j) - exact).abs() < 1e-5);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn averaging_identities(seed in any::<u64>()) {
                let h = random_disk_field(seed, 24, 32).unwrap();
                let v = variance_monotonicity_check(&h).unwrap();
                prop_assert!(v.ok, "{v:?}");
                let f = h.map(|x| (0.3 * x).exp());
                let j = jensen_exp_check(&f).unwrap();
                prop_assert!(j.ok);
                let la = log_average(&f).unwrap();
                let am = rotational_average(&f);
                for (g, a) in la.values().iter().zip(am.values()) {
                    prop_assert!(*g <= a + IDENTITY_TOL);
                }
            }
        }
    }
}
