use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ScalarField, MIN_FACTOR};
use crate::error::{Error, Result};
use crate::lattice::{gauss_reduce, lambda1, Lattice2D, Vec2};

/// One term `amp·cos(2π(k·u + l·v))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub amp: f64,
    pub k: i64,
    pub l: i64,
}

/// One term `a·cos(2π(k·u + l·v)) + b·sin(2π(k·u + l·v))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpTrigMode {
    pub k: i64,
    pub l: i64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

/// Built-in conformal factors, expressed in lattice coordinates `(u, v) ∈ [0, 1)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AnalyticFamily {
    /// `f ≡ value`
    Constant { value: f64 },
    /// `f = 1 + Σ amp·cos(2π(k·u + l·v))`
    Trig { modes: Vec<TrigMode> },
    /// `f = exp(Σ a·cos(…) + b·sin(…))`
    ExpTrig { modes: Vec<ExpTrigMode> },
    /// `f = 1 + A·Σ_λ exp(−|x − x₀ − λ|²/s²)` over lattice translates `λ`.
    GaussianBump {
        amplitude: f64,
        center: [f64; 2],
        width: f64,
    },
    /// `f = 1/(1 + (α/4)r²)` around `center` for `r ≤ inner`, with `log f`
    /// blended smoothly to a constant over `inner ≤ r ≤ outer`.
    ///
    /// Radii default to `0.25·λ₁` and `0.45·λ₁`; `outer` may not exceed `λ₁/2`
    /// so the bump embeds in the torus.
    RiemannBump {
        alpha: f64,
        center: [f64; 2],
        #[serde(default)]
        inner: Option<f64>,
        #[serde(default)]
        outer: Option<f64>,
    },
}

impl AnalyticFamily {
    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    /// `1 + eps·cos(2π(k·u + l·v))`
    pub fn trig(eps: f64, k: i64, l: i64) -> Self {
        Self::Trig {
            modes: vec![TrigMode { amp: eps, k, l }],
        }
    }

    pub fn riemann_bump(alpha: f64, center: [f64; 2]) -> Self {
        Self::RiemannBump {
            alpha,
            center,
            inner: None,
            outer: None,
        }
    }

    /// Short human-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::Trig { .. } => "trig",
            Self::ExpTrig { .. } => "exp-trig",
            Self::GaussianBump { .. } => "gaussian-bump",
            Self::RiemannBump { .. } => "riemann-bump",
        }
    }

    fn sampler(&self, lattice: &Lattice2D) -> Result<Sampler> {
        Ok(match self {
            Self::Constant { value } => Sampler::Constant(*value),
            Self::Trig { modes } => Sampler::Trig(modes.clone()),
            Self::ExpTrig { modes } => Sampler::ExpTrig(modes.clone()),
            Self::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "gaussian width must be positive, got {width}"
                    )));
                }
                // Drop translates whose contribution |A|·exp(−d²/s²) is below 1e-14.
                let ratio = amplitude.abs() / 1e-14;
                let cutoff = if ratio > 1.0 {
                    width * ratio.ln().sqrt()
                } else {
                    0.0
                };
                Sampler::Gaussian {
                    amplitude: *amplitude,
                    center: lattice.point(center[0], center[1]),
                    width: *width,
                    cutoff,
                    reduced: gauss_reduce(lattice),
                }
            }
            Self::RiemannBump {
                alpha,
                center,
                inner,
                outer,
            } => {
                let l1 = lambda1(lattice);
                let inner = inner.unwrap_or(0.25 * l1);
                let outer = outer.unwrap_or(0.45 * l1);
                if !(inner > 0.0 && inner < outer) {
                    return Err(Error::InvalidArgument(format!(
                        "riemann-bump radii must satisfy 0 < inner < outer, got {inner}, {outer}"
                    )));
                }
                if outer > 0.5 * l1 * (1.0 + 1e-12) {
                    return Err(Error::InvalidArgument(format!(
                        "riemann-bump outer radius {outer} exceeds half the shortest lattice vector {}",
                        0.5 * l1
                    )));
                }
                if *alpha < 0.0 && outer * outer >= -4.0 / alpha {
                    return Err(Error::InvalidDomain(format!(
                        "riemann-bump with alpha {alpha} needs outer² < {}",
                        -4.0 / alpha
                    )));
                }
                Sampler::Riemann {
                    alpha: *alpha,
                    center: lattice.point(center[0], center[1]),
                    inner,
                    outer,
                    reduced: gauss_reduce(lattice),
                }
            }
        })
    }
}

enum Sampler {
    Constant(f64),
    Trig(Vec<TrigMode>),
    ExpTrig(Vec<ExpTrigMode>),
    Gaussian {
        amplitude: f64,
        center: Vec2,
        width: f64,
        cutoff: f64,
        reduced: Lattice2D,
    },
    Riemann {
        alpha: f64,
        center: Vec2,
        inner: f64,
        outer: f64,
        reduced: Lattice2D,
    },
}

/// Shortest representative of `d` modulo a reduced lattice.
fn min_image(reduced: &Lattice2D, d: Vec2) -> Vec2 {
    let (u, v) = reduced.coords(d);
    let base = d - reduced.point(u.round(), v.round());
    let mut best = base;
    for p in -1..=1 {
        for q in -1..=1 {
            let c = base - reduced.point(p as f64, q as f64);
            if c.norm_sq() < best.norm_sq() {
                best = c;
            }
        }
    }
    best
}

/// `log` of the Riemann profile, `−log(1 + (α/4)r²)`.
pub(crate) fn riemann_log_profile(alpha: f64, r: f64) -> f64 {
    -(0.25 * alpha * r * r).ln_1p()
}

/// C^∞ step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
pub(crate) fn smooth_step(s: f64) -> f64 {
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = e(s);
        a / (a + e(1.0 - s))
    }
}

impl Sampler {
    fn eval(&self, lattice: &Lattice2D, u: f64, v: f64) -> f64 {
        match self {
            Sampler::Constant(c) => *c,
            Sampler::Trig(modes) => {
                1.0 + modes
                    .iter()
                    .map(|m| m.amp * (TAU * (m.k as f64 * u + m.l as f64 * v)).cos())
                    .sum::<f64>()
            }
            Sampler::ExpTrig(modes) => modes
                .iter()
                .map(|m| {
                    let (s, c) = (TAU * (m.k as f64 * u + m.l as f64 * v)).sin_cos();
                    m.a * c + m.b * s
                })
                .sum::<f64>()
                .exp(),
            Sampler::Gaussian {
                amplitude,
                center,
                width,
                cutoff,
                reduced,
            } => {
                let d = min_image(reduced, lattice.point(u, v) - *center);
                let reach = cutoff + d.norm();
                let det = reduced.coarea();
                let pmax = (reach * reduced.b2().norm() / det).ceil() as i64;
                let qmax = (reach * reduced.b1().norm() / det).ceil() as i64;
                let mut acc = 0.0;
                for p in -pmax..=pmax {
                    for q in -qmax..=qmax {
                        let r = d - reduced.point(p as f64, q as f64);
                        if r.norm() <= *cutoff {
                            acc += (-r.norm_sq() / (width * width)).exp();
                        }
                    }
                }
                1.0 + amplitude * acc
            }
            Sampler::Riemann {
                alpha,
                center,
                inner,
                outer,
                reduced,
            } => {
                let r = min_image(reduced, lattice.point(u, v) - *center).norm();
                let chi = smooth_step((outer - r) / (outer - inner));
                let h0 = riemann_log_profile(*alpha, r.min(*outer));
                let h_far = riemann_log_profile(*alpha, *outer);
                (chi * h0 + (1.0 - chi) * h_far).exp()
            }
        }
    }
}

/// Samples a built-in family on an `nu × nv` grid.
///
/// Every family describes a conformal factor, so samples must be positive.
pub fn from_analytic(
    lattice: &Lattice2D,
    nu: usize,
    nv: usize,
    family: &AnalyticFamily,
) -> Result<ScalarField> {
    let sampler = family.sampler(lattice)?;
    let field = ScalarField::from_fn(*lattice, nu, nv, |u, v| sampler.eval(lattice, u, v))?;
    if let Some(k) = field.values().iter().position(|&x| !(x > MIN_FACTOR)) {
        return Err(Error::InvalidFactor(format!(
            "{} family gives non-positive sample {} at ({}, {})",
            family.name(),
            field.values()[k],
            k / nv,
            k % nv
        )));
    }
    Ok(field)
}
