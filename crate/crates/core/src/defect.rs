//! The isosystolic defect chain for one metric, and seeded random corpora.
//!
//! For a metric `f²(dx² + dy²)` on `R²/L` with `L` of unit coarea and
//! modulus `τ`, `σ² = Im τ`:
//!
//! ```text
//! area − (√3/2)·sys² ≥ area − σ²·sys² ≥ var(f)
//! area − sys² ≥ var(f)            (τ pure imaginary)
//! E(f) ≥ σ·sys
//! ```

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{from_analytic, AnalyticFamily, ConformalMetric, ExpTrigMode};
use crate::lattice::{tau_of, Lattice2D, LatticeVector, TauParameter};
use crate::systole::{fubini_bound_check, systole, FubiniCheck, METRICATION_TOLERANCE};

/// `√3/2`, the reciprocal of Hermite's constant `γ₂ = 2/√3`.
pub const LOEWNER_CONSTANT: f64 = 0.866_025_403_784_438_6;

/// `|Re τ|` below which the lattice counts as rectangular.
pub const RECTANGULAR_TOL: f64 = 1e-9;

/// Default grid for corpus metrics.
pub const CORPUS_GRID: usize = 128;

/// Every quantity in the defect chain for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub tau: TauParameter,
    pub area: f64,
    pub sys: f64,
    pub witness_class: LatticeVector,
    pub mean: f64,
    pub variance: f64,
    /// `area − (√3/2)·sys²`
    pub loewner_lhs: f64,
    /// `area − σ²·sys²`
    pub sharp_lhs: f64,
    /// `area − sys²`, only for rectangular lattices
    pub rect_lhs: Option<f64>,
    /// Slack allowed for the grid systole, `2%·area`.
    pub tol: f64,
    pub loewner_ok: bool,
    pub sharp_ok: bool,
    pub rect_ok: Option<bool>,
    pub fubini: FubiniCheck,
    pub min_curvature: f64,
    pub max_curvature: f64,
}

impl DefectReport {
    pub fn all_pass(&self) -> bool {
        self.loewner_ok && self.sharp_ok && self.rect_ok.unwrap_or(true) && self.fubini.ok
    }

    /// `loewner_lhs − sharp_lhs − (σ² − √3/2)·sys²`, zero up to rounding.
    pub fn chain_gap(&self) -> f64 {
        self.loewner_lhs - self.sharp_lhs - (self.tau.sigma_sq() - LOEWNER_CONSTANT) * self.sys * self.sys
    }

    pub fn summary(&self) -> String {
        let flag = |ok: bool| if ok { "pass" } else { "FAIL" };
        let mut s = String::new();
        let _ = writeln!(s, "tau            {}", self.tau);
        let _ = writeln!(s, "area           {:.10}", self.area);
        let _ = writeln!(
            s,
            "sys            {:.10}  (class {}, {})",
            self.sys, self.witness_class.m, self.witness_class.n
        );
        let _ = writeln!(s, "mean           {:.10}", self.mean);
        let _ = writeln!(s, "variance       {:.10}", self.variance);
        let _ = writeln!(s, "curvature      [{:.6}, {:.6}]", self.min_curvature, self.max_curvature);
        let _ = writeln!(s, "tolerance      {:.6}", self.tol);
        let _ = writeln!(
            s,
            "loewner        {:.10} >= {:.10}  {}",
            self.loewner_lhs,
            self.variance,
            flag(self.loewner_ok)
        );
        let _ = writeln!(
            s,
            "sharp          {:.10} >= {:.10}  {}",
            self.sharp_lhs,
            self.variance,
            flag(self.sharp_ok)
        );
        if let (Some(lhs), Some(ok)) = (self.rect_lhs, self.rect_ok) {
            let _ = writeln!(s, "rectangular    {:.10} >= {:.10}  {}", lhs, self.variance, flag(ok));
        }
        let _ = writeln!(
            s,
            "fubini         {:.10} >= {:.10}  {}",
            self.fubini.lhs,
            self.fubini.rhs,
            flag(self.fubini.ok)
        );
        s
    }
}

pub fn build_report(metric: &ConformalMetric) -> Result<DefectReport> {
    let tau = tau_of(metric.lattice());
    let area = metric.area();
    let mean = metric.mean();
    let variance = metric.variance()?;
    let sys_result = systole(metric)?;
    let sys = sys_result.sys;
    let sys_sq = sys * sys;
    let tol = METRICATION_TOLERANCE * area;

    let loewner_lhs = area - LOEWNER_CONSTANT * sys_sq;
    let sharp_lhs = area - tau.sigma_sq() * sys_sq;
    let rect_lhs = tau.is_pure_imaginary(RECTANGULAR_TOL).then_some(area - sys_sq);
    let holds = |lhs: f64| lhs >= variance - tol;

    let k = metric.gaussian_curvature();
    Ok(DefectReport {
        tau,
        area,
        sys,
        witness_class: sys_result.witness_class,
        mean,
        variance,
        loewner_lhs,
        sharp_lhs,
        rect_lhs,
        tol,
        loewner_ok: holds(loewner_lhs),
        sharp_ok: holds(sharp_lhs),
        rect_ok: rect_lhs.map(holds),
        fubini: fubini_bound_check(metric, sys),
        min_curvature: k.min(),
        max_curvature: k.max(),
    })
}

/// Near-equality in Loewner's inequality together with near-flat hexagonal shape.
pub fn equality_case(report: &DefectReport) -> bool {
    report.loewner_lhs <= report.tol
        && report.variance <= report.tol
        && report.tau.distance(&TauParameter::hexagonal()) <= report.tol
}

pub fn equality_case_check(metric: &ConformalMetric) -> Result<bool> {
    Ok(equality_case(&build_report(metric)?))
}

/// One corpus element with the parameters it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub index: usize,
    pub tau: TauParameter,
    pub family: AnalyticFamily,
    pub metric: ConformalMetric,
}

/// `τ` uniform on `[−1/2, 1/2] × [√3/2, 2]`, rejected when `|τ| < 1`.
pub fn random_tau(rng: &mut ChaCha8Rng) -> TauParameter {
    loop {
        let re = rng.random_range(-0.5..=0.5);
        let im = rng.random_range(LOEWNER_CONSTANT..=2.0);
        if re * re + im * im >= 1.0 {
            return TauParameter { re, im };
        }
    }
}

/// `log f = Σ a·cos(2π(ku + lv) + φ)` over one representative of each
/// `±(k, l) ≠ 0` with `|k|, |l| ≤ 3`; `a` uniform in `[−1/2, 1/2]`, `φ` uniform.
pub fn random_log_trig(rng: &mut ChaCha8Rng) -> AnalyticFamily {
    let mut modes = Vec::new();
    for k in 0..=3i64 {
        for l in -3..=3i64 {
            if k == 0 && l <= 0 {
                continue;
            }
            let amp: f64 = rng.random_range(-0.5..=0.5);
            let phase: f64 = rng.random_range(0.0..TAU);
            // a·cos(x + φ) = a·cos φ·cos x − a·sin φ·sin x
            modes.push(ExpTrigMode {
                k,
                l,
                a: amp * phase.cos(),
                b: -amp * phase.sin(),
            });
        }
    }
    AnalyticFamily::ExpTrig { modes }
}

/// A random metric on the unit-coarea lattice with modulus `tau`.
pub fn random_metric_for_tau(
    tau: TauParameter,
    rng: &mut ChaCha8Rng,
    grid: usize,
) -> Result<(AnalyticFamily, ConformalMetric)> {
    let lattice = Lattice2D::from_tau(tau.re, tau.im)?;
    let family = random_log_trig(rng);
    let metric = ConformalMetric::new(from_analytic(&lattice, grid, grid, &family)?)?;
    Ok((family, metric))
}

/// Deterministic corpus; element `i` draws from ChaCha8 stream `i` of `seed`.
pub fn random_corpus(count: usize, seed: u64, grid: usize) -> Result<Vec<CorpusEntry>> {
    if count == 0 {
        return Err(Error::InvalidArgument("corpus count must be at least 1".into()));
    }
    (0..count)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            let tau = random_tau(&mut rng);
            let (family, metric) = random_metric_for_tau(tau, &mut rng, grid)?;
            Ok(CorpusEntry {
                index,
                tau,
                family,
                metric,
            })
        })
        .collect()
}

/// Reports for every corpus entry, computed on all available cores.
/// Results stay in entry order.
pub fn corpus_reports(entries: &[CorpusEntry]) -> Vec<Result<DefectReport>> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(entries.len())
        .max(1);
    let next = AtomicUsize::new(0);
    let mut out: Vec<Option<Result<DefectReport>>> = (0..entries.len()).map(|_| None).collect();
    let done: Vec<Vec<(usize, Result<DefectReport>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        let Some(entry) = entries.get(k) else { break };
                        local.push((k, build_report(&entry.metric)));
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("corpus worker panicked"))
            .collect()
    });
    for (k, r) in done.into_iter().flatten() {
        out[k] = Some(r);
    }
    out.into_iter().map(|r| r.expect("every entry processed")).collect()
}

pub const CORPUS_CSV_HEADER: &str = "index,tau_re,tau_im,area,sys,var,loewner_lhs,sharp_lhs,rect_lhs,\
loewner_ok,sharp_ok,rect_ok,fubini_lhs,fubini_rhs,fubini_ok,min_k,max_k";

pub fn corpus_csv_row(index: usize, r: &DefectReport) -> String {
    let opt_f = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.16e}"));
    let opt_b = |x: Option<bool>| x.map_or(String::new(), |v| v.to_string());
    format!(
        "{index},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{:.16e},{:.16e},{},{:.16e},{:.16e}",
        r.tau.re,
        r.tau.im,
        r.area,
        r.sys,
        r.variance,
        r.loewner_lhs,
        r.sharp_lhs,
        opt_f(r.rect_lhs),
        r.loewner_ok,
        r.sharp_ok,
        opt_b(r.rect_ok),
        r.fubini.lhs,
        r.fubini.rhs,
        r.fubini.ok,
        r.min_curvature,
        r.max_curvature
    )
}
