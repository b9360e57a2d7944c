//! TOML metric configuration.
//!
//! ```toml
//! [lattice]
//! tau = [0.0, 1.0]            # or basis = [[1.0, 0.0], [0.5, 0.9]]
//!
//! [grid]
//! nu = 128
//! nv = 128
//!
//! [factor]
//! family = "trig"
//! modes = [{ amp = 0.3, k = 0, l = 1 }]
//! # or: grid_file = "factor.grid"   (relative to the config file)
//! ```
//!
//! A basis is rescaled to unit coarea. A grid file carries its own lattice
//! and dimensions; `[lattice]` and `[grid]`, when present, must agree with it.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::field::{from_analytic, grid_file, AnalyticFamily, ConformalMetric, ScalarField};
use crate::lattice::{normalize_coarea, Lattice2D};

pub const DEFAULT_GRID: usize = 128;

/// Tolerance when matching a grid file's lattice against `[lattice]`.
const LATTICE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default)]
    pub basis: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub tau: Option<[f64; 2]>,
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice2D> {
        match (self.basis, self.tau) {
            (Some([b1, b2]), None) => Ok(normalize_coarea(&Lattice2D::from_arrays(b1, b2)?)),
            (None, Some([re, im])) => Lattice2D::from_tau(re, im),
            _ => Err(Error::Parse(
                "[lattice] needs exactly one of `basis` or `tau`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nu: DEFAULT_GRID,
            nv: DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorSpec {
    Analytic(AnalyticFamily),
    GridFile(PathBuf),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    lattice: Option<LatticeSpec>,
    grid: Option<GridSpec>,
    factor: toml::Table,
}

/// A parsed configuration; grid-file paths are already resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    pub lattice: Option<LatticeSpec>,
    pub grid: Option<GridSpec>,
    pub factor: FactorSpec,
}

impl MetricConfig {
    /// Parses `text`; relative grid-file paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let factor = if let Some(path) = raw.factor.get("grid_file") {
            if raw.factor.len() != 1 {
                return Err(Error::Parse(
                    "[factor] with `grid_file` takes no other keys".into(),
                ));
            }
            let path = path
                .as_str()
                .ok_or_else(|| Error::Parse("`grid_file` must be a string".into()))?;
            FactorSpec::GridFile(base_dir.join(path))
        } else {
            let family = AnalyticFamily::deserialize(raw.factor)
                .map_err(|e| Error::Parse(format!("[factor]: {e}")))?;
            FactorSpec::Analytic(family)
        };
        Ok(Self {
            lattice: raw.lattice,
            grid: raw.grid,
            factor,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Samples (or reads) the factor without the positivity and coarea checks.
    pub fn field(&self) -> Result<ScalarField> {
        match &self.factor {
            FactorSpec::Analytic(family) => {
                let lattice = match &self.lattice {
                    Some(spec) => spec.build()?,
                    None => Lattice2D::square(),
                };
                let grid = self.grid.unwrap_or_default();
                from_analytic(&lattice, grid.nu, grid.nv, family)
            }
            FactorSpec::GridFile(path) => {
                let field = grid_file::read(path)?;
                if let Some(spec) = &self.lattice {
                    let want = spec.build()?;
                    let have = field.lattice();
                    if (want.b1() - have.b1()).norm() > LATTICE_MATCH_TOL
                        || (want.b2() - have.b2()).norm() > LATTICE_MATCH_TOL
                    {
                        return Err(Error::InvalidLattice(format!(
                            "[lattice] does not match the lattice in {}",
                            path.display()
                        )));
                    }
                }
                if let Some(g) = self.grid {
                    if (g.nu, g.nv) != (field.nu(), field.nv()) {
                        return Err(Error::InvalidGrid(format!(
                            "[grid] {}x{} does not match {}x{} in {}",
                            g.nu,
                            g.nv,
                            field.nu(),
                            field.nv(),
                            path.display()
                        )));
                    }
                }
                Ok(field)
            }
        }
    }

    pub fn metric(&self) -> Result<ConformalMetric> {
        ConformalMetric::new(self.field()?)
    }
}
