//! Strict JSON run configuration.
//!
//! Unknown keys are rejected everywhere: a typo in a parameter name must
//! fail the run, not silently fall back to a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, Geometry1D, Mesh, RegionSel};
use crate::operator::{BcKind, BoundarySpec};
use crate::params::ModelParams;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Habitat `[x_left, x_right]`.
    pub outer: [f64; 2],
    /// Inner region `[a, b]`.
    pub inner: [f64; 2],
    pub gamma1: f64,
    pub gamma2: f64,
    pub n_per_unit: u32,
}

impl GeometryConfig {
    pub fn geometry(&self) -> Result<Geometry1D> {
        Geometry1D::new(
            (self.outer[0], self.outer[1]),
            (self.inner[0], self.inner[1]),
            self.gamma1,
            self.gamma2,
        )
    }

    pub fn mesh(&self) -> Result<Mesh> {
        build_mesh(&self.geometry()?, self.n_per_unit)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RegionName {
    Omega1,
    Omega2,
    Omega,
}

impl From<RegionName> for RegionSel {
    fn from(r: RegionName) -> Self {
        match r {
            RegionName::Omega1 => RegionSel::Omega1,
            RegionName::Omega2 => RegionSel::Omega2,
            RegionName::Omega => RegionSel::Omega,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcConfig {
    Neumann,
    Robin { g: f64 },
    Dirichlet { value: f64 },
}

impl From<BcConfig> for BcKind {
    fn from(b: BcConfig) -> Self {
        match b {
            BcConfig::Neumann => BcKind::Neumann,
            BcConfig::Robin { g } => BcKind::Robin(g),
            BcConfig::Dirichlet { value } => BcKind::Dirichlet(value),
        }
    }
}

fn default_neumann() -> BcConfig {
    BcConfig::Neumann
}

impl BcConfig {
    pub fn spec(sigma: BcConfig, gamma: BcConfig) -> BoundarySpec {
        BoundarySpec {
            sigma: sigma.into(),
            gamma: gamma.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum EigProblem {
    Sigma1,
    Lambda1,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigConfig {
    pub problem: EigProblem,
    #[serde(default)]
    pub region: Option<RegionName>,
    /// Constant potential for the scalar problem.
    #[serde(default)]
    pub c: Option<f64>,
    /// Constant potentials for the interface problem.
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default = "default_neumann")]
    pub bc_sigma: BcConfig,
    #[serde(default = "default_neumann")]
    pub bc_gamma: BcConfig,
    /// Also write the eigenfunction as `x,region,phi`.
    #[serde(default)]
    pub eigenfunction_csv: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticConfig {
    pub region: RegionName,
    /// Growth rate; defaults to the params block's `mu`.
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_neumann")]
    pub bc_sigma: BcConfig,
    #[serde(default = "default_neumann")]
    pub bc_gamma: BcConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Uniform initial values `[u1, u2, v]`; defaults to the seeded
    /// semitrivial start used by the coexistence solver.
    #[serde(default)]
    pub init_uniform: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRangeConfig {
    pub min: f64,
    pub max: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mu1Config {
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
}

fn default_mu_max() -> f64 {
    1e3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuStarConfig {
    pub window: [f64; 2],
    /// Sweep the equal growth rate instead of `mu`.
    #[serde(default)]
    pub equal_lambda: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionMapConfig {
    /// `lambda_1` range (the equal growth rate when `equal_lambda`).
    pub lambda1: [f64; 2],
    pub mu: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_true")]
    pub confirm: bool,
    #[serde(default)]
    pub equal_lambda: bool,
    #[serde(default = "default_true")]
    pub svg: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    #[serde(default = "default_branch_step")]
    pub step: f64,
    #[serde(default = "default_min_step")]
    pub min_step: f64,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

fn default_branch_step() -> f64 {
    1e-2
}

fn default_min_step() -> f64 {
    1e-7
}

fn default_max_points() -> usize {
    200
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSystemConfig {
    /// Dirichlet datum approximating the blow-up boundary value.
    pub m: f64,
    /// Optional increasing inner growth rates for the convergence study.
    #[serde(default)]
    pub lambda1_list: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleEnd {
    Neumann,
    Robin { g: f64 },
    Dirichlet,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub length: f64,
    pub left: OracleEnd,
    pub right: OracleEnd,
}

/// Whole run configuration: geometry, model parameters, and one optional
/// block per subcommand.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub params: ModelParams,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Seed for randomized initial data (none of the shipped commands draw
    /// random numbers unless asked; the seed still lands in the manifest).
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub eig: Option<EigConfig>,
    #[serde(default)]
    pub logistic: Option<LogisticConfig>,
    #[serde(default)]
    pub evolve: Option<EvolveConfig>,
    #[serde(default)]
    pub curve_h: Option<CurveRangeConfig>,
    #[serde(default)]
    pub curve_g: Option<CurveRangeConfig>,
    #[serde(default)]
    pub curve_ghat: Option<CurveRangeConfig>,
    #[serde(default)]
    pub mu1: Option<Mu1Config>,
    #[serde(default)]
    pub mu_star: Option<MuStarConfig>,
    #[serde(default)]
    pub region_map: Option<RegionMapConfig>,
    #[serde(default)]
    pub branch: Option<BranchConfig>,
    #[serde(default)]
    pub limit_system: Option<LimitSystemConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let mesh = self.geometry.mesh()?;
        self.params.validate(&mesh)?;
        if let Some(c) = &self.curve_h {
            Self::check_range(c, "curve_h")?;
        }
        if let Some(c) = &self.curve_g {
            Self::check_range(c, "curve_g")?;
        }
        if let Some(c) = &self.curve_ghat {
            Self::check_range(c, "curve_ghat")?;
        }
        if let Some(r) = &self.region_map {
            if r.nx < 2 || r.ny < 2 {
                return Err(Error::InvalidConfig("region map needs nx, ny >= 2".into()));
            }
            if !(r.lambda1[0] < r.lambda1[1]) || !(r.mu[0] < r.mu[1]) {
                return Err(Error::InvalidConfig("region map ranges must be nonempty".into()));
            }
        }
        if let Some(b) = &self.branch {
            if !(b.step > 0.0) || !(b.min_step > 0.0) || b.max_points < 2 {
                return Err(Error::InvalidConfig("branch step spec must be positive".into()));
            }
        }
        if let Some(l) = &self.limit_system {
            if !(l.m > 0.0) {
                return Err(Error::InvalidConfig("limit system M must be positive".into()));
            }
        }
        if let Some(m) = &self.mu_star {
            if !(m.window[0] < m.window[1]) {
                return Err(Error::InvalidConfig("mu_star window must be nonempty".into()));
            }
        }
        if let Some(e) = &self.evolve {
            if !(e.t_end > 0.0) || !(e.dt > 0.0) {
                return Err(Error::InvalidConfig("evolve needs positive t_end and dt".into()));
            }
        }
        if let Some(o) = &self.oracle {
            if !(o.length > 0.0) {
                return Err(Error::InvalidConfig("oracle length must be positive".into()));
            }
        }
        Ok(())
    }

    fn check_range(c: &CurveRangeConfig, what: &str) -> Result<()> {
        if !(c.min < c.max) || c.samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "{what} needs min < max and at least 2 samples"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> serde_json::Value {
        serde_json::json!({
            "geometry": {"outer": [0.0, 1.0], "inner": [1.0/3.0, 2.0/3.0],
                          "gamma1": 1.0, "gamma2": 2.0, "n_per_unit": 32},
            "params": {"lambda1": 1.0, "lambda2": 2.0, "mu": 2.0,
                        "a1": 0.5, "a2": 0.5, "b1": 1.0, "b2": 1.0}
        })
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: RunConfig = serde_json::from_value(minimal_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.params.beta, 1.0);
        assert_eq!(cfg.params.d, 1.0);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = minimal_json();
        v["params"]["lambda3"] = serde_json::json!(1.0);
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
        let mut v = minimal_json();
        v["typo_block"] = serde_json::json!({});
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn invalid_geometry_fails_validation() {
        let mut v = minimal_json();
        v["geometry"]["gamma1"] = serde_json::json!(-1.0);
        let cfg: RunConfig = serde_json::from_value(v).unwrap();
        assert!(cfg.validate().is_err());
    }
}
