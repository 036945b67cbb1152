//! Scalar and field parameters of the competition system.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use serde::{Deserialize, Serialize};

/// A coefficient given either as a constant or as a per-node field.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ConstOrField {
    Const(f64),
    Field(Vec<f64>),
}

impl ConstOrField {
    pub fn values(&self, n: usize, context: &'static str) -> Result<Vec<f64>> {
        match self {
            ConstOrField::Const(v) => Ok(vec![*v; n]),
            ConstOrField::Field(f) => {
                if f.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: f.len(),
                        context,
                    });
                }
                Ok(f.clone())
            }
        }
    }

    /// Minimum nodal value (the `(.)_L` of the bound statements).
    pub fn min(&self) -> f64 {
        match self {
            ConstOrField::Const(v) => *v,
            ConstOrField::Field(f) => f.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            ConstOrField::Const(v) => *v,
            ConstOrField::Field(f) => f.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

fn one() -> ConstOrField {
    ConstOrField::Const(1.0)
}

fn one_f64() -> f64 {
    1.0
}

/// All scalars of the system. Growth rates may take any sign; competition
/// and self-limitation coefficients must be positive.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: f64,
    /// Intraspecific competition of the inner species (constant or nodal).
    #[serde(default = "one")]
    pub alpha1: ConstOrField,
    #[serde(default = "one")]
    pub alpha2: ConstOrField,
    /// Competition felt by the inner/outer species from the roaming one.
    pub a1: f64,
    pub a2: f64,
    /// Competition felt by the roaming species from the inner/outer one.
    pub b1: f64,
    pub b2: f64,
    /// Self-limitation of the roaming species.
    #[serde(default = "one_f64")]
    pub beta: f64,
    /// Diffusion coefficient of the eigenvalue problems.
    #[serde(default = "one_f64")]
    pub d: f64,
}

impl ModelParams {
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let a1 = self.alpha1.values(mesh.n1(), "alpha1")?;
        let a2 = self.alpha2.values(mesh.n2(), "alpha2")?;
        if a1.iter().chain(a2.iter()).any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidConfig(
                "alpha coefficients must be positive nodewise".into(),
            ));
        }
        for (name, v) in [
            ("a1", self.a1),
            ("a2", self.a2),
            ("b1", self.b1),
            ("b2", self.b2),
            ("beta", self.beta),
            ("d", self.d),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("mu", self.mu),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn alpha1_values(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        self.alpha1.values(mesh.n1(), "alpha1")
    }

    pub fn alpha2_values(&self, mesh: &Mesh) -> Result<Vec<f64>> {
        self.alpha2.values(mesh.n2(), "alpha2")
    }

    /// Ceiling `max(lambda_1/(alpha_1)_L, lambda_2/(alpha_2)_L)` of the
    /// a priori bounds for the two membrane species.
    pub fn kappa(&self) -> f64 {
        (self.lambda1 / self.alpha1.min()).max(self.lambda2 / self.alpha2.min())
    }

    /// Canonical parameter set used by the shipped configs: all couplings one.
    pub fn canonical() -> Self {
        ModelParams {
            lambda1: 1.0,
            lambda2: 1.0,
            mu: 1.0,
            alpha1: ConstOrField::Const(1.0),
            alpha2: ConstOrField::Const(1.0),
            a1: 1.0,
            a2: 1.0,
            b1: 1.0,
            b2: 1.0,
            beta: 1.0,
            d: 1.0,
        }
    }

    /// Benchmark set with a wide bifurcation window: distinct growth rates
    /// and softened cross-competition toward the roaming species.
    pub fn benchmark() -> Self {
        ModelParams {
            lambda1: 1.0,
            lambda2: 2.0,
            mu: 2.0,
            a1: 0.5,
            a2: 0.5,
            ..ModelParams::canonical()
        }
    }

    pub fn with_lambdas(mut self, l1: f64, l2: f64) -> Self {
        self.lambda1 = l1;
        self.lambda2 = l2;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }
}

/// Classification margin around sign-change thresholds; inside it the
/// discretization cannot distinguish the sign and outcomes are reported as
/// indeterminate.
pub const EPS_BAND: f64 = 1e-6;

/// Positivity threshold separating coexistence from semitrivial collapse.
pub const DELTA_POSITIVE: f64 = 1e-8;
