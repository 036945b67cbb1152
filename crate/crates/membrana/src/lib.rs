//! Steady states, principal eigenvalues and coexistence regions for a
//! three-species competition system coupled through a membrane interface,
//! on a one-dimensional habitat.
//!
//! Two competing populations occupy an inner region and its (disconnected)
//! outer complement, exchanging individuals only through flux-jump membrane
//! conditions at the two interface points; a third competitor roams the
//! whole habitat. The crate computes, with second-order finite differences:
//!
//! - principal eigenvalues of the scalar and membrane-coupled problems
//!   ([`eigen`]),
//! - logistic steady states: scalar, uncoupled Robin, membrane pairs, and
//!   boundary blow-up approximations ([`logistic`]),
//! - coexistence states of the full system, a parabolic evolution oracle,
//!   and the large-inner-growth limit system ([`system`]),
//! - the characterizing curves and thresholds of the coexistence region,
//!   classification maps and branch continuation ([`curves`]),
//! - reporting: CSV/JSON/SVG emitters and a config-driven runner ([`app`]).
//!
//! Start from the `examples/` directory: each file is a runnable tour of one
//! capability. The `membrana` binary exposes the same operations behind a
//! JSON config for scripted runs.
//!
//! ```
//! use membrana::curves::CurveCtx;
//! use membrana::{build_mesh, Geometry1D, ModelParams};
//!
//! let mesh = build_mesh(&Geometry1D::canonical(), 32)?;
//! let params = ModelParams::benchmark();
//! let ctx = CurveCtx::new(&mesh, &params)?;
//!
//! // the membrane pair exists exactly while the interface eigenvalue of
//! // the negated growth rates is negative
//! assert!(ctx.lam1(params.lambda1, params.lambda2)? < 0.0);
//!
//! // coexistence of all three species is organized by the window between
//! // the bifurcation point and the root of the shifted eigenvalue
//! let mu0 = ctx.mu0(params.lambda1, params.lambda2)?;
//! let mu1 = ctx.mu1(params.lambda1, params.lambda2, 1e2)?.unwrap().value;
//! assert!(0.0 < mu0 && mu0 < mu1);
//! # Ok::<(), membrana::Error>(())
//! ```

pub mod band;
pub mod curves;
pub mod eigen;
pub mod error;
pub mod logistic;
pub mod mesh;
pub mod operator;
pub mod params;
pub mod system;

pub mod app;
pub mod config;
pub mod report;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
pub use mesh::{build_mesh, Geometry1D, Mesh, Region, RegionSel};
pub use params::ModelParams;
