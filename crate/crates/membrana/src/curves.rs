//! Characterizing curves and thresholds of the coexistence region, point
//! classification, region maps, and branch continuation.
//!
//! Everything here reduces to two cached primitives: the interface
//! eigenvalue for constant potentials and the membrane logistic pair. Curve
//! evaluations, classification grids and continuation all go through the
//! per-run cache, keyed content-addressed on the exact parameter bits.
//!
//! Sign conventions follow the equal-growth classification statement
//! (`Lambda_1(-l+a_1 mu, -l+a_2 mu) > 0` iff `l < Ghat(mu)`); its source
//! states the opposite sign once in a proof step, which is a typo we do not
//! reproduce. Likewise the monotone map used to build `Ghat` is `H`, the
//! decreasing interface curve.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::eigen::lambda1;
use crate::error::{Error, Result};
use crate::logistic::{
    solve_logistic_scalar, solve_membrane_logistic, LogisticOutcome, SemitrivialOutcome,
};
use crate::mesh::{Mesh, RegionSel};
use crate::operator::{whole_domain_potential, BoundarySpec};
use crate::params::{ModelParams, DELTA_POSITIVE, EPS_BAND};
use crate::system::{
    evolve_parabolic, limit_system_solve, solve_coexistence, CoexistInit, CoexistenceOutcome,
    NotFoundReason, StateTriple,
};

pub use crate::system::limit_system_solve as limit_system;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFlag {
    Ok,
    OutOfDomain,
    Indeterminate,
}

impl SampleFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SampleFlag::Ok => "ok",
            SampleFlag::OutOfDomain => "out_of_domain",
            SampleFlag::Indeterminate => "indeterminate",
        }
    }
}

/// One evaluated curve point.
#[derive(Clone, Copy, Debug)]
pub struct CurveSample {
    pub abscissa: f64,
    pub value: f64,
    pub solver_residual: f64,
    pub flag: SampleFlag,
}

impl CurveSample {
    fn out_of_domain(abscissa: f64) -> Self {
        CurveSample {
            abscissa,
            value: f64::NAN,
            solver_residual: f64::NAN,
            flag: SampleFlag::OutOfDomain,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    NonExistenceNecessary,
    CoexistencePredicted,
    NonExistenceLarge,
    Indeterminate,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::NonExistenceNecessary => "nonexistence_necessary",
            Classification::CoexistencePredicted => "coexistence_predicted",
            Classification::NonExistenceLarge => "nonexistence_large",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confirmation {
    Confirmed,
    Refuted,
    Unchecked,
}

impl Confirmation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Confirmation::Confirmed => "confirmed",
            Confirmation::Refuted => "refuted",
            Confirmation::Unchecked => "unchecked",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    /// `lambda_1` range (or `lambda` in the equal-growth mode).
    pub x_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct RegionCell {
    pub lambda1: f64,
    pub mu: f64,
    pub class: Classification,
    pub confirmed: Confirmation,
}

#[derive(Clone, Debug)]
pub struct RegionMap {
    pub cells: Vec<RegionCell>,
    pub grid: GridSpec,
    pub lambda2: f64,
    pub equal_lambda: bool,
}

#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub mu: f64,
    pub state: StateTriple,
    pub arclength: f64,
    /// Sign of the principal linearization eigenvalue when computed; branch
    /// tracing leaves it unset.
    pub stability_hint: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchTermination {
    /// Third component collapsed (reconnection to the membrane pair).
    VanishingV,
    /// Membrane components collapsed (reconnection to the roaming state).
    VanishingU,
    StepUnderflow,
    MaxPoints,
    WindowExit,
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub termination: BranchTermination,
    pub mu0: f64,
    pub mu1: f64,
}

#[derive(Clone, Debug)]
pub enum BranchOutcome {
    Traced(Branch),
    /// The bifurcation window is numerically empty; nothing to trace.
    Degenerate { mu0: f64, mu1: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct StepSpec {
    pub initial: f64,
    pub min_step: f64,
    pub max_points: usize,
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec {
            initial: 1e-2,
            min_step: 1e-7,
            max_points: 200,
        }
    }
}

/// Empirical bracket for the exclusion threshold plus the constructive
/// comparison bound. The threshold itself is only proved to exist, so it is
/// always reported as a bracket, never a point.
#[derive(Clone, Copy, Debug)]
pub struct ExclusionBracket {
    /// Largest parameter with a Newton-confirmed coexistence state.
    pub lower: f64,
    /// Smallest parameter refuted by Newton plus the evolution oracle.
    pub upper: f64,
    /// Comparison-argument sufficient bound, when found in the window.
    pub constructive: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Mu1Result {
    pub value: f64,
    pub residual: f64,
}

/// Evaluation context holding the mesh, the parameters and per-run caches.
pub struct CurveCtx<'a> {
    pub mesh: &'a Mesh,
    pub params: &'a ModelParams,
    /// Robin thresholds of the uncoupled problems (geometry-only).
    pub sigma1: f64,
    pub sigma2: f64,
    lam_cache: Mutex<HashMap<(u64, u64), f64>>,
    g_cache: Mutex<HashMap<(u64, u64), CurveSample>>,
    pair_cache: Mutex<HashMap<(u64, u64), Arc<SemitrivialOutcome>>>,
}

impl<'a> CurveCtx<'a> {
    pub fn new(mesh: &'a Mesh, params: &'a ModelParams) -> Result<Self> {
        params.validate(mesh)?;
        let (s1, s2) = crate::logistic::sigma_thresholds(mesh)?;
        Ok(CurveCtx {
            mesh,
            params,
            sigma1: s1,
            sigma2: s2,
            lam_cache: Mutex::new(HashMap::new()),
            g_cache: Mutex::new(HashMap::new()),
            pair_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Cached `Lambda_1(-nu_1, -nu_2)` for constant potentials.
    pub fn lam1(&self, nu1: f64, nu2: f64) -> Result<f64> {
        let key = (nu1.to_bits(), nu2.to_bits());
        if let Some(v) = self.lam_cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let c1 = vec![-nu1; self.mesh.n1()];
        let c2 = vec![-nu2; self.mesh.n2()];
        let v = lambda1(self.mesh, 1.0, &c1, &c2)?.value;
        self.lam_cache.lock().unwrap().insert(key, v);
        Ok(v)
    }

    /// Cached membrane logistic pair.
    pub fn pair(&self, l1: f64, l2: f64) -> Result<Arc<SemitrivialOutcome>> {
        let key = (l1.to_bits(), l2.to_bits());
        if let Some(p) = self.pair_cache.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let out = solve_membrane_logistic(
            self.mesh,
            l1,
            l2,
            &self.params.alpha1,
            &self.params.alpha2,
        )?;
        let arc = Arc::new(out);
        self.pair_cache
            .lock()
            .unwrap()
            .insert(key, arc.clone());
        Ok(arc)
    }

    /// Interface curve: the unique `nu_1` with
    /// `Lambda_1(-nu_1, -nu_2) = 0`, defined for `nu_2 < sigma_2`.
    pub fn curve_h(&self, nu2: f64) -> Result<CurveSample> {
        if nu2 >= self.sigma2 - EPS_BAND {
            return Ok(CurveSample::out_of_domain(nu2));
        }
        // the eigenvalue decreases in nu_1; its root never exceeds sigma_1
        let mut hi = self.sigma1 + 1.0;
        let mut fhi = self.lam1(hi, nu2)?;
        let mut expand = 0;
        while fhi >= 0.0 && expand < 60 {
            hi = 2.0 * hi + 1.0;
            fhi = self.lam1(hi, nu2)?;
            expand += 1;
        }
        let mut lo = -nu2.abs().max(1.0);
        let mut flo = self.lam1(lo, nu2)?;
        expand = 0;
        while flo <= 0.0 && expand < 60 {
            lo = 2.0 * lo - 1.0;
            flo = self.lam1(lo, nu2)?;
            expand += 1;
        }
        if !(flo > 0.0 && fhi < 0.0) {
            return Err(Error::NoSignChange {
                what: "interface curve",
                lo,
                hi,
            });
        }
        let mut f = |x: f64| self.lam1(x, nu2);
        let (root, res) = refine_root(&mut f, lo, hi, flo, fhi)?;
        Ok(CurveSample {
            abscissa: nu2,
            value: root,
            solver_residual: res,
            flag: SampleFlag::Ok,
        })
    }

    /// Richardson-refined central difference of the interface curve at zero.
    pub fn curve_h_slope_at_zero(&self) -> Result<f64> {
        let s = 1e-3;
        let d = |step: f64| -> Result<f64> {
            let p = self.curve_h(step)?;
            let m = self.curve_h(-step)?;
            Ok((p.value - m.value) / (2.0 * step))
        };
        let d1 = d(s)?;
        let d2 = d(2.0 * s)?;
        Ok((4.0 * d1 - d2) / 3.0)
    }

    /// Shifted interface curve `a_1 mu + H(lambda_2 - a_2 mu)`, defined for
    /// `mu > (lambda_2 - sigma_2)/a_2`.
    pub fn curve_big_g(&self, mu: f64, lambda2: f64) -> Result<CurveSample> {
        let threshold = (lambda2 - self.sigma2) / self.params.a2;
        if mu <= threshold + EPS_BAND {
            return Ok(CurveSample::out_of_domain(mu));
        }
        let h = self.curve_h(lambda2 - self.params.a2 * mu)?;
        Ok(CurveSample {
            abscissa: mu,
            value: self.params.a1 * mu + h.value,
            solver_residual: h.solver_residual,
            flag: h.flag,
        })
    }

    /// Bifurcation curve: the principal eigenvalue of the roaming species'
    /// linearization over the membrane pair. Out of domain when the pair
    /// does not exist.
    pub fn curve_g(&self, lambda_1: f64, lambda_2: f64) -> Result<CurveSample> {
        let key = (lambda_1.to_bits(), lambda_2.to_bits());
        if let Some(s) = self.g_cache.lock().unwrap().get(&key) {
            return Ok(*s);
        }
        let sample = match &*self.pair(lambda_1, lambda_2)? {
            SemitrivialOutcome::Positive(pair) => {
                let on1: Vec<f64> = pair.theta1.iter().map(|t| self.params.b1 * t).collect();
                let on2: Vec<f64> = pair.theta2.iter().map(|t| self.params.b2 * t).collect();
                let pot = whole_domain_potential(self.mesh, &on1, &on2);
                let eig = crate::eigen::sigma1(
                    self.mesh,
                    RegionSel::Omega,
                    1.0,
                    &pot,
                    &BoundarySpec::all_neumann(),
                )?;
                CurveSample {
                    abscissa: lambda_1,
                    value: eig.value,
                    solver_residual: eig.residual,
                    flag: SampleFlag::Ok,
                }
            }
            SemitrivialOutcome::Indeterminate => CurveSample {
                abscissa: lambda_1,
                value: f64::NAN,
                solver_residual: f64::NAN,
                flag: SampleFlag::Indeterminate,
            },
            SemitrivialOutcome::NoPositiveSolution => CurveSample::out_of_domain(lambda_1),
        };
        self.g_cache.lock().unwrap().insert(key, sample);
        Ok(sample)
    }

    /// Equal-growth section of the bifurcation curve, defined for positive
    /// growth only.
    pub fn curve_g_equal(&self, lambda: f64) -> Result<CurveSample> {
        if lambda <= 0.0 {
            return Ok(CurveSample::out_of_domain(lambda));
        }
        self.curve_g(lambda, lambda)
    }

    /// Bifurcation point: identical to `curve_g` by construction.
    pub fn mu0(&self, lambda_1: f64, lambda_2: f64) -> Result<f64> {
        let s = self.curve_g(lambda_1, lambda_2)?;
        match s.flag {
            SampleFlag::Ok => Ok(s.value),
            _ => Err(Error::InvalidConfig(format!(
                "bifurcation point needs the membrane pair at ({lambda_1}, {lambda_2})"
            ))),
        }
    }

    /// Window end: the root in `mu` of the shifted interface eigenvalue.
    /// `None` when no sign change occurs on `[0, mu_max]`.
    pub fn mu1(&self, lambda_1: f64, lambda_2: f64, mu_max: f64) -> Result<Option<Mu1Result>> {
        let shifted = |mu: f64| -> Result<f64> {
            self.lam1(
                lambda_1 - self.params.a1 * mu,
                lambda_2 - self.params.a2 * mu,
            )
        };
        let f0 = shifted(0.0)?;
        if f0 >= 0.0 {
            return Err(Error::InvalidConfig(
                "window end needs a negative existence eigenvalue at mu = 0".into(),
            ));
        }
        // the map increases in mu; march until the sign flips
        let mut lo = 0.0;
        let mut flo = f0;
        let mut hi = 1.0f64.min(mu_max);
        loop {
            let fhi = shifted(hi)?;
            if fhi > 0.0 {
                let mut f = |x: f64| shifted(x);
                let (root, res) = refine_root(&mut f, lo, hi, flo, fhi)?;
                return Ok(Some(Mu1Result {
                    value: root,
                    residual: res,
                }));
            }
            if hi >= mu_max {
                return Ok(None);
            }
            lo = hi;
            flo = fhi;
            hi = (hi * 2.0).min(mu_max);
        }
    }

    /// Root of `-sigma + H(sigma) = (a_2 - a_1) mu` and the equal-growth
    /// threshold curve `Ghat(mu) = sigma_0(mu) + a_2 mu`, cross-checked
    /// against its second form `H(sigma_0) + a_1 mu`.
    pub fn sigma0_and_ghat(&self, mu: f64) -> Result<(f64, f64)> {
        if mu < 0.0 {
            return Err(Error::InvalidConfig("Ghat is defined for mu >= 0".into()));
        }
        let target = (self.params.a2 - self.params.a1) * mu;
        let mut h = |sigma: f64| -> Result<f64> {
            Ok(-sigma + self.curve_h(sigma)?.value - target)
        };
        let (sigma0, _res) = if target.abs() < 1e-14 {
            // h(0) = 0 up to eigenvalue tolerance
            (0.0, 0.0)
        } else {
            // h is decreasing and onto; bracket on the side the sign demands
            let (mut lo, mut hi) = if target > 0.0 {
                (-1.0, 0.0)
            } else {
                (0.0, self.sigma2 - 2.0 * EPS_BAND)
            };
            let mut flo = h(lo)?;
            let mut fhi = h(hi)?;
            let mut expand = 0;
            while flo <= 0.0 && expand < 60 {
                lo = 2.0 * lo - 1.0;
                flo = h(lo)?;
                expand += 1;
            }
            expand = 0;
            while fhi >= 0.0 && expand < 60 {
                hi = 0.5 * (hi + self.sigma2 - EPS_BAND);
                fhi = h(hi)?;
                expand += 1;
            }
            if !(flo > 0.0 && fhi < 0.0) {
                return Err(Error::NoSignChange {
                    what: "equal-growth auxiliary root",
                    lo,
                    hi,
                });
            }
            refine_root(&mut h, lo, hi, flo, fhi)?
        };
        let ghat = sigma0 + self.params.a2 * mu;
        let alt = self.curve_h(sigma0)?.value + self.params.a1 * mu;
        let scale = ghat.abs().max(1.0);
        if (alt - ghat).abs() > 1e-6 * scale {
            return Err(Error::SolverFailure(format!(
                "threshold curve forms disagree: {ghat} vs {alt}"
            )));
        }
        Ok((sigma0, ghat))
    }

    /// Classifies a parameter point.
    ///
    /// Necessary-condition failures (`mu <= 0` or nonnegative existence
    /// eigenvalue) are certain; a negative product of the window factors
    /// predicts coexistence; the comparison bound flags sure exclusion at
    /// large `mu`; anything else is indeterminate.
    pub fn classify(&self, lambda_1: f64, lambda_2: f64, mu: f64) -> Result<Classification> {
        if mu <= 0.0 {
            return Ok(Classification::NonExistenceNecessary);
        }
        let lam_exist = self.lam1(lambda_1, lambda_2)?;
        if lam_exist >= EPS_BAND {
            return Ok(Classification::NonExistenceNecessary);
        }
        if lam_exist > -EPS_BAND {
            return Ok(Classification::Indeterminate);
        }
        let g = self.curve_g(lambda_1, lambda_2)?;
        if g.flag != SampleFlag::Ok {
            return Ok(Classification::Indeterminate);
        }
        let f1 = mu - g.value;
        let f2 = self.lam1(
            lambda_1 - self.params.a1 * mu,
            lambda_2 - self.params.a2 * mu,
        )?;
        if f1.abs() < EPS_BAND || f2.abs() < EPS_BAND {
            return Ok(Classification::Indeterminate);
        }
        if f1 * f2 < 0.0 {
            return Ok(Classification::CoexistencePredicted);
        }
        if self.excluded_by_comparison(lambda_1, lambda_2, mu)? {
            return Ok(Classification::NonExistenceLarge);
        }
        Ok(Classification::Indeterminate)
    }

    /// Comparison-argument exclusion: any coexistence state forces the
    /// roaming species above the logistic solution with the ceiling
    /// potential, which contradicts a positive shifted eigenvalue.
    fn excluded_by_comparison(&self, lambda_1: f64, lambda_2: f64, mu: f64) -> Result<bool> {
        let kappa = (lambda_1 / self.params.alpha1.min()).max(lambda_2 / self.params.alpha2.min());
        if kappa <= 0.0 {
            return Ok(false);
        }
        let on1 = vec![kappa * self.params.b1; self.mesh.n1()];
        let on2 = vec![kappa * self.params.b2; self.mesh.n2()];
        let c = whole_domain_potential(self.mesh, &on1, &on2);
        let eta = match solve_logistic_scalar(
            self.mesh,
            RegionSel::Omega,
            mu,
            &c,
            self.params.beta,
            &BoundarySpec::all_neumann(),
        )? {
            LogisticOutcome::Positive(f) => f,
            LogisticOutcome::NoPositiveSolution => return Ok(false),
        };
        let c1: Vec<f64> = (0..self.mesh.n1())
            .map(|l| -lambda_1 + self.params.a1 * eta[self.mesh.v_index_of(RegionSel::Omega1, l)])
            .collect();
        let c2: Vec<f64> = (0..self.mesh.n2())
            .map(|l| -lambda_2 + self.params.a2 * eta[self.mesh.v_index_of(RegionSel::Omega2, l)])
            .collect();
        let lam = lambda1(self.mesh, 1.0, &c1, &c2)?.value;
        Ok(lam > EPS_BAND)
    }

    fn cell_params(&self, lambda_1: f64, lambda_2: f64, mu: f64) -> ModelParams {
        let mut p = self.params.clone();
        p.lambda1 = lambda_1;
        p.lambda2 = lambda_2;
        p.mu = mu;
        p
    }

    /// Newton confirmation at one parameter point.
    pub fn confirm(&self, lambda_1: f64, lambda_2: f64, mu: f64) -> Result<Confirmation> {
        let p = self.cell_params(lambda_1, lambda_2, mu);
        Ok(match solve_coexistence(self.mesh, &p, &CoexistInit::Auto)? {
            CoexistenceOutcome::Found(_) => Confirmation::Confirmed,
            CoexistenceOutcome::NotFound(_) => Confirmation::Refuted,
        })
    }

    /// Classifies every grid cell; with `confirm` also runs the Newton
    /// solver at every predicted cell and at indeterminate cells adjacent
    /// to predicted ones. Cells are processed by a worker pool and
    /// reassembled in grid order.
    pub fn region_map(
        &self,
        grid: &GridSpec,
        confirm: bool,
        equal_lambda: bool,
    ) -> Result<RegionMap> {
        if grid.nx < 2 || grid.ny < 2 {
            return Err(Error::InvalidConfig("grid needs at least 2x2 cells".into()));
        }
        let xs: Vec<f64> = (0..grid.nx)
            .map(|i| {
                grid.x_range.0
                    + (grid.x_range.1 - grid.x_range.0) * i as f64 / (grid.nx - 1) as f64
            })
            .collect();
        let ys: Vec<f64> = (0..grid.ny)
            .map(|j| {
                grid.mu_range.0
                    + (grid.mu_range.1 - grid.mu_range.0) * j as f64 / (grid.ny - 1) as f64
            })
            .collect();
        let lambda2 = self.params.lambda2;
        let mut cells: Vec<RegionCell> = ys
            .par_iter()
            .flat_map_iter(|&mu| xs.iter().map(move |&x| (x, mu)))
            .map(|(x, mu)| -> Result<RegionCell> {
                let l2 = if equal_lambda { x } else { lambda2 };
                let class = self.classify(x, l2, mu)?;
                Ok(RegionCell {
                    lambda1: x,
                    mu,
                    class,
                    confirmed: Confirmation::Unchecked,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        if confirm {
            let nx = grid.nx;
            let predicted = |c: &RegionCell| c.class == Classification::CoexistencePredicted;
            let mut targets = Vec::new();
            for (idx, cell) in cells.iter().enumerate() {
                let take = match cell.class {
                    Classification::CoexistencePredicted => true,
                    Classification::Indeterminate => {
                        // band of indeterminate cells touching the predicted region
                        let i = idx % nx;
                        let j = idx / nx;
                        let mut near = false;
                        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                            let ii = i as i64 + di;
                            let jj = j as i64 + dj;
                            if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < cells.len() / nx {
                                if predicted(&cells[jj as usize * nx + ii as usize]) {
                                    near = true;
                                    break;
                                }
                            }
                        }
                        near
                    }
                    _ => false,
                };
                if take {
                    targets.push(idx);
                }
            }
            let results: Vec<(usize, Confirmation)> = targets
                .par_iter()
                .map(|&idx| -> Result<(usize, Confirmation)> {
                    let cell = cells[idx];
                    let l2 = if equal_lambda { cell.lambda1 } else { lambda2 };
                    Ok((idx, self.confirm(cell.lambda1, l2, cell.mu)?))
                })
                .collect::<Result<Vec<_>>>()?;
            for (idx, conf) in results {
                cells[idx].confirmed = conf;
            }
        }
        Ok(RegionMap {
            cells,
            grid: *grid,
            lambda2,
            equal_lambda,
        })
    }

    /// Refutation: Newton finds nothing and the evolution from interior
    /// positive data drives some membrane component to extinction.
    fn refuted(&self, lambda_1: f64, lambda_2: f64, mu: f64) -> Result<bool> {
        let p = self.cell_params(lambda_1, lambda_2, mu);
        match solve_coexistence(self.mesh, &p, &CoexistInit::Auto)? {
            CoexistenceOutcome::Found(_) => Ok(false),
            CoexistenceOutcome::NotFound(NotFoundReason::NecessaryConditionFails) => Ok(true),
            CoexistenceOutcome::NotFound(_) => {
                let kappa = p.kappa().max(0.1);
                let init = StateTriple {
                    u1: vec![0.5 * kappa; self.mesh.n1()],
                    u2: vec![0.5 * kappa; self.mesh.n2()],
                    v: vec![0.5 * mu.max(0.1); self.mesh.nv()],
                };
                let h = self.mesh.segments[0].h;
                let evolved = evolve_parabolic(self.mesh, &p, &init, 60.0, h)?;
                let (m1, m2, mv) = evolved.mins();
                Ok(m1 < 1e-5 * kappa || m2 < 1e-5 * kappa || mv < 1e-5 * mu.max(0.1))
            }
        }
    }

    /// Exclusion bracket in `mu` at fixed growth rates, plus the
    /// constructive comparison bound.
    pub fn estimate_mu_star(
        &self,
        lambda_1: f64,
        lambda_2: f64,
        window: (f64, f64),
    ) -> Result<ExclusionBracket> {
        if self.lam1(lambda_1, lambda_2)? >= -EPS_BAND {
            return Err(Error::InvalidConfig(
                "exclusion bracket needs a negative existence eigenvalue".into(),
            ));
        }
        let mu0 = self.mu0(lambda_1, lambda_2)?;
        let mu1 = self
            .mu1(lambda_1, lambda_2, window.1)?
            .map(|m| m.value)
            .unwrap_or(mu0);
        let mut confirmed = 0.5 * (mu0 + mu1);
        if !matches!(
            self.confirm(lambda_1, lambda_2, confirmed)?,
            Confirmation::Confirmed
        ) {
            // fall back to a scan inside the window
            let mut found = None;
            for k in 1..10 {
                let mu = mu0 + (mu1 - mu0) * k as f64 / 10.0;
                if mu > 0.0
                    && matches!(self.confirm(lambda_1, lambda_2, mu)?, Confirmation::Confirmed)
                {
                    found = Some(mu);
                    break;
                }
            }
            confirmed = found.ok_or_else(|| {
                Error::SolverFailure("no confirmed coexistence point inside the window".into())
            })?;
        }

        // march out to a refuted point
        let mut refuted_mu = None;
        let mut probe = (mu0.max(mu1).max(confirmed) * 2.0).max(1.0);
        for _ in 0..12 {
            if probe > window.1 {
                break;
            }
            if self.refuted(lambda_1, lambda_2, probe)? {
                refuted_mu = Some(probe);
                break;
            }
            probe *= 2.0;
        }
        let mut hi = refuted_mu.ok_or(Error::NoSignChange {
            what: "exclusion threshold window",
            lo: confirmed,
            hi: window.1,
        })?;
        let mut lo = confirmed;
        for _ in 0..20 {
            if hi - lo < 0.02 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if matches!(self.confirm(lambda_1, lambda_2, mid)?, Confirmation::Confirmed) {
                lo = mid;
            } else if self.refuted(lambda_1, lambda_2, mid)? {
                hi = mid;
            } else {
                // inconclusive point: keep it inside the bracket
                lo = mid;
            }
        }

        // constructive bound: first mu with a positive comparison eigenvalue
        let mut constructive = None;
        let mut clo = 0.0_f64.max(mu0);
        let mut chi = window.1;
        if self.excluded_by_comparison(lambda_1, lambda_2, chi)? {
            for _ in 0..40 {
                if chi - clo < 1e-3 * chi.abs().max(1.0) {
                    break;
                }
                let mid = 0.5 * (clo + chi);
                if self.excluded_by_comparison(lambda_1, lambda_2, mid)? {
                    chi = mid;
                } else {
                    clo = mid;
                }
            }
            constructive = Some(chi);
        }
        Ok(ExclusionBracket {
            lower: lo,
            upper: hi,
            constructive,
        })
    }

    /// Exclusion bracket in the equal growth rate at fixed `mu`.
    pub fn estimate_lambda_star(&self, mu: f64, window: (f64, f64)) -> Result<ExclusionBracket> {
        if mu <= 0.0 {
            return Err(Error::InvalidConfig("mu must be positive".into()));
        }
        let (_, ghat) = self.sigma0_and_ghat(mu)?;
        // find a confirmed point just above the threshold curve
        let mut confirmed = None;
        for k in 1..=10 {
            let lam = ghat + 0.05 * k as f64 * ghat.abs().max(1.0);
            if lam <= 0.0 || lam > window.1 {
                continue;
            }
            if matches!(self.confirm(lam, lam, mu)?, Confirmation::Confirmed) {
                confirmed = Some(lam);
                break;
            }
        }
        let mut lo = confirmed.ok_or_else(|| {
            Error::SolverFailure("no confirmed equal-growth coexistence point".into())
        })?;
        let mut refuted_lam = None;
        let mut probe = (lo * 2.0).max(1.0);
        for _ in 0..12 {
            if probe > window.1 {
                break;
            }
            if self.refuted(probe, probe, mu)? {
                refuted_lam = Some(probe);
                break;
            }
            probe *= 2.0;
        }
        let mut hi = refuted_lam.ok_or(Error::NoSignChange {
            what: "equal-growth exclusion window",
            lo,
            hi: window.1,
        })?;
        for _ in 0..20 {
            if hi - lo < 0.02 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if matches!(self.confirm(mid, mid, mu)?, Confirmation::Confirmed) {
                lo = mid;
            } else if self.refuted(mid, mid, mu)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(ExclusionBracket {
            lower: lo,
            upper: hi,
            constructive: None,
        })
    }

    /// Natural-parameter continuation from the bifurcation point toward the
    /// window end, with step halving on failure and a secant-predicted
    /// bordered step near folds.
    pub fn trace_branch(
        &self,
        lambda_1: f64,
        lambda_2: f64,
        step: &StepSpec,
    ) -> Result<BranchOutcome> {
        let mu0 = self.mu0(lambda_1, lambda_2)?;
        let window_hi = 1e3;
        let mu1 = self
            .mu1(lambda_1, lambda_2, window_hi)?
            .map(|m| m.value)
            .ok_or(Error::NoSignChange {
                what: "window end",
                lo: 0.0,
                hi: window_hi,
            })?;
        if (mu1 - mu0).abs() < 10.0 * step.initial {
            return Ok(BranchOutcome::Degenerate { mu0, mu1 });
        }
        let dir = (mu1 - mu0).signum();
        let width = (mu1 - mu0).abs();
        let window = (
            mu0.min(mu1) - 0.1 * width,
            mu0.max(mu1) + 0.1 * width,
        );

        let mut points: Vec<BranchPoint> = Vec::new();
        let mu = mu0 + dir * step.initial;
        let p = self.cell_params(lambda_1, lambda_2, mu);
        let first = match solve_coexistence(self.mesh, &p, &CoexistInit::Auto)? {
            CoexistenceOutcome::Found(s) => s,
            CoexistenceOutcome::NotFound(r) => {
                return Err(Error::SolverFailure(format!(
                    "failed to leave the semitrivial manifold at the bifurcation point ({r:?}); \
                     the detected window start may be off"
                )))
            }
        };
        points.push(BranchPoint {
            mu,
            state: first.state.clone(),
            arclength: 0.0,
            stability_hint: None,
            residual: first.residual,
        });

        let sysdata = crate::system::system_data(self.mesh, &self.cell_params(lambda_1, lambda_2, mu))?;
        let mut dmu = dir * step.initial;
        let kappa = self.cell_params(lambda_1, lambda_2, mu).kappa();
        let mut fails = 0usize;
        let mut termination;
        loop {
            if points.len() >= step.max_points {
                termination = BranchTermination::MaxPoints;
                break;
            }
            let last = points.last().unwrap();
            if dmu.abs() < step.min_step {
                termination = BranchTermination::StepUnderflow;
                break;
            }
            let mu_try = last.mu + dmu;
            if mu_try < window.0 || mu_try > window.1 {
                termination = BranchTermination::WindowExit;
                break;
            }
            // secant predictor when two points are available
            let predict = if points.len() >= 2 {
                let a = &points[points.len() - 2];
                let b = &points[points.len() - 1];
                let f = dmu / (b.mu - a.mu);
                let lerp = |x: &[f64], y: &[f64]| -> Vec<f64> {
                    x.iter()
                        .zip(y)
                        .map(|(xa, yb)| yb + f * (yb - xa))
                        .collect()
                };
                StateTriple {
                    u1: lerp(&a.state.u1, &b.state.u1),
                    u2: lerp(&a.state.u2, &b.state.u2),
                    v: lerp(&a.state.v, &b.state.v),
                }
            } else {
                last.state.clone()
            };
            let p = self.cell_params(lambda_1, lambda_2, mu_try);
            let accepted = match solve_coexistence(self.mesh, &p, &CoexistInit::State(predict))? {
                CoexistenceOutcome::Found(s) => {
                    let bound_ok = {
                        let (x1, x2, xv) = s.state.maxs();
                        let tol = 1e-6 * (1.0 + kappa.abs().max(mu_try.abs()));
                        x1 <= kappa + tol && x2 <= kappa + tol && xv <= mu_try + tol
                    };
                    if bound_ok {
                        Some((mu_try, s.state, s.residual))
                    } else {
                        None
                    }
                }
                CoexistenceOutcome::NotFound(_) => None,
            };
            let accepted = match accepted {
                some @ Some(_) => some,
                None if fails >= 2 && points.len() >= 2 => {
                    // fixed-mu correction keeps failing: take a bordered
                    // pseudo-arclength step along the secant tangent
                    let a = &points[points.len() - 2];
                    let b = &points[points.len() - 1];
                    let ds = 0.5 * (b.arclength - a.arclength).max(step.min_step);
                    self.palc_step(lambda_1, lambda_2, &sysdata, a, b, ds, kappa)?
                }
                None => None,
            };
            match accepted {
                Some((mu_new, state, residual)) => {
                    fails = 0;
                    let (last_mu, last_arc, last_state) = {
                        let last = points.last().unwrap();
                        (last.mu, last.arclength, last.state.clone())
                    };
                    let ds = (state.sup_distance(&last_state).powi(2)
                        + (mu_new - last_mu).powi(2))
                    .sqrt();
                    let arc = last_arc + ds;
                    let mins = state.mins();
                    points.push(BranchPoint {
                        mu: mu_new,
                        state,
                        arclength: arc,
                        stability_hint: None,
                        residual,
                    });
                    if mins.2 < 100.0 * DELTA_POSITIVE && points.len() > 3 {
                        termination = BranchTermination::VanishingV;
                        break;
                    }
                    if mins.0 < 100.0 * DELTA_POSITIVE || mins.1 < 100.0 * DELTA_POSITIVE {
                        termination = BranchTermination::VanishingU;
                        break;
                    }
                    dmu = (mu_new - last_mu).signum() * dmu.abs();
                    if dmu.abs() < step.initial {
                        dmu *= 1.5;
                    }
                }
                None => {
                    fails += 1;
                    dmu *= 0.5;
                    continue;
                }
            }
            // mild step shrink approaching the far end keeps reconnection resolved
            let remaining = (mu1 - points.last().unwrap().mu).abs();
            if remaining < 4.0 * dmu.abs() {
                dmu = dir * (remaining / 4.0).max(step.min_step * 2.0);
            }
        }
        // relabel plain stalls by how the branch actually ended
        if matches!(
            termination,
            BranchTermination::StepUnderflow | BranchTermination::WindowExit
        ) {
            if let Some(last) = points.last() {
                let (m1, m2, mv) = last.state.mins();
                let u_scale = kappa.abs().max(1.0);
                if m1.min(m2) < 1e-2 * u_scale {
                    termination = BranchTermination::VanishingU;
                } else if mv < 1e-2 * last.mu.abs().max(1.0) {
                    termination = BranchTermination::VanishingV;
                }
            }
        }
        Ok(BranchOutcome::Traced(Branch {
            points,
            termination,
            mu0,
            mu1,
        }))
    }

    /// One bordered pseudo-arclength step: Newton on the system augmented
    /// with the tangent normalization, letting the growth parameter move
    /// with the state through folds.
    #[allow(clippy::too_many_arguments)]
    fn palc_step(
        &self,
        lambda_1: f64,
        lambda_2: f64,
        sysdata: &crate::system::SystemData,
        a: &BranchPoint,
        b: &BranchPoint,
        ds: f64,
        kappa: f64,
    ) -> Result<Option<(f64, StateTriple, f64)>> {
        use crate::system::{
            flatten, system_jacobian, system_mu_derivative, system_residual, unflatten,
        };
        let wa = flatten(self.mesh, sysdata, &a.state);
        let wb = flatten(self.mesh, sysdata, &b.state);
        let n = wa.len();
        let mut tw: Vec<f64> = wb.iter().zip(&wa).map(|(x, y)| x - y).collect();
        let mut tmu = b.mu - a.mu;
        let norm = (tw.iter().map(|v| v * v).sum::<f64>() + tmu * tmu).sqrt();
        if norm == 0.0 {
            return Ok(None);
        }
        for v in &mut tw {
            *v /= norm;
        }
        tmu /= norm;

        let wp: Vec<f64> = wb.iter().zip(&tw).map(|(x, t)| x + ds * t).collect();
        let mu_p = b.mu + ds * tmu;
        let mut w = wp.clone();
        let mut mu = mu_p;
        let mut p = self.cell_params(lambda_1, lambda_2, mu);
        for _ in 0..40 {
            p.mu = mu;
            let f = system_residual(self.mesh, &p, sysdata, &w);
            let r2: f64 = tw
                .iter()
                .zip(w.iter().zip(&wp))
                .map(|(t, (x, xp))| t * (x - xp))
                .sum::<f64>()
                + tmu * (mu - mu_p);
            let fn_ = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if fn_ < 1e-10 && r2.abs() < 1e-10 {
                let state = unflatten(self.mesh, sysdata, &w);
                let (m1, m2, mv) = state.mins();
                if m1 <= DELTA_POSITIVE || m2 <= DELTA_POSITIVE || mv <= DELTA_POSITIVE {
                    return Ok(None);
                }
                let (x1, x2, xv) = state.maxs();
                let tol = 1e-6 * (1.0 + kappa.abs().max(mu.abs()));
                if x1 > kappa + tol || x2 > kappa + tol || xv > mu + tol {
                    return Ok(None);
                }
                return Ok(Some((mu, state, fn_)));
            }
            let jac = system_jacobian(self.mesh, &p, sysdata, &w);
            let lu = match jac.to_band_shifted(0.0).factor() {
                Ok(lu) => lu,
                Err(_) => return Ok(None),
            };
            let fmu = system_mu_derivative(self.mesh, sysdata, &w);
            let av = lu.solve(&f);
            let bv = lu.solve(&fmu);
            let twa: f64 = tw.iter().zip(&av).map(|(t, x)| t * x).sum();
            let twb: f64 = tw.iter().zip(&bv).map(|(t, x)| t * x).sum();
            let denom = tmu - twb;
            if denom.abs() < 1e-14 {
                return Ok(None);
            }
            let dmu = (twa - r2) / denom;
            for i in 0..n {
                w[i] += -av[i] - bv[i] * dmu;
            }
            mu += dmu;
            if !mu.is_finite() {
                return Ok(None);
            }
        }
        Ok(None)
    }
}

/// Bisection to a narrow interval, then secant polish toward a vanishing
/// function value; robust first, fast after.
fn refine_root(
    f: &mut impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
) -> Result<(f64, f64)> {
    debug_assert!(flo * fhi < 0.0);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok((mid, 0.0));
        }
        if flo * fm < 0.0 {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let (mut x0, mut f0, mut x1, mut f1) = (lo, flo, hi, fhi);
    let mut best = if f0.abs() < f1.abs() { (x0, f0) } else { (x1, f1) };
    for _ in 0..30 {
        let denom = f1 - f0;
        if denom == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / denom;
        if !x2.is_finite() {
            break;
        }
        let f2 = f(x2)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if f2.abs() < best.1.abs() {
            best = (x2, f2);
        }
        if f2.abs() < 1e-10 {
            break;
        }
    }
    Ok((best.0, best.1.abs()))
}

/// Convergence study toward the limit system: coexistence states at growing
/// inner growth rates against the limit fields.
#[derive(Clone, Debug)]
pub struct LimitStudy {
    pub lambda1_values: Vec<f64>,
    pub min_u1: Vec<f64>,
    /// Sup distance between the full-system roaming field and the limit one
    /// over the outer region.
    pub v_distance: Vec<f64>,
    /// Sup of the full-system roaming field over the inner-region interior
    /// (nodes at least 0.1 from the interface; the trace layer at the
    /// membrane vanishes only in the weak limit).
    pub v_inner_sup: Vec<f64>,
    pub limit_u2: Vec<f64>,
    pub limit_v: Vec<f64>,
}

/// Coexistence state at a target inner growth, carried from a previous
/// state when available, reseeded when not, and bridged through an
/// intermediate growth when the jump is too large for either.
fn continue_in_lambda1(
    mesh: &Mesh,
    params: &ModelParams,
    prev: Option<&(f64, StateTriple)>,
    l1: f64,
    depth: usize,
) -> Result<StateTriple> {
    let mut p = params.clone();
    p.lambda1 = l1;
    if let Some((prev_l1, s)) = prev {
        // scale the inner field with the growth rate as a predictor
        let ratio = l1 / prev_l1.max(1e-9);
        let mut guess = s.clone();
        for v in &mut guess.u1 {
            *v *= ratio;
        }
        if let CoexistenceOutcome::Found(out) =
            solve_coexistence(mesh, &p, &CoexistInit::State(guess))?
        {
            return Ok(out.state);
        }
    }
    if let CoexistenceOutcome::Found(out) = solve_coexistence(mesh, &p, &CoexistInit::Auto)? {
        return Ok(out.state);
    }
    if let Some((prev_l1, _)) = prev {
        if depth < 6 {
            let mid = (prev_l1 * l1).abs().sqrt().copysign(l1);
            if mid.is_finite() && (mid - l1).abs() > 1e-6 * l1.abs().max(1.0) {
                let s_mid = continue_in_lambda1(mesh, params, prev, mid, depth + 1)?;
                return continue_in_lambda1(mesh, params, Some(&(mid, s_mid)), l1, depth + 1);
            }
        }
    }
    Err(Error::SolverFailure(format!(
        "no coexistence state at inner growth {l1}"
    )))
}

pub fn limit_convergence_study(
    mesh: &Mesh,
    params: &ModelParams,
    lambda1_values: &[f64],
    m: f64,
) -> Result<LimitStudy> {
    if lambda1_values.is_empty() || lambda1_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "growth list must be strictly increasing".into(),
        ));
    }
    let (limit_u2, limit_v) = limit_system_solve(mesh, params, m)?;
    let mut min_u1 = Vec::new();
    let mut v_distance = Vec::new();
    let mut v_inner_sup = Vec::new();
    let mut prev: Option<(f64, StateTriple)> = None;
    for &l1 in lambda1_values {
        let state = continue_in_lambda1(mesh, params, prev.as_ref(), l1, 0)?;
        min_u1.push(state.u1.iter().cloned().fold(f64::INFINITY, f64::min));
        let mut dist = 0.0f64;
        for l in 0..mesh.n2() {
            let vi = mesh.v_index_of(RegionSel::Omega2, l);
            dist = dist.max((state.v[vi] - limit_v[vi]).abs());
        }
        v_distance.push(dist);
        let mut inner = 0.0f64;
        let xs1 = mesh.coords(RegionSel::Omega1);
        for (l, x) in xs1.iter().enumerate() {
            let dist = (x - mesh.geom.a).min(mesh.geom.b - x);
            if dist >= 0.1 {
                let vi = mesh.v_index_of(RegionSel::Omega1, l);
                inner = inner.max(state.v[vi].abs());
            }
        }
        v_inner_sup.push(inner);
        prev = Some((l1, state));
    }
    Ok(LimitStudy {
        lambda1_values: lambda1_values.to_vec(),
        min_u1,
        v_distance,
        v_inner_sup,
        limit_u2,
        limit_v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, Geometry1D};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn setup(params: &ModelParams) -> (Mesh, ModelParams) {
        let mesh = build_mesh(&Geometry1D::canonical(), 64).unwrap();
        (mesh, params.clone())
    }

    #[test]
    fn interface_curve_anchors() {
        let p = ModelParams::canonical();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        // vanishes at the origin
        let h0 = ctx.curve_h(0.0).unwrap();
        assert!(h0.value.abs() < 1e-6, "H(0) = {:e}", h0.value);
        // strictly decreasing over a sample sweep
        let mut prev = f64::INFINITY;
        for k in 0..25 {
            let nu2 = -3.0 + 6.0 * k as f64 / 24.0;
            if nu2 >= ctx.sigma2 - 2.0 * EPS_BAND {
                break;
            }
            let s = ctx.curve_h(nu2).unwrap();
            assert_eq!(s.flag, SampleFlag::Ok);
            assert!(s.value < prev, "decreasing at nu2 = {nu2}");
            prev = s.value;
        }
        // far-left limit approaches the inner Robin threshold at rate
        // |r|^(-1/2) (the residual membrane coupling scales like
        // gamma_2/sqrt(|r|)), so deep probes are needed for small gaps
        let mut gap_prev = f64::INFINITY;
        for r in [-1e3, -1e5, -1e7] {
            let s = ctx.curve_h(r).unwrap();
            let gap = (s.value - ctx.sigma1).abs();
            assert!(gap < gap_prev, "gap shrinks toward the limit");
            gap_prev = gap;
        }
        assert!(gap_prev < 1e-2, "deep-probe gap {gap_prev:e}");
        // out of domain beyond the outer threshold
        assert_eq!(ctx.curve_h(ctx.sigma2).unwrap().flag, SampleFlag::OutOfDomain);
    }

    #[test]
    fn interface_curve_slope_matches_the_measure_ratio() {
        let p = ModelParams::canonical();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let g = &mesh.geom;
        let (m1, m2) = g.measures();
        let expect = -(g.gamma1 / g.gamma2) * (m2 / m1);
        let slope = ctx.curve_h_slope_at_zero().unwrap();
        assert!(
            (slope - expect).abs() / expect.abs() < 0.02,
            "slope {slope} vs {expect}"
        );
    }

    #[test]
    fn shifted_curve_matches_the_interface_curve_at_zero() {
        let mut p = ModelParams::canonical();
        p.lambda2 = -0.5;
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let g0 = ctx.curve_big_g(0.0, p.lambda2).unwrap();
        let h = ctx.curve_h(p.lambda2).unwrap();
        assert!((g0.value - h.value).abs() < 1e-8);
        // decreasing trend toward the domain threshold
        let thr = (p.lambda2 - ctx.sigma2) / p.a2;
        let near = ctx.curve_big_g(thr + 0.05, p.lambda2).unwrap();
        let nearer = ctx.curve_big_g(thr + 0.01, p.lambda2).unwrap();
        assert!(nearer.value < near.value && near.value < g0.value);
        assert_eq!(ctx.curve_big_g(thr, p.lambda2).unwrap().flag, SampleFlag::OutOfDomain);
    }

    #[test]
    fn sign_equivalence_between_eigenvalue_and_curve() {
        let p = ModelParams::benchmark();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut checked = 0;
        for _ in 0..40 {
            let l1: f64 = rng.gen_range(-3.0..4.0);
            let l2: f64 = rng.gen_range(-3.0..4.0);
            let mu: f64 = rng.gen_range(0.05..3.0);
            let lam = ctx
                .lam1(l1 - p.a1 * mu, l2 - p.a2 * mu)
                .unwrap();
            if lam.abs() < 10.0 * EPS_BAND {
                continue;
            }
            let thr = (l2 - ctx.sigma2) / p.a2;
            if mu <= thr + 10.0 * EPS_BAND {
                assert!(lam < 0.0, "below the threshold the eigenvalue is negative");
            } else {
                let gg = ctx.curve_big_g(mu, l2).unwrap();
                if (l1 - gg.value).abs() < 10.0 * EPS_BAND {
                    continue;
                }
                assert_eq!(
                    lam < 0.0,
                    l1 > gg.value,
                    "equivalence at ({l1}, {l2}, {mu})"
                );
            }
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn bifurcation_point_is_the_curve_value() {
        let p = ModelParams::benchmark();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let g = ctx.curve_g(1.0, 2.0).unwrap();
        let mu0 = ctx.mu0(1.0, 2.0).unwrap();
        assert_eq!(g.value, mu0, "same code path");
        // no competition load, no shift
        let mut p0 = p.clone();
        p0.b1 = 1e-14;
        p0.b2 = 1e-14;
        let ctx0 = CurveCtx::new(&mesh, &p0).unwrap();
        assert!(ctx0.mu0(1.0, 2.0).unwrap().abs() < 1e-7);
        // positive pair with positive couplings shifts upward
        assert!(mu0 > 0.0);
    }

    #[test]
    fn window_end_reduces_to_shift_for_equal_growth() {
        let mut p = ModelParams::canonical();
        p.a1 = 0.5;
        p.a2 = 0.5;
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let m = ctx.mu1(1.0, 1.0, 50.0).unwrap().expect("root in window");
        assert!((m.value - 2.0).abs() < 1e-6, "mu1 = {}", m.value);
    }

    #[test]
    fn bifurcation_curve_vanishes_at_the_interface_curve() {
        let mut p = ModelParams::canonical();
        p.lambda2 = -0.5; // below the outer threshold
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let h = ctx.curve_h(p.lambda2).unwrap().value;
        let g = ctx.curve_g(h + 1e-4, p.lambda2).unwrap();
        assert_eq!(g.flag, SampleFlag::Ok);
        assert!(g.value.abs() < 5e-3, "g near the curve: {}", g.value);
        // out of domain on the other side
        let oob = ctx.curve_g(h - 0.05, p.lambda2).unwrap();
        assert_eq!(oob.flag, SampleFlag::OutOfDomain);
    }

    #[test]
    fn equal_growth_threshold_curve() {
        // equal cross-competition collapses the auxiliary root to zero
        let mut p = ModelParams::canonical();
        p.a1 = 0.7;
        p.a2 = 0.7;
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        for mu in [0.3, 1.0, 2.5] {
            let (s0, ghat) = ctx.sigma0_and_ghat(mu).unwrap();
            assert!(s0.abs() < 1e-9);
            assert!((ghat - p.a2 * mu).abs() < 1e-9);
        }
        // distinct couplings: the ceiling bound and the small-mu slope
        let mut p = ModelParams::canonical();
        p.a1 = 0.4;
        p.a2 = 1.3;
        let pb = p.clone();
        let ctx = CurveCtx::new(&mesh, &pb).unwrap();
        let mut prev = 0.0;
        for mu in [0.25, 0.5, 1.0, 2.0] {
            let (_, ghat) = ctx.sigma0_and_ghat(mu).unwrap();
            assert!(ghat <= ctx.sigma2 + pb.a1.min(pb.a2) * mu + 1e-6, "ceiling bound");
            assert!(ghat > prev, "increasing");
            prev = ghat;
        }
        let g = &mesh.geom;
        let (m1, m2) = g.measures();
        let expect = (g.gamma1 * pb.a2 * m2 + g.gamma2 * pb.a1 * m1) / (g.gamma1 * m2 + g.gamma2 * m1);
        let mu = 1e-3;
        let (_, ghat) = ctx.sigma0_and_ghat(mu).unwrap();
        assert!(
            (ghat / mu - expect).abs() / expect < 0.02,
            "small-mu slope {} vs {}",
            ghat / mu,
            expect
        );
    }

    #[test]
    fn classification_examples() {
        let p = ModelParams::benchmark();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        assert_eq!(
            ctx.classify(1.0, 2.0, -0.5).unwrap(),
            Classification::NonExistenceNecessary
        );
        // inside the window
        let mu0 = ctx.mu0(1.0, 2.0).unwrap();
        let mu1 = ctx.mu1(1.0, 2.0, 50.0).unwrap().unwrap().value;
        let mid = 0.5 * (mu0 + mu1);
        assert_eq!(
            ctx.classify(1.0, 2.0, mid).unwrap(),
            Classification::CoexistencePredicted
        );
        // far beyond the exclusion bound
        assert_eq!(
            ctx.classify(1.0, 2.0, 80.0).unwrap(),
            Classification::NonExistenceLarge
        );
        // nonnegative existence eigenvalue
        assert_eq!(
            ctx.classify(-4.0, -1.0, 1.0).unwrap(),
            Classification::NonExistenceNecessary
        );
    }

    #[test]
    fn cooperative_region_with_negative_inner_growth() {
        // outer growth beyond its threshold carries the inner species
        let mut p = ModelParams::benchmark();
        p.lambda2 = 6.0;
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        assert!(ctx.sigma2 < 6.0);
        let l1 = -5.0;
        assert!(ctx.lam1(l1, 6.0).unwrap() < 0.0, "pair exists for any inner growth");
        let g = ctx.curve_g(l1, 6.0).unwrap();
        assert_eq!(g.flag, SampleFlag::Ok);
        let mu1 = ctx.mu1(l1, 6.0, 100.0).unwrap().unwrap().value;
        assert!(g.value < mu1, "nonempty window: ({}, {mu1})", g.value);
        let mid = 0.5 * (g.value + mu1);
        assert_eq!(
            ctx.classify(l1, 6.0, mid).unwrap(),
            Classification::CoexistencePredicted
        );
    }

    #[test]
    fn small_region_map_invariants() {
        let p = ModelParams::benchmark();
        let (mesh, p) = setup(&p);
        let ctx = CurveCtx::new(&mesh, &p).unwrap();
        let grid = GridSpec {
            x_range: (-1.0, 3.0),
            mu_range: (-0.5, 3.0),
            nx: 8,
            ny: 8,
        };
        let map = ctx.region_map(&grid, false, false).unwrap();
        assert_eq!(map.cells.len(), 64);
        for cell in &map.cells {
            if cell.mu <= 0.0 {
                assert_eq!(cell.class, Classification::NonExistenceNecessary);
            }
            if cell.class == Classification::NonExistenceNecessary && cell.mu > 0.0 {
                assert!(ctx.lam1(cell.lambda1, p.lambda2).unwrap() >= EPS_BAND);
            }
        }
    }
}
