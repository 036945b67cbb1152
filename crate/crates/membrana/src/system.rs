//! The full three-species stationary system, its parabolic evolution, and
//! the large-inner-growth limit system on the outer region.
//!
//! Unknowns are interleaved by coordinate (membrane species, then the
//! roaming species at the same node) so the coupled Newton matrices stay
//! banded within three diagonals.

use crate::eigen::sigma1;
use crate::error::{Error, Result};
use crate::logistic::{solve_membrane_logistic, SemitrivialOutcome};
use crate::mesh::{Mesh, RegionSel};
use crate::operator::{
    assemble_interface, assemble_scalar, whole_domain_potential, BoundarySpec, SparseOperator,
};
use crate::params::{ModelParams, DELTA_POSITIVE};

/// Discrete fields of the three species.
#[derive(Clone, Debug, PartialEq)]
pub struct StateTriple {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub v: Vec<f64>,
}

impl StateTriple {
    pub fn zeros(mesh: &Mesh) -> Self {
        StateTriple {
            u1: vec![0.0; mesh.n1()],
            u2: vec![0.0; mesh.n2()],
            v: vec![0.0; mesh.nv()],
        }
    }

    pub fn mins(&self) -> (f64, f64, f64) {
        let m = |x: &[f64]| x.iter().cloned().fold(f64::INFINITY, f64::min);
        (m(&self.u1), m(&self.u2), m(&self.v))
    }

    pub fn maxs(&self) -> (f64, f64, f64) {
        let m = |x: &[f64]| x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (m(&self.u1), m(&self.u2), m(&self.v))
    }

    /// All three components above the positivity threshold.
    pub fn is_coexistence(&self, delta: f64) -> bool {
        let (a, b, c) = self.mins();
        a > delta && b > delta && c > delta
    }

    pub fn sup_distance(&self, other: &StateTriple) -> f64 {
        let d = |x: &[f64], y: &[f64]| {
            x.iter()
                .zip(y)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        };
        d(&self.u1, &other.u1)
            .max(d(&self.u2, &other.u2))
            .max(d(&self.v, &other.v))
    }
}

#[derive(Clone, Debug)]
pub struct CoexistenceState {
    pub state: StateTriple,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NotFoundReason {
    /// `mu <= 0` or the semitrivial pair does not exist.
    NecessaryConditionFails,
    /// Newton converged but some component fell below the threshold.
    SemitrivialCollapse,
    Diverged,
}

#[derive(Clone, Debug)]
pub enum CoexistenceOutcome {
    Found(CoexistenceState),
    NotFound(NotFoundReason),
}

impl CoexistenceOutcome {
    pub fn found(&self) -> Option<&CoexistenceState> {
        match self {
            CoexistenceOutcome::Found(s) => Some(s),
            CoexistenceOutcome::NotFound(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub enum CoexistInit {
    /// Semitrivial pair with an eigenfunction-seeded third component.
    Auto,
    State(StateTriple),
}

/// Interleaved dof layout: membrane unknowns and the roaming species paired
/// by coordinate.
struct Layout {
    pos_u: Vec<usize>,
    pos_v: Vec<usize>,
    n_dof: usize,
}

fn layout(mesh: &Mesh) -> Layout {
    let mut pos_u = vec![usize::MAX; mesh.n_total()];
    let mut pos_v = vec![usize::MAX; mesh.nv()];
    let mut k = 0usize;
    for seg in &mesh.segments {
        for j in 0..=seg.n_cells {
            let gi = seg.start + j;
            pos_u[gi] = k;
            k += 1;
            let vi = mesh.u_to_v[gi];
            if pos_v[vi] == usize::MAX {
                pos_v[vi] = k;
                k += 1;
            }
        }
    }
    Layout {
        pos_u,
        pos_v,
        n_dof: k,
    }
}

/// Per-node data of the coupled system.
pub(crate) struct SystemData {
    a_mem: SparseOperator,
    a_v: SparseOperator,
    growth_u: Vec<f64>,
    quad_u: Vec<f64>,
    across: Vec<f64>,
    /// competition terms seen by the roaming species: `(u-node, coefficient)`
    comp: Vec<Vec<(usize, f64)>>,
    layout: Layout,
}

pub(crate) fn system_data(mesh: &Mesh, params: &ModelParams) -> Result<SystemData> {
    params.validate(mesh)?;
    let zero1 = vec![0.0; mesh.n1()];
    let zero2 = vec![0.0; mesh.n2()];
    let a_mem = assemble_interface(mesh, 1.0, &zero1, &zero2)?;
    let zv = vec![0.0; mesh.nv()];
    let a_v = assemble_scalar(mesh, RegionSel::Omega, 1.0, &zv, &BoundarySpec::all_neumann())?;

    let n = mesh.n_total();
    let mut growth_u = vec![0.0; n];
    let mut quad_u = vec![0.0; n];
    let mut across = vec![0.0; n];
    let alpha1 = params.alpha1_values(mesh)?;
    let alpha2 = params.alpha2_values(mesh)?;
    for l in 0..mesh.n1() {
        let g = mesh.global_index(RegionSel::Omega1, l);
        growth_u[g] = params.lambda1;
        quad_u[g] = alpha1[l];
        across[g] = params.a1;
    }
    for l in 0..mesh.n2() {
        let g = mesh.global_index(RegionSel::Omega2, l);
        growth_u[g] = params.lambda2;
        quad_u[g] = alpha2[l];
        across[g] = params.a2;
    }

    let mut comp: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mesh.nv()];
    for gi in 0..n {
        let vi = mesh.u_to_v[gi];
        let b = match mesh.region[gi] {
            crate::mesh::Region::Omega1 => params.b1,
            crate::mesh::Region::Omega2 => params.b2,
        };
        let w = if vi == mesh.v_at_a || vi == mesh.v_at_b {
            0.5
        } else {
            1.0
        };
        comp[vi].push((gi, b * w));
    }

    Ok(SystemData {
        a_mem,
        a_v,
        growth_u,
        quad_u,
        across,
        comp,
        layout: layout(mesh),
    })
}

pub(crate) fn flatten(mesh: &Mesh, data: &SystemData, s: &StateTriple) -> Vec<f64> {
    let mut w = vec![0.0; data.layout.n_dof];
    for l in 0..mesh.n1() {
        w[data.layout.pos_u[mesh.global_index(RegionSel::Omega1, l)]] = s.u1[l];
    }
    for l in 0..mesh.n2() {
        w[data.layout.pos_u[mesh.global_index(RegionSel::Omega2, l)]] = s.u2[l];
    }
    for (vi, &val) in s.v.iter().enumerate() {
        w[data.layout.pos_v[vi]] = val;
    }
    w
}

pub(crate) fn unflatten(mesh: &Mesh, data: &SystemData, w: &[f64]) -> StateTriple {
    let u1 = (0..mesh.n1())
        .map(|l| w[data.layout.pos_u[mesh.global_index(RegionSel::Omega1, l)]])
        .collect();
    let u2 = (0..mesh.n2())
        .map(|l| w[data.layout.pos_u[mesh.global_index(RegionSel::Omega2, l)]])
        .collect();
    let v = (0..mesh.nv()).map(|vi| w[data.layout.pos_v[vi]]).collect();
    StateTriple { u1, u2, v }
}

fn split_fields(mesh: &Mesh, data: &SystemData, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let u: Vec<f64> = (0..mesh.n_total())
        .map(|gi| w[data.layout.pos_u[gi]])
        .collect();
    let v: Vec<f64> = (0..mesh.nv()).map(|vi| w[data.layout.pos_v[vi]]).collect();
    (u, v)
}

pub(crate) fn system_residual(mesh: &Mesh, params: &ModelParams, data: &SystemData, w: &[f64]) -> Vec<f64> {
    let (u, v) = split_fields(mesh, data, w);
    let au = data.a_mem.apply(&u).expect("dims fixed");
    let av = data.a_v.apply(&v).expect("dims fixed");
    let mut f = vec![0.0; data.layout.n_dof];
    for gi in 0..mesh.n_total() {
        let vv = v[mesh.u_to_v[gi]];
        f[data.layout.pos_u[gi]] = au[gi]
            + u[gi] * (-data.growth_u[gi] + data.quad_u[gi] * u[gi] + data.across[gi] * vv);
    }
    for vi in 0..mesh.nv() {
        let mut compete = 0.0;
        for &(gi, c) in &data.comp[vi] {
            compete += c * u[gi];
        }
        f[data.layout.pos_v[vi]] =
            av[vi] + v[vi] * (-params.mu + params.beta * v[vi] + compete);
    }
    f
}

pub(crate) fn system_jacobian(
    mesh: &Mesh,
    params: &ModelParams,
    data: &SystemData,
    w: &[f64],
) -> SparseOperator {
    let (u, v) = split_fields(mesh, data, w);
    let mut jac = SparseOperator::new(data.layout.n_dof);
    for gi in 0..mesh.n_total() {
        let row = data.layout.pos_u[gi];
        for &(j, val) in data.a_mem.row(gi) {
            jac.add(row, data.layout.pos_u[j], val);
        }
        let vv = v[mesh.u_to_v[gi]];
        jac.add(
            row,
            row,
            -data.growth_u[gi] + 2.0 * data.quad_u[gi] * u[gi] + data.across[gi] * vv,
        );
        jac.add(
            row,
            data.layout.pos_v[mesh.u_to_v[gi]],
            data.across[gi] * u[gi],
        );
    }
    for vi in 0..mesh.nv() {
        let row = data.layout.pos_v[vi];
        for &(j, val) in data.a_v.row(vi) {
            jac.add(row, data.layout.pos_v[j], val);
        }
        let mut compete = 0.0;
        for &(gi, c) in &data.comp[vi] {
            compete += c * u[gi];
            jac.add(row, data.layout.pos_u[gi], c * v[vi]);
        }
        jac.add(row, row, -params.mu + 2.0 * params.beta * v[vi] + compete);
    }
    jac
}

/// Derivative of the residual in the roaming growth rate: `-v` on the
/// roaming rows, zero elsewhere.
pub(crate) fn system_mu_derivative(mesh: &Mesh, data: &SystemData, w: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0; data.layout.n_dof];
    for vi in 0..mesh.nv() {
        let row = data.layout.pos_v[vi];
        d[row] = -w[row];
    }
    d
}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Damped Newton on the full stationary system.
///
/// With `CoexistInit::Auto`, starts from the semitrivial pair with the
/// third component seeded along the eigenfunction of its linearized
/// instability mode at amplitude `0.05 mu`. If that seed falls back onto the
/// semitrivial manifold, the seed is evolved in time (the unstable mode
/// grows on its own) and Newton restarts from the evolved state.
pub fn solve_coexistence(
    mesh: &Mesh,
    params: &ModelParams,
    init: &CoexistInit,
) -> Result<CoexistenceOutcome> {
    let data = system_data(mesh, params)?;
    let start = match init {
        CoexistInit::State(s) => s.clone(),
        CoexistInit::Auto => {
            if params.mu <= 0.0 {
                return Ok(CoexistenceOutcome::NotFound(
                    NotFoundReason::NecessaryConditionFails,
                ));
            }
            match solve_membrane_logistic(
                mesh,
                params.lambda1,
                params.lambda2,
                &params.alpha1,
                &params.alpha2,
            )? {
                SemitrivialOutcome::Positive(pair) => {
                    let on1: Vec<f64> = pair.theta1.iter().map(|t| params.b1 * t).collect();
                    let on2: Vec<f64> = pair.theta2.iter().map(|t| params.b2 * t).collect();
                    let pot = whole_domain_potential(mesh, &on1, &on2);
                    let eig = sigma1(mesh, RegionSel::Omega, 1.0, &pot, &BoundarySpec::all_neumann())?;
                    let eps = 0.05 * params.mu;
                    StateTriple {
                        u1: pair.theta1,
                        u2: pair.theta2,
                        v: eig.eigenfunction.iter().map(|p| eps * p).collect(),
                    }
                }
                _ => {
                    return Ok(CoexistenceOutcome::NotFound(
                        NotFoundReason::NecessaryConditionFails,
                    ))
                }
            }
        }
    };

    let first = newton_on_system(mesh, params, &data, &start)?;
    if matches!(first, CoexistenceOutcome::Found(_)) || matches!(init, CoexistInit::State(_)) {
        return Ok(first);
    }
    // let the dynamics carry the seed off the semitrivial manifold
    let h_min = mesh
        .segments
        .iter()
        .map(|s| s.h)
        .fold(f64::INFINITY, f64::min);
    let mut state = start;
    let mut last = first;
    for _ in 0..8 {
        let evolved = match evolve_parabolic(mesh, params, &state, 10.0, h_min) {
            Ok(s) => s,
            Err(_) => return Ok(last),
        };
        let moved = evolved.sup_distance(&state);
        state = evolved;
        last = newton_on_system(mesh, params, &data, &state)?;
        if matches!(last, CoexistenceOutcome::Found(_)) || moved < 1e-9 {
            return Ok(last);
        }
    }
    Ok(last)
}

fn newton_on_system(
    mesh: &Mesh,
    params: &ModelParams,
    data: &SystemData,
    start: &StateTriple,
) -> Result<CoexistenceOutcome> {
    let mut w = flatten(mesh, data, start);
    let scale = data.a_mem.inf_norm().max(data.a_v.inf_norm());
    let amplitude = w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    // the achievable residual floor grows with the operator norm times the
    // solution amplitude; 1e-9 is the contract at order-one amplitudes
    let tol = (8.0 * f64::EPSILON * scale * amplitude).max(1e-13);
    let accept = 1e-9f64.max(64.0 * f64::EPSILON * scale * amplitude);
    let mut f = system_residual(mesh, params, data, &w);
    let mut rnorm = sup(&f);
    let mut iterations = 0usize;
    for it in 1..=60 {
        iterations = it;
        if rnorm <= tol {
            break;
        }
        let jac = system_jacobian(mesh, params, data, &w);
        let lu = match jac.to_band_shifted(0.0).factor() {
            Ok(lu) => lu,
            Err(_) => return Ok(CoexistenceOutcome::NotFound(NotFoundReason::Diverged)),
        };
        let delta = lu.solve(&f);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, b)| a - t * b).collect();
            let tf = system_residual(mesh, params, data, &trial);
            let tn = sup(&tf);
            if tn.is_finite() && tn < rnorm {
                w = trial;
                f = tf;
                rnorm = tn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || !rnorm.is_finite() || rnorm > 1e10 {
            return Ok(CoexistenceOutcome::NotFound(NotFoundReason::Diverged));
        }
    }
    if rnorm > accept {
        return Ok(CoexistenceOutcome::NotFound(NotFoundReason::Diverged));
    }
    let state = unflatten(mesh, data, &w);
    if !state.is_coexistence(DELTA_POSITIVE) {
        return Ok(CoexistenceOutcome::NotFound(NotFoundReason::SemitrivialCollapse));
    }
    // a priori ceilings must hold for an accepted state
    let kappa = params.kappa();
    let (m1, m2, mv) = state.maxs();
    let tol_b = 1e-6 * (1.0 + kappa.abs().max(params.mu.abs()));
    if m1 > kappa + tol_b || m2 > kappa + tol_b || mv > params.mu + tol_b {
        return Ok(CoexistenceOutcome::NotFound(NotFoundReason::Diverged));
    }
    Ok(CoexistenceOutcome::Found(CoexistenceState {
        state,
        residual: rnorm,
        iterations,
    }))
}

/// Implicit-diffusion, explicit-reaction time stepping.
///
/// The step is capped so the explicit reaction factor stays nonnegative;
/// combined with the M-matrix diffusion solve this preserves nonnegativity.
/// Blow-up beyond ten times the a priori ceilings aborts.
pub fn evolve_parabolic(
    mesh: &Mesh,
    params: &ModelParams,
    init: &StateTriple,
    t_end: f64,
    dt: f64,
) -> Result<StateTriple> {
    if !(t_end > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidConfig("t_end and dt must be positive".into()));
    }
    let data = system_data(mesh, params)?;
    let (i1, i2, iv) = init.mins();
    if i1 < 0.0 || i2 < 0.0 || iv < 0.0 {
        return Err(Error::InvalidConfig("initial data must be nonnegative".into()));
    }
    let thr_u = 10.0 * params.kappa().max(1.0);
    let thr_v = 10.0 * params.mu.max(1.0);
    let h_min = mesh
        .segments
        .iter()
        .map(|s| s.h)
        .fold(f64::INFINITY, f64::min);
    let dt_eff = dt.min(h_min);
    let steps = (t_end / dt_eff).ceil() as usize;
    let dt_eff = t_end / steps as f64;

    let n = mesh.n_total();
    let lu_u = data
        .a_mem
        .to_band_with_diag(&vec![1.0 / dt_eff; n])
        .factor()?;
    let lu_v = data
        .a_v
        .to_band_with_diag(&vec![1.0 / dt_eff; mesh.nv()])
        .factor()?;

    let mut w = flatten(mesh, &data, init);
    let (mut u, mut v) = split_fields(mesh, &data, &w);
    for _ in 0..steps {
        // the explicit reaction factor is floored at zero: nonnegativity is
        // then preserved for any step, stiff competition walls included
        let mut rhs_u = vec![0.0; n];
        for gi in 0..n {
            let vv = v[mesh.u_to_v[gi]];
            let f = data.growth_u[gi] - data.quad_u[gi] * u[gi] - data.across[gi] * vv;
            rhs_u[gi] = (u[gi] * (1.0 / dt_eff + f)).max(0.0);
        }
        let mut rhs_v = vec![0.0; mesh.nv()];
        for vi in 0..mesh.nv() {
            let mut compete = 0.0;
            for &(gi, c) in &data.comp[vi] {
                compete += c * u[gi];
            }
            let f = params.mu - params.beta * v[vi] - compete;
            rhs_v[vi] = (v[vi] * (1.0 / dt_eff + f)).max(0.0);
        }
        u = lu_u.solve(&rhs_u);
        v = lu_v.solve(&rhs_v);
        let umax = u.iter().cloned().fold(0.0f64, f64::max);
        let vmax = v.iter().cloned().fold(0.0f64, f64::max);
        if !(umax.is_finite() && vmax.is_finite()) || umax > thr_u || vmax > thr_v {
            return Err(Error::SolverFailure(format!(
                "evolution blow-up: max u {umax:.3e}, max v {vmax:.3e}"
            )));
        }
    }
    for (gi, &val) in u.iter().enumerate() {
        w[data.layout.pos_u[gi]] = val;
    }
    for (vi, &val) in v.iter().enumerate() {
        w[data.layout.pos_v[vi]] = val;
    }
    Ok(unflatten(mesh, &data, &w))
}

/// Two-species limit system on the outer region: blow-up Dirichlet datum for
/// the outer competitor at the interface, absorbing condition for the
/// roaming species there, Neumann outside.
///
/// Returns the outer field and the roaming field extended by zero across the
/// interface and the inner region.
pub fn limit_system_solve(
    mesh: &Mesh,
    params: &ModelParams,
    m: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(m > 0.0) {
        return Err(Error::InvalidConfig("Dirichlet datum M must be positive".into()));
    }
    if params.mu < 0.0 {
        return Err(Error::InvalidConfig("limit system expects mu >= 0".into()));
    }
    params.validate(mesh)?;
    let n2 = mesh.n2();
    let alpha2 = params.alpha2_values(mesh)?;
    let zero2 = vec![0.0; n2];
    let a_u = assemble_scalar(
        mesh,
        RegionSel::Omega2,
        1.0,
        &zero2,
        &BoundarySpec::dirichlet_sigma(m),
    )?;
    let a_w = assemble_scalar(
        mesh,
        RegionSel::Omega2,
        1.0,
        &zero2,
        &BoundarySpec::dirichlet_sigma(0.0),
    )?;

    let nl = mesh.segments[0].n_nodes();
    let mut u_out = vec![0.0; n2];
    let mut w_out = vec![0.0; n2];
    for keep in [(0..nl).collect::<Vec<_>>(), (nl..n2).collect()] {
        let su = a_u.restrict(&keep);
        let sw = a_w.restrict(&keep);
        let nk = keep.len();
        let alpha: Vec<f64> = keep.iter().map(|&i| alpha2[i]).collect();

        // init: decoupled blow-up logistic, then the roaming logistic on top
        let mut problem = crate::logistic::ReactionProblem {
            a: &su,
            growth: vec![params.lambda2; nk],
            quad: alpha.clone(),
            rhs: vec![0.0; nk],
        };
        problem.mask_dirichlet();
        let ceiling = m.max(params.lambda2 / alpha.iter().cloned().fold(f64::INFINITY, f64::min))
            .max(1.0);
        let (u_init, _) =
            crate::logistic::solve_bracketed(&problem, &vec![0.0; nk], &vec![ceiling; nk])?;

        let is_dir: Vec<bool> = {
            let mut d = vec![false; nk];
            for &(i, _) in &su.dirichlet {
                d[i] = true;
            }
            d
        };
        let is_dir_w: Vec<bool> = {
            let mut d = vec![false; nk];
            for &(i, _) in &sw.dirichlet {
                d[i] = true;
            }
            d
        };

        let mut rhs_u = vec![0.0; nk];
        for &(i, val) in &su.dirichlet {
            rhs_u[i] = val;
        }

        // coupled damped Newton on (u, w)
        let mut u = u_init;
        let mut w = vec![0.0; nk];
        {
            // seed w from the logistic under the frozen outer field
            let c: Vec<f64> = u.iter().map(|x| params.b2 * x).collect();
            let mut aw_c = sw.clone();
            for (i, &ci) in c.iter().enumerate() {
                if !is_dir_w[i] {
                    aw_c.add(i, i, ci);
                }
            }
            let mut wp = crate::logistic::ReactionProblem {
                a: &aw_c,
                growth: vec![params.mu; nk],
                quad: vec![params.beta; nk],
                rhs: vec![0.0; nk],
            };
            wp.mask_dirichlet();
            let neg: Vec<f64> = wp.growth.iter().map(|g| -g).collect();
            let gate = crate::eigen::principal_eigenpair(
                &aw_c.plus_diag(&neg),
                &crate::eigen::EigenOptions::default(),
            )?;
            if gate.value < 0.0 {
                let ceiling_w = params.mu / params.beta + 1.0;
                let eps = 0.5 * (-gate.value) / params.beta;
                let sub: Vec<f64> = gate.eigenfunction.iter().map(|p| eps * p).collect();
                let (w0, _) =
                    crate::logistic::solve_bracketed(&wp, &sub, &vec![ceiling_w; nk])?;
                w = w0;
            }
        }

        let residual = |u: &[f64], w: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mut fu = su.apply(u).expect("dims");
            let mut fw = sw.apply(w).expect("dims");
            for i in 0..nk {
                if is_dir[i] {
                    fu[i] -= rhs_u[i];
                } else {
                    fu[i] += u[i] * (-params.lambda2 + alpha[i] * u[i] + params.a2 * w[i]);
                }
                if !is_dir_w[i] {
                    fw[i] += w[i] * (-params.mu + params.beta * w[i] + params.b2 * u[i]);
                }
            }
            (fu, fw)
        };

        let (mut fu, mut fw) = residual(&u, &w);
        let mut rnorm = sup(&fu).max(sup(&fw));
        let floor = 8.0 * f64::EPSILON * su.inf_norm() * m;
        for _ in 0..80 {
            if rnorm < 1e-10f64.max(floor) {
                break;
            }
            // interleaved Jacobian
            let mut jac = SparseOperator::new(2 * nk);
            for i in 0..nk {
                for &(j, val) in su.row(i) {
                    jac.add(2 * i, 2 * j, val);
                }
                for &(j, val) in sw.row(i) {
                    jac.add(2 * i + 1, 2 * j + 1, val);
                }
                if !is_dir[i] {
                    jac.add(2 * i, 2 * i, -params.lambda2 + 2.0 * alpha[i] * u[i] + params.a2 * w[i]);
                    jac.add(2 * i, 2 * i + 1, params.a2 * u[i]);
                }
                if !is_dir_w[i] {
                    jac.add(2 * i + 1, 2 * i + 1, -params.mu + 2.0 * params.beta * w[i] + params.b2 * u[i]);
                    jac.add(2 * i + 1, 2 * i, params.b2 * w[i]);
                }
            }
            let lu = jac.to_band_shifted(0.0).factor()?;
            let mut f = vec![0.0; 2 * nk];
            for i in 0..nk {
                f[2 * i] = fu[i];
                f[2 * i + 1] = fw[i];
            }
            let delta = lu.solve(&f);
            let mut t = 1.0;
            let mut ok = false;
            for _ in 0..30 {
                let ut: Vec<f64> = (0..nk).map(|i| u[i] - t * delta[2 * i]).collect();
                let wt: Vec<f64> = (0..nk).map(|i| w[i] - t * delta[2 * i + 1]).collect();
                let (fut, fwt) = residual(&ut, &wt);
                let rn = sup(&fut).max(sup(&fwt));
                if rn.is_finite() && rn < rnorm {
                    u = ut;
                    w = wt;
                    fu = fut;
                    fw = fwt;
                    rnorm = rn;
                    ok = true;
                    break;
                }
                t *= 0.5;
            }
            if !ok {
                break;
            }
        }
        if rnorm > 1e-7 * m.max(1.0) {
            return Err(Error::NonConvergence {
                what: "limit system Newton",
                iterations: 80,
                residual: rnorm,
            });
        }
        for (k, &g) in keep.iter().enumerate() {
            u_out[g] = u[k];
            w_out[g] = w[k].max(0.0);
        }
    }

    // extend the roaming field by zero over the inner region
    let mut v_full = vec![0.0; mesh.nv()];
    for l in 0..n2 {
        let vi = mesh.v_index_of(RegionSel::Omega2, l);
        if vi != mesh.v_at_a && vi != mesh.v_at_b {
            v_full[vi] = w_out[l];
        }
    }
    Ok((u_out, v_full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::LogisticOutcome;
    use crate::mesh::{build_mesh, Geometry1D};
    use crate::params::ConstOrField;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mesh64() -> Mesh {
        build_mesh(&Geometry1D::canonical(), 64).unwrap()
    }

    fn canonical_params() -> ModelParams {
        ModelParams::canonical()
    }

    #[test]
    fn decoupled_system_recovers_semitrivial_plus_constant() {
        let mesh = mesh64();
        let mut p = canonical_params();
        p.a1 = 1e-14;
        p.a2 = 1e-14;
        p.b1 = 1e-14;
        p.b2 = 1e-14;
        p.mu = 2.0;
        let one = ConstOrField::Const(1.0);
        let pair = solve_membrane_logistic(&mesh, p.lambda1, p.lambda2, &one, &one)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        let init = CoexistInit::State(StateTriple {
            u1: pair.theta1.clone(),
            u2: pair.theta2.clone(),
            v: vec![2.0; mesh.nv()],
        });
        let out = solve_coexistence(&mesh, &p, &init).unwrap();
        let found = out.found().expect("decoupled solution");
        for (t, u) in pair.theta1.iter().zip(&found.state.u1) {
            assert!((t - u).abs() < 1e-7);
        }
        for v in &found.state.v {
            assert!((v - 2.0).abs() < 1e-8, "constant third species");
        }
    }

    #[test]
    fn negative_mu_has_no_coexistence() {
        let mesh = mesh64();
        let p = canonical_params().with_mu(-0.5);
        let out = solve_coexistence(&mesh, &p, &CoexistInit::Auto).unwrap();
        assert!(matches!(
            out,
            CoexistenceOutcome::NotFound(NotFoundReason::NecessaryConditionFails)
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mesh = build_mesh(&Geometry1D::canonical(), 16).unwrap();
        let p = canonical_params().with_mu(0.8);
        let data = system_data(&mesh, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w0: Vec<f64> = (0..data.layout.n_dof)
            .map(|_| rng.gen_range(0.2..1.0))
            .collect();
        let jac = system_jacobian(&mesh, &p, &data, &w0);
        let h = 1e-6;
        for col in (0..w0.len()).step_by(7) {
            let mut wp = w0.clone();
            wp[col] += h;
            let mut wm = w0.clone();
            wm[col] -= h;
            let fp = system_residual(&mesh, &p, &data, &wp);
            let fm = system_residual(&mesh, &p, &data, &wm);
            for row in 0..w0.len() {
                let fd = (fp[row] - fm[row]) / (2.0 * h);
                let an = jac
                    .row(row)
                    .iter()
                    .find(|&&(c, _)| c == col)
                    .map(|&(_, v)| v)
                    .unwrap_or(0.0);
                let scale = an.abs().max(fd.abs()).max(1.0);
                assert!(
                    (fd - an).abs() / scale < 1e-6,
                    "J({row},{col}): fd {fd} vs analytic {an}"
                );
            }
        }
    }

    #[test]
    fn stationary_state_is_a_fixed_point_of_the_evolution() {
        let mesh = mesh64();
        let p = ModelParams::benchmark(); // mu = 2 sits inside the window
        let out = solve_coexistence(&mesh, &p, &CoexistInit::Auto).unwrap();
        let found = out.found().expect("coexistence in the window");
        let evolved = evolve_parabolic(&mesh, &p, &found.state, 1.0, 1e-2).unwrap();
        assert!(
            evolved.sup_distance(&found.state) < 1e-8,
            "drift {}",
            evolved.sup_distance(&found.state)
        );
    }

    #[test]
    fn evolution_preserves_nonnegativity_and_bounds() {
        let mesh = mesh64();
        let p = canonical_params().with_mu(0.9);
        let init = StateTriple {
            u1: vec![0.3; mesh.n1()],
            u2: vec![0.2; mesh.n2()],
            v: vec![0.1; mesh.nv()],
        };
        let s = evolve_parabolic(&mesh, &p, &init, 5.0, 0.01).unwrap();
        let (a, b, c) = s.mins();
        assert!(a >= 0.0 && b >= 0.0 && c >= 0.0);
    }

    #[test]
    fn limit_system_decouples_when_couplings_vanish() {
        let mesh = mesh64();
        let mut p = canonical_params();
        p.lambda2 = 1.0;
        p.mu = 1.5;
        p.a2 = 1e-14;
        p.b2 = 1e-14;
        let m = 1e3;
        let (u2, v) = limit_system_solve(&mesh, &p, m).unwrap();
        // outer field matches the blow-up logistic alone
        let alpha = ConstOrField::Const(1.0);
        let big = crate::logistic::approximate_large_solution(&mesh, p.lambda2, &alpha, &[m])
            .unwrap();
        for (a, b) in u2.iter().zip(&big.field) {
            assert!((a - b).abs() < 1e-6 * m);
        }
        // roaming field is zero on the inner region by construction
        for l in 0..mesh.n1() {
            let vi = mesh.v_index_of(RegionSel::Omega1, l);
            assert_eq!(v[vi], 0.0);
        }
        // and solves its own mixed logistic away from the interface
        if let LogisticOutcome::Positive(_) = crate::logistic::solve_logistic_scalar(
            &mesh,
            RegionSel::Omega2,
            p.mu,
            &vec![0.0; mesh.n2()],
            p.beta,
            &BoundarySpec::dirichlet_sigma(0.0),
        )
        .unwrap()
        {
            let mid = mesh.segments[0].n_nodes() / 2;
            let vi = mesh.v_index_of(RegionSel::Omega2, mid);
            assert!(v[vi] > 0.0);
        }
    }
}

#[cfg(test)]
mod instability_tests {
    use super::*;
    use crate::logistic::solve_membrane_logistic;
    use crate::mesh::{build_mesh, Geometry1D};

    #[test]
    fn coexistence_state_sits_below_the_membrane_pair() {
        // with the roaming competitor present, the membrane species are a
        // sub-solution of their own decoupled pair
        let mesh = build_mesh(&Geometry1D::canonical(), 64).unwrap();
        let p = ModelParams::benchmark();
        let found = solve_coexistence(&mesh, &p, &CoexistInit::Auto)
            .unwrap()
            .found()
            .cloned()
            .expect("coexistence in the window");
        let pair = solve_membrane_logistic(&mesh, p.lambda1, p.lambda2, &p.alpha1, &p.alpha2)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        for (u, t) in found.state.u1.iter().zip(&pair.theta1) {
            assert!(u <= &(t + 1e-8));
        }
        for (u, t) in found.state.u2.iter().zip(&pair.theta2) {
            assert!(u <= &(t + 1e-8));
        }
    }

    #[test]
    fn seeded_semitrivial_state_is_unstable_inside_the_window() {
        let mesh = build_mesh(&Geometry1D::canonical(), 64).unwrap();
        let p = ModelParams::benchmark(); // mu = 2 between the window ends
        let pair = solve_membrane_logistic(&mesh, p.lambda1, p.lambda2, &p.alpha1, &p.alpha2)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        let eps = 0.01;
        let init = StateTriple {
            u1: pair.theta1,
            u2: pair.theta2,
            v: vec![eps; mesh.nv()],
        };
        let later = evolve_parabolic(&mesh, &p, &init, 10.0, 1e-2).unwrap();
        let grown = later.v.iter().cloned().fold(0.0f64, f64::max);
        assert!(grown > 5.0 * eps, "third component grows away from zero: {grown}");
    }
}
