//! Stationary logistic-type problems: scalar logistics, the uncoupled Robin
//! logistics on each region, the membrane-coupled logistic pair, and the
//! boundary blow-up approximation.
//!
//! Every solve brackets the positive solution between a sub-solution built
//! from the principal eigenpair and a constant super-solution before Newton
//! polishing. The bracket is what guarantees convergence to the *positive*
//! solution rather than a sign-changing one.

use crate::eigen::{lambda1_const, principal_eigenpair, sigma1, EigenOptions, EigenResult};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, RegionSel};
use crate::operator::{assemble_interface, assemble_scalar, BoundarySpec, SparseOperator};
use crate::params::{ConstOrField, EPS_BAND};

/// Outcome of a scalar logistic solve.
#[derive(Clone, Debug)]
pub enum LogisticOutcome {
    /// Maximal nonnegative solution; strictly positive on every component
    /// whose growth exceeds the component's principal eigenvalue.
    Positive(Vec<f64>),
    NoPositiveSolution,
}

impl LogisticOutcome {
    pub fn field(&self) -> Option<&Vec<f64>> {
        match self {
            LogisticOutcome::Positive(f) => Some(f),
            LogisticOutcome::NoPositiveSolution => None,
        }
    }
}

/// Outcome of the membrane logistic pair.
#[derive(Clone, Debug)]
pub enum SemitrivialOutcome {
    Positive(SemitrivialPair),
    NoPositiveSolution,
    /// The existence eigenvalue sits inside the classification band; the
    /// discretization cannot call the sign.
    Indeterminate,
}

impl SemitrivialOutcome {
    pub fn pair(&self) -> Option<&SemitrivialPair> {
        match self {
            SemitrivialOutcome::Positive(p) => Some(p),
            _ => None,
        }
    }
}

/// Positive solution pair of the membrane logistic.
#[derive(Clone, Debug)]
pub struct SemitrivialPair {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    /// Existence eigenvalue `Lambda_1(-lambda_1, -lambda_2)` (negative).
    pub existence_eigenvalue: f64,
    pub residual: f64,
}

/// Interior description of a diagonal-reaction problem
/// `A u - growth ⊙ u + quad ⊙ u^2 - rhs = 0`, with `rhs` carrying Dirichlet
/// values on the operator's identity rows.
pub(crate) struct ReactionProblem<'a> {
    pub a: &'a SparseOperator,
    pub growth: Vec<f64>,
    pub quad: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl ReactionProblem<'_> {
    pub(crate) fn mask_dirichlet(&mut self) {
        for &(i, v) in &self.a.dirichlet {
            self.growth[i] = 0.0;
            self.quad[i] = 0.0;
            self.rhs[i] = v;
        }
    }

    fn residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a.apply(u)?;
        for i in 0..u.len() {
            r[i] += -self.growth[i] * u[i] + self.quad[i] * u[i] * u[i] - self.rhs[i];
        }
        Ok(r)
    }

}

fn sup(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Monotone bracket iteration followed by damped Newton.
///
/// `sub <= sup` must hold nodewise with `F(sub) <= 0 <= F(sup)` row-wise;
/// both iterates then converge monotonically toward the unique positive
/// solution in between, and Newton finishes from the midpoint.
pub(crate) fn solve_bracketed(
    problem: &ReactionProblem<'_>,
    sub: &[f64],
    sup_start: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let n = problem.a.dim();
    let cap = sup(sup_start);
    // shift making the frozen-reaction map monotone on [0, cap]
    let mut shift = 1.0 - problem.a.min_row_sum();
    for i in 0..n {
        shift = shift.max(2.0 * problem.quad[i] * cap - problem.growth[i] + 1.0);
    }
    let lu = problem
        .a
        .to_band_with_diag(&vec![shift; n])
        .factor()?;
    let step = |u: &[f64]| -> Vec<f64> {
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            rhs[i] = (shift + problem.growth[i]) * u[i] - problem.quad[i] * u[i] * u[i]
                + problem.rhs[i];
        }
        lu.solve(&rhs)
    };

    let mut lo = sub.to_vec();
    let mut hi = sup_start.to_vec();
    for _ in 0..100 {
        lo = step(&lo);
        hi = step(&hi);
        let gap = lo
            .iter()
            .zip(&hi)
            .fold(0.0f64, |m, (a, b)| m.max((b - a).abs()));
        if gap < (1e-3 * cap).max(1e-15) {
            break;
        }
    }

    // Newton from the midpoint; the target is the rounding floor of the
    // residual, which scales with the operator norm times the amplitude
    let mut u: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let amplitude = sup(sup_start).max(1e-12);
    let scale = problem.a.inf_norm() * amplitude;
    let tol = (8.0 * f64::EPSILON * scale).max(1e-15);
    let mut res = problem.residual(&u)?;
    let mut rnorm = sup(&res);
    for _ in 0..80 {
        if rnorm <= tol {
            break;
        }
        let jac_diag: Vec<f64> = (0..n)
            .map(|i| -problem.growth[i] + 2.0 * problem.quad[i] * u[i])
            .collect();
        let jlu = problem.a.to_band_with_diag(&jac_diag).factor()?;
        let delta = jlu.solve(&res);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a - t * b).collect();
            let tres = problem.residual(&trial)?;
            let tnorm = sup(&tres);
            if tnorm < rnorm {
                u = trial;
                res = tres;
                rnorm = tnorm;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if rnorm > (1e-8 * scale).max(1e-12) {
        return Err(Error::NonConvergence {
            what: "bracketed logistic Newton",
            iterations: 80,
            residual: rnorm,
        });
    }
    Ok((u, rnorm))
}

/// Logistic solve on one connected component given the assembled operator.
///
/// Returns `None` when the growth does not exceed the principal eigenvalue
/// (only the trivial solution exists there).
fn solve_component(
    a: &SparseOperator,
    growth: &[f64],
    quad: &[f64],
    eig: Option<&EigenResult>,
) -> Result<Option<(Vec<f64>, f64)>> {
    let n = a.dim();
    let mut problem = ReactionProblem {
        a,
        growth: growth.to_vec(),
        quad: quad.to_vec(),
        rhs: vec![0.0; n],
    };
    problem.mask_dirichlet();

    let owned;
    let pair = match eig {
        Some(e) => e,
        None => {
            let neg: Vec<f64> = problem.growth.iter().map(|g| -g).collect();
            let shifted = a.plus_diag(&neg);
            owned = principal_eigenpair(&shifted, &EigenOptions::default())?;
            &owned
        }
    };
    // at the threshold the only nonnegative solution is zero
    if pair.value >= -1e-10 {
        return Ok(None);
    }

    let qmax = problem.quad.iter().cloned().fold(0.0f64, f64::max);
    let eps = 0.5 * (-pair.value) / qmax.max(1e-300);
    let sub: Vec<f64> = pair.eigenfunction.iter().map(|v| eps * v).collect();
    let mut ceiling = 0.0f64;
    for i in 0..n {
        if problem.quad[i] > 0.0 {
            ceiling = ceiling.max((problem.growth[i] - a.row_sum(i)) / problem.quad[i]);
        }
    }
    let ceiling = ceiling.max(sup(&sub));
    let sup_start = vec![ceiling; n];
    let (u, r) = solve_bracketed(&problem, &sub, &sup_start)?;
    Ok(Some((u, r)))
}

fn component_keeps(mesh: &Mesh, region: RegionSel) -> Vec<Vec<usize>> {
    match region {
        RegionSel::Omega2 => {
            let nl = mesh.segments[0].n_nodes();
            vec![(0..nl).collect(), (nl..mesh.n2()).collect()]
        }
        _ => vec![(0..mesh.field_len(region)).collect()],
    }
}

/// Unique positive solution of the scalar logistic on `region`, or
/// `NoPositiveSolution` when the growth rate does not exceed the principal
/// eigenvalue. Disconnected regions are solved per component and assembled
/// as the maximal nonnegative solution.
pub fn solve_logistic_scalar(
    mesh: &Mesh,
    region: RegionSel,
    mu: f64,
    c: &[f64],
    beta: f64,
    bc: &BoundarySpec,
) -> Result<LogisticOutcome> {
    if !(beta > 0.0) {
        return Err(Error::InvalidConfig("beta must be positive".into()));
    }
    let a = assemble_scalar(mesh, region, 1.0, c, bc)?;
    let mut field = vec![0.0; a.dim()];
    let mut any = false;
    for keep in component_keeps(mesh, region) {
        let sub = a.restrict(&keep);
        let growth = vec![mu; keep.len()];
        let quad = vec![beta; keep.len()];
        if let Some((u, _)) = solve_component(&sub, &growth, &quad, None)? {
            for (k, &g) in keep.iter().enumerate() {
                field[g] = u[k];
            }
            any = true;
        }
    }
    if any {
        Ok(LogisticOutcome::Positive(field))
    } else {
        Ok(LogisticOutcome::NoPositiveSolution)
    }
}

/// Uncoupled logistic on one region with the membrane replaced by an
/// absorbing Robin condition (`which = 1` inner, `which = 2` outer).
pub fn solve_omega(
    mesh: &Mesh,
    which: u8,
    lambda: f64,
    alpha: &ConstOrField,
) -> Result<LogisticOutcome> {
    let (region, g) = match which {
        1 => (RegionSel::Omega1, mesh.geom.gamma1),
        2 => (RegionSel::Omega2, mesh.geom.gamma2),
        _ => return Err(Error::InvalidConfig("which must be 1 or 2".into())),
    };
    let n = mesh.field_len(region);
    let alpha_vals = alpha.values(n, "alpha")?;
    if alpha_vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidConfig("alpha must be positive nodewise".into()));
    }
    let c = vec![0.0; n];
    let a = assemble_scalar(mesh, region, 1.0, &c, &BoundarySpec::robin_sigma(g))?;
    let mut field = vec![0.0; n];
    let mut any = false;
    for keep in component_keeps(mesh, region) {
        let sub = a.restrict(&keep);
        let growth = vec![lambda; keep.len()];
        let quad: Vec<f64> = keep.iter().map(|&i| alpha_vals[i]).collect();
        if let Some((u, _)) = solve_component(&sub, &growth, &quad, None)? {
            for (k, &gl) in keep.iter().enumerate() {
                field[gl] = u[k];
            }
            any = true;
        }
    }
    if any {
        Ok(LogisticOutcome::Positive(field))
    } else {
        Ok(LogisticOutcome::NoPositiveSolution)
    }
}

/// Robin eigenvalues below which each uncoupled logistic has only the
/// trivial solution.
pub fn sigma_thresholds(mesh: &Mesh) -> Result<(f64, f64)> {
    let c1 = vec![0.0; mesh.n1()];
    let c2 = vec![0.0; mesh.n2()];
    let s1 = sigma1(
        mesh,
        RegionSel::Omega1,
        1.0,
        &c1,
        &BoundarySpec::robin_sigma(mesh.geom.gamma1),
    )?;
    let s2 = sigma1(
        mesh,
        RegionSel::Omega2,
        1.0,
        &c2,
        &BoundarySpec::robin_sigma(mesh.geom.gamma2),
    )?;
    Ok((s1.value, s2.value))
}

/// Unique positive pair of the membrane logistic, bracketed between the
/// scaled existence eigenfunction and the constant ceiling of the a priori
/// bounds.
pub fn solve_membrane_logistic(
    mesh: &Mesh,
    lambda_1: f64,
    lambda_2: f64,
    alpha1: &ConstOrField,
    alpha2: &ConstOrField,
) -> Result<SemitrivialOutcome> {
    let lam = lambda1_const(mesh, 1.0, -lambda_1, -lambda_2)?;
    if lam.value >= EPS_BAND {
        return Ok(SemitrivialOutcome::NoPositiveSolution);
    }
    if lam.value > -EPS_BAND {
        return Ok(SemitrivialOutcome::Indeterminate);
    }

    let n1 = mesh.n1();
    let a1v = alpha1.values(n1, "alpha1")?;
    let a2v = alpha2.values(mesh.n2(), "alpha2")?;
    let zero1 = vec![0.0; n1];
    let zero2 = vec![0.0; mesh.n2()];
    let a = assemble_interface(mesh, 1.0, &zero1, &zero2)?;

    let n = a.dim();
    let mut growth = vec![0.0; n];
    let mut quad = vec![0.0; n];
    for local in 0..n1 {
        let g = mesh.global_index(RegionSel::Omega1, local);
        growth[g] = lambda_1;
        quad[g] = a1v[local];
    }
    for local in 0..mesh.n2() {
        let g = mesh.global_index(RegionSel::Omega2, local);
        growth[g] = lambda_2;
        quad[g] = a2v[local];
    }

    let (u, residual) = solve_component(&a, &growth, &quad, Some(&lam))?
        .ok_or_else(|| Error::SolverFailure("existence eigenvalue negative but solve gated".into()))?;

    let theta1: Vec<f64> = (0..n1)
        .map(|l| u[mesh.global_index(RegionSel::Omega1, l)])
        .collect();
    let theta2: Vec<f64> = (0..mesh.n2())
        .map(|l| u[mesh.global_index(RegionSel::Omega2, l)])
        .collect();
    Ok(SemitrivialOutcome::Positive(SemitrivialPair {
        theta1,
        theta2,
        existence_eigenvalue: lam.value,
        residual,
    }))
}

/// Boundary blow-up approximation on the outer region.
#[derive(Clone, Debug)]
pub struct LargeSolutionApprox {
    /// Field at the largest Dirichlet datum.
    pub field: Vec<f64>,
    /// Per-node relative increments between the two largest data.
    pub last_increment: Vec<f64>,
    pub m_list: Vec<f64>,
}

/// Large-solution approximation: solves the outer logistic with growing
/// Dirichlet data `M` at the interface and Neumann outer boundary. Interior
/// values increase with `M` and saturate; the per-node Cauchy increments of
/// the last step quantify the remaining truncation.
pub fn approximate_large_solution(
    mesh: &Mesh,
    lambda_2: f64,
    alpha2: &ConstOrField,
    m_list: &[f64],
) -> Result<LargeSolutionApprox> {
    if m_list.is_empty() || m_list.windows(2).any(|w| w[1] <= w[0]) || m_list[0] <= 0.0 {
        return Err(Error::InvalidConfig(
            "M list must be positive and strictly increasing".into(),
        ));
    }
    let n2 = mesh.n2();
    let alpha = alpha2.values(n2, "alpha2")?;
    let alpha_min = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut prev: Option<Vec<f64>> = None;
    let mut last_increment = vec![0.0; n2];
    for &m in m_list {
        let c = vec![0.0; n2];
        let a = assemble_scalar(
            mesh,
            RegionSel::Omega2,
            1.0,
            &c,
            &BoundarySpec::dirichlet_sigma(m),
        )?;
        let mut field = vec![0.0; n2];
        for keep in component_keeps(mesh, RegionSel::Omega2) {
            let sub_op = a.restrict(&keep);
            let growth = vec![lambda_2; keep.len()];
            let quad: Vec<f64> = keep.iter().map(|&i| alpha[i]).collect();
            let mut problem = ReactionProblem {
                a: &sub_op,
                growth,
                quad,
                rhs: vec![0.0; keep.len()],
            };
            problem.mask_dirichlet();
            let ceiling = m.max((lambda_2 / alpha_min).max(0.0)) * (1.0 + 1e-12);
            let sub_start = vec![0.0; keep.len()];
            let sup_start = vec![ceiling; keep.len()];
            let (u, _) = solve_bracketed(&problem, &sub_start, &sup_start)?;
            for (k, &g) in keep.iter().enumerate() {
                field[g] = u[k];
            }
        }
        if let Some(p) = &prev {
            let mut worst_drop = 0.0f64;
            for i in 0..n2 {
                let inc = field[i] - p[i];
                worst_drop = worst_drop.min(inc);
                last_increment[i] = inc / field[i].abs().max(1e-300);
            }
            if worst_drop < -1e-7 * m {
                return Err(Error::SolverFailure(format!(
                    "large-solution sequence not monotone across M (drop {worst_drop:.3e})"
                )));
            }
        }
        prev = Some(field);
    }
    Ok(LargeSolutionApprox {
        field: prev.expect("nonempty M list"),
        last_increment,
        m_list: m_list.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, Geometry1D};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mesh96() -> Mesh {
        build_mesh(&Geometry1D::canonical(), 96).unwrap()
    }

    #[test]
    fn constant_logistic_solutions_are_exact() {
        let mesh = mesh96();
        let c = vec![0.0; mesh.nv()];
        let out =
            solve_logistic_scalar(&mesh, RegionSel::Omega, 2.0, &c, 1.0, &BoundarySpec::all_neumann())
                .unwrap();
        let f = out.field().expect("positive solution");
        for v in f {
            assert!((v - 2.0).abs() < 1e-10, "eta = mu for zero potential, got {v}");
        }
        // mu - c - beta eta = 0 with c = 1, beta = 2, mu = 3 gives eta = 1
        let c = vec![1.0; mesh.nv()];
        let out =
            solve_logistic_scalar(&mesh, RegionSel::Omega, 3.0, &c, 2.0, &BoundarySpec::all_neumann())
                .unwrap();
        for v in out.field().unwrap() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn subcritical_growth_has_no_positive_solution() {
        let mesh = mesh96();
        let c = vec![1.0; mesh.nv()];
        // principal eigenvalue is 1; mu at or below it only admits zero
        for mu in [1.0, 0.5, -2.0] {
            let out = solve_logistic_scalar(
                &mesh,
                RegionSel::Omega,
                mu,
                &c,
                1.0,
                &BoundarySpec::all_neumann(),
            )
            .unwrap();
            assert!(matches!(out, LogisticOutcome::NoPositiveSolution), "mu = {mu}");
        }
    }

    #[test]
    fn sandwich_bounds_hold_for_random_supercritical_cases() {
        let mesh = build_mesh(&Geometry1D::canonical(), 48).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xs = mesh.coords(RegionSel::Omega);
        for _ in 0..5 {
            let c: Vec<f64> = xs.iter().map(|x| rng.gen_range(0.0..1.0) + (3.0 * x).sin().abs()).collect();
            let beta = rng.gen_range(0.5..2.0);
            let eig = sigma1(&mesh, RegionSel::Omega, 1.0, &c, &BoundarySpec::all_neumann()).unwrap();
            let mu = eig.value + rng.gen_range(0.5..2.0);
            let out = solve_logistic_scalar(&mesh, RegionSel::Omega, mu, &c, beta, &BoundarySpec::all_neumann())
                .unwrap();
            let f = out.field().expect("supercritical");
            let c_min = c.iter().cloned().fold(f64::INFINITY, f64::min);
            let upper = (mu - c_min) / beta;
            let lo_coeff = (mu - eig.value) / beta;
            for (i, v) in f.iter().enumerate() {
                assert!(*v <= upper + 1e-8, "upper bound at node {i}");
                assert!(*v >= lo_coeff * eig.eigenfunction[i] - 1e-8, "lower bound at node {i}");
            }
        }
    }

    #[test]
    fn omega_solutions_gate_on_sigma() {
        let mesh = mesh96();
        let (s1, s2) = sigma_thresholds(&mesh).unwrap();
        assert!(s1 > 0.0 && s2 > 0.0);
        let alpha = ConstOrField::Const(1.0);
        assert!(matches!(
            solve_omega(&mesh, 2, s2 / 2.0, &alpha).unwrap(),
            LogisticOutcome::NoPositiveSolution
        ));
        let out = solve_omega(&mesh, 2, 2.0 * s2, &alpha).unwrap();
        let f = out.field().unwrap();
        assert!(f.iter().all(|&v| v > 0.0));
        // saturation toward lambda/alpha for large growth
        let out = solve_omega(&mesh, 2, 50.0, &alpha).unwrap();
        let max = out.field().unwrap().iter().cloned().fold(0.0f64, f64::max);
        assert!((max - 50.0).abs() / 50.0 < 0.1, "max {max}");
    }

    #[test]
    fn omega_lower_bound_by_eigenfunction() {
        let mesh = mesh96();
        let (_, s2) = sigma_thresholds(&mesh).unwrap();
        let lam = 2.0 * s2;
        let alpha = ConstOrField::Const(1.0);
        let out = solve_omega(&mesh, 2, lam, &alpha).unwrap();
        let f = out.field().unwrap();
        let c = vec![0.0; mesh.n2()];
        let eig = sigma1(
            &mesh,
            RegionSel::Omega2,
            1.0,
            &c,
            &BoundarySpec::robin_sigma(mesh.geom.gamma2),
        )
        .unwrap();
        // on the winning component: omega >= (lambda - sigma)/alpha * phi^2
        for (i, v) in f.iter().enumerate() {
            let phi = eig.eigenfunction[i];
            if phi > 0.0 {
                assert!(*v >= (lam - s2) * phi * phi - 1e-6, "node {i}");
            }
        }
    }

    #[test]
    fn membrane_pair_existence_follows_the_eigenvalue() {
        let mesh = mesh96();
        let one = ConstOrField::Const(1.0);
        // equal positive growth: pair exists
        let out = solve_membrane_logistic(&mesh, 1.0, 1.0, &one, &one).unwrap();
        let pair = out.pair().expect("positive pair");
        assert!(pair.theta1.iter().all(|&v| v > 0.0));
        assert!(pair.theta2.iter().all(|&v| v > 0.0));
        assert!(pair.existence_eigenvalue < 0.0);
        // equal negative growth: none
        let out = solve_membrane_logistic(&mesh, -1.0, -1.0, &one, &one).unwrap();
        assert!(matches!(out, SemitrivialOutcome::NoPositiveSolution));
        // supercritical outer growth carries the inner region: pair exists
        let (_, s2) = sigma_thresholds(&mesh).unwrap();
        let out = solve_membrane_logistic(&mesh, -10.0, s2 + 0.5, &one, &one).unwrap();
        assert!(out.pair().is_some(), "outer-driven existence");
    }

    #[test]
    fn membrane_pair_bounds_and_monotonicity() {
        let mesh = mesh96();
        let one = ConstOrField::Const(1.0);
        let lo = solve_membrane_logistic(&mesh, 1.0, 1.0, &one, &one).unwrap();
        let hi = solve_membrane_logistic(&mesh, 1.5, 1.2, &one, &one).unwrap();
        let (lo, hi) = (lo.pair().unwrap().clone(), hi.pair().unwrap().clone());
        for (a, b) in lo.theta1.iter().zip(&hi.theta1) {
            assert!(a <= &(b + 1e-9), "nondecreasing in the growth rates");
        }
        for (a, b) in lo.theta2.iter().zip(&hi.theta2) {
            assert!(a <= &(b + 1e-9));
        }
        // ceiling of the a priori bounds
        let k = 1.0f64;
        for v in lo.theta1.iter().chain(&lo.theta2) {
            assert!(*v <= k + 1e-8);
        }
        // omega_i <= theta_i (the uncoupled solution is a sub-solution)
        let (s1, s2) = sigma_thresholds(&mesh).unwrap();
        let l = s1.max(s2) + 1.0;
        let pair = solve_membrane_logistic(&mesh, l, l, &one, &one)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        if let LogisticOutcome::Positive(w1) = solve_omega(&mesh, 1, l, &one).unwrap() {
            for (w, t) in w1.iter().zip(&pair.theta1) {
                assert!(w <= &(t + 1e-7));
            }
        }
        if let LogisticOutcome::Positive(w2) = solve_omega(&mesh, 2, l, &one).unwrap() {
            for (w, t) in w2.iter().zip(&pair.theta2) {
                assert!(w <= &(t + 1e-7));
            }
        }
    }

    #[test]
    fn semitrivial_linearized_stability_sign() {
        let mesh = mesh96();
        let one = ConstOrField::Const(1.0);
        let pair = solve_membrane_logistic(&mesh, 1.0, 2.0, &one, &one)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        let c1: Vec<f64> = pair.theta1.iter().map(|t| -1.0 + 2.0 * t).collect();
        let c2: Vec<f64> = pair.theta2.iter().map(|t| -2.0 + 2.0 * t).collect();
        let lam = crate::eigen::lambda1(&mesh, 1.0, &c1, &c2).unwrap();
        assert!(lam.value > 0.0, "linearization eigenvalue {}", lam.value);
    }

    #[test]
    fn large_solution_is_monotone_and_saturating_in_m() {
        let mesh = mesh96();
        let alpha = ConstOrField::Const(1.0);
        // interior increments shrink decade over decade (the blow-up layer
        // offset moves like sqrt(6/M), so convergence in M is slow but
        // monotone; the far field is far from settled at M = 1e4)
        let mut prev_inc: Option<f64> = None;
        let mut prev_field: Option<Vec<f64>> = None;
        for m_pair in [[1e2, 1e3], [1e3, 1e4], [1e4, 1e5]] {
            let approx = approximate_large_solution(&mesh, 1.0, &alpha, &m_pair).unwrap();
            let inc0 = approx.last_increment[0].abs();
            if let Some(p) = prev_inc {
                assert!(inc0 < p, "outer-boundary increment shrinks: {inc0} vs {p}");
            }
            prev_inc = Some(inc0);
            if let Some(pf) = &prev_field {
                for (a, b) in pf.iter().zip(&approx.field) {
                    assert!(a <= &(b * (1.0 + 1e-9)), "monotone in M");
                }
            }
            prev_field = Some(approx.field);
        }
        // dominates the membrane pair for any inner growth
        let approx = approximate_large_solution(&mesh, 1.0, &alpha, &[1e2, 1e3, 1e4]).unwrap();
        let one = ConstOrField::Const(1.0);
        let pair = solve_membrane_logistic(&mesh, 3.0, 1.0, &one, &one)
            .unwrap()
            .pair()
            .unwrap()
            .clone();
        for (t, l) in pair.theta2.iter().zip(&approx.field) {
            assert!(t <= &(l + 1e-6), "theta_2 below the large solution");
        }
        // rejects a non-increasing data list
        assert!(approximate_large_solution(&mesh, 1.0, &alpha, &[1e3, 1e2]).is_err());
    }

    #[test]
    fn large_solution_with_zero_growth_decays_away_from_the_interface() {
        let mesh = mesh96();
        let alpha = ConstOrField::Const(1.0);
        let m_top = 1e4;
        let approx = approximate_large_solution(&mesh, 0.0, &alpha, &[1e2, 1e3, m_top]).unwrap();
        let xs = mesh.coords(RegionSel::Omega2);
        // strictly decreasing away from the blow-up points, and small
        // relative to the boundary forcing in the far field (the tail decays
        // like 6/dist^2, so it does not vanish on a short segment)
        let nl = mesh.segments[0].n_nodes();
        for k in 1..nl {
            assert!(approx.field[k] >= approx.field[k - 1], "left component grows toward a");
        }
        for (i, x) in xs.iter().enumerate() {
            let dist = (x - mesh.geom.a).abs().min((x - mesh.geom.b).abs());
            if dist > 0.2 {
                assert!(
                    approx.field[i] < 0.02 * m_top,
                    "far field small next to M, node {i}: {}",
                    approx.field[i]
                );
                let tail = 6.0 / (dist * dist);
                assert!(approx.field[i] < 1.6 * tail, "bounded by the blow-up tail");
            }
        }
    }
}
