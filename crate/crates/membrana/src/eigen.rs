//! Principal eigenvalues with positive eigenfunctions.
//!
//! The assembled operators have nonpositive off-diagonal entries, so after
//! shifting below the smallest row sum the matrix is a strictly diagonally
//! dominant M-matrix with an entrywise nonnegative inverse. Power iteration
//! on that inverse converges to the Perron pair, which is exactly the
//! principal eigenvalue/positive eigenfunction of the original operator.
//!
//! Disconnected regions (the outer region has two components in 1D) are
//! solved per component; the principal eigenvalue is the minimum over
//! components and its eigenfunction is extended by zero. The positive
//! eigenfunction is then only componentwise positive, a 1D artifact the
//! interface theory does not meet on connected outer regions.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, RegionSel};
use crate::operator::{assemble_interface, assemble_scalar, BoundarySpec, SparseOperator};

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub max_iter: usize,
    /// Sup-norm change of the normalized eigenvector.
    pub tol_vec: f64,
    /// Relative change of the eigenvalue estimate.
    pub tol_value: f64,
    /// Residual acceptance: `max(abs, rel * |A|_inf)`.
    pub residual_abs: f64,
    pub residual_rel: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            max_iter: 10_000,
            tol_vec: 1e-12,
            tol_value: 1e-12,
            residual_abs: 1e-9,
            residual_rel: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub value: f64,
    /// Normalized to unit sup-norm; strictly positive on the solved component.
    pub eigenfunction: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Perron pair of `op` by shifted inverse power iteration.
///
/// Dirichlet identity rows are removed before iterating and re-entered as
/// zeros in the returned eigenfunction.
pub fn principal_eigenpair(op: &SparseOperator, opts: &EigenOptions) -> Result<EigenResult> {
    if op.dirichlet.is_empty() {
        return principal_eigenpair_inner(op, opts);
    }
    let excluded: std::collections::BTreeSet<usize> =
        op.dirichlet.iter().map(|&(i, _)| i).collect();
    let keep: Vec<usize> = (0..op.dim()).filter(|i| !excluded.contains(i)).collect();
    let sub = op.restrict(&keep);
    let r = principal_eigenpair_inner(&sub, opts)?;
    let mut phi = vec![0.0; op.dim()];
    for (new, &old) in keep.iter().enumerate() {
        phi[old] = r.eigenfunction[new];
    }
    Ok(EigenResult {
        eigenfunction: phi,
        ..r
    })
}

fn principal_eigenpair_inner(op: &SparseOperator, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.dim();
    let shift = op.min_row_sum() - 1.0;
    let lu = op.to_band_shifted(shift).factor()?;
    let norm = op.inf_norm();
    let cap = opts.residual_abs.max(opts.residual_rel * norm);

    let mut x = vec![1.0; n];
    let mut value = f64::INFINITY;
    let mut last_residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let y = lu.solve(&x);
        let xx: f64 = x.iter().map(|v| v * v).sum();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let new_value = shift + xx / xy;
        let m = sup_norm(&y);
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::NonConvergence {
                what: "inverse power iteration",
                iterations: it,
                residual: f64::NAN,
            });
        }
        let xn: Vec<f64> = y.iter().map(|v| v / m).collect();
        let dvec = x
            .iter()
            .zip(&xn)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        let dval = (new_value - value).abs();
        x = xn;
        value = new_value;
        if dvec < opts.tol_vec && dval < opts.tol_value * value.abs().max(1.0) {
            let ax = op.apply(&x)?;
            last_residual = ax
                .iter()
                .zip(&x)
                .fold(0.0f64, |acc, (a, b)| acc.max((a - value * b).abs()));
            if last_residual <= cap {
                // orient positively; the Perron vector has one sign
                let smin = x.iter().cloned().fold(f64::INFINITY, f64::min);
                let smax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if smax <= 0.0 || (smin < 0.0 && smin.abs() > smax) {
                    for v in &mut x {
                        *v = -*v;
                    }
                }
                return Ok(EigenResult {
                    value,
                    eigenfunction: x,
                    residual: last_residual,
                    iterations: it,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "inverse power iteration",
        iterations: opts.max_iter,
        residual: last_residual,
    })
}

/// Index ranges of the connected components of a region's grid.
fn component_ranges(mesh: &Mesh, region: RegionSel) -> Vec<std::ops::Range<usize>> {
    match region {
        RegionSel::Omega2 => {
            let nl = mesh.segments[0].n_nodes();
            vec![0..nl, nl..mesh.n2()]
        }
        _ => vec![0..mesh.field_len(region)],
    }
}

/// Principal eigenvalue of the scalar problem on `region`.
///
/// For the disconnected outer region, solves per component and returns the
/// minimum, with the winning component's eigenfunction extended by zero.
pub fn sigma1(
    mesh: &Mesh,
    region: RegionSel,
    d: f64,
    c: &[f64],
    bc: &BoundarySpec,
) -> Result<EigenResult> {
    let op = assemble_scalar(mesh, region, d, c, bc)?;
    let opts = EigenOptions::default();
    let comps = component_ranges(mesh, region);
    if comps.len() == 1 {
        return principal_eigenpair(&op, &opts);
    }
    let mut best: Option<EigenResult> = None;
    for range in comps {
        let keep: Vec<usize> = range.clone().collect();
        let sub = op.restrict(&keep);
        let r = principal_eigenpair(&sub, &opts)?;
        let better = best.as_ref().map(|b| r.value < b.value).unwrap_or(true);
        if better {
            let mut phi = vec![0.0; op.dim()];
            for (k, &g) in keep.iter().enumerate() {
                phi[g] = r.eigenfunction[k];
            }
            best = Some(EigenResult {
                eigenfunction: phi,
                ..r
            });
        }
    }
    Ok(best.expect("at least one component"))
}

/// Principal eigenvalue of the membrane-coupled block problem.
pub fn lambda1(mesh: &Mesh, d: f64, c1: &[f64], c2: &[f64]) -> Result<EigenResult> {
    let op = assemble_interface(mesh, d, c1, c2)?;
    principal_eigenpair(&op, &EigenOptions::default())
}

/// Convenience for constant coefficients.
pub fn lambda1_const(mesh: &Mesh, d: f64, c1: f64, c2: f64) -> Result<EigenResult> {
    let v1 = vec![c1; mesh.n1()];
    let v2 = vec![c2; mesh.n2()];
    lambda1(mesh, d, &v1, &v2)
}

/// Samples `mu -> Lambda_1(mu c_1, mu c_2)` for strictly positive fields.
///
/// The sequence is strictly increasing and diverges as `mu` grows; callers
/// assert the trend on the returned samples.
pub fn lambda1_growth_check(
    mesh: &Mesh,
    d: f64,
    c1: &[f64],
    c2: &[f64],
    mu_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if c1.iter().chain(c2.iter()).any(|&v| v <= 0.0) {
        return Err(Error::InvalidConfig(
            "growth check requires strictly positive fields".into(),
        ));
    }
    let mut out = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        let s1: Vec<f64> = c1.iter().map(|v| mu * v).collect();
        let s2: Vec<f64> = c2.iter().map(|v| mu * v).collect();
        out.push((mu, lambda1(mesh, d, &s1, &s2)?.value));
    }
    Ok(out)
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
    fn neumann_ground_state_is_zero_with_constant_mode() {
        let mesh = mesh96();
        let c = vec![0.0; mesh.nv()];
        let r = sigma1(&mesh, RegionSel::Omega, 1.0, &c, &BoundarySpec::all_neumann()).unwrap();
        assert!(r.value.abs() < 1e-10, "value {:e}", r.value);
        let spread = r.eigenfunction.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((spread - 1.0).abs() < 1e-8, "constant eigenfunction");
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let mesh = mesh96();
        let c = vec![5.0; mesh.nv()];
        let r = sigma1(&mesh, RegionSel::Omega, 1.0, &c, &BoundarySpec::all_neumann()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn positive_potential_gives_positive_eigenvalue() {
        let mesh = mesh96();
        let xs = mesh.coords(RegionSel::Omega);
        let c: Vec<f64> = xs.iter().map(|x| if *x < 0.5 { 0.0 } else { 1.0 }).collect();
        let r = sigma1(&mesh, RegionSel::Omega, 1.0, &c, &BoundarySpec::all_neumann()).unwrap();
        assert!(r.value > 0.0);
        assert!(r.eigenfunction.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn interface_zero_potential_has_zero_eigenvalue() {
        let mesh = mesh96();
        let r = lambda1_const(&mesh, 1.0, 0.0, 0.0).unwrap();
        assert!(r.value.abs() < 1e-10);
        for &v in &r.eigenfunction {
            assert!((v - 1.0).abs() < 1e-7, "constant pair eigenfunction");
        }
    }

    #[test]
    fn interface_shift_property() {
        let mesh = mesh96();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..4 {
            let c1: Vec<f64> = (0..mesh.n1()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let c2: Vec<f64> = (0..mesh.n2()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t: f64 = rng.gen_range(-3.0..3.0);
            let base = lambda1(&mesh, 1.0, &c1, &c2).unwrap().value;
            let s1: Vec<f64> = c1.iter().map(|v| v + t).collect();
            let s2: Vec<f64> = c2.iter().map(|v| v + t).collect();
            let shifted = lambda1(&mesh, 1.0, &s1, &s2).unwrap().value;
            assert!((shifted - base - t).abs() < 1e-9, "{} vs {}", shifted, base + t);
        }
    }

    #[test]
    fn interface_monotone_in_potentials() {
        let mesh = mesh96();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c1: Vec<f64> = (0..mesh.n1()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = (0..mesh.n2()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d1: Vec<f64> = c1.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let d2: Vec<f64> = c2.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let lo = lambda1(&mesh, 1.0, &c1, &c2).unwrap().value;
        let hi = lambda1(&mesh, 1.0, &d1, &d2).unwrap().value;
        assert!(lo <= hi + 1e-10);
    }

    #[test]
    fn large_diffusion_averages_the_potentials() {
        let mut g = Geometry1D::canonical();
        g.gamma1 = 1.0;
        g.gamma2 = 1.0;
        let mesh = build_mesh(&g, 96).unwrap();
        let r = lambda1_const(&mesh, 1.0e3, 1.0, 0.0).unwrap();
        // gamma_2 |O1| c1 / (gamma_2 |O1| + gamma_1 |O2|) = 1/3
        assert!((r.value - 1.0 / 3.0).abs() < 5e-3, "value {}", r.value);
    }

    #[test]
    fn large_diffusion_averages_smooth_potentials() {
        // nonconstant coefficients: the limit weighs the integrals by the
        // opposite permeabilities
        let g = Geometry1D::canonical();
        let mesh = build_mesh(&g, 96).unwrap();
        let xs1 = mesh.coords(RegionSel::Omega1);
        let xs2 = mesh.coords(RegionSel::Omega2);
        let c1: Vec<f64> = xs1.iter().map(|x| 1.0 + (3.0 * x).sin()).collect();
        let c2: Vec<f64> = xs2.iter().map(|x| 0.5 * x * x).collect();
        let r = lambda1(&mesh, 1.0e3, &c1, &c2).unwrap();
        let int1 = mesh.integrate(RegionSel::Omega1, &c1);
        let int2 = mesh.integrate(RegionSel::Omega2, &c2);
        let (m1, m2) = g.measures();
        let target =
            (g.gamma2 * int1 + g.gamma1 * int2) / (g.gamma2 * m1 + g.gamma1 * m2);
        let rel = (r.value - target).abs() / target.abs();
        assert!(rel < 0.01, "{} vs {target} ({:.2}%)", r.value, 100.0 * rel);
    }

    #[test]
    fn interface_eigenvalue_refines_at_second_order() {
        let g = Geometry1D::canonical();
        let mut vals = Vec::new();
        for npu in [48u32, 96, 192] {
            let mesh = build_mesh(&g, npu).unwrap();
            let xs1 = mesh.coords(RegionSel::Omega1);
            let xs2 = mesh.coords(RegionSel::Omega2);
            let c1: Vec<f64> = xs1.iter().map(|x| -1.0 + x).collect();
            let c2: Vec<f64> = xs2.iter().map(|x| -2.0 * x).collect();
            vals.push(lambda1(&mesh, 1.0, &c1, &c2).unwrap().value);
        }
        let rate = (vals[0] - vals[1]).abs() / (vals[1] - vals[2]).abs();
        assert!(rate > 3.2 && rate < 4.8, "refinement factor {rate}");
    }

    #[test]
    fn growth_check_examples() {
        let mesh = build_mesh(&Geometry1D::canonical(), 48).unwrap();
        let ones1 = vec![1.0; mesh.n1()];
        let ones2 = vec![1.0; mesh.n2()];
        let samples = lambda1_growth_check(&mesh, 1.0, &ones1, &ones2, &[1.0, 10.0, 100.0]).unwrap();
        for (mu, v) in &samples {
            assert!((v - mu).abs() < 1e-8, "constant fields scale exactly");
        }
        let xs1 = mesh.coords(RegionSel::Omega1);
        let xs2 = mesh.coords(RegionSel::Omega2);
        let c1: Vec<f64> = xs1.iter().map(|x| 1.0 + x * x).collect();
        let c2: Vec<f64> = xs2.iter().map(|x| 0.5 + x).collect();
        let samples = lambda1_growth_check(&mesh, 1.0, &c1, &c2, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        for w in samples.windows(2) {
            assert!(w[1].1 > w[0].1, "strictly increasing in mu");
        }
        // ratio grows along with mu for distinct constant fields
        let c1 = vec![1.0; mesh.n1()];
        let c2 = vec![2.0; mesh.n2()];
        let s = lambda1_growth_check(&mesh, 1.0, &c1, &c2, &[10.0, 100.0]).unwrap();
        assert!(s[1].1 / s[0].1 >= 5.0);
        let bad = vec![0.0; mesh.n1()];
        assert!(lambda1_growth_check(&mesh, 1.0, &bad, &c2, &[1.0]).is_err());
    }

    #[test]
    fn eigenvalue_converges_at_second_order() {
        let g = Geometry1D::canonical();
        let mut vals = Vec::new();
        for npu in [48u32, 96, 192] {
            let mesh = build_mesh(&g, npu).unwrap();
            let c = vec![0.0; mesh.n1()];
            let r = sigma1(
                &mesh,
                RegionSel::Omega1,
                1.0,
                &c,
                &BoundarySpec::robin_sigma(g.gamma1),
            )
            .unwrap();
            vals.push(r.value);
        }
        let d1 = (vals[0] - vals[1]).abs();
        let d2 = (vals[1] - vals[2]).abs();
        let rate = d1 / d2;
        assert!(rate > 3.0 && rate < 5.0, "rate {rate}");
    }

    #[test]
    fn outer_region_takes_component_minimum() {
        // asymmetric outer components: longer segment has the smaller eigenvalue
        let g = Geometry1D::new((0.0, 1.2), (0.2, 0.5), 1.0, 1.0).unwrap();
        let mesh = build_mesh(&g, 40).unwrap();
        let c = vec![0.0; mesh.n2()];
        let r = sigma1(
            &mesh,
            RegionSel::Omega2,
            1.0,
            &c,
            &BoundarySpec::robin_sigma(g.gamma2),
        )
        .unwrap();
        // winning eigenfunction lives on the right (longer) component
        let nl = mesh.segments[0].n_nodes();
        assert!(r.eigenfunction[..nl].iter().all(|&v| v == 0.0));
        assert!(r.eigenfunction[nl..].iter().all(|&v| v > 0.0));
    }
}
