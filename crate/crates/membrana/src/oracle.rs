//! Independent reference computations for tests and manual inspection.
//!
//! Nothing here shares code with the production solvers: the transcendental
//! characteristic functions are exact trigonometric forms, the dense
//! eigensolver runs its own factorization and iteration, and the fine-grid
//! reference simply re-runs a named solver at a higher resolution.

use crate::error::{Error, Result};
use crate::operator::SparseOperator;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Endpoint condition of a constant-coefficient interval problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndCondition {
    Neumann,
    Robin(f64),
    Dirichlet,
}

/// Interval eigenproblem specification for the characteristic equation.
#[derive(Clone, Copy, Debug)]
pub struct TranscendentalSpec {
    pub length: f64,
    pub left: EndCondition,
    pub right: EndCondition,
}

/// Entire-in-`rho` fundamental solutions `C`, `S` with `C(0)=1, C'(0)=0`,
/// `S(0)=0, S'(0)=1`; `C' = -rho S`, `S' = C`.
fn fundamental(rho: f64, x: f64) -> (f64, f64) {
    if rho > 1e-12 {
        let k = rho.sqrt();
        ((k * x).cos(), (k * x).sin() / k)
    } else if rho < -1e-12 {
        let m = (-rho).sqrt();
        ((m * x).cosh(), (m * x).sinh() / m)
    } else {
        // series around rho = 0 keeps the function smooth through zero
        let r = rho;
        let c = 1.0 - r * x * x / 2.0 + r * r * x.powi(4) / 24.0;
        let s = x - r * x.powi(3) / 6.0 + r * r * x.powi(5) / 120.0;
        (c, s)
    }
}

fn characteristic(spec: &TranscendentalSpec, rho: f64) -> f64 {
    let l = spec.length;
    // initial data (phi(0), phi'(0)) satisfying the left condition
    let (p, q) = match spec.left {
        EndCondition::Neumann => (1.0, 0.0),
        // outward normal at the left end points in -x: -phi' + g phi = 0
        EndCondition::Robin(g) => (1.0, g),
        EndCondition::Dirichlet => (0.0, 1.0),
    };
    let (c, s) = fundamental(rho, l);
    let phi = p * c + q * s;
    let dphi = -rho * p * s + q * c;
    match spec.right {
        EndCondition::Neumann => dphi,
        EndCondition::Robin(g) => dphi + g * phi,
        EndCondition::Dirichlet => phi,
    }
}

/// Smallest nonnegative eigenvalue of `-phi'' = rho phi` on an interval with
/// the given endpoint conditions, by sign-scanning the exact characteristic
/// function and bisecting to `1e-12`.
pub fn interval_eigen_oracle(spec: &TranscendentalSpec) -> Result<f64> {
    if !(spec.length > 0.0) {
        return Err(Error::InvalidConfig("oracle interval length must be positive".into()));
    }
    if spec.left == EndCondition::Neumann && spec.right == EndCondition::Neumann {
        return Ok(0.0);
    }
    let hi = (2.0 * std::f64::consts::PI / spec.length).powi(2);
    let n_scan = 20_000;
    let f0 = characteristic(spec, 0.0);
    let mut lo = 0.0;
    let mut flo = f0;
    let mut bracket = None;
    for k in 1..=n_scan {
        let r = hi * k as f64 / n_scan as f64;
        let fr = characteristic(spec, r);
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo * fr < 0.0 {
            bracket = Some((lo, r, flo));
            break;
        }
        lo = r;
        flo = fr;
    }
    let (mut a, mut b, mut fa) = bracket.ok_or(Error::NoSignChange {
        what: "interval characteristic function",
        lo: 0.0,
        hi,
    })?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = characteristic(spec, m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-12 * b.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

fn dense_lu(a: &mut [Vec<f64>]) -> Result<Vec<usize>> {
    let n = a.len();
    let mut piv = vec![0usize; n];
    for j in 0..n {
        let p = (j..n)
            .max_by(|&x, &y| a[x][j].abs().partial_cmp(&a[y][j].abs()).unwrap())
            .unwrap();
        if a[p][j] == 0.0 {
            return Err(Error::SingularSystem("dense oracle LU"));
        }
        a.swap(j, p);
        piv[j] = p;
        for i in (j + 1)..n {
            let m = a[i][j] / a[j][j];
            a[i][j] = m;
            if m != 0.0 {
                for k in (j + 1)..n {
                    a[i][k] -= m * a[j][k];
                }
            }
        }
    }
    Ok(piv)
}

fn dense_solve(lu: &[Vec<f64>], piv: &[usize], b: &mut [f64]) {
    let n = b.len();
    // full-row-swap storage: permute first, then the triangular solves
    for j in 0..n {
        b.swap(j, piv[j]);
    }
    for j in 0..n {
        for i in (j + 1)..n {
            b[i] -= lu[i][j] * b[j];
        }
    }
    for j in (0..n).rev() {
        b[j] /= lu[j][j];
        for i in 0..j {
            b[i] -= lu[i][j] * b[j];
        }
    }
}

/// Principal eigenvalue via dense inverse iteration from 20 random starts.
///
/// All starts must agree within `1e-10`; disagreement is reported as an
/// error rather than averaged away.
pub fn dense_eigen_oracle(op: &SparseOperator) -> Result<f64> {
    if op.dim() > 2000 {
        return Err(Error::InvalidConfig(format!(
            "dense oracle limited to 2000 unknowns, got {}",
            op.dim()
        )));
    }
    let excluded: std::collections::BTreeSet<usize> =
        op.dirichlet.iter().map(|&(i, _)| i).collect();
    let keep: Vec<usize> = (0..op.dim()).filter(|i| !excluded.contains(i)).collect();
    let full = op.to_dense();
    let n = keep.len();
    let mut a: Vec<Vec<f64>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| full[i][j]).collect())
        .collect();
    let min_row_sum = a
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let shift = min_row_sum - 1.0;
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= shift;
    }
    let lu_rows = {
        let mut m = a.clone();
        let piv = dense_lu(&mut m)?;
        (m, piv)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x0eac1e);
    let mut values = Vec::with_capacity(20);
    for _ in 0..20 {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let mut value = f64::INFINITY;
        for _ in 0..5000 {
            let mut y = x.clone();
            dense_solve(&lu_rows.0, &lu_rows.1, &mut y);
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let xy: f64 = x.iter().zip(&y).map(|(u, v)| u * v).sum();
            let new_value = shift + xx / xy;
            let m = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            let xn: Vec<f64> = y.iter().map(|v| v / m).collect();
            let dv = x
                .iter()
                .zip(&xn)
                .fold(0.0f64, |acc, (u, v)| acc.max((u - v).abs()));
            x = xn;
            let done = dv < 1e-13 && (new_value - value).abs() < 1e-13 * new_value.abs().max(1.0);
            value = new_value;
            if done {
                break;
            }
        }
        // Rayleigh-quotient refinement on the restricted dense matrix
        let ax: Vec<f64> = (0..n)
            .map(|i| {
                keep.iter()
                    .enumerate()
                    .map(|(jj, &j)| full[keep[i]][j] * x[jj])
                    .sum()
            })
            .collect();
        let num: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        let den: f64 = x.iter().map(|v| v * v).sum();
        values.push(num / den);
    }
    let vmin = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if vmax - vmin > 1e-10 {
        return Err(Error::SolverFailure(format!(
            "dense oracle starts disagree: spread {:.3e}",
            vmax - vmin
        )));
    }
    Ok(values[0])
}

/// Problems the fine-grid reference knows how to re-run.
///
/// Field coefficients must be constants so they transfer across meshes.
#[derive(Clone, Debug)]
pub enum ReferenceProblem {
    /// Scalar logistic on one region; `robin_sigma` of `None` means Neumann
    /// at the interface points.
    LogisticScalar {
        region: crate::mesh::RegionSel,
        mu: f64,
        c: f64,
        beta: f64,
        robin_sigma: Option<f64>,
    },
    /// Membrane logistic pair; returns `theta_1` then `theta_2`.
    Semitrivial { params: crate::params::ModelParams },
    /// Full coexistence state; returns `u_1`, `u_2`, then `v`.
    Coexistence { params: crate::params::ModelParams },
}

/// Re-runs the named solver at `n_fine` for Richardson-style error
/// estimation of production runs. Requires `n_fine >= 4 * n_production`.
pub fn fine_grid_reference(
    geom: &crate::mesh::Geometry1D,
    problem: &ReferenceProblem,
    n_production: u32,
    n_fine: u32,
) -> Result<Vec<f64>> {
    if n_fine < 4 * n_production {
        return Err(Error::InvalidConfig(format!(
            "fine resolution {n_fine} must be at least four times the production {n_production}"
        )));
    }
    let mesh = crate::mesh::build_mesh(geom, n_fine)?;
    match problem {
        ReferenceProblem::LogisticScalar {
            region,
            mu,
            c,
            beta,
            robin_sigma,
        } => {
            let cvec = vec![*c; mesh.field_len(*region)];
            let bc = match robin_sigma {
                Some(g) => crate::operator::BoundarySpec::robin_sigma(*g),
                None => crate::operator::BoundarySpec::all_neumann(),
            };
            match crate::logistic::solve_logistic_scalar(&mesh, *region, *mu, &cvec, *beta, &bc)? {
                crate::logistic::LogisticOutcome::Positive(f) => Ok(f),
                crate::logistic::LogisticOutcome::NoPositiveSolution => {
                    Ok(vec![0.0; mesh.field_len(*region)])
                }
            }
        }
        ReferenceProblem::Semitrivial { params } => {
            match crate::logistic::solve_membrane_logistic(
                &mesh,
                params.lambda1,
                params.lambda2,
                &params.alpha1,
                &params.alpha2,
            )? {
                crate::logistic::SemitrivialOutcome::Positive(pair) => {
                    let mut out = pair.theta1;
                    out.extend_from_slice(&pair.theta2);
                    Ok(out)
                }
                _ => Ok(vec![0.0; mesh.n1() + mesh.n2()]),
            }
        }
        ReferenceProblem::Coexistence { params } => {
            match crate::system::solve_coexistence(
                &mesh,
                params,
                &crate::system::CoexistInit::Auto,
            )? {
                crate::system::CoexistenceOutcome::Found(s) => {
                    let mut out = s.state.u1;
                    out.extend_from_slice(&s.state.u2);
                    out.extend_from_slice(&s.state.v);
                    Ok(out)
                }
                crate::system::CoexistenceOutcome::NotFound(_) => {
                    Ok(vec![0.0; mesh.n_total() + mesh.nv()])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{lambda1_const, sigma1};
    use crate::mesh::{build_mesh, Geometry1D, RegionSel};
    use crate::operator::{assemble_interface, BoundarySpec};

    #[test]
    fn dense_lu_solve_roundtrip() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 12;
        let a: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v: f64 = rng.gen_range(-1.0..1.0);
                        if i == j {
                            v + 5.0
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| a[i].iter().zip(&x_true).map(|(u, v)| u * v).sum())
            .collect();
        let mut lu = a.clone();
        let piv = dense_lu(&mut lu).unwrap();
        let mut x = b.clone();
        dense_solve(&lu, &piv, &mut x);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10, "i={i}: {} vs {}", x[i], x_true[i]);
        }
    }

    #[test]
    fn dense_lu_solves_interface_matrix() {
        let mesh = build_mesh(&Geometry1D::canonical(), 24).unwrap();
        let xs1 = mesh.coords(RegionSel::Omega1);
        let xs2 = mesh.coords(RegionSel::Omega2);
        let f1: Vec<f64> = xs1.iter().map(|x| x.sin() + 1.2).collect();
        let f2: Vec<f64> = xs2.iter().map(|x| 0.3 * x).collect();
        let op = assemble_interface(&mesh, 1.0, &f1, &f2).unwrap();
        let n = op.dim();
        let mut a = op.to_dense();
        for i in 0..n {
            a[i][i] += 1.0;
        }
        let x_true: Vec<f64> = (0..n).map(|i| 0.3 + (i as f64 * 0.7).sin().abs()).collect();
        let b: Vec<f64> = (0..n)
            .map(|i| a[i].iter().zip(&x_true).map(|(u, v)| u * v).sum())
            .collect();
        let mut lu = a.clone();
        let piv = dense_lu(&mut lu).unwrap();
        let mut x = b.clone();
        dense_solve(&lu, &piv, &mut x);
        for i in 0..n {
            assert!(
                (x[i] - x_true[i]).abs() < 1e-8,
                "i={i}: {} vs {}",
                x[i],
                x_true[i]
            );
        }
    }

    #[test]
    fn textbook_interval_eigenvalues() {
        let nn = TranscendentalSpec {
            length: 1.0,
            left: EndCondition::Neumann,
            right: EndCondition::Neumann,
        };
        assert_eq!(interval_eigen_oracle(&nn).unwrap(), 0.0);
        let dd = TranscendentalSpec {
            length: 1.0,
            left: EndCondition::Dirichlet,
            right: EndCondition::Dirichlet,
        };
        let rho = interval_eigen_oracle(&dd).unwrap();
        assert!((rho - std::f64::consts::PI.powi(2)).abs() < 1e-9, "{rho}");
    }

    #[test]
    fn robin_root_satisfies_characteristic_equation() {
        // sqrt(rho) tan(sqrt(rho)/6) = 1 for the unit-permeability inner segment
        let spec = TranscendentalSpec {
            length: 1.0 / 3.0,
            left: EndCondition::Robin(1.0),
            right: EndCondition::Robin(1.0),
        };
        let rho = interval_eigen_oracle(&spec).unwrap();
        let k = rho.sqrt();
        assert!((k * (k / 6.0).tan() - 1.0).abs() < 1e-9, "rho = {rho}");
    }

    #[test]
    fn fd_sigma_converges_to_oracle() {
        let g = Geometry1D::canonical();
        let spec = TranscendentalSpec {
            length: g.b - g.a,
            left: EndCondition::Robin(g.gamma1),
            right: EndCondition::Robin(g.gamma1),
        };
        let exact = interval_eigen_oracle(&spec).unwrap();
        let mesh = build_mesh(&g, 192).unwrap();
        let c = vec![0.0; mesh.n1()];
        let fd = sigma1(
            &mesh,
            RegionSel::Omega1,
            1.0,
            &c,
            &BoundarySpec::robin_sigma(g.gamma1),
        )
        .unwrap();
        assert!((fd.value - exact).abs() < 2e-4, "{} vs {exact}", fd.value);
    }

    #[test]
    fn dense_oracle_agrees_with_banded_solver() {
        let mesh = build_mesh(&Geometry1D::canonical(), 24).unwrap();
        let c1 = vec![0.0; mesh.n1()];
        let c2 = vec![0.0; mesh.n2()];
        let op = assemble_interface(&mesh, 1.0, &c1, &c2).unwrap();
        let dv = dense_eigen_oracle(&op).unwrap();
        assert!(dv.abs() < 1e-10, "constant kernel: {dv:e}");
        let xs1 = mesh.coords(RegionSel::Omega1);
        let xs2 = mesh.coords(RegionSel::Omega2);
        let f1: Vec<f64> = xs1.iter().map(|x| x.sin() + 1.2).collect();
        let f2: Vec<f64> = xs2.iter().map(|x| 0.3 * x).collect();
        let op = assemble_interface(&mesh, 1.0, &f1, &f2).unwrap();
        let dv = dense_eigen_oracle(&op).unwrap();
        let pv = crate::eigen::lambda1(&mesh, 1.0, &f1, &f2).unwrap().value;
        assert!((dv - pv).abs() < 1e-9, "{dv} vs {pv}");
        let _ = lambda1_const(&mesh, 1.0, 0.0, 0.0).unwrap();
    }

    #[test]
    fn fine_grid_reference_examples() {
        let geom = Geometry1D::canonical();
        // constant logistic: exact at any resolution
        let p = ReferenceProblem::LogisticScalar {
            region: RegionSel::Omega,
            mu: 2.0,
            c: 0.0,
            beta: 1.0,
            robin_sigma: None,
        };
        let f = fine_grid_reference(&geom, &p, 16, 64).unwrap();
        for v in &f {
            assert!((v - 2.0).abs() < 1e-10);
        }
        assert!(fine_grid_reference(&geom, &p, 32, 64).is_err(), "needs 4x");

        // membrane pair: sup difference on shared nodes shrinks ~16x
        let params = crate::params::ModelParams::benchmark();
        let refp = ReferenceProblem::Semitrivial { params };
        let diff_at = |n: u32| -> f64 {
            let coarse = fine_grid_reference(&geom, &refp, n / 4, n).unwrap();
            let fine = fine_grid_reference(&geom, &refp, n, 4 * n).unwrap();
            let mc = build_mesh(&geom, n).unwrap();
            let mf = build_mesh(&geom, 4 * n).unwrap();
            let mut worst = 0.0f64;
            // shared nodes of the inner segment: local k maps to 4k
            for k in 0..=mc.segments[1].n_cells {
                let vc = coarse[k];
                let vf = fine[4 * k];
                worst = worst.max((vc - vf).abs());
            }
            // outer field follows after theta_1 in the concatenated layout
            let off_c = mc.n1();
            let off_f = mf.n1();
            for k in 0..=mc.segments[0].n_cells {
                worst = worst.max((coarse[off_c + k] - fine[off_f + 4 * k]).abs());
            }
            worst
        };
        let d48 = diff_at(48);
        let d192 = diff_at(192);
        let rate = d48 / d192;
        assert!(rate > 10.0 && rate < 26.0, "order-2 over 4x, got {rate} ({d48} vs {d192})");
    }

    #[test]
    fn dense_oracle_diagonal_matrix() {
        let mut op = SparseOperator::new(5);
        for (i, v) in [3.0, 1.5, 2.0, 7.0, 1.4].iter().enumerate() {
            op.add(i, i, *v);
        }
        let v = dense_eigen_oracle(&op).unwrap();
        assert!((v - 1.4).abs() < 1e-10);
        let mut id = SparseOperator::new(4);
        for i in 0..4 {
            id.add(i, i, 1.0);
        }
        assert!((dense_eigen_oracle(&id).unwrap() - 1.0).abs() < 1e-12);
    }
}
