//! Logistic steady states: the scalar logistic on the whole habitat, the
//! uncoupled Robin logistics, and the membrane-coupled pair.
//!
//! ```text
//! cargo run --release --example logistic_states
//! ```

use membrana::logistic::{
    sigma_thresholds, solve_logistic_scalar, solve_membrane_logistic, solve_omega,
    LogisticOutcome, SemitrivialOutcome,
};
use membrana::mesh::{build_mesh, Geometry1D, RegionSel};
use membrana::operator::BoundarySpec;
use membrana::params::ConstOrField;

fn range(name: &str, f: &[f64]) {
    let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("  {name}: [{min:.6}, {max:.6}]");
}

fn main() -> membrana::Result<()> {
    let geom = Geometry1D::canonical();
    let mesh = build_mesh(&geom, 96)?;
    let one = ConstOrField::Const(1.0);

    // whole-habitat logistic: constant growth gives the constant state
    let c = vec![0.0; mesh.nv()];
    match solve_logistic_scalar(&mesh, RegionSel::Omega, 2.0, &c, 1.0, &BoundarySpec::all_neumann())? {
        LogisticOutcome::Positive(f) => range("eta with mu = 2", &f),
        LogisticOutcome::NoPositiveSolution => println!("  unexpected extinction"),
    }

    // uncoupled outer logistic: gated by the Robin threshold
    let (s1, s2) = sigma_thresholds(&mesh)?;
    println!("thresholds: sigma_1 = {s1:.4}, sigma_2 = {s2:.4}");
    for lambda in [0.5 * s2, 2.0 * s2] {
        match solve_omega(&mesh, 2, lambda, &one)? {
            LogisticOutcome::Positive(f) => range(&format!("omega_2 at lambda = {lambda:.3}"), &f),
            LogisticOutcome::NoPositiveSolution => {
                println!("  omega_2 at lambda = {lambda:.3}: extinct (below sigma_2)")
            }
        }
    }

    // the membrane pair exists exactly when the existence eigenvalue is
    // negative; the interface lets a supercritical outer region carry an
    // inner one with strongly negative growth
    for (l1, l2) in [(1.0, 2.0), (-1.0, -1.0), (-10.0, s2 + 0.5)] {
        match solve_membrane_logistic(&mesh, l1, l2, &one, &one)? {
            SemitrivialOutcome::Positive(pair) => {
                println!(
                    "pair at ({l1}, {l2:.3}): exists, eigenvalue {:.4}, residual {:.1e}",
                    pair.existence_eigenvalue, pair.residual
                );
                range("theta_1", &pair.theta1);
                range("theta_2", &pair.theta2);
            }
            SemitrivialOutcome::NoPositiveSolution => {
                println!("pair at ({l1}, {l2:.3}): no positive pair")
            }
            SemitrivialOutcome::Indeterminate => {
                println!("pair at ({l1}, {l2:.3}): indeterminate (eigenvalue in the band)")
            }
        }
    }
    Ok(())
}
