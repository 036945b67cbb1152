//! Principal eigenvalues: the scalar Robin thresholds, the membrane-coupled
//! eigenvalue, and its large-diffusion averaging.
//!
//! ```text
//! cargo run --release --example eigenvalues
//! ```

use membrana::eigen::{lambda1_const, sigma1};
use membrana::logistic::sigma_thresholds;
use membrana::mesh::{build_mesh, Geometry1D, RegionSel};
use membrana::operator::BoundarySpec;

fn main() -> membrana::Result<()> {
    let geom = Geometry1D::canonical();
    let mesh = build_mesh(&geom, 96)?;
    println!(
        "habitat ({}, {}) with inner region ({}, {})",
        geom.x_left, geom.x_right, geom.a, geom.b
    );

    // Robin thresholds of the uncoupled problems: growth below these admits
    // only extinction for the isolated species
    let (s1, s2) = sigma_thresholds(&mesh)?;
    println!("sigma_1 = {s1:.6} (inner), sigma_2 = {s2:.6} (outer)");

    // the membrane-coupled eigenvalue vanishes for equal constants and
    // shifts exactly with the potential
    let zero = lambda1_const(&mesh, 1.0, 0.0, 0.0)?;
    let shifted = lambda1_const(&mesh, 1.0, 0.7, 0.7)?;
    println!(
        "Lambda_1(0,0) = {:+.3e}, Lambda_1(0.7, 0.7) = {:.6}",
        zero.value, shifted.value
    );

    // scalar problem on the whole habitat with a potential step
    let xs = mesh.coords(RegionSel::Omega);
    let c: Vec<f64> = xs.iter().map(|x| if *x < 0.5 { 0.0 } else { 1.0 }).collect();
    let step = sigma1(&mesh, RegionSel::Omega, 1.0, &c, &BoundarySpec::all_neumann())?;
    println!(
        "sigma_1^Omega with a unit potential step = {:.6} ({} iterations, residual {:.1e})",
        step.value, step.iterations, step.residual
    );

    // strong diffusion averages the two potentials with permeability and
    // measure weights: here (gamma_2 |O1| c_1) / (gamma_2 |O1| + gamma_1 |O2|)
    let mut g = geom;
    g.gamma1 = 1.0;
    g.gamma2 = 1.0;
    let mesh_sym = build_mesh(&g, 96)?;
    let avg = lambda1_const(&mesh_sym, 1.0e3, 1.0, 0.0)?;
    println!(
        "d = 1000: Lambda_1(1, 0) = {:.6} (the weighted average is 1/3)",
        avg.value
    );
    Ok(())
}
