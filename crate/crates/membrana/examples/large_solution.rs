//! Boundary blow-up approximation on the outer region and the limit system
//! it feeds: what the habitat looks like when the inner competitor grows
//! without bound.
//!
//! ```text
//! cargo run --release --example large_solution
//! ```

use membrana::logistic::approximate_large_solution;
use membrana::mesh::{build_mesh, Geometry1D, RegionSel};
use membrana::params::{ConstOrField, ModelParams};
use membrana::system::limit_system_solve;

fn main() -> membrana::Result<()> {
    let geom = Geometry1D::canonical();
    let mesh = build_mesh(&geom, 96)?;
    let alpha = ConstOrField::Const(1.0);

    // growing Dirichlet data at the interface stand in for the blow-up;
    // interior values increase and saturate while the layer keeps moving
    let approx = approximate_large_solution(&mesh, 1.0, &alpha, &[1e2, 1e3, 1e4])?;
    let xs = mesh.coords(RegionSel::Omega2);
    println!("blow-up approximation at M = 1e4 (outer region, left component):");
    for (i, x) in xs.iter().enumerate().take(mesh.segments[0].n_nodes()).step_by(8) {
        println!(
            "  x = {x:.4}  u = {:10.3}   last increment {:+.2e}",
            approx.field[i], approx.last_increment[i]
        );
    }

    // the limit system couples that blow-up field with the roaming species,
    // absorbed at the interface
    let mut params = ModelParams::canonical();
    params.lambda2 = 1.0;
    params.a1 = 0.1;
    params.a2 = 0.1;
    params.b1 = 8.0;
    params.mu = 163.0;
    let (u2, v) = limit_system_solve(&mesh, &params, 1e4)?;
    let vmax = v.iter().cloned().fold(0.0f64, f64::max);
    let u2_interior = u2[mesh.segments[0].n_nodes() / 2];
    println!("\nlimit system at mu = {}: interior u_2 = {u2_interior:.4}, max v = {vmax:.4}", params.mu);
    let inner_zero = (0..mesh.n1())
        .all(|l| v[mesh.v_index_of(RegionSel::Omega1, l)] == 0.0);
    println!("roaming species vanishes over the inner region: {inner_zero}");
    Ok(())
}
