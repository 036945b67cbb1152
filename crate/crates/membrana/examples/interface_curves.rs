//! The curves that organize the coexistence region: the interface curve H,
//! its shifted version G, the bifurcation curve g and the equal-growth
//! threshold Ghat.
//!
//! ```text
//! cargo run --release --example interface_curves
//! ```

use membrana::curves::{CurveCtx, SampleFlag};
use membrana::mesh::{build_mesh, Geometry1D};
use membrana::params::ModelParams;

fn main() -> membrana::Result<()> {
    let geom = Geometry1D::canonical();
    let mesh = build_mesh(&geom, 96)?;
    let params = ModelParams::benchmark();
    let ctx = CurveCtx::new(&mesh, &params)?;

    println!("interface curve H on (-inf, sigma_2 = {:.4}):", ctx.sigma2);
    for nu2 in [-100.0, -2.0, 0.0, 2.0, 4.5] {
        let s = ctx.curve_h(nu2)?;
        match s.flag {
            SampleFlag::Ok => println!("  H({nu2:7.2}) = {:9.5}  (|residual| {:.1e})", s.value, s.solver_residual),
            _ => println!("  H({nu2:7.2}) = {}", s.flag.as_str()),
        }
    }
    let slope = ctx.curve_h_slope_at_zero()?;
    let (m1, m2) = geom.measures();
    println!(
        "slope at 0: {slope:.5} vs -(gamma_1/gamma_2)(|O2|/|O1|) = {:.5}",
        -(geom.gamma1 / geom.gamma2) * (m2 / m1)
    );

    println!("\nbifurcation curve g at lambda_2 = {}:", params.lambda2);
    for l1 in [-0.5, 0.5, 1.5, 3.0] {
        let s = ctx.curve_g(l1, params.lambda2)?;
        println!("  g({l1:5.2}) = {}", if s.flag == SampleFlag::Ok {
            format!("{:.6}", s.value)
        } else {
            s.flag.as_str().to_string()
        });
    }

    println!("\nwindow thresholds at ({}, {}):", params.lambda1, params.lambda2);
    let mu0 = ctx.mu0(params.lambda1, params.lambda2)?;
    let mu1 = ctx.mu1(params.lambda1, params.lambda2, 100.0)?.expect("root");
    println!("  mu_0 = {mu0:.6}, mu_1 = {:.6}", mu1.value);

    println!("\nequal-growth threshold curve (a_1 = {}, a_2 = {}):", params.a1, params.a2);
    for mu in [0.5, 1.0, 2.0] {
        let (sigma0, ghat) = ctx.sigma0_and_ghat(mu)?;
        println!("  mu = {mu}: sigma_0 = {sigma0:+.6}, Ghat = {ghat:.6}");
    }
    Ok(())
}
