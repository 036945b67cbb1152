//! Continuation of the coexistence branch between the bifurcation point and
//! the window end, plus the exclusion bracket beyond it.
//!
//! ```text
//! cargo run --release --example bifurcation_branch
//! ```

use membrana::curves::{BranchOutcome, CurveCtx, StepSpec};
use membrana::mesh::{build_mesh, Geometry1D};
use membrana::params::ModelParams;

fn main() -> membrana::Result<()> {
    let mesh = build_mesh(&Geometry1D::canonical(), 64)?;
    let params = ModelParams::benchmark();
    let ctx = CurveCtx::new(&mesh, &params)?;
    let (l1, l2) = (params.lambda1, params.lambda2);

    let branch = match ctx.trace_branch(l1, l2, &StepSpec::default())? {
        BranchOutcome::Traced(b) => b,
        BranchOutcome::Degenerate { mu0, mu1 } => {
            println!("window ({mu0}, {mu1}) is degenerate; nothing to trace");
            return Ok(());
        }
    };
    println!(
        "branch from mu_0 = {:.5} toward mu_1 = {:.5}: {} points, termination {:?}",
        branch.mu0,
        branch.mu1,
        branch.points.len(),
        branch.termination
    );
    let show = [0, branch.points.len() / 4, branch.points.len() / 2, branch.points.len() - 1];
    println!("    mu        arclength   min u1    min u2    max v");
    for &k in &show {
        let p = &branch.points[k];
        let (m1, m2, _) = p.state.mins();
        let vmax = p.state.v.iter().cloned().fold(0.0f64, f64::max);
        println!(
            "  {:9.5} {:10.5} {:9.5} {:9.5} {:9.5}",
            p.mu, p.arclength, m1, m2, vmax
        );
    }

    let bracket = ctx.estimate_mu_star(l1, l2, (0.0, 200.0))?;
    println!(
        "exclusion bracket: confirmed up to {:.4}, refuted from {:.4}{}",
        bracket.lower,
        bracket.upper,
        bracket
            .constructive
            .map(|c| format!(", comparison bound {c:.4}"))
            .unwrap_or_default()
    );
    Ok(())
}
