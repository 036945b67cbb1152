//! Time evolution as a stability oracle: inside the coexistence window the
//! dynamics settle on the stationary coexistence state; beyond the exclusion
//! threshold the membrane species die out.
//!
//! ```text
//! cargo run --release --example parabolic_attractor
//! ```

use membrana::mesh::{build_mesh, Geometry1D};
use membrana::params::ModelParams;
use membrana::system::{
    evolve_parabolic, solve_coexistence, CoexistInit, CoexistenceOutcome, StateTriple,
};

fn main() -> membrana::Result<()> {
    let mesh = build_mesh(&Geometry1D::canonical(), 64)?;
    let params = ModelParams::benchmark(); // mu sits inside the window

    let found = match solve_coexistence(&mesh, &params, &CoexistInit::Auto)? {
        CoexistenceOutcome::Found(s) => s,
        CoexistenceOutcome::NotFound(r) => {
            println!("no stationary coexistence state ({r:?})");
            return Ok(());
        }
    };
    println!(
        "stationary state found: residual {:.1e} after {} Newton steps",
        found.residual, found.iterations
    );

    // it is a fixed point of the evolution
    let evolved = evolve_parabolic(&mesh, &params, &found.state, 2.0, 1e-2)?;
    println!(
        "fixed-point drift over t = 2: {:.2e}",
        evolved.sup_distance(&found.state)
    );

    // generic positive data are attracted to it
    let init = StateTriple {
        u1: vec![0.4; mesh.n1()],
        u2: vec![0.3; mesh.n2()],
        v: vec![0.2; mesh.nv()],
    };
    let mut state = init;
    for t in [5.0, 20.0, 80.0] {
        state = evolve_parabolic(&mesh, &params, &state, t, 1e-2)?;
        println!(
            "  after t += {t:5.1}: distance to the stationary state {:.3e}",
            state.sup_distance(&found.state)
        );
    }

    // far beyond the window the roaming species excludes the others
    let mut far = params.clone();
    far.mu = 12.0;
    let end = evolve_parabolic(
        &mesh,
        &far,
        &StateTriple {
            u1: vec![0.4; mesh.n1()],
            u2: vec![0.3; mesh.n2()],
            v: vec![0.2; mesh.nv()],
        },
        120.0,
        1e-2,
    )?;
    let (m1, m2, _) = end.mins();
    let vmax = end.v.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "mu = {}: membrane species collapse to ({m1:.1e}, {m2:.1e}), roaming species -> {vmax:.3}",
        far.mu
    );
    Ok(())
}
