//! Classification map over the growth-rate plane with Newton confirmation,
//! rendered to SVG.
//!
//! ```text
//! cargo run --release --example region_map
//! ```

use membrana::curves::{Classification, Confirmation, CurveCtx, GridSpec};
use membrana::mesh::{build_mesh, Geometry1D};
use membrana::params::ModelParams;
use membrana::report::{render_region_svg, write_atomic, CurveSeries};

fn main() -> membrana::Result<()> {
    let mesh = build_mesh(&Geometry1D::canonical(), 64)?;
    let params = ModelParams::benchmark();
    let ctx = CurveCtx::new(&mesh, &params)?;

    let grid = GridSpec {
        x_range: (-1.0, 4.0),
        mu_range: (-0.5, 3.5),
        nx: 24,
        ny: 24,
    };
    let map = ctx.region_map(&grid, true, false)?;

    let mut counts = std::collections::BTreeMap::new();
    let mut confirmed = 0usize;
    for cell in &map.cells {
        *counts.entry(cell.class.as_str()).or_insert(0usize) += 1;
        if cell.confirmed == Confirmation::Confirmed {
            confirmed += 1;
        }
    }
    println!("cells by class over a {}x{} grid:", grid.nx, grid.ny);
    for (class, n) in &counts {
        println!("  {class:26} {n}");
    }
    let predicted = map
        .cells
        .iter()
        .filter(|c| c.class == Classification::CoexistencePredicted)
        .count();
    println!("Newton confirmed {confirmed} of {predicted} predicted cells");

    // overlay the bifurcation curve and write the figure
    let mut pts = Vec::new();
    for k in 0..80 {
        let x = grid.x_range.0 + (grid.x_range.1 - grid.x_range.0) * k as f64 / 79.0;
        let s = ctx.curve_g(x, params.lambda2)?;
        pts.push((x, s.value));
    }
    let svg = render_region_svg(
        &map,
        &[CurveSeries {
            name: "g".into(),
            color: "#2166ac".into(),
            points: pts,
        }],
        &[],
    );
    let path = std::path::Path::new("out/example_region_map.svg");
    write_atomic(path, svg.as_bytes())?;
    println!("figure written to {}", path.display());
    Ok(())
}
