//! Config-driven runner behind the command-line interface.
//!
//! Every run writes its outputs plus a `manifest.json` carrying the fully
//! resolved configuration, the command and the crate version, so any number
//! in the outputs can be regenerated from the manifest alone.

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::config::{BcConfig, EigProblem, RunConfig};
use crate::curves::{CurveCtx, GridSpec, SampleFlag, StepSpec};
use crate::error::{Error, Result};
use crate::logistic::{LogisticOutcome, SemitrivialOutcome};
use crate::mesh::{Mesh, RegionSel};
use crate::operator::SparseOperator;
use crate::report::{
    fmt_f64, render_region_svg, write_atomic, write_csv, write_json, CurveSeries, SvgMarker,
};
use crate::system::{
    evolve_parabolic, limit_system_solve, solve_coexistence, CoexistInit, CoexistenceOutcome,
    StateTriple,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub dump_matrix: bool,
}

/// Runs `command` against the configuration file; returns the process exit
/// code and prints human-readable diagnostics to standard error on failure.
pub fn run(command: &str, config_path: &Path, flags: &Flags) -> i32 {
    let cfg = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let out_dir = flags
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));

    let threads = flags.threads.or_else(|| {
        std::env::var("MEMBRANA_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        match b.build() {
            Ok(p) => p,
            Err(e) => {
                eprintln!("thread pool error: {e}");
                return EXIT_CONFIG;
            }
        }
    };

    let result = pool.install(|| dispatch(command, &cfg, &out_dir, flags));
    match result {
        Ok(()) => EXIT_OK,
        Err(Error::InvalidConfig(msg)) => {
            eprintln!("configuration error: {msg}");
            EXIT_CONFIG
        }
        Err(Error::InvalidGeometry(msg)) => {
            eprintln!("configuration error: {msg}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("solver error: {e}");
            EXIT_SOLVER
        }
    }
}

fn dispatch(command: &str, cfg: &RunConfig, out: &Path, flags: &Flags) -> Result<()> {
    let mesh = cfg.geometry.mesh()?;
    write_manifest(command, cfg, out)?;
    match command {
        "eig" => cmd_eig(cfg, &mesh, out, flags),
        "logistic" => cmd_logistic(cfg, &mesh, out, flags),
        "semitrivial" => cmd_semitrivial(cfg, &mesh, out),
        "coexist" => cmd_coexist(cfg, &mesh, out),
        "evolve" => cmd_evolve(cfg, &mesh, out),
        "curve-h" => cmd_curve_h(cfg, &mesh, out),
        "curve-g" => cmd_curve_g(cfg, &mesh, out),
        "curve-ghat" => cmd_curve_ghat(cfg, &mesh, out),
        "mu0" => cmd_mu0(cfg, &mesh, out),
        "mu1" => cmd_mu1(cfg, &mesh, out),
        "mu-star" => cmd_mu_star(cfg, &mesh, out),
        "region-map" => cmd_region_map(cfg, &mesh, out),
        "branch" => cmd_branch(cfg, &mesh, out),
        "limit-system" => cmd_limit_system(cfg, &mesh, out),
        "oracle" => cmd_oracle(cfg, out),
        other => Err(Error::InvalidConfig(format!("unknown command `{other}`"))),
    }
}

fn write_manifest(command: &str, cfg: &RunConfig, out: &Path) -> Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "config": serde_json::to_value(cfg)?,
    });
    write_json(&out.join("manifest.json"), &manifest)
}

fn require<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T> {
    block.as_ref().ok_or_else(|| {
        Error::InvalidConfig(format!("config is missing the `{name}` block"))
    })
}

fn dump_matrix(op: &SparseOperator, out: &Path) -> Result<()> {
    let mut text = String::new();
    for i in 0..op.dim() {
        for &(j, v) in op.row(i) {
            text.push_str(&format!("{i} {j} {}\n", fmt_f64(v)));
        }
    }
    write_atomic(&out.join("matrix.txt"), text.as_bytes())
}

/// Rows `x,region,value` over a region's nodes.
fn field_csv(mesh: &Mesh, region: RegionSel, values: &[f64]) -> Vec<Vec<String>> {
    let xs = mesh.coords(region);
    let tag = |local: usize| -> &'static str {
        match region {
            RegionSel::Omega1 => "omega1",
            RegionSel::Omega2 => "omega2",
            RegionSel::Omega => {
                let vi = local;
                if vi == mesh.v_at_a || vi == mesh.v_at_b {
                    "sigma"
                } else if vi > mesh.v_at_a && vi < mesh.v_at_b {
                    "omega1"
                } else {
                    "omega2"
                }
            }
        }
    };
    xs.iter()
        .enumerate()
        .map(|(i, x)| vec![fmt_f64(*x), tag(i).to_string(), fmt_f64(values[i])])
        .collect()
}

/// Rows `x,region,u1,u2,v` over the single-valued grid; membrane fields are
/// blank where they do not live, and both present at the interface.
fn state_csv(mesh: &Mesh, s: &StateTriple) -> Vec<Vec<String>> {
    let mut u1_at = vec![None; mesh.nv()];
    let mut u2_at = vec![None; mesh.nv()];
    for l in 0..mesh.n1() {
        u1_at[mesh.v_index_of(RegionSel::Omega1, l)] = Some(s.u1[l]);
    }
    for l in 0..mesh.n2() {
        u2_at[mesh.v_index_of(RegionSel::Omega2, l)] = Some(s.u2[l]);
    }
    mesh.v_nodes
        .iter()
        .enumerate()
        .map(|(vi, x)| {
            let region = if vi == mesh.v_at_a || vi == mesh.v_at_b {
                "sigma"
            } else if vi > mesh.v_at_a && vi < mesh.v_at_b {
                "omega1"
            } else {
                "omega2"
            };
            vec![
                fmt_f64(*x),
                region.to_string(),
                u1_at[vi].map(fmt_f64).unwrap_or_default(),
                u2_at[vi].map(fmt_f64).unwrap_or_default(),
                fmt_f64(s.v[vi]),
            ]
        })
        .collect()
}

fn cmd_eig(cfg: &RunConfig, mesh: &Mesh, out: &Path, flags: &Flags) -> Result<()> {
    let e = require(&cfg.eig, "eig")?;
    let d = cfg.params.d;
    let (result, region, op) = match e.problem {
        EigProblem::Sigma1 => {
            let region: RegionSel = e
                .region
                .ok_or_else(|| Error::InvalidConfig("sigma1 needs a `region`".into()))?
                .into();
            let c = vec![e.c.unwrap_or(0.0); mesh.field_len(region)];
            let bc = BcConfig::spec(e.bc_sigma, e.bc_gamma);
            let op = crate::operator::assemble_scalar(mesh, region, d, &c, &bc)?;
            (crate::eigen::sigma1(mesh, region, d, &c, &bc)?, region, op)
        }
        EigProblem::Lambda1 => {
            let c1 = vec![e.c1.unwrap_or(0.0); mesh.n1()];
            let c2 = vec![e.c2.unwrap_or(0.0); mesh.n2()];
            let op = crate::operator::assemble_interface(mesh, d, &c1, &c2)?;
            (
                crate::eigen::lambda1(mesh, d, &c1, &c2)?,
                RegionSel::Omega1,
                op,
            )
        }
    };
    if flags.dump_matrix {
        dump_matrix(&op, out)?;
    }
    write_json(
        &out.join("eig.json"),
        &json!({
            "value": result.value,
            "residual": result.residual,
            "iterations": result.iterations,
        }),
    )?;
    if e.eigenfunction_csv {
        let rows = match e.problem {
            EigProblem::Sigma1 => field_csv(mesh, region, &result.eigenfunction),
            EigProblem::Lambda1 => {
                // duplicated grid: emit with the node's own region tag
                (0..mesh.n_total())
                    .map(|gi| {
                        let tag = match mesh.region[gi] {
                            crate::mesh::Region::Omega1 => "omega1",
                            crate::mesh::Region::Omega2 => "omega2",
                        };
                        vec![
                            fmt_f64(mesh.nodes[gi]),
                            tag.to_string(),
                            fmt_f64(result.eigenfunction[gi]),
                        ]
                    })
                    .collect()
            }
        };
        write_csv(&out.join("eigenfunction.csv"), &["x", "region", "phi"], rows)?;
    }
    Ok(())
}

fn cmd_logistic(cfg: &RunConfig, mesh: &Mesh, out: &Path, flags: &Flags) -> Result<()> {
    let l = require(&cfg.logistic, "logistic")?;
    let region: RegionSel = l.region.into();
    let mu = l.mu.unwrap_or(cfg.params.mu);
    let beta = l.beta.unwrap_or(cfg.params.beta);
    let c = vec![l.c; mesh.field_len(region)];
    let bc = BcConfig::spec(l.bc_sigma, l.bc_gamma);
    if flags.dump_matrix {
        let op = crate::operator::assemble_scalar(mesh, region, 1.0, &c, &bc)?;
        dump_matrix(&op, out)?;
    }
    match crate::logistic::solve_logistic_scalar(mesh, region, mu, &c, beta, &bc)? {
        LogisticOutcome::Positive(f) => {
            let min = f.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            write_json(
                &out.join("logistic.json"),
                &json!({"outcome": "positive", "min": min, "max": max, "mu": mu}),
            )?;
            write_csv(
                &out.join("solution.csv"),
                &["x", "region", "u"],
                field_csv(mesh, region, &f),
            )?;
        }
        LogisticOutcome::NoPositiveSolution => {
            write_json(
                &out.join("logistic.json"),
                &json!({"outcome": "no_positive_solution", "mu": mu}),
            )?;
        }
    }
    Ok(())
}

fn cmd_semitrivial(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let p = &cfg.params;
    match crate::logistic::solve_membrane_logistic(
        mesh,
        p.lambda1,
        p.lambda2,
        &p.alpha1,
        &p.alpha2,
    )? {
        SemitrivialOutcome::Positive(pair) => {
            let summary = json!({
                "outcome": "positive",
                "existence_eigenvalue": pair.existence_eigenvalue,
                "residual": pair.residual,
                "theta1_max": pair.theta1.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                "theta2_max": pair.theta2.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            });
            write_json(&out.join("semitrivial.json"), &summary)?;
            let state = StateTriple {
                u1: pair.theta1.clone(),
                u2: pair.theta2.clone(),
                v: vec![0.0; mesh.nv()],
            };
            write_csv(
                &out.join("solution.csv"),
                &["x", "region", "u1", "u2", "v"],
                state_csv(mesh, &state),
            )?;
        }
        SemitrivialOutcome::NoPositiveSolution => {
            write_json(
                &out.join("semitrivial.json"),
                &json!({"outcome": "no_positive_solution"}),
            )?;
        }
        SemitrivialOutcome::Indeterminate => {
            write_json(
                &out.join("semitrivial.json"),
                &json!({"outcome": "indeterminate"}),
            )?;
        }
    }
    Ok(())
}

fn cmd_coexist(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    match solve_coexistence(mesh, &cfg.params, &CoexistInit::Auto)? {
        CoexistenceOutcome::Found(s) => {
            let (m1, m2, mv) = s.state.mins();
            let (x1, x2, xv) = s.state.maxs();
            write_json(
                &out.join("coexist.json"),
                &json!({
                    "outcome": "coexistence",
                    "residual": s.residual,
                    "iterations": s.iterations,
                    "min": {"u1": m1, "u2": m2, "v": mv},
                    "max": {"u1": x1, "u2": x2, "v": xv},
                }),
            )?;
            write_csv(
                &out.join("solution.csv"),
                &["x", "region", "u1", "u2", "v"],
                state_csv(mesh, &s.state),
            )?;
        }
        CoexistenceOutcome::NotFound(reason) => {
            write_json(
                &out.join("coexist.json"),
                &json!({"outcome": "not_found", "reason": format!("{reason:?}")}),
            )?;
        }
    }
    Ok(())
}

fn cmd_evolve(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let e = require(&cfg.evolve, "evolve")?;
    let p = &cfg.params;
    let init = match e.init_uniform {
        Some([u1, u2, v]) => StateTriple {
            u1: vec![u1; mesh.n1()],
            u2: vec![u2; mesh.n2()],
            v: vec![v; mesh.nv()],
        },
        None => match crate::logistic::solve_membrane_logistic(
            mesh,
            p.lambda1,
            p.lambda2,
            &p.alpha1,
            &p.alpha2,
        )? {
            SemitrivialOutcome::Positive(pair) => StateTriple {
                u1: pair.theta1,
                u2: pair.theta2,
                v: vec![0.05 * p.mu.max(0.1); mesh.nv()],
            },
            _ => StateTriple {
                u1: vec![0.1; mesh.n1()],
                u2: vec![0.1; mesh.n2()],
                v: vec![0.1; mesh.nv()],
            },
        },
    };
    let state = evolve_parabolic(mesh, p, &init, e.t_end, e.dt)?;
    let (m1, m2, mv) = state.mins();
    let (x1, x2, xv) = state.maxs();
    write_json(
        &out.join("evolve.json"),
        &json!({
            "t_end": e.t_end,
            "min": {"u1": m1, "u2": m2, "v": mv},
            "max": {"u1": x1, "u2": x2, "v": xv},
        }),
    )?;
    write_csv(
        &out.join("state.csv"),
        &["x", "region", "u1", "u2", "v"],
        state_csv(mesh, &state),
    )?;
    Ok(())
}

fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect()
}

fn cmd_curve_h(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let c = require(&cfg.curve_h, "curve_h")?;
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let rows: Vec<Vec<String>> = linspace(c.min, c.max, c.samples)
        .into_iter()
        .map(|nu2| -> Result<Vec<String>> {
            let s = ctx.curve_h(nu2)?;
            Ok(vec![
                fmt_f64(s.abscissa),
                fmt_f64(s.value),
                s.flag.as_str().to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    write_csv(&out.join("curve_h.csv"), &["nu2", "H", "flag"], rows)?;
    let slope = ctx.curve_h_slope_at_zero()?;
    write_json(
        &out.join("curve_h.json"),
        &json!({
            "sigma1": ctx.sigma1,
            "sigma2": ctx.sigma2,
            "slope_at_zero": slope,
        }),
    )
}

fn cmd_curve_g(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let c = require(&cfg.curve_g, "curve_g")?;
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let l2 = cfg.params.lambda2;
    let rows: Vec<Vec<String>> = linspace(c.min, c.max, c.samples)
        .into_iter()
        .map(|l1| -> Result<Vec<String>> {
            let s = ctx.curve_g(l1, l2)?;
            Ok(vec![
                fmt_f64(s.abscissa),
                fmt_f64(s.value),
                s.flag.as_str().to_string(),
            ])
        })
        .collect::<Result<_>>()?;
    write_csv(&out.join("curve_g.csv"), &["lambda1", "g", "flag"], rows)
}

fn cmd_curve_ghat(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let c = require(&cfg.curve_ghat, "curve_ghat")?;
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let mut ghat_rows = Vec::new();
    let mut sigma_rows = Vec::new();
    for mu in linspace(c.min.max(0.0), c.max, c.samples) {
        let (s0, gh) = ctx.sigma0_and_ghat(mu)?;
        ghat_rows.push(vec![fmt_f64(mu), fmt_f64(gh), "ok".to_string()]);
        sigma_rows.push(vec![fmt_f64(mu), fmt_f64(s0), "ok".to_string()]);
    }
    write_csv(&out.join("curve_ghat.csv"), &["mu", "Ghat", "flag"], ghat_rows)?;
    write_csv(&out.join("curve_sigma0.csv"), &["mu", "sigma0", "flag"], sigma_rows)
}

fn cmd_mu0(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let mu0 = ctx.mu0(cfg.params.lambda1, cfg.params.lambda2)?;
    write_json(&out.join("mu0.json"), &json!({"mu0": mu0}))
}

fn cmd_mu1(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let mu_max = cfg.mu1.as_ref().map(|m| m.mu_max).unwrap_or(1e3);
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    match ctx.mu1(cfg.params.lambda1, cfg.params.lambda2, mu_max)? {
        Some(m) => write_json(
            &out.join("mu1.json"),
            &json!({"mu1": m.value, "residual": m.residual}),
        ),
        None => write_json(
            &out.join("mu1.json"),
            &json!({"mu1": serde_json::Value::Null, "note": "no sign change in the window"}),
        ),
    }
}

fn cmd_mu_star(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let m = require(&cfg.mu_star, "mu_star")?;
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let bracket = if m.equal_lambda {
        ctx.estimate_lambda_star(cfg.params.mu, (m.window[0], m.window[1]))?
    } else {
        ctx.estimate_mu_star(
            cfg.params.lambda1,
            cfg.params.lambda2,
            (m.window[0], m.window[1]),
        )?
    };
    write_json(
        &out.join("mu_star.json"),
        &json!({
            "lower": bracket.lower,
            "upper": bracket.upper,
            "constructive": bracket.constructive,
            "swept": if m.equal_lambda { "lambda" } else { "mu" },
        }),
    )
}

fn cmd_region_map(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let r = require(&cfg.region_map, "region_map")?;
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let grid = GridSpec {
        x_range: (r.lambda1[0], r.lambda1[1]),
        mu_range: (r.mu[0], r.mu[1]),
        nx: r.nx,
        ny: r.ny,
    };
    let map = ctx.region_map(&grid, r.confirm, r.equal_lambda)?;
    let rows: Vec<Vec<String>> = map
        .cells
        .iter()
        .map(|c| {
            vec![
                fmt_f64(c.lambda1),
                fmt_f64(c.mu),
                c.class.as_str().to_string(),
                c.confirmed.as_str().to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("region_map.csv"),
        &["lambda1", "mu", "class", "confirmed"],
        rows,
    )?;
    if r.svg {
        let mut curves = Vec::new();
        // bifurcation curve mu = g(x)
        let mut g_pts = Vec::new();
        for x in linspace(grid.x_range.0, grid.x_range.1, 120) {
            let l2 = if r.equal_lambda { x } else { cfg.params.lambda2 };
            let s = ctx.curve_g(x, l2)?;
            g_pts.push((x, if s.flag == SampleFlag::Ok { s.value } else { f64::NAN }));
        }
        curves.push(CurveSeries {
            name: "g".into(),
            color: "#2166ac".into(),
            points: g_pts,
        });
        // threshold curve x = G(mu) (or Ghat in the equal mode)
        let mut t_pts = Vec::new();
        for mu in linspace(grid.mu_range.0.max(0.0), grid.mu_range.1, 120) {
            let x = if r.equal_lambda {
                match ctx.sigma0_and_ghat(mu) {
                    Ok((_, gh)) => gh,
                    Err(_) => f64::NAN,
                }
            } else {
                let s = ctx.curve_big_g(mu, cfg.params.lambda2)?;
                if s.flag == SampleFlag::Ok {
                    s.value
                } else {
                    f64::NAN
                }
            };
            t_pts.push((x, mu));
        }
        curves.push(CurveSeries {
            name: if r.equal_lambda { "Ghat" } else { "G" }.into(),
            color: "#b2182b".into(),
            points: t_pts,
        });
        let mut markers = Vec::new();
        if !r.equal_lambda {
            let s = ctx.curve_big_g(0.0, cfg.params.lambda2)?;
            if s.flag == SampleFlag::Ok {
                markers.push(SvgMarker {
                    x: s.value,
                    y: 0.0,
                    label: "G(0)".into(),
                });
            }
        }
        let svg = render_region_svg(&map, &curves, &markers);
        write_atomic(&out.join("region_map.svg"), svg.as_bytes())?;
    }
    Ok(())
}

fn cmd_branch(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let b = cfg.branch.clone().unwrap_or(crate::config::BranchConfig {
        step: 1e-2,
        min_step: 1e-7,
        max_points: 200,
    });
    let ctx = CurveCtx::new(mesh, &cfg.params)?;
    let spec = StepSpec {
        initial: b.step,
        min_step: b.min_step,
        max_points: b.max_points,
    };
    match ctx.trace_branch(cfg.params.lambda1, cfg.params.lambda2, &spec)? {
        crate::curves::BranchOutcome::Traced(branch) => {
            let rows: Vec<Vec<String>> = branch
                .points
                .iter()
                .map(|p| {
                    let (m1, m2, mv) = p.state.mins();
                    vec![
                        fmt_f64(p.mu),
                        fmt_f64(p.arclength),
                        fmt_f64(m1),
                        fmt_f64(m2),
                        fmt_f64(mv),
                        fmt_f64(p.residual),
                    ]
                })
                .collect();
            write_csv(
                &out.join("branch.csv"),
                &["mu", "arclength", "min_u1", "min_u2", "min_v", "residual"],
                rows,
            )?;
            write_json(
                &out.join("branch.json"),
                &json!({
                    "mu0": branch.mu0,
                    "mu1": branch.mu1,
                    "points": branch.points.len(),
                    "termination": format!("{:?}", branch.termination),
                }),
            )
        }
        crate::curves::BranchOutcome::Degenerate { mu0, mu1 } => write_json(
            &out.join("branch.json"),
            &json!({
                "mu0": mu0,
                "mu1": mu1,
                "points": 0,
                "termination": "Degenerate",
            }),
        ),
    }
}

fn cmd_limit_system(cfg: &RunConfig, mesh: &Mesh, out: &Path) -> Result<()> {
    let l = require(&cfg.limit_system, "limit_system")?;
    let (u2, v) = limit_system_solve(mesh, &cfg.params, l.m)?;
    let xs2 = mesh.coords(RegionSel::Omega2);
    let rows: Vec<Vec<String>> = xs2
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let vi = mesh.v_index_of(RegionSel::Omega2, i);
            vec![fmt_f64(*x), "omega2".to_string(), fmt_f64(u2[i]), fmt_f64(v[vi])]
        })
        .collect();
    write_csv(
        &out.join("limit_system.csv"),
        &["x", "region", "u2", "v"],
        rows,
    )?;
    if let Some(list) = &l.lambda1_list {
        let study = crate::curves::limit_convergence_study(mesh, &cfg.params, list, l.m)?;
        let rows: Vec<Vec<String>> = (0..study.lambda1_values.len())
            .map(|i| {
                vec![
                    fmt_f64(study.lambda1_values[i]),
                    fmt_f64(study.min_u1[i]),
                    fmt_f64(study.v_distance[i]),
                    fmt_f64(study.v_inner_sup[i]),
                ]
            })
            .collect();
        write_csv(
            &out.join("limit_study.csv"),
            &["lambda1", "min_u1", "v_distance", "v_inner_sup"],
            rows,
        )?;
    }
    write_json(&out.join("limit_system.json"), &json!({"m": l.m}))
}

#[cfg(feature = "oracle")]
fn cmd_oracle(cfg: &RunConfig, out: &Path) -> Result<()> {
    use crate::config::OracleEnd;
    let o = require(&cfg.oracle, "oracle")?;
    let conv = |e: OracleEnd| match e {
        OracleEnd::Neumann => crate::oracle::EndCondition::Neumann,
        OracleEnd::Robin { g } => crate::oracle::EndCondition::Robin(g),
        OracleEnd::Dirichlet => crate::oracle::EndCondition::Dirichlet,
    };
    let spec = crate::oracle::TranscendentalSpec {
        length: o.length,
        left: conv(o.left),
        right: conv(o.right),
    };
    let rho = crate::oracle::interval_eigen_oracle(&spec)?;
    write_json(&out.join("oracle.json"), &json!({"rho": rho}))
}

#[cfg(not(feature = "oracle"))]
fn cmd_oracle(_cfg: &RunConfig, _out: &Path) -> Result<()> {
    Err(Error::InvalidConfig(
        "this build excludes the oracle feature".into(),
    ))
}
