//! Thin command-line front end; all work happens in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "membrana", version, about = "Membrane-coupled competition system toolkit")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to MEMBRANA_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dump assembled operators as `row col value` text.
    #[arg(long, global = true)]
    dump_matrix: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenvalue of a scalar or interface problem.
    Eig,
    /// Positive solution of a scalar logistic problem.
    Logistic,
    /// Membrane logistic pair.
    Semitrivial,
    /// Coexistence state of the full system.
    Coexist,
    /// Time evolution toward an attractor.
    Evolve,
    /// Interface curve samples.
    CurveH,
    /// Bifurcation curve samples.
    CurveG,
    /// Equal-growth threshold curve samples.
    CurveGhat,
    /// Bifurcation point.
    Mu0,
    /// Window end in the roaming growth rate.
    Mu1,
    /// Exclusion-threshold bracket.
    MuStar,
    /// Classification map over a parameter grid.
    RegionMap,
    /// Coexistence branch continuation.
    Branch,
    /// Large-growth limit system on the outer region.
    LimitSystem,
    /// Transcendental interval eigenvalue reference.
    Oracle,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Logistic => "logistic",
            Command::Semitrivial => "semitrivial",
            Command::Coexist => "coexist",
            Command::Evolve => "evolve",
            Command::CurveH => "curve-h",
            Command::CurveG => "curve-g",
            Command::CurveGhat => "curve-ghat",
            Command::Mu0 => "mu0",
            Command::Mu1 => "mu1",
            Command::MuStar => "mu-star",
            Command::RegionMap => "region-map",
            Command::Branch => "branch",
            Command::LimitSystem => "limit-system",
            Command::Oracle => "oracle",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = membrana::app::Flags {
        out: cli.out,
        threads: cli.threads,
        dump_matrix: cli.dump_matrix,
    };
    ExitCode::from(membrana::app::run(cli.command.name(), &cli.config, &flags) as u8)
}
