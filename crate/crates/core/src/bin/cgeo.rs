use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgeo::cli_io::{run, Mode, Overrides};

#[derive(Parser)]
#[command(name = "cgeo", version, about = "Solve and verify sigma_k geodesic equations on periodic tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the admissible initial field.
    Init(Common),
    /// Solve the strict equation by continuation.
    Solve(Common),
    /// Solve the degenerate equation through an epsilon schedule.
    Geodesic(Common),
    /// Solve the elliptic slice equations.
    Slice(Common),
    /// Run the verification suite.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides run.out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Serial linear algebra and zero timings in logs.
    #[arg(long)]
    deterministic: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Init(c) => (Mode::Init, c),
        Command::Solve(c) => (Mode::Solve, c),
        Command::Geodesic(c) => (Mode::Geodesic, c),
        Command::Slice(c) => (Mode::Slice, c),
        Command::Verify(c) => (Mode::Verify, c),
    };
    let overrides = Overrides {
        mode: Some(mode),
        out: common.out,
        seed: common.seed,
        deterministic: common.deterministic,
    };
    ExitCode::from(run(&common.config, &overrides) as u8)
}
