use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ladder_ent_cli::config::{Command, RunConfig};
use ladder_ent_cli::run::run_to_dir;

#[derive(Parser)]
#[command(name = "ladder-ent", version, about = "Genuine multisite entanglement of Heisenberg and RVB ladders")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// GGM of exact ground states.
    ExactGgm(Flags),
    /// GGM of RVB states.
    RvbGgm(Flags),
    /// Exact ground state against the RVB state: fidelity, energy gap, GGMs.
    Compare(Flags),
    /// GGM over a grid of geometries for one model.
    Scan(Flags),
    /// Finite-size scaling fits and the odd/even leg report.
    Fit(Flags),
    /// Oracle checks.
    Validate(Flags),
}

#[derive(Args)]
struct Flags {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leg counts: `3`, `1,3` or `2..6`.
    #[arg(long)]
    legs: Option<String>,
    /// Rung counts, same forms as --legs.
    #[arg(long)]
    rungs: Option<String>,
    /// open or periodic.
    #[arg(long)]
    boundary: Option<String>,
    /// exact, rvb or rvb-recursive.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    j: Option<String>,
    /// XXZ anisotropy.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// full or restricted.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, env = "LADDER_ENT_THREADS")]
    jobs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Lanczos convergence tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Divide the energy gap by n.
    #[arg(long)]
    delta_e_per_site: bool,
    /// results.csv to fit instead of computing.
    #[arg(long)]
    input: Option<String>,
    /// Trend of the fitted data: auto, + (increasing), - (decreasing) or
    /// parity (odd legs +, even legs -).
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    /// Smallest even rung count entering fits.
    #[arg(long)]
    fit_min_rungs: Option<String>,
    /// spectral, rvb-recursion, restricted, identities or all.
    #[arg(long)]
    what: Option<String>,
    #[arg(long)]
    max_spins: Option<String>,
}

fn build_config(command: Command, f: Flags) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &f.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_text(&text).map_err(|e| e.to_string())?;
        // A file written for another subcommand still runs this one.
        cfg.command = command;
    }
    let pairs = [
        ("legs", f.legs),
        ("rungs", f.rungs),
        ("boundary", f.boundary),
        ("model", f.model),
        ("j", f.j),
        ("delta", f.delta),
        ("strategy", f.strategy),
        ("jobs", f.jobs),
        ("seed", f.seed),
        ("out", f.out),
        ("tol", f.tol),
        ("input", f.input),
        ("sign", f.sign),
        ("fit-min-rungs", f.fit_min_rungs),
        ("what", f.what),
        ("max-spins", f.max_spins),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(|e| e.to_string())?;
        }
    }
    if f.delta_e_per_site {
        cfg.delta_e_per_site = true;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::ExactGgm(f) => (Command::ExactGgm, f),
        Cmd::RvbGgm(f) => (Command::RvbGgm, f),
        Cmd::Compare(f) => (Command::Compare, f),
        Cmd::Scan(f) => (Command::Scan, f),
        Cmd::Fit(f) => (Command::Fit, f),
        Cmd::Validate(f) => (Command::Validate, f),
    };
    let cfg = match build_config(command, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let status = run_to_dir(&cfg);
    if let Some(err) = &status.error_json {
        eprintln!("{err}");
    } else if status.exit_code == 1 {
        eprintln!("validation failed; see {}", cfg.out.join("validate.json").display());
    } else {
        eprintln!("wrote {}", cfg.out.display());
    }
    ExitCode::from(status.exit_code as u8)
}
