use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use magdisk::config::{BetaGrid, OutputFormat, SolverConfig};
use magdisk::error::Error;
use magdisk::report;

#[derive(Parser, Debug)]
#[command(name = "magdisk", version, about = "Ground-state curves of the magnetic Neumann Laplacian on the disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    n_max: Option<usize>,

    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,

    /// START:STOP:STEP
    #[arg(long, global = true)]
    beta_grid: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// η(n, β) curves for n ≤ 20
    Curves,
    /// Crossing points from the two-mode system and the implicit equation
    Crossings,
    /// De Gennes constants and the λ₂ profile
    Constants,
    /// Left and right derivatives at the crossings
    Derivatives,
    /// Gap sequence, its extrapolation and the expansion checks
    Richardson,
    /// Finite-range scans of the monotonicity conjectures
    Conjectures,
}

const EXIT_COMPUTATION: u8 = 1;
const EXIT_CONJECTURE: u8 = 2;
const EXIT_ARGS: u8 = 3;

fn build_config(cli: &Cli) -> Result<SolverConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => SolverConfig::from_file(path)?,
        None => SolverConfig::default(),
    };
    if let Some(n) = cli.n_max {
        cfg.n_max = n;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse::<OutputFormat>()?;
    }
    if let Some(g) = &cli.beta_grid {
        cfg.beta_grid = g.parse::<BetaGrid>()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGS } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("magdisk: {e}");
            return ExitCode::from(EXIT_ARGS);
        }
    };

    let result = match cli.command {
        Command::Curves => report::cmd_curves(&cfg).map(|p| (p, true)),
        Command::Crossings => report::cmd_crossings(&cfg).map(|p| (p, true)),
        Command::Constants => report::cmd_constants(&cfg).map(|p| (p, true)),
        Command::Derivatives => report::cmd_derivatives(&cfg).map(|p| (p, true)),
        Command::Richardson => report::cmd_richardson(&cfg).map(|p| (p, true)),
        Command::Conjectures => report::cmd_conjectures(&cfg).map(|(p, r)| {
            for item in &r.items {
                let status = if item.passed { "pass" } else { "FAIL" };
                println!("{status} {} value={} witness={}", item.label, item.value, item.witness);
            }
            (p, r.passed())
        }),
    };

    match result {
        Ok((paths, ok)) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONJECTURE)
            }
        }
        Err(e) => {
            eprintln!("magdisk: {e}");
            ExitCode::from(EXIT_COMPUTATION)
        }
    }
}
