use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use imcf_lab_cli::{combined_exit_code, run_all, Command, Context};

#[derive(Parser)]
#[command(name = "imcf-lab", version, about = "Run curvature-flow and Penrose experiments from config files")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment config (TOML); repeat for several experiments.
    #[arg(long = "config", global = true, value_name = "PATH")]
    configs: Vec<PathBuf>,

    /// Output root; each experiment writes to OUT/<name>/.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for independent experiments.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,

    /// Reserved for stochastic experiments; currently unused.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Multiplies every tolerance in the configs.
    #[arg(long = "tolerance-scale", global = true, default_value_t = 1.0, value_name = "FACTOR")]
    tolerance_scale: f64,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Functionals, identity residuals and inequality margins of a shape.
    VerifyStatics,
    /// Evolve a shape and audit the monotone quantities.
    RunFlow,
    /// Mass computations and the Penrose inequality for a graph profile.
    Penrose,
    /// Empirical convergence orders on a resolution ladder.
    Convergence,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.configs.is_empty() {
        eprintln!("error: at least one --config is required");
        return ExitCode::from(2);
    }
    let cmd = match cli.command {
        Cmd::VerifyStatics => Command::VerifyStatics,
        Cmd::RunFlow => Command::RunFlow,
        Cmd::Penrose => Command::Penrose,
        Cmd::Convergence => Command::Convergence,
    };
    let ctx = Context { out: cli.out, tolerance_scale: cli.tolerance_scale, seed: cli.seed };
    let results = match run_all(cmd, &cli.configs, &ctx, cli.jobs) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for r in &results {
        let path = r.config.display();
        match &r.outcome {
            Ok(rep) if rep.pass => println!("{path}: PASS -> {}", rep.dir.display()),
            Ok(rep) => println!("{path}: FAIL [{}] -> {}", rep.failed.join(", "), rep.dir.display()),
            Err(e) => eprintln!("{path}: ERROR {e}"),
        }
    }
    ExitCode::from(combined_exit_code(&results))
}
