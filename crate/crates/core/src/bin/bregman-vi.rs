use std::path::PathBuf;
use std::process::ExitCode;

use bregman_vi::harness::{cmd_reproduce, cmd_run, cmd_sweep, cmd_verify, HarnessError, Overrides};
use clap::{Args, Parser, Subcommand};

/// Bregman proximal methods for monotone variational inequalities.
#[derive(Parser)]
#[command(name = "bregman-vi", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of iterations, overriding the config.
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Random seed for sampled checks and estimators.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run { config: PathBuf },
    /// Regenerate a reference figure or table: fig1, table1 or table2.
    Reproduce { target: String },
    /// Run an invariant suite: prox, energy, lemmas, rates or all.
    Verify { suite: String },
    /// Run a configuration over a parameter grid.
    Sweep {
        config: PathBuf,
        /// `<path>=<v1,v2,...>`; repeat for a cartesian grid.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
    },
}

fn dispatch(cli: Cli) -> Result<(), HarnessError> {
    let g = cli.global;
    let ov = Overrides { out: g.out, horizon: g.horizon, seed: g.seed, workers: g.workers };
    match cli.command {
        Command::Run { config } => {
            let rec = cmd_run(&config, &ov)?;
            print!("{}", rec.summary);
        }
        Command::Reproduce { target } => {
            let report = cmd_reproduce(&target, &ov)?;
            print!("{}", report.to_csv()?);
            if !report.all_pass() {
                let failed = report.passed.iter().filter(|p| !**p).count();
                return Err(HarnessError::VerifyFailed(failed));
            }
        }
        Command::Verify { suite } => {
            cmd_verify(&suite, &ov)?;
        }
        Command::Sweep { config, params } => {
            for e in cmd_sweep(&config, &params, &ov)? {
                println!("{} {} {} {}", e.dir, e.label, e.status, e.stop);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
