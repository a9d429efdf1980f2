use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use funprob::hmc::InitStrategy;
use funprob_cli::commands::{diagnose, fit, render_summary, simulate_to, FitOptions};
use funprob_cli::simulate::{default_n, parse_params};
use funprob_cli::{CliError, ModelKind};

#[derive(Debug, Parser)]
#[command(
    name = "funprob",
    version,
    about = "Simulate, fit and diagnose the example Bayesian models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitChoice {
    /// Draw from the priors.
    Prior,
    /// Uniform on [-2, 2] in unconstrained space.
    Uniform,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset.
    Simulate {
        model: ModelKind,
        /// Number of rows (per class for randeffects).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides such as beta0=4,sigma=0.5.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the posterior and write draws.csv and summary.csv.
    Fit {
        model: ModelKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        warmup: usize,
        #[arg(long, default_value_t = 50_000)]
        iters: usize,
        #[arg(long, default_value_t = 5)]
        thin: usize,
        #[arg(long, default_value_t = 5)]
        leapfrog_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        /// Prior standard deviation of regression coefficients.
        #[arg(long, default_value_t = 10.0)]
        prior_sd: f64,
        /// Starting point; defaults to uniform for randeffects, prior otherwise.
        #[arg(long)]
        init: Option<InitChoice>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarise a draws file.
    Diagnose {
        #[arg(long)]
        draws: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            model,
            n,
            seed,
            params,
            out,
        } => {
            let overrides = parse_params(&params)?;
            let sim = simulate_to(
                model,
                &overrides,
                n.unwrap_or_else(|| default_n(model)),
                seed,
                &out,
            )?;
            println!("wrote {} rows to {}", sim.rows.len(), out.display());
        }
        Command::Fit {
            model,
            data,
            warmup,
            iters,
            thin,
            leapfrog_steps,
            seed,
            chains,
            prior_sd,
            init,
            out,
        } => {
            let opts = FitOptions {
                warmup,
                iters,
                thin,
                leapfrog_steps,
                seed,
                chains,
                prior_sd,
                init: init.map(|c| match c {
                    InitChoice::Prior => InitStrategy::Prior,
                    InitChoice::Uniform => InitStrategy::Uniform { radius: 2.0 },
                }),
                ..FitOptions::new(model, data, out)
            };
            let result = fit(&opts)?;
            for (i, (chain, summary)) in result.chains.iter().zip(&result.summaries).enumerate() {
                println!(
                    "chain {i}: {} draws, acceptance {:.3}, step size {:.4}, mean log density {:.2}",
                    chain.len(),
                    chain.acceptance_rate(),
                    chain.final_eps,
                    chain.mean_log_density()
                );
                print!("{}", render_summary(summary));
            }
            for f in &result.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Diagnose { draws, out } => {
            let result = diagnose(&draws, &out)?;
            print!("{}", render_summary(&result.summary));
            for f in &result.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
