use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use granot::config::parse_config;
use granot::run::{simulate, verify_and_write, RunOutput};
use granot::suites::SUITES;
use granot::{HarnessError, Result};
use granot_core::collision::{big_e, contraction_factor_gain, kac_rate};
use granot_core::dynamics::ensemble_distance;
use granot_core::ensemble::VelocityEnsemble;
use granot_core::moments::{appendix_coefficients, growth_rate_m4};

#[derive(Parser)]
#[command(name = "granot", version, about = "Particle simulation and exact W2 verification for inelastic Maxwell models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Simulate { config: PathBuf },
    /// Run a verification suite with the seed and scale of a config file.
    Verify {
        /// One of gain, flow, diffusive, cross-section, kac, moments, lemmas, all.
        suite: String,
        config: PathBuf,
    },
    /// Exact W2 between two snapshot files.
    W2 { a: PathBuf, b: PathBuf },
    /// Print the model constants for a restitution coefficient.
    Coeffs {
        #[arg(long)]
        e: f64,
        /// Kac inelasticity exponent.
        #[arg(long)]
        p: Option<f64>,
    },
}

fn coeffs(e: f64, p: Option<f64>) -> Result<()> {
    let c = appendix_coefficients(e)?;
    match big_e(e) {
        Ok(v) => println!("E = {v}"),
        Err(_) => println!("E = inf"),
    }
    let g = contraction_factor_gain(e)?;
    println!("gain factor sqrt((3+e^2)/4) = {g}");
    println!("gamma (3+e^2)/4 = {}", g * g);
    println!("eps = {}", c.eps);
    println!("alpha = {}", c.alpha);
    println!("beta = {}", c.beta);
    println!("gamma = {}", c.gamma);
    println!("lambda = {}", c.lambda);
    println!("mu1 = {}", c.mu1);
    println!("mu2 = {}", c.mu2);
    if let Ok(r) = growth_rate_m4(e) {
        println!("4 - E lambda = {r}");
    }
    if let Some(p) = p {
        println!("kac beta(p={p}) = {}", kac_rate(p)?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { config } => {
            let job = parse_config(&config)?;
            match simulate(&job)? {
                RunOutput::Paired(rows) => {
                    let worst = rows.iter().map(|r| r.w2 - r.bound).fold(f64::NEG_INFINITY, f64::max);
                    println!("{}: {} records, max(w2 - bound) = {worst:e}", job.name, rows.len());
                }
                RunOutput::Single(rows) => println!("{}: {} records", job.name, rows.len()),
            }
            println!("wrote {}", job.outputs.csv.display());
            Ok(true)
        }
        Command::Verify { suite, config } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(HarnessError::Usage(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", "))));
            }
            let job = parse_config(&config)?;
            let (report, paths) = verify_and_write(&suite, &job)?;
            print!("{}", report.render());
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(report.pass())
        }
        Command::W2 { a, b } => {
            let ea = VelocityEnsemble::load(&a)?;
            let eb = VelocityEnsemble::load(&b)?;
            println!("{:e}", ensemble_distance(&ea, &eb)?);
            Ok(true)
        }
        Command::Coeffs { e, p } => {
            coeffs(e, p)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
