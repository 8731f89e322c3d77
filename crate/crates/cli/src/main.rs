use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phdae_cli::commands::{exit_code, list_models, validate_model, write_validation, EXIT_CONFIG, EXIT_RUNTIME};
use phdae_cli::config::RunConfig;
use phdae_cli::runner::run;
use phdae_cli::studies::{run_convergence, run_robustness, write_convergence, write_robustness};
use phdae_core::Error;

#[derive(Parser)]
#[command(name = "phdae", version, about = "Energy-consistent simulation of port-Hamiltonian descriptor systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a dotted config key, e.g. `--set model.params.k13=60`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory.
    Run,
    /// Error-versus-step-size study.
    Converge,
    /// Convergence and energy behaviour over schemes and step sizes.
    Robust,
    /// Structural checks of the configured model.
    Validate,
    /// Print the shipped models.
    ListModels,
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::ListModels = cli.command {
        for m in list_models() {
            println!(
                "{:<22} n={:<3} m={:<3} {}{}",
                m.name,
                m.state_dim,
                m.input_dim,
                m.description,
                if m.semi_explicit { " [semi-explicit]" } else { "" }
            );
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match RunConfig::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let dir = cli.out.clone().unwrap_or_else(|| cfg.output.dir.clone());

    match cli.command {
        Command::Run => match run(&cfg, &dir) {
            Ok(out) => {
                let s = &out.summary;
                println!(
                    "{} / {}: {} of {} steps, max|balance residual| = {:.3e}, max dH = {:.3e}{}",
                    s.model,
                    s.scheme,
                    s.steps_completed,
                    s.steps_requested,
                    s.max_abs_balance_residual,
                    s.max_dh,
                    if s.energy_consistent { "" } else { " (energy consistency violated)" }
                );
                match &out.error {
                    Some(e) => {
                        eprintln!("error: {}", s.failure.clone().unwrap_or_else(|| e.to_string()));
                        ExitCode::from(EXIT_RUNTIME as u8)
                    }
                    None => ExitCode::SUCCESS,
                }
            }
            Err(e) => fail(&e),
        },
        Command::Converge => match run_convergence(&cfg).and_then(|r| write_convergence(&dir, &cfg, &r).map(|_| r)) {
            Ok(r) => {
                for (o, s) in &r.slopes {
                    match s {
                        Some(s) => println!("slope({o}) = {s:.3}"),
                        None => println!("slope({o}) unavailable"),
                    }
                }
                if r.rows.iter().any(|row| row.failure.is_some()) {
                    ExitCode::from(EXIT_RUNTIME as u8)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => fail(&e),
        },
        Command::Robust => match run_robustness(&cfg).and_then(|r| write_robustness(&dir, &cfg, &r).map(|_| r)) {
            Ok(rows) => {
                for r in rows {
                    println!(
                        "{:<9} h={:<8} converged={:<5} max dH+ = {:.3e}",
                        r.scheme.as_str(),
                        r.h,
                        r.converged_all_steps,
                        r.max_dh_positive
                    );
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Validate => match validate_model(&cfg).and_then(|r| write_validation(&dir, &r).map(|_| r)) {
            Ok(r) => {
                for c in &r.checks {
                    println!(
                        "{:<22} {} max violation {:.3e} (tol {:.1e})",
                        c.name,
                        if c.passed { "ok  " } else { "FAIL" },
                        c.max_violation,
                        c.tolerance
                    );
                }
                if r.passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_CONFIG as u8)
                }
            }
            Err(e) => fail(&e),
        },
        Command::ListModels => unreachable!("handled above"),
    }
}
