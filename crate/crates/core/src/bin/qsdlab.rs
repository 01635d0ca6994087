use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsdlab::commands::{cmd_analyze, cmd_simulate, cmd_spectrum, cmd_validate, summary_lines, ValidateHooks};
use qsdlab::config::{parse_config, ExperimentConfig};
use qsdlab::error::Error;

/// Exit codes: 0 success, 1 at least one validation check failed,
/// 2 invalid configuration or a model the command cannot run on,
/// 3 a run failed.
#[derive(Parser)]
#[command(name = "qsdlab", version, about = "Killed stable processes: entrance, spectrum, simulation, validation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed, overriding `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Entrance integral, delta, lambda0 bound and hitting quantities.
    Analyze,
    /// Eigenpairs, QSD and QED densities, decay curves.
    Spectrum,
    /// Monte Carlo ensemble of killed paths.
    Simulate,
    /// Run the validation checks and write report.json.
    Validate,
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) | Error::AlphaRange(_) | Error::EntranceFail(_) => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => {
            return Err(Error::Config(vec![qsdlab::config::ConfigViolation {
                code: "MISSING_KEY",
                key: "--config".into(),
                message: "a config file is required".into(),
            }]))
        }
    };
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &ExperimentConfig) -> Result<ExitCode, Error> {
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::Analyze => {
            let r = cmd_analyze(cfg, out)?;
            println!("entrance integral: {}", r.entrance.entrance_integral);
            println!("delta: {}", r.entrance.delta);
            match r.entrance.lambda0_lower {
                Some(b) => println!("lambda0 >= {b:.6}"),
                None => println!("lambda0 lower bound: none"),
            }
        }
        Command::Spectrum => {
            let r = cmd_spectrum(cfg, out)?;
            println!("lambda0 = {:.8}", r.lambda0);
            if let Some(g) = r.gap {
                println!("gap = {g:.8}");
            }
            if let Some(rf) = &r.refinement {
                println!("relative change n={} -> {}: {:.3e}", rf.n, 2 * rf.n, rf.relative_change[0]);
            }
            if !r.hard_failures.is_empty() {
                for f in &r.hard_failures {
                    eprintln!("error: {f}");
                }
                return Ok(ExitCode::from(3));
            }
        }
        Command::Simulate => {
            let r = cmd_simulate(cfg, out)?;
            println!(
                "{} paths: {} killed, {} censored, {} escaped",
                r.n_paths,
                r.flags.killed + r.flags.killed_crossing,
                r.flags.censored,
                r.flags.escaped
            );
            match (&r.decay_fit, &r.decay_fit_error) {
                (Some(f), _) => println!("decay rate {:.5} +- {:.5}", f.lambda_hat, f.std_error),
                (None, Some(e)) => println!("decay rate not fitted: {e}"),
                _ => {}
            }
        }
        Command::Validate => {
            let r = cmd_validate(cfg, out, ValidateHooks::default())?;
            for line in summary_lines(&r) {
                println!("{line}");
            }
            println!("{} passed, {} failed", r.passed, r.failed);
            if r.failed > 0 {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(&cli, &cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}
