//! `persuade`: run, reproduce and inspect online persuasion experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use persuade_core::harness::{
    builtin, run_experiment, ExperimentConfig, ExperimentSummary, StaticInstance,
    SynthesisInstance, BUILTIN_NAMES,
};

#[derive(Parser, Debug)]
#[command(
    name = "persuade",
    version,
    about = "Online Bayesian persuasion simulator"
)]
struct Cli {
    /// Base seed; trial k uses seed XOR k.
    #[arg(long, global = true, env = "PERSUADE_SEED")]
    seed: Option<u64>,
    /// Output directory for `run`/`reproduce`, output file for the others.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of trials per horizon.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Run a built-in experiment.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(BUILTIN_NAMES))]
        name: String,
    },
    /// Solve the single-receiver problem and print the optimal policy.
    SolveStatic { instance: PathBuf },
    /// Build a policy inducing a target posterior covariance.
    Synthesize { instance: PathBuf },
}

fn emit(text: &str, out: Option<&Path>) -> persuade_core::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn summary_text(s: &ExperimentSummary, format: Format) -> persuade_core::Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(s)? + "\n",
        Format::Csv => s.to_csv(),
    })
}

/// Long-form CSV: `field,row,col,value`, scalars at row = col = 0.
fn long_csv(scalars: &[(&str, f64)], matrices: &[(&str, &Vec<Vec<f64>>)]) -> String {
    let mut s = String::from("field,row,col,value\n");
    for (k, v) in scalars {
        writeln!(s, "{k},0,0,{v}").unwrap();
    }
    for (k, m) in matrices {
        for (i, r) in m.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                writeln!(s, "{k},{i},{j},{v}").unwrap();
            }
        }
    }
    s
}

fn run_config(cli: &Cli, mut cfg: ExperimentConfig) -> persuade_core::Result<()> {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.trials {
        cfg.n_trials = n;
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = Some(dir.clone());
    }
    let summary = run_experiment(&cfg)?;
    print!("{}", summary_text(&summary, cli.format)?);
    Ok(())
}

fn execute(cli: &Cli) -> persuade_core::Result<()> {
    match &cli.command {
        Command::Run { config } => run_config(cli, ExperimentConfig::from_file(config)?)?,
        Command::Reproduce { name } => run_config(cli, builtin(name, 0)?)?,
        Command::SolveStatic { instance } => {
            let sol = StaticInstance::from_file(instance)?.solve()?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&sol)? + "\n",
                Format::Csv => long_csv(
                    &[
                        ("objective", sol.objective),
                        ("expected_cost", sol.expected_cost),
                    ],
                    &[
                        ("sigma_e", &sol.sigma_e),
                        ("l", &sol.policy.l),
                        ("theta", &sol.policy.theta),
                    ],
                ),
            };
            emit(&text, cli.out.as_deref())?;
        }
        Command::Synthesize { instance } => {
            let res = SynthesisInstance::from_file(instance)?.synthesize()?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&res)? + "\n",
                Format::Csv => long_csv(
                    &[("max_abs_error", res.max_abs_error)],
                    &[
                        ("l", &res.policy.l),
                        ("theta", &res.policy.theta),
                        ("posterior_covariance", &res.posterior_covariance),
                    ],
                ),
            };
            emit(&text, cli.out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
