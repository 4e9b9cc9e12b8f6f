use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use scramble_core::checks::run_checks;
use scramble_core::scenario::{
    describe_model, list_scenarios, parse_axis, run_many, sweep, ScenarioConfig, ScenarioError, SweepOutcome,
};

/// Bipartite OTOC, operator entanglement and entropy production scenarios.
#[derive(Parser)]
#[command(name = "scramble", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Directory for CSV files (default: the path in the scenario).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Omit the generation timestamp line.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (all sweep members if it declares a sweep).
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a scenario once per value of a parameter axis.
    Sweep {
        scenario: PathBuf,
        /// NAME=v1,v2,... with NAME a dotted path such as model.lambda.
        #[arg(long)]
        axis: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the built-in invariant and oracle checks.
    Check,
    /// List scenario files.
    ListScenarios {
        #[arg(long, default_value = "scenarios")]
        dir: PathBuf,
    },
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn target(output: &Path, out_dir: Option<&Path>) -> PathBuf {
    match (out_dir, output.file_name()) {
        (Some(dir), Some(name)) => dir.join(name),
        _ => output.to_path_buf(),
    }
}

fn timestamp(args: &OutputArgs) -> Option<u64> {
    if args.no_timestamp {
        None
    } else {
        SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
    }
}

/// Writes successful tables and returns the worst exit code.
fn finish(outcomes: Vec<SweepOutcome>, args: &OutputArgs) -> u8 {
    let ts = timestamp(args);
    let mut code = 0;
    for o in outcomes {
        let path = target(&o.output, args.out.as_deref());
        match o.result {
            Ok(table) => match table.write_atomic(&path, ts) {
                Ok(()) => println!("wrote {} ({} rows)", path.display(), table.rows.len()),
                Err(e) => {
                    eprintln!("runtime error: cannot write {}: {e}", path.display());
                    code = code.max(2);
                }
            },
            Err(e) => {
                eprintln!("{e}");
                code = code.max(e.exit_code() as u8);
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, output } => match load(&scenario, output.seed).and_then(|c| c.expand()) {
            Ok(configs) => finish(run_many(configs), &output),
            Err(e) => {
                eprintln!("{e}");
                e.exit_code() as u8
            }
        },
        Command::Sweep {
            scenario,
            axis,
            output,
        } => {
            let prepared = parse_axis(&axis)
                .and_then(|(name, values)| load(&scenario, output.seed).map(|cfg| (cfg, name, values)))
                .and_then(|(cfg, name, values)| sweep(&cfg, &name, &values));
            match prepared {
                Ok(outcomes) => finish(outcomes, &output),
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code() as u8
                }
            }
        }
        Command::Check => {
            let mut failed = false;
            for c in run_checks() {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed |= !c.passed;
            }
            u8::from(failed) * 2
        }
        Command::ListScenarios { dir } => match list_scenarios(&dir) {
            Ok(entries) => {
                let mut code = 0;
                for (path, cfg) in entries {
                    match cfg {
                        Ok(cfg) => {
                            let sweep = cfg
                                .sweep
                                .as_ref()
                                .map(|s| format!(" sweep {} x{}", s.parameter, s.values.len()))
                                .unwrap_or_default();
                            println!(
                                "{}\t{}\t{}{}\t{}",
                                path.display(),
                                cfg.name,
                                describe_model(&cfg.model),
                                sweep,
                                cfg.description
                            );
                        }
                        Err(e) => {
                            eprintln!("{}: {e}", path.display());
                            code = 1;
                        }
                    }
                }
                code
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code() as u8
            }
        },
    };
    ExitCode::from(code)
}
