use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dpole::artifact::{self, load_artifact};
use dpole::compare::{compare_runs, DEFAULT_MA_WINDOW};
use dpole::config::{parse_config, ExperimentConfig};
use dpole::runner::run_experiment;
use dpole::sweep::{parse_grid, parse_seeds, significance_report, sweep};
use dpole::{HarnessError, Result};
use dpole_core::observe::Mode;
use dpole_core::rehearsal::{ApplyTo, Strategy};

/// Actor-critic double pole balancing with pseudorehearsal.
///
/// Exit codes: 0 success, 1 configuration or usage error, 2 runtime or
/// numeric error, 3 I/O or file format error.
#[derive(Parser, Debug)]
#[command(name = "dpole", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one agent for the configured number of episodes.
    Run(RunArgs),
    /// Run a grid of rehearsal settings over several seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// JSON grid: a list of rehearsal sections or an object of value lists.
        #[arg(long)]
        grid: PathBuf,
        /// Seeds, e.g. `1,2,3` or `1..5`.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two run artifacts.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MA_WINDOW)]
        ma_window: usize,
        /// Also write comparison.txt and comparison.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the text one.
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    pseudo_count: Option<usize>,
    #[arg(long)]
    reinit_every: Option<u32>,
    #[arg(long, value_enum)]
    apply_to: Option<ApplyToArg>,
    #[arg(long, value_enum)]
    observation: Option<ObservationArg>,
    /// Run directory; overrides `output` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    None,
    Batch,
    Ortho,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ApplyToArg {
    Actor,
    Critic,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObservationArg {
    Full,
    Partial,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) {
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = args.max_steps {
        cfg.max_steps_per_episode = v;
    }
    if let Some(v) = args.strategy {
        cfg.rehearsal.strategy = match v {
            StrategyArg::None => Strategy::None,
            StrategyArg::Batch => Strategy::Batch,
            StrategyArg::Ortho => Strategy::Ortho,
        };
    }
    if let Some(v) = args.pseudo_count {
        cfg.rehearsal.pseudo_count = v;
    }
    if let Some(v) = args.reinit_every {
        cfg.rehearsal.reinit_every = v;
    }
    if let Some(v) = args.apply_to {
        cfg.rehearsal.apply_to = match v {
            ApplyToArg::Actor => ApplyTo::Actor,
            ApplyToArg::Critic => ApplyTo::Critic,
            ApplyToArg::Both => ApplyTo::Both,
        };
    }
    if let Some(v) = args.observation {
        cfg.observation = match v {
            ObservationArg::Full => Mode::Full,
            ObservationArg::Partial => Mode::Partial,
        };
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    apply_overrides(&mut cfg, &args);
    let out = cfg.output.clone().ok_or_else(|| {
        HarnessError::config("output", "give --out or set `output` in the config")
    })?;
    let run = run_experiment(&cfg)?;
    let s = &run.summary;
    println!(
        "{} episodes, seed {}: mean {:.2} median {:.1} rmsd {:.2} volatility {:.2}, {:.2} s",
        run.records.len(),
        cfg.seed,
        s.mean,
        s.median,
        s.rmsd,
        s.step_volatility,
        run.total_wall_ns as f64 / 1e9
    );
    println!("wrote {}", out.join(artifact::EPISODES_FILE).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep {
            config,
            grid,
            seeds,
            out,
        } => (|| {
            let base = parse_config(&config)?;
            let cells = parse_grid(&grid, &base.rehearsal)?;
            let seeds = parse_seeds(&seeds)?;
            let index = sweep(&base, &cells, &seeds, &out)?;
            let report = significance_report(&index);
            report.write(&out)?;
            print!("{}", report.to_text());
            let failed: Vec<_> = index.runs.iter().filter(|r| r.error.is_some()).collect();
            for r in &failed {
                eprintln!(
                    "run {} failed: {}",
                    r.path.display(),
                    r.error.as_deref().unwrap_or_default()
                );
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Runtime(format!(
                    "{} of {} runs failed",
                    failed.len(),
                    index.runs.len()
                )))
            }
        })(),
        Command::Compare {
            a,
            b,
            ma_window,
            out,
            json,
        } => (|| {
            let (ra, rb) = (load_artifact(&a)?, load_artifact(&b)?);
            let cmp = compare_runs(
                &ra,
                &rb,
                (&a.display().to_string(), &b.display().to_string()),
                ma_window,
            )?;
            if let Some(dir) = &out {
                cmp.write(dir)?;
            }
            if json {
                println!("{}", cmp.to_json());
            } else {
                print!("{}", cmp.to_text());
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
