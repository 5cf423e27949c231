use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use edgecache::sim::{self, Checkpoint, RunOptions, SweepParam};
use edgecache::{Policy, ScenarioConfig};

/// Edge-cache partitioning simulator.
#[derive(Parser, Debug)]
#[command(name = "edgecache", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one policy and write `<policy>.csv` and `<policy>.summary.txt`.
    Run(RunArgs),
    /// Print the static optimal, proportional and uniform partitions with their expected costs.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one simulation per value of a scenario parameter.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<Policy>,
    /// Output directory (default: config `output_dir`, then $EDGECACHE_OUT_DIR, then `out`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Save the learner state reached just before this slot into DIR.
    #[arg(long, value_names = ["SLOT", "DIR"], num_args = 2)]
    checkpoint: Option<Vec<String>>,
    /// Continue from a checkpoint directory.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// `lambda` or `K`.
    #[arg(long)]
    param: SweepParam,
    /// Comma-separated values, e.g. `5e2,5e3,5e4`.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    policy: Option<Policy>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn load(path: &Path, seed: Option<u64>, policy: Option<Policy>) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(policy) = policy {
        config.policy = policy;
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &ScenarioConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| config.resolved_output_dir())
}

fn run(args: RunArgs) -> Result<()> {
    let config = load(&args.config, args.seed, args.policy)?;
    let dir = out_dir(&config, args.out_dir);
    let mut options = RunOptions::default();
    let mut checkpoint_dir = None;
    if let Some(pair) = &args.checkpoint {
        let slot = pair[0]
            .parse()
            .with_context(|| format!("checkpoint slot {:?} is not an integer", pair[0]))?;
        options.checkpoint_at = Some(slot);
        checkpoint_dir = Some(PathBuf::from(&pair[1]));
    }
    if let Some(resume) = &args.resume {
        options.resume = Some(
            Checkpoint::load(resume, &config)
                .with_context(|| format!("loading checkpoint {}", resume.display()))?,
        );
    }
    let output = sim::run_to_dir(&config, &dir, options)?;
    if let Some(cp_dir) = checkpoint_dir {
        match &output.checkpoint {
            Some(cp) => cp.save(&cp_dir)?,
            None => bail!("the run never reached the checkpoint slot"),
        }
    }
    print!("{}", output.summary);
    let (trace, summary) = sim::output_paths(&dir, config.policy);
    log::info!("wrote {} and {}", trace.display(), summary.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let config = load(&args.config, args.seed, args.policy)?;
    let dir = out_dir(&config, args.out_dir);
    let rows = sim::sweep(&config, args.param, &args.values)?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("sweep_{}.csv", args.param));
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    sim::write_sweep_csv(&rows, BufWriter::new(file))?;
    sim::write_sweep_csv(&rows, std::io::stdout().lock())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Oracle { config } => load(&config, None, None)
            .and_then(|c| Ok(sim::oracle_report(&c)?))
            .map(|report| print!("{report}")),
        Command::Sweep(args) => sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
