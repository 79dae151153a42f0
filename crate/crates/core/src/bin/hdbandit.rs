use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hdbandit::envs::{make_covariance, Dgp};
use hdbandit::harness::{
    run_experiment, sweep_t0, write_experiment, write_sweep, ExperimentConfig,
};
use hdbandit::par::Execution;
use hdbandit::spectrum::{bias_variance, coherent_rank, effective_ranks, EigenSequence};
use hdbandit::Error;

#[derive(Parser)]
#[command(
    name = "hdbandit",
    version,
    about = "High-dimensional linear contextual bandit simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `workers` (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Run episodes on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (dgp, policy, rep) episode of a config.
    Run(RunArgs),
    /// Explore-then-commit final regret across exploration lengths.
    SweepT0 {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated exploration lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        t0: Vec<usize>,
    },
    /// Print a DGP's eigenvalues and rank quantities.
    Spectrum {
        #[arg(long)]
        dgp: String,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1000)]
        t: usize,
        /// Sample size for the coherent rank and effective bias/variance.
        #[arg(long)]
        n: Option<usize>,
    },
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf, Execution), Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::Config("no output directory: pass --out or set output_dir".into()))?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    Ok((cfg, out, exec))
}

fn spectrum(dgp: &str, p: usize, t: usize, n: Option<usize>) -> Result<(), Error> {
    let dgp = Dgp::parse(dgp).ok_or_else(|| Error::Config(format!("unknown dgp {dgp:?}")))?;
    let cov = make_covariance(dgp, p, t).map_err(|e| Error::Config(e.to_string()))?;
    let eigs = EigenSequence::new(cov.eigenvalues().to_vec())?;
    println!("dgp\t{dgp}\np\t{p}\nT\t{t}\ntrace\t{}", eigs.trace());
    // row k lists lambda_{k+1} next to the ranks of the tail after k
    println!("k\tlambda_k+1\tr_k\tR_k");
    for (k, lambda) in eigs.values().iter().enumerate() {
        let ranks = effective_ranks(&eigs, k)?;
        println!("{k}\t{lambda}\t{}\t{}", ranks.r, ranks.big_r);
    }
    if let Some(n) = n {
        match coherent_rank(&eigs, n) {
            Some(k) => {
                let bv = bias_variance(&eigs, n)?;
                println!("N\t{n}\nk*\t{k}\nB\t{}\nV\t{}", bv.bias, bv.variance);
            }
            None => println!("N\t{n}\nk*\tinfinite"),
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, out, exec) = load(&args)?;
            let output = run_experiment(&cfg, exec)?;
            write_experiment(&output, &out)?;
            eprintln!(
                "{} episodes, {} failures written to {}",
                output.episodes.len(),
                output.failures.len(),
                out.display()
            );
        }
        Command::SweepT0 { run, t0 } => {
            let (cfg, out, exec) = load(&run)?;
            let (rows, failures) = sweep_t0(&cfg, &t0, exec)?;
            write_sweep(&rows, &failures, &out)?;
            for r in &rows {
                println!(
                    "{}\t{}\t{}\t{}",
                    r.dgp, r.t0, r.mean_final_regret, r.std_final_regret
                );
            }
        }
        Command::Spectrum { dgp, p, t, n } => spectrum(&dgp, p, t, n)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hdbandit: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
