use crate::envs::BanditEnv;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::policies::{PolicyContext, PolicySpec};

use super::config::ExperimentConfig;
use super::episode::{run_episode, RegretTrace};

/// A successful episode with its position in the experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub dgp: String,
    pub policy: String,
    pub rep: usize,
    pub trace: RegretTrace,
}

/// An episode (or its environment) that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub dgp: String,
    pub policy: String,
    pub rep: usize,
    pub seed: u64,
    /// Round of the failure; 0 when the environment or policy could not be built.
    pub round: usize,
    pub message: String,
}

/// Mean and sample standard deviation of cumulative regret across repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub dgp: String,
    pub policy: String,
    pub t: usize,
    pub mean_cum_regret: f64,
    pub std_cum_regret: f64,
    pub n_reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    /// Ordered by (dgp, policy, rep) in config order.
    pub episodes: Vec<EpisodeRecord>,
    pub failures: Vec<FailureRecord>,
    pub aggregate: Vec<AggregateRow>,
}

/// Final-regret summary for one (dgp, T0) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub dgp: String,
    pub t0: usize,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
    pub n_reps: usize,
}

/// Sample mean and standard deviation (`n − 1` denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

struct Cell<'a> {
    dgp: usize,
    policy: &'a PolicySpec,
    rep: usize,
}

type EnvTable = Vec<Vec<std::result::Result<BanditEnv, String>>>;

fn episode_seed(cfg: &ExperimentConfig, rep: usize) -> u64 {
    cfg.base_seed.wrapping_add(rep as u64)
}

/// Environments indexed `[dgp][rep]`; with `fixed_env` every repetition
/// shares the environment drawn from `base_seed`.
fn build_envs(cfg: &ExperimentConfig, exec: Execution) -> EnvTable {
    let keys: Vec<(usize, usize)> = (0..cfg.dgp.len())
        .flat_map(|d| (0..cfg.reps).map(move |r| (d, r)))
        .collect();
    let built = par::map(exec, &keys, |&(d, rep)| {
        let seed = if cfg.fixed_env {
            cfg.base_seed
        } else {
            episode_seed(cfg, rep)
        };
        let env = cfg.dgp[d].build(&cfg.setup, cfg.noise_var, seed);
        let env = match (env, cfg.theta_bound) {
            (Ok(env), Some(bound)) => env.with_theta_bound(bound),
            (env, _) => env,
        };
        env.map_err(|e| e.to_string())
    });
    let mut table: EnvTable = (0..cfg.dgp.len())
        .map(|_| Vec::with_capacity(cfg.reps))
        .collect();
    for ((d, _), env) in keys.into_iter().zip(built) {
        table[d].push(env);
    }
    table
}

/// One result per cell, in cell order.
fn run_cells(
    cfg: &ExperimentConfig,
    envs: &EnvTable,
    cells: &[Cell<'_>],
    exec: Execution,
) -> Vec<std::result::Result<EpisodeRecord, FailureRecord>> {
    par::map(exec, cells, |cell| {
        let dgp = &cfg.dgp[cell.dgp];
        let seed = episode_seed(cfg, cell.rep);
        let fail = |round, message: String| {
            log::warn!(
                "{dgp}/{} rep {} failed at round {round}: {message}",
                cell.policy.label(),
                cell.rep
            );
            FailureRecord {
                dgp: dgp.label().to_string(),
                policy: cell.policy.label().to_string(),
                rep: cell.rep,
                seed,
                round,
                message,
            }
        };
        let env = envs[cell.dgp][cell.rep]
            .as_ref()
            .map_err(|m| fail(0, m.clone()))?;
        let ctx = PolicyContext {
            arms: env.arms(),
            dim: env.dim(),
            horizon: env.horizon(),
            noise_var: cfg.noise_var,
            seed,
            default_t0: dgp.optimal_t0(&cfg.setup).ok().flatten(),
        };
        let mut policy = cell
            .policy
            .build(&ctx)
            .map_err(|e| fail(0, e.to_string()))?;
        let trace = run_episode(env, policy.as_mut(), seed)
            .map_err(|f| fail(f.round, f.error.to_string()))?;
        Ok(EpisodeRecord {
            dgp: dgp.label().to_string(),
            policy: cell.policy.label().to_string(),
            rep: cell.rep,
            trace,
        })
    })
}

fn partition(
    results: Vec<std::result::Result<EpisodeRecord, FailureRecord>>,
) -> (Vec<EpisodeRecord>, Vec<FailureRecord>) {
    let mut episodes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(e) => episodes.push(e),
            Err(f) => failures.push(f),
        }
    }
    (episodes, failures)
}

/// Per-(dgp, policy, t) mean and std of cumulative regret over the successful
/// episodes. `episodes` must be grouped by (dgp, policy).
pub fn aggregate(episodes: &[EpisodeRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    for group in episodes.chunk_by(|a, b| a.dgp == b.dgp && a.policy == b.policy) {
        let horizon = group.iter().map(|e| e.trace.len()).min().unwrap_or(0);
        let mut column = Vec::with_capacity(group.len());
        for t in 0..horizon {
            column.clear();
            column.extend(group.iter().map(|e| e.trace.cum_regret[t]));
            let (mean, std) = mean_std(&column);
            rows.push(AggregateRow {
                dgp: group[0].dgp.clone(),
                policy: group[0].policy.clone(),
                t: t + 1,
                mean_cum_regret: mean,
                std_cum_regret: std,
                n_reps: group.len(),
            });
        }
    }
    rows
}

/// Runs every (dgp, policy, rep) episode of `cfg`.
///
/// Repetition `r` uses seed `base_seed + r` for its environment, contexts and
/// noise, so all policies face the same draws within a repetition.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput> {
    cfg.validate()?;
    par::with_workers(cfg.workers, || {
        let envs = build_envs(cfg, exec);
        let cells: Vec<Cell<'_>> = (0..cfg.dgp.len())
            .flat_map(|dgp| {
                cfg.policy
                    .iter()
                    .flat_map(move |policy| (0..cfg.reps).map(move |rep| Cell { dgp, policy, rep }))
            })
            .collect();
        let (episodes, failures) = partition(run_cells(cfg, &envs, &cells, exec));
        let aggregate = aggregate(&episodes);
        Ok(ExperimentOutput {
            episodes,
            failures,
            aggregate,
        })
    })
}

/// Explore-then-commit at each exploration length in `t0_values`, on every
/// dgp of `cfg`. The config's own policy list is not used.
pub fn sweep_t0(
    cfg: &ExperimentConfig,
    t0_values: &[usize],
    exec: Execution,
) -> Result<(Vec<SweepRow>, Vec<FailureRecord>)> {
    cfg.validate()?;
    if t0_values.is_empty() {
        return Err(Error::Config("no T0 values to sweep".into()));
    }
    let (k, t) = (cfg.setup.k, cfg.setup.t);
    if let Some(bad) = t0_values.iter().find(|v| **v < k || **v > t) {
        return Err(Error::Config(format!(
            "T0 = {bad} outside [K, T] = [{k}, {t}]"
        )));
    }
    let specs: Vec<PolicySpec> = t0_values
        .iter()
        .map(|&t0| PolicySpec::Etc { t0: Some(t0) })
        .collect();
    par::with_workers(cfg.workers, || {
        let envs = build_envs(cfg, exec);
        let cells: Vec<Cell<'_>> = (0..cfg.dgp.len())
            .flat_map(|dgp| {
                specs
                    .iter()
                    .flat_map(move |policy| (0..cfg.reps).map(move |rep| Cell { dgp, policy, rep }))
            })
            .collect();
        let results = run_cells(cfg, &envs, &cells, exec);
        // cells are laid out [dgp][t0][rep]
        let mut rows = Vec::new();
        let mut failures = Vec::new();
        for (chunk, (d, t0)) in results
            .chunks(cfg.reps)
            .zip((0..cfg.dgp.len()).flat_map(|d| t0_values.iter().map(move |&t0| (d, t0))))
        {
            let finals: Vec<f64> = chunk
                .iter()
                .filter_map(|r| r.as_ref().ok().map(|e| e.trace.final_regret()))
                .collect();
            failures.extend(chunk.iter().filter_map(|r| r.as_ref().err().cloned()));
            let (mean, std) = mean_std(&finals);
            rows.push(SweepRow {
                dgp: cfg.dgp[d].label().to_string(),
                t0,
                mean_final_regret: mean,
                std_final_regret: std,
                n_reps: finals.len(),
            });
        }
        Ok((rows, failures))
    })
}
