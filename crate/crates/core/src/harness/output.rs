use std::fs;
use std::path::Path;

use serde::Serialize;

use super::experiment::{AggregateRow, ExperimentOutput, FailureRecord, SweepRow};
use crate::error::Result;

pub const EPISODES_FILE: &str = "episodes.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const META_FILE: &str = "episodes_meta.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Serialize)]
struct EpisodeRow<'a> {
    dgp: &'a str,
    policy: &'a str,
    rep: usize,
    seed: u64,
    t: usize,
    /// 1-based.
    chosen_arm: usize,
    inst_regret: f64,
    cum_regret: f64,
}

#[derive(Serialize)]
struct MetaRow<'a> {
    dgp: &'a str,
    policy: &'a str,
    rep: usize,
    seed: u64,
    t0: String,
    final_regret: f64,
}

fn write_rows<T: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = T>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct AggregateCsv<'a> {
    dgp: &'a str,
    policy: &'a str,
    t: usize,
    mean_cum_regret: f64,
    std_cum_regret: f64,
    n_reps: usize,
}

impl<'a> From<&'a AggregateRow> for AggregateCsv<'a> {
    fn from(r: &'a AggregateRow) -> Self {
        AggregateCsv {
            dgp: &r.dgp,
            policy: &r.policy,
            t: r.t,
            mean_cum_regret: r.mean_cum_regret,
            std_cum_regret: r.std_cum_regret,
            n_reps: r.n_reps,
        }
    }
}

pub const EPISODES_HEADER: [&str; 8] = [
    "dgp",
    "policy",
    "rep",
    "seed",
    "t",
    "chosen_arm",
    "inst_regret",
    "cum_regret",
];
pub const AGGREGATE_HEADER: [&str; 6] = [
    "dgp",
    "policy",
    "t",
    "mean_cum_regret",
    "std_cum_regret",
    "n_reps",
];
const META_HEADER: [&str; 6] = ["dgp", "policy", "rep", "seed", "t0", "final_regret"];
const FAILURES_HEADER: [&str; 6] = ["dgp", "policy", "rep", "seed", "round", "message"];
const SWEEP_HEADER: [&str; 5] = [
    "dgp",
    "t0",
    "mean_final_regret",
    "std_final_regret",
    "n_reps",
];

fn write_failures(path: &Path, failures: &[FailureRecord]) -> Result<()> {
    write_rows(
        path,
        &FAILURES_HEADER,
        failures
            .iter()
            .map(|f| (&f.dgp, &f.policy, f.rep, f.seed, f.round, &f.message)),
    )
}

/// Writes the per-episode, aggregate, metadata and failure tables into `dir`.
pub fn write_experiment(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_rows(
        &dir.join(EPISODES_FILE),
        &EPISODES_HEADER,
        output.episodes.iter().flat_map(|e| {
            (0..e.trace.len()).map(move |i| EpisodeRow {
                dgp: &e.dgp,
                policy: &e.policy,
                rep: e.rep,
                seed: e.trace.seed,
                t: i + 1,
                chosen_arm: e.trace.chosen[i] + 1,
                inst_regret: e.trace.inst_regret[i],
                cum_regret: e.trace.cum_regret[i],
            })
        }),
    )?;
    write_rows(
        &dir.join(AGGREGATE_FILE),
        &AGGREGATE_HEADER,
        output.aggregate.iter().map(AggregateCsv::from),
    )?;
    write_rows(
        &dir.join(META_FILE),
        &META_HEADER,
        output.episodes.iter().map(|e| MetaRow {
            dgp: &e.dgp,
            policy: &e.policy,
            rep: e.rep,
            seed: e.trace.seed,
            t0: e
                .trace
                .commit_round
                .map_or_else(|| "never".to_string(), |t| t.to_string()),
            final_regret: e.trace.final_regret(),
        }),
    )?;
    write_failures(&dir.join(FAILURES_FILE), &output.failures)
}

pub fn write_sweep(rows: &[SweepRow], failures: &[FailureRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_rows(
        &dir.join(SWEEP_FILE),
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            (
                &r.dgp,
                r.t0,
                r.mean_final_regret,
                r.std_final_regret,
                r.n_reps,
            )
        }),
    )?;
    write_failures(&dir.join(FAILURES_FILE), failures)
}
