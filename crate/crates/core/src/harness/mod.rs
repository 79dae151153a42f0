//! Experiment orchestration: seeded episodes, regret accounting, repetition
//! aggregation, configuration and CSV output.
//!
//! Output files written by [`write_experiment`]:
//!
//! | file | columns |
//! |---|---|
//! | `episodes.csv` | `dgp,policy,rep,seed,t,chosen_arm,inst_regret,cum_regret` |
//! | `aggregate.csv` | `dgp,policy,t,mean_cum_regret,std_cum_regret,n_reps` |
//! | `episodes_meta.csv` | `dgp,policy,rep,seed,t0,final_regret` |
//! | `failures.csv` | `dgp,policy,rep,seed,round,message` |
//!
//! `chosen_arm` is 1-based; `t0` is `never` for episodes that did not commit.

mod config;
mod episode;
mod experiment;
mod output;

pub use config::{DgpSpec, ExperimentConfig, Setup};
pub use episode::{run_episode, EpisodeFailure, RegretTrace};
pub use experiment::{
    aggregate, mean_std, run_experiment, sweep_t0, AggregateRow, EpisodeRecord, ExperimentOutput,
    FailureRecord, SweepRow,
};
pub use output::{
    write_experiment, write_sweep, AGGREGATE_FILE, AGGREGATE_HEADER, EPISODES_FILE,
    EPISODES_HEADER, FAILURES_FILE, META_FILE, SWEEP_FILE,
};
