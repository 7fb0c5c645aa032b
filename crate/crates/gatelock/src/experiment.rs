//! Multi-instance lock/attack/score experiments.
//!
//! One experiment locks a benchmark `runs` times with per-run seeds
//! `base_seed + run`, attacks every instance from the bare netlist, and
//! scores against the ground truth only after the attack report exists.
//! Runs execute in parallel; rows and aggregates are deterministic except
//! for the wall-clock columns.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{format_percent, run_attack, score, AttackOptions};
use crate::countermeasure::{lock_cm, CmOptions, KeyBudget};
use crate::error::{Error, Result};
use crate::locker::{lock_rll_with, lock_sll_with, LockedCircuit, Scheme, DEFAULT_DEMORGAN_SHARE};
use crate::netlist::Netlist;

/// Environment variable bounding the parallel worker count.
pub const WORKERS_ENV: &str = "GATELOCK_WORKERS";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub benchmark: PathBuf,
    pub scheme: Scheme,
    /// Key gates for RLL/SLL.
    #[serde(default)]
    pub key_size: usize,
    /// Budget for the countermeasure scheme.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<(usize, usize)>,
    pub cluster: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub max_layers: u32,
    pub demorgan_share: f64,
}

impl ExperimentSpec {
    pub fn new(benchmark: PathBuf, scheme: Scheme, key_size: usize) -> ExperimentSpec {
        ExperimentSpec {
            benchmark,
            scheme,
            key_size,
            budget: None,
            cluster: 3,
            runs: 20,
            base_seed: 1,
            max_layers: 4,
            demorgan_share: DEFAULT_DEMORGAN_SHARE,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub sr: f64,
    pub mr: f64,
    pub x_rate: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregates {
    pub sr_mean: f64,
    pub sr_stddev: f64,
    pub mr_mean: f64,
    pub time_min: f64,
    pub time_mean: f64,
    pub time_max: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<RunRow>,
    pub aggregates: Aggregates,
}

/// Lock one instance according to the spec.
pub fn lock_instance(n: &Netlist, spec: &ExperimentSpec, seed: u64) -> Result<LockedCircuit> {
    match spec.scheme {
        Scheme::Rll => lock_rll_with(n, spec.key_size, seed, spec.demorgan_share),
        Scheme::Sll => lock_sll_with(n, spec.key_size, spec.cluster, seed, spec.demorgan_share),
        Scheme::Cm => {
            let (min, max) = spec.budget.ok_or_else(|| {
                Error::InvalidNetlist("countermeasure runs need a key budget".into())
            })?;
            let mut opts = CmOptions::rll(KeyBudget::new(min, max), seed);
            if spec.cluster > 1 {
                opts = CmOptions::sll(KeyBudget::new(min, max), spec.cluster, seed);
            }
            lock_cm(n, &opts)
        }
    }
}

/// Run the whole experiment over an already parsed benchmark.
pub fn run_experiment(n: &Netlist, spec: &ExperimentSpec) -> Result<ExperimentResult> {
    assert!(spec.runs >= 1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .expect("worker pool");
    let rows: Result<Vec<RunRow>> = pool.install(|| {
        (0..spec.runs)
            .into_par_iter()
            .map(|run| {
                let seed = spec.base_seed + run as u64;
                let started = Instant::now();
                let locked = lock_instance(n, spec, seed)?;
                // the attack sees the netlist alone; scoring happens after
                let report = run_attack(
                    &locked.netlist,
                    &AttackOptions {
                        max_layers: spec.max_layers,
                        seed,
                    },
                );
                let s = score(&report, &locked.key_map())?;
                Ok(RunRow {
                    run,
                    seed,
                    sr: s.sr,
                    mr: s.mr,
                    x_rate: s.x_rate,
                    seconds: started.elapsed().as_secs_f64(),
                })
            })
            .collect()
    });
    let mut rows = rows?;
    rows.sort_by_key(|r| r.run);
    let aggregates = aggregate(&rows);
    Ok(ExperimentResult { rows, aggregates })
}

fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|v| *v >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
}

pub fn aggregate(rows: &[RunRow]) -> Aggregates {
    let n = rows.len().max(1) as f64;
    let sr_mean = rows.iter().map(|r| r.sr).sum::<f64>() / n;
    let var = if rows.len() > 1 {
        rows.iter().map(|r| (r.sr - sr_mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mr_mean = rows.iter().map(|r| r.mr).sum::<f64>() / n;
    let times: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
    Aggregates {
        sr_mean,
        sr_stddev: var.sqrt(),
        mr_mean,
        time_min: times.iter().copied().fold(f64::INFINITY, f64::min),
        time_mean: times.iter().sum::<f64>() / n,
        time_max: times.iter().copied().fold(0.0, f64::max),
    }
}

/// Versioned per-run CSV; everything except `seconds` is a pure function of
/// the spec.
pub fn csv_text(result: &ExperimentResult) -> String {
    let mut out = String::from("# gatelock-eval-v1\nrun,seed,sr,mr,x_rate,seconds\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.3}\n",
            r.run,
            r.seed,
            format_percent(r.sr),
            format_percent(r.mr),
            format_percent(r.x_rate),
            r.seconds
        ));
    }
    out
}

/// Aggregate JSON carrying the spec for provenance.
pub fn aggregate_json(spec: &ExperimentSpec, result: &ExperimentResult) -> String {
    #[derive(Serialize)]
    struct File<'a> {
        spec: &'a ExperimentSpec,
        aggregates: &'a Aggregates,
        rows: &'a [RunRow],
    }
    serde_json::to_string_pretty(&File {
        spec,
        aggregates: &result.aggregates,
        rows: &result.rows,
    })
    .expect("experiment serializes")
}
