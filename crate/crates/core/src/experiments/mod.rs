//! Seeded Monte-Carlo experiments and their record files.
//!
//! Every trial draws a fresh sample from a seed derived from
//! `(master seed, experiment id, m, trial)` (see [`crate::rng::derive_trial_seed`]),
//! so each record is reproducible in isolation and the output does not
//! depend on how trials are scheduled across threads.

mod config;
mod convergence;
mod coupon;
mod failure;
mod gaps;
mod lowerbound;
mod records;

pub use config::{
    DistanceKind, Epsilon, EstimatorKind, ExperimentConfig, ExperimentKind, DEFAULT_EPSILON,
    DEFAULT_GRID_RESOLUTION,
};
pub use convergence::{run_convergence, Oracle};
pub use coupon::{coupon_draws, run_coupon_collector, CouponTail};
pub use failure::{run_failure_regime, FailureLeg};
pub use gaps::{largest_gap, run_largest_gap, GapConcentration};
pub use lowerbound::{run_indistinguishability, IndistinguishabilityRun};
pub use records::{format_float, write_records, write_summary, CSV_HEADER};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;

/// One Monte-Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub experiment: String,
    pub m: u64,
    pub trial: u64,
    /// estimator output (a position, a direction, or the simulated statistic)
    pub output: Vec<f64>,
    pub d_e: Option<f64>,
    pub d_f: Option<f64>,
    pub d_mu: Option<f64>,
    pub diag: String,
    pub wall_ms: Option<f64>,
}

impl TrialRecord {
    fn sort_key(&self) -> (&str, u64, u64) {
        (&self.experiment, self.m, self.trial)
    }
}

/// Sorts records by `(experiment, m, trial)`.
pub fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Per-(group, m) statistics written to the summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub group: String,
    pub m: u64,
    pub trials: u64,
    /// fraction of trials whose distance reached its threshold, per distance name
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub exceedance: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub median: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, f64>,
}

impl Aggregate {
    fn new(group: impl Into<String>, m: u64, trials: u64) -> Self {
        Self {
            group: group.into(),
            m,
            trials,
            exceedance: BTreeMap::new(),
            median: BTreeMap::new(),
            stats: BTreeMap::new(),
        }
    }

    pub fn stat(&self, name: &str) -> Option<f64> {
        self.stats.get(name).copied()
    }
}

/// Records and aggregates of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub id: String,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
    pub oracle: Option<serde_json::Value>,
}

impl ExperimentOutput {
    pub fn aggregate(&self, group: &str, m: u64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.group == group && a.m == m)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// record per-trial wall time (excluded from determinism guarantees)
    pub timing: bool,
}

/// Runs the experiment a config describes on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut out = match config.kind {
        ExperimentKind::Convergence => run_convergence(config, options)?,
        ExperimentKind::Failure => failure::run_config(config, options)?,
        ExperimentKind::Coupon => coupon::run_config(config, options)?,
        ExperimentKind::LargestGap => gaps::run_config(config, options)?,
        ExperimentKind::Indistinguishability => lowerbound::run_config(config, options)?,
    };
    sort_records(&mut out.records);
    Ok(out)
}

/// Fraction of `hits` among `trials`.
fn frequency(hits: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        hits as f64 / trials as f64
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Runs `f` and reports its wall time in milliseconds when `timing` is on.
fn timed<T>(timing: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    if timing {
        let start = std::time::Instant::now();
        let v = f();
        (v, Some(start.elapsed().as_secs_f64() * 1e3))
    } else {
        (f(), None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn frequencies_are_proper() {
        assert_eq!(frequency(0, 0), 0.0);
        assert_eq!(frequency(3, 4), 0.75);
    }
}
