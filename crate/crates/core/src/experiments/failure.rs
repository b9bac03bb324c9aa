use rayon::prelude::*;

use super::{
    frequency, timed, Aggregate, ExperimentConfig, ExperimentOutput, RunOptions, TrialRecord,
};
use crate::densities::thm2_density;
use crate::error::Result;
use crate::estimators::{run_bucketing, Schedule};
use crate::rng::derive_trial_seed;

const TARGET: f64 = 0.25;

/// Bucketing on `thm2` under one schedule at one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureLeg {
    pub schedule: String,
    pub m: u64,
    /// fraction of outputs in `[1/2, 1]`
    pub right_half_frequency: f64,
    /// fraction of outputs at distance `>= 1/4` from the minimizer
    pub far_error_frequency: f64,
    pub records: Vec<TrialRecord>,
}

fn run_legs(
    id: &str,
    sizes: &[u64],
    trials: u64,
    seed: u64,
    options: RunOptions,
) -> Result<Vec<FailureLeg>> {
    let f = thm2_density();
    let schedules = [Schedule::identity(), Schedule::cbrt()];
    let mut legs = Vec::new();
    for &m in sizes {
        // Both schedules see the same sample in each trial.
        let per_trial = (0..trials)
            .into_par_iter()
            .map(|t| {
                let sample = f.sample(m as usize, derive_trial_seed(seed, id, m, t), id);
                schedules
                    .iter()
                    .map(|s| {
                        let (est, wall_ms) =
                            timed(options.timing, || run_bucketing(&sample, s.buckets(m)?));
                        let est = est?;
                        let x = est.position().expect("bucketing yields a position");
                        Ok(TrialRecord {
                            experiment: format!("{id}/{}", s.name()),
                            m,
                            trial: t,
                            output: vec![x],
                            d_e: Some((x - TARGET).abs()),
                            d_f: None,
                            d_mu: None,
                            diag: format!("{};right_half={}", est.diagnostics, u8::from(x >= 0.5)),
                            wall_ms,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, s) in schedules.iter().enumerate() {
            let records: Vec<TrialRecord> = per_trial.iter().map(|r| r[i].clone()).collect();
            let n = records.len();
            let right = records.iter().filter(|r| r.output[0] >= 0.5).count();
            let far = records
                .iter()
                .filter(|r| r.d_e.unwrap_or(0.0) >= 0.25)
                .count();
            legs.push(FailureLeg {
                schedule: s.name().to_string(),
                m,
                right_half_frequency: frequency(right, n),
                far_error_frequency: frequency(far, n),
                records,
            });
        }
    }
    Ok(legs)
}

/// Runs bucketing with `k = m` and, on the same samples, with `k = ceil(m^(1/3))`.
pub fn run_failure_regime(sizes: &[u64], trials: u64, seed: u64) -> Result<Vec<FailureLeg>> {
    run_legs("failure", sizes, trials, seed, RunOptions::default())
}

pub(super) fn run_config(
    config: &ExperimentConfig,
    options: RunOptions,
) -> Result<ExperimentOutput> {
    let legs = run_legs(
        config.id(),
        &config.sizes(),
        config.trial_count(),
        config.seed,
        options,
    )?;
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for leg in legs {
        let group = format!("{}/{}", config.id(), leg.schedule);
        let mut agg = Aggregate::new(group, leg.m, leg.records.len() as u64);
        agg.stats
            .insert("right_half_frequency".into(), leg.right_half_frequency);
        agg.stats
            .insert("far_error_frequency".into(), leg.far_error_frequency);
        aggregates.push(agg);
        records.extend(leg.records);
    }
    Ok(ExperimentOutput {
        id: config.id().to_string(),
        records,
        aggregates,
        oracle: None,
    })
}
