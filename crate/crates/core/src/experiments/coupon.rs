use rand::Rng;
use rayon::prelude::*;

use super::{frequency, Aggregate, ExperimentConfig, ExperimentOutput, RunOptions, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_trial_seed, seeded};

const STREAM: &str = "coupon";

/// Empirical tail `Pr[X > floor(n ln n + c n)]` against its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct CouponTail {
    pub n: u64,
    pub offset: f64,
    pub threshold: u64,
    pub frequency: f64,
    pub limit: f64,
    pub std_error: f64,
    pub draws: Vec<u64>,
}

fn threshold(n: u64, c: f64) -> u64 {
    let n = n as f64;
    (n * n.ln() + c * n).floor().max(0.0) as u64
}

fn limit(c: f64) -> f64 {
    1.0 - (-(-c).exp()).exp()
}

fn draws_until_complete(n: u64, seed: u64) -> u64 {
    let mut rng = seeded(seed);
    let mut seen = vec![false; n as usize];
    let mut missing = n;
    let mut draws = 0;
    while missing > 0 {
        let i = rng.gen_range(0..n) as usize;
        draws += 1;
        if !seen[i] {
            seen[i] = true;
            missing -= 1;
        }
    }
    draws
}

/// Number of uniform draws over `n` types until every type is seen, per trial.
pub fn coupon_draws(n: u64, trials: u64, seed: u64, stream: &str) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::param(format!(
            "need at least 2 coupon types, got {n}"
        )));
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|t| draws_until_complete(n, derive_trial_seed(seed, stream, n, t)))
        .collect())
}

fn tail(n: u64, c: f64, draws: Vec<u64>) -> CouponTail {
    let threshold = threshold(n, c);
    let frequency = frequency(
        draws.iter().filter(|&&x| x > threshold).count(),
        draws.len(),
    );
    let std_error = (frequency * (1.0 - frequency) / draws.len() as f64).sqrt();
    CouponTail {
        n,
        offset: c,
        threshold,
        frequency,
        limit: limit(c),
        std_error,
        draws,
    }
}

pub fn run_coupon_collector(n: u64, c: f64, trials: u64, seed: u64) -> Result<CouponTail> {
    if trials < 100 {
        return Err(Error::param(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    Ok(tail(n, c, coupon_draws(n, trials, seed, STREAM)?))
}

/// One row group per offset; every offset reads the same simulated draws.
pub(super) fn run_config(
    config: &ExperimentConfig,
    _options: RunOptions,
) -> Result<ExperimentOutput> {
    let n = config.coupon_types.unwrap_or_default() as u64;
    let draws = coupon_draws(
        n,
        config.trial_count(),
        config.seed,
        &format!("{}/{STREAM}", config.id()),
    )?;
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for &c in config.offsets.as_deref().unwrap_or_default() {
        let group = format!("{}/c={c}", config.id());
        let t = tail(n, c, draws.clone());
        records.extend(t.draws.iter().enumerate().map(|(trial, &x)| TrialRecord {
            experiment: group.clone(),
            m: n,
            trial: trial as u64,
            output: vec![x as f64],
            d_e: None,
            d_f: None,
            d_mu: None,
            diag: format!(
                "threshold={};exceeded={}",
                t.threshold,
                u8::from(x > t.threshold)
            ),
            wall_ms: None,
        }));
        let mut agg = Aggregate::new(group, n, t.draws.len() as u64);
        agg.stats.insert("offset".into(), c);
        agg.stats.insert("tail_frequency".into(), t.frequency);
        agg.stats.insert("limit".into(), t.limit);
        agg.stats.insert("std_error".into(), t.std_error);
        agg.stats.insert("threshold".into(), t.threshold as f64);
        aggregates.push(agg);
    }
    Ok(ExperimentOutput {
        id: config.id().to_string(),
        records,
        aggregates,
        oracle: None,
    })
}
