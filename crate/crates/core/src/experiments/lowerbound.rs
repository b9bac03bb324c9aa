use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::{
    frequency, timed, Aggregate, ExperimentConfig, ExperimentOutput, RunOptions, TrialRecord,
};
use crate::densities::{adversarial_pair, PiecewiseLinearDensity, Sample};
use crate::error::{Error, Result};
use crate::estimators::{run_bucketing, run_hard_margin_1d, schedule_k, CutEstimate};
use crate::rng::{derive_trial_seed, seeded};

const ESTIMATORS: [&str; 2] = ["bucketing", "hard1d"];

/// Miss and error statistics of the two-density construction.
#[derive(Debug, Clone, PartialEq)]
pub struct IndistinguishabilityRun {
    pub n: u32,
    pub m: u64,
    /// fraction of samples with no point in the union of the two notches
    pub miss_frequency: f64,
    /// `(1 - 2/(n-1))^m`
    pub bound: f64,
    /// `(1 - mu(U u V))^m`, exact for either density
    pub exact_miss_probability: f64,
    /// per estimator, fraction of trials with error `>= 1/4`
    pub error_frequency: BTreeMap<String, f64>,
    pub records: Vec<TrialRecord>,
}

/// The two notch intervals, `[1/4 -+ 1/(2n)]` and `[3/4 -+ 1/(2n)]`.
fn notches(n: u32) -> [(f64, f64); 2] {
    let h = 0.5 / n as f64;
    [(0.25 - h, 0.25 + h), (0.75 - h, 0.75 + h)]
}

/// Mass of both notches under `f`; the same under its reflection.
pub(crate) fn notch_mass(f: &PiecewiseLinearDensity, n: u32) -> f64 {
    notches(n).iter().map(|&(a, b)| f.mass(a, b)).sum()
}

fn estimate(name: &str, sample: &Sample, m: u64) -> Result<CutEstimate> {
    match name {
        "bucketing" => run_bucketing(sample, schedule_k(m)),
        _ => run_hard_margin_1d(sample),
    }
}

fn run(
    id: &str,
    n: u32,
    m: u64,
    trials: u64,
    seed: u64,
    options: RunOptions,
) -> Result<IndistinguishabilityRun> {
    let (f, g) = adversarial_pair(n)?;
    if m == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    let zones = notches(n);
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_trial_seed(seed, id, m, t);
            let mut rng = seeded(trial_seed);
            let use_g = rng.gen::<bool>();
            let (density, target, label) = if use_g {
                (&g, 0.75, "g")
            } else {
                (&f, 0.25, "f")
            };
            let sample =
                Sample::from_values(density.sample_with(&mut rng, m as usize), trial_seed, id)?;
            let miss = !sample
                .coords()
                .iter()
                .any(|&x| zones.iter().any(|&(a, b)| a <= x && x <= b));
            let records = ESTIMATORS
                .iter()
                .map(|name| {
                    let (est, wall_ms) = timed(options.timing, || estimate(name, &sample, m));
                    let est = est?;
                    let x = est.position().expect("1d estimators yield a position");
                    Ok(TrialRecord {
                        experiment: format!("{id}/{name}"),
                        m,
                        trial: t,
                        output: vec![x],
                        d_e: Some((x - target).abs()),
                        d_f: None,
                        d_mu: None,
                        diag: format!(
                            "density={label};miss={};{}",
                            u8::from(miss),
                            est.diagnostics
                        ),
                        wall_ms,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((miss, records))
        })
        .collect::<Result<Vec<_>>>()?;

    let misses = per_trial.iter().filter(|(miss, _)| *miss).count();
    let mut error_frequency = BTreeMap::new();
    for (i, name) in ESTIMATORS.iter().enumerate() {
        let far = per_trial
            .iter()
            .filter(|(_, r)| r[i].d_e.unwrap_or(0.0) >= 0.25)
            .count();
        error_frequency.insert(name.to_string(), frequency(far, per_trial.len()));
    }
    Ok(IndistinguishabilityRun {
        n,
        m,
        miss_frequency: frequency(misses, per_trial.len()),
        bound: (1.0 - 2.0 / (n as f64 - 1.0)).powf(m as f64),
        exact_miss_probability: (1.0 - notch_mass(&f, n)).powf(m as f64),
        error_frequency,
        records: per_trial.into_iter().flat_map(|(_, r)| r).collect(),
    })
}

/// Draws `m` points from `f` or its reflection `g` (fair coin per trial) and
/// scores both 1D estimators against the chosen density's minimizer.
pub fn run_indistinguishability(
    n: u32,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<IndistinguishabilityRun> {
    run(
        "indistinguishability",
        n,
        m,
        trials,
        seed,
        RunOptions::default(),
    )
}

pub(super) fn run_config(
    config: &ExperimentConfig,
    options: RunOptions,
) -> Result<ExperimentOutput> {
    let n = config.sharpness.unwrap_or_default() as u32;
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for m in config.sizes() {
        let r = run(
            config.id(),
            n,
            m,
            config.trial_count(),
            config.seed,
            options,
        )?;
        for name in ESTIMATORS {
            let mut agg =
                Aggregate::new(format!("{}/{name}", config.id()), m, config.trial_count());
            agg.stats.insert("miss_frequency".into(), r.miss_frequency);
            agg.stats.insert("bound".into(), r.bound);
            agg.stats
                .insert("exact_miss_probability".into(), r.exact_miss_probability);
            agg.stats
                .insert("error_frequency".into(), r.error_frequency[name]);
            aggregates.push(agg);
        }
        records.extend(r.records);
    }
    Ok(ExperimentOutput {
        id: config.id().to_string(),
        records,
        aggregates,
        oracle: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn notch_mass_in_closed_form() {
        for n in [4u32, 10, 1000] {
            let (f, g) = adversarial_pair(n).unwrap();
            let c = 2.0 * n as f64 / (2.0 * n as f64 - 1.0);
            assert_abs_diff_eq!(notch_mass(&f, n), 1.5 * c / n as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(notch_mass(&g, n), notch_mass(&f, n), epsilon = 1e-12);
        }
    }

    #[test]
    fn single_draw_miss_rate() {
        let trials = 4000;
        let r = run_indistinguishability(4, 1, trials, 11).unwrap();
        let p = r.exact_miss_probability;
        assert_abs_diff_eq!(p, 1.0 - 3.0 / 7.0, epsilon = 1e-12);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (r.miss_frequency - p).abs() <= 3.0 * se,
            "{} vs {p}",
            r.miss_frequency
        );
    }

    #[test]
    fn stored_errors_match_outputs() {
        let r = run_indistinguishability(20, 50, 100, 3).unwrap();
        assert_eq!(r.records.len(), 200);
        for rec in &r.records {
            let target = if rec.diag.starts_with("density=g") {
                0.75
            } else {
                0.25
            };
            assert_abs_diff_eq!(
                rec.d_e.unwrap(),
                (rec.output[0] - target).abs(),
                epsilon = 1e-12
            );
        }
        assert!(r.error_frequency.values().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn rejects_blunt_notches() {
        assert!(run_indistinguishability(3, 10, 10, 1).is_err());
    }
}
