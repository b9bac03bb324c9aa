use rand::Rng;
use rayon::prelude::*;

use super::{frequency, Aggregate, ExperimentConfig, ExperimentOutput, RunOptions, TrialRecord};
use crate::error::{Error, Result};
use crate::rng::{derive_trial_seed, seeded};

const STREAM: &str = "gaps";

/// Largest spacing between adjacent points, without the endpoints 0 and 1.
pub fn largest_gap(points: &mut [f64]) -> f64 {
    points.sort_by(f64::total_cmp);
    points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Fraction of trials whose largest gap lands in `((1-eps) c, (1+eps) c)`, `c = ln m / m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapConcentration {
    pub m: u64,
    pub epsilon: f64,
    pub center: f64,
    pub fraction: f64,
    pub gaps: Vec<f64>,
}

fn gap_center(m: u64) -> f64 {
    (m as f64).ln() / m as f64
}

fn simulate(m: u64, trials: u64, seed: u64, stream: &str) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(derive_trial_seed(seed, stream, m, t));
            let mut points: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
            largest_gap(&mut points)
        })
        .collect()
}

fn concentration(m: u64, epsilon: f64, gaps: Vec<f64>) -> GapConcentration {
    let center = gap_center(m);
    let (lo, hi) = ((1.0 - epsilon) * center, (1.0 + epsilon) * center);
    let fraction = frequency(
        gaps.iter().filter(|&&g| lo < g && g < hi).count(),
        gaps.len(),
    );
    GapConcentration {
        m,
        epsilon,
        center,
        fraction,
        gaps,
    }
}

fn check(m: u64, epsilon: f64) -> Result<()> {
    if m < 100 {
        return Err(Error::param(format!(
            "largest-gap runs need m >= 100, got {m}"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Same seeds for every `epsilon` at a given `m`, so the fractions nest.
pub fn run_largest_gap(m: u64, epsilon: f64, trials: u64, seed: u64) -> Result<GapConcentration> {
    check(m, epsilon)?;
    Ok(concentration(m, epsilon, simulate(m, trials, seed, STREAM)))
}

pub(super) fn run_config(
    config: &ExperimentConfig,
    _options: RunOptions,
) -> Result<ExperimentOutput> {
    let epsilons = config.epsilons.as_deref().unwrap_or_default();
    let stream = format!("{}/{STREAM}", config.id());
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    for m in config.sizes() {
        let gaps = simulate(m, config.trial_count(), config.seed, &stream);
        let center = gap_center(m);
        records.extend(gaps.iter().enumerate().map(|(trial, &g)| TrialRecord {
            experiment: config.id().to_string(),
            m,
            trial: trial as u64,
            output: vec![g],
            d_e: None,
            d_f: None,
            d_mu: None,
            diag: format!("ratio={}", g / center),
            wall_ms: None,
        }));
        let mut agg = Aggregate::new(config.id(), m, gaps.len() as u64);
        agg.stats.insert("center".into(), center);
        for &eps in epsilons {
            check(m, eps)?;
            let c = concentration(m, eps, gaps.clone());
            agg.stats.insert(format!("fraction_eps={eps}"), c.fraction);
        }
        aggregates.push(agg);
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
    fn center_at_100() {
        assert_abs_diff_eq!(gap_center(100), 0.04605, epsilon = 1e-5);
    }

    #[test]
    fn largest_gap_ignores_endpoints() {
        assert_eq!(largest_gap(&mut [0.9, 0.1, 0.5]), 0.4);
        assert_eq!(largest_gap(&mut [0.3]), 0.0);
    }

    #[test]
    fn fractions_nest_in_epsilon() {
        let wide = run_largest_gap(1000, 0.5, 200, 2).unwrap();
        let narrow = run_largest_gap(1000, 0.1, 200, 2).unwrap();
        assert_eq!(wide.gaps, narrow.gaps);
        assert!(narrow.fraction <= wide.fraction);
        assert!((0.0..=1.0).contains(&wide.fraction));
    }

    #[test]
    fn preconditions() {
        assert!(run_largest_gap(99, 0.1, 10, 1).is_err());
        assert!(run_largest_gap(100, 1.0, 10, 1).is_err());
        assert!(run_largest_gap(100, 0.0, 10, 1).is_err());
    }
}
