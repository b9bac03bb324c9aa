use log::{debug, info};
use rayon::prelude::*;
use serde_json::json;

use super::{
    frequency, median, timed, Aggregate, DistanceKind, EstimatorKind, ExperimentConfig,
    ExperimentOutput, RunOptions, TrialRecord,
};
use crate::densities::{
    oracle_minimizer, Density, GaussianMixture, PiecewiseLinearDensity, Sample,
};
use crate::error::{Error, Result};
use crate::estimators::{
    run_bucketing, run_hard_margin_1d, run_hard_margin_nd, run_soft_margin, CutEstimate, Schedule,
};
use crate::geometry::{
    d_e, d_f, d_f_1d, d_mu, d_mu_1d, position_distance, sphere_grid, UnitDirection,
};
use crate::rng::derive_trial_seed;

/// Margins at or below this are treated as ties.
const DEGENERACY_TOL: f64 = 1e-12;

/// Ground-truth minimizer of a convergence experiment.
#[derive(Debug, Clone)]
pub enum Oracle {
    Position {
        x: f64,
        density: f64,
        margin: f64,
    },
    Direction {
        w: UnitDirection,
        density: f64,
        margin: f64,
        resolution: usize,
    },
}

impl Oracle {
    /// Finds the minimizer and checks it is unique at resolution `separation`:
    /// every cut at distance `>= separation` must have strictly larger density.
    pub fn locate(density: &Density, separation: f64, resolution: usize) -> Result<Self> {
        let oracle = match density {
            Density::Pwl(f) => {
                let (x, fx) = f.argmin();
                let runner_up = f.min_outside(x, separation).unwrap_or(f64::INFINITY);
                Oracle::Position {
                    x,
                    density: fx,
                    margin: runner_up - fx,
                }
            }
            Density::Gmm(g) => {
                let o = oracle_minimizer(g, resolution)?;
                let runner_up = o.runner_up(separation).unwrap_or(f64::INFINITY);
                Oracle::Direction {
                    w: o.direction,
                    density: o.density,
                    margin: runner_up - o.density,
                    resolution,
                }
            }
        };
        let margin = oracle.margin();
        if !(margin > DEGENERACY_TOL) {
            return Err(Error::DegenerateOracle { margin });
        }
        Ok(oracle)
    }

    pub fn margin(&self) -> f64 {
        match self {
            Oracle::Position { margin, .. } | Oracle::Direction { margin, .. } => *margin,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Oracle::Position { x, .. } => vec![*x],
            Oracle::Direction { w, .. } => w.coords().to_vec(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Oracle::Position { x, density, margin } => {
                json!({"values": [x], "density": density, "runner_up_margin": margin})
            }
            Oracle::Direction {
                w,
                density,
                margin,
                resolution,
            } => json!({
                "values": w.coords(), "density": density, "runner_up_margin": margin, "resolution": resolution
            }),
        }
    }
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    density: Density,
    estimator: EstimatorKind,
    schedule: Schedule,
    candidates: Vec<UnitDirection>,
    oracle: Oracle,
    distances: Vec<DistanceKind>,
}

impl Setup<'_> {
    fn estimate(&self, sample: &Sample, m: u64) -> Result<CutEstimate> {
        match self.estimator {
            EstimatorKind::Bucketing => run_bucketing(sample, self.schedule.buckets(m)?),
            EstimatorKind::Hard1d => run_hard_margin_1d(sample),
            EstimatorKind::Soft => {
                run_soft_margin(sample, self.schedule.width(m)?, &self.candidates)
            }
            EstimatorKind::Hardnd => run_hard_margin_nd(sample, &self.candidates),
        }
    }

    fn trial(&self, m: u64, trial: u64, timing: bool) -> Result<TrialRecord> {
        let id = self.config.id();
        let seed = derive_trial_seed(self.config.seed, id, m, trial);
        let (estimate, wall_ms) = timed(timing, || {
            let sample = self.density.sample(m as usize, seed, id);
            self.estimate(&sample, m)
        });
        let estimate = estimate?;
        let want = |d| self.distances.contains(&d);
        let (d_e_v, d_f_v, d_mu_v) = match (&self.oracle, &self.density) {
            (Oracle::Position { x: target, .. }, Density::Pwl(f)) => {
                let x = estimate.position().expect("1d estimator yields a position");
                distances_1d(f, x, *target, &want)
            }
            (Oracle::Direction { w: target, .. }, Density::Gmm(g)) => {
                let w = estimate
                    .direction()
                    .expect("direction estimator yields a direction");
                let mc_seed = derive_trial_seed(self.config.seed, &format!("{id}/dmu"), m, trial);
                distances_nd(g, w, target, &want, self.config.mc_draws(), mc_seed)?
            }
            _ => unreachable!("oracle kind follows the density"),
        };
        Ok(TrialRecord {
            experiment: id.to_string(),
            m,
            trial,
            output: estimate.cut.values(),
            d_e: d_e_v,
            d_f: d_f_v,
            d_mu: d_mu_v,
            diag: estimate.diagnostics.to_string(),
            wall_ms,
        })
    }
}

type Distances = (Option<f64>, Option<f64>, Option<f64>);

fn distances_1d(
    f: &PiecewiseLinearDensity,
    x: f64,
    target: f64,
    want: &dyn Fn(DistanceKind) -> bool,
) -> Distances {
    (
        want(DistanceKind::Euclidean).then(|| position_distance(x, target)),
        want(DistanceKind::Density).then(|| d_f_1d(f, x, target)),
        want(DistanceKind::Mass).then(|| d_mu_1d(f, x, target)),
    )
}

fn distances_nd(
    g: &GaussianMixture,
    w: &UnitDirection,
    target: &UnitDirection,
    want: &dyn Fn(DistanceKind) -> bool,
    n_mc: usize,
    mc_seed: u64,
) -> Result<Distances> {
    Ok((
        want(DistanceKind::Euclidean)
            .then(|| d_e(w, target))
            .transpose()?,
        want(DistanceKind::Density)
            .then(|| d_f(g, w, target))
            .transpose()?,
        want(DistanceKind::Mass)
            .then(|| d_mu(g, w, target, n_mc, mc_seed).map(|e| e.value))
            .transpose()?,
    ))
}

/// Per-m exceedance rates `Pr[D >= eps]` for every configured distance.
pub(crate) fn aggregate_distances(
    group: &str,
    m: u64,
    records: &[&TrialRecord],
    distances: &[DistanceKind],
    eps: &dyn Fn(DistanceKind) -> f64,
) -> Aggregate {
    let mut agg = Aggregate::new(group, m, records.len() as u64);
    for &d in distances {
        let mut values: Vec<f64> = records
            .iter()
            .filter_map(|r| match d {
                DistanceKind::Euclidean => r.d_e,
                DistanceKind::Density => r.d_f,
                DistanceKind::Mass => r.d_mu,
            })
            .collect();
        let hits = values.iter().filter(|&&v| v >= eps(d)).count();
        agg.exceedance
            .insert(d.name().into(), frequency(hits, records.len()));
        if let Some(med) = median(&mut values) {
            agg.median.insert(d.name().into(), med);
        }
    }
    agg
}

/// Samples, estimates and scores every `(m, trial)` of a convergence config.
///
/// Refuses with [`Error::DegenerateOracle`] when the density has no unique
/// minimizer at the configured `dE` threshold.
pub fn run_convergence(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentOutput> {
    let density = config.build_density()?;
    let estimator = config
        .estimator
        .ok_or_else(|| Error::param("convergence needs an estimator"))?;
    let separation = config.epsilon_for(DistanceKind::Euclidean);
    let oracle = Oracle::locate(&density, separation, config.oracle_grid())?;
    info!(
        "{}: oracle {:?} (margin {:.3e})",
        config.id(),
        oracle.values(),
        oracle.margin()
    );
    let candidates = if density.dim() > 1 {
        sphere_grid(density.dim(), config.grid())?
            .directions()
            .to_vec()
    } else {
        Vec::new()
    };
    let setup = Setup {
        config,
        schedule: config.schedule_rule()?,
        density,
        estimator,
        candidates,
        oracle,
        distances: config.distance_kinds(),
    };

    let tasks: Vec<(u64, u64)> = config
        .sizes()
        .into_iter()
        .flat_map(|m| (0..config.trial_count()).map(move |t| (m, t)))
        .collect();
    let records = tasks
        .par_iter()
        .map(|&(m, t)| setup.trial(m, t, options.timing))
        .collect::<Result<Vec<_>>>()?;

    let aggregates = config
        .sizes()
        .into_iter()
        .map(|m| {
            let at_m: Vec<&TrialRecord> = records.iter().filter(|r| r.m == m).collect();
            let agg = aggregate_distances(config.id(), m, &at_m, &setup.distances, &|d| {
                config.epsilon_for(d)
            });
            debug!("{}: m={m} exceedance {:?}", config.id(), agg.exceedance);
            agg
        })
        .collect();

    Ok(ExperimentOutput {
        id: config.id().to_string(),
        records,
        aggregates,
        oracle: Some(setup.oracle.to_json()),
    })
}
