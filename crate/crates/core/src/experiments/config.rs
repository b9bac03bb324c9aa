//! Experiment configuration documents.
//!
//! A config is a JSON object; unknown keys are rejected. Example:
//!
//! ```json
//! {
//!   "id": "convergence_thm2",
//!   "kind": "convergence",
//!   "density": "thm2",
//!   "estimator": "bucketing",
//!   "schedule": "cbrt",
//!   "sample_sizes": [1000, 10000, 100000],
//!   "trials": 100,
//!   "epsilon": {"dE": 0.05},
//!   "seed": 1
//! }
//! ```
//!
//! | key | kinds | meaning |
//! |-----|-------|---------|
//! | `id` | all | experiment id; defaults to the config file stem |
//! | `kind` | all | `convergence`, `failure`, `coupon`, `largest_gap`, `indistinguishability` |
//! | `density` | convergence | built-in name or inline `{"kind":"pwl"|"gmm",...}` |
//! | `estimator` | convergence | `bucketing`, `hard1d`, `soft`, `hardnd` |
//! | `schedule` | convergence | `cbrt` (default), `identity`, `custom:<expr>` |
//! | `sample_sizes` | all but coupon | strictly increasing sample sizes `m` |
//! | `trials` | all | trials per sample size, at least 1 (coupon: at least 100) |
//! | `distances` | convergence | subset of `dE`, `df`, `dmu` (default all) |
//! | `epsilon` | convergence, failure | exceedance threshold: a number or `{"dE":..,"df":..,"dmu":..}`; default 0.05 |
//! | `seed` | all | master seed |
//! | `grid_resolution` | convergence (d >= 2) | candidate grid size, default 360 |
//! | `oracle_resolution` | convergence (d >= 2) | oracle grid size, default 10 x `grid_resolution` |
//! | `mc_samples` | convergence (d >= 2) | draws per `dmu` estimate, default 10000 |
//! | `coupon_types` | coupon | number of coupon types `n` |
//! | `offsets` | coupon | offsets `c` in `n ln n + c n` |
//! | `epsilons` | largest_gap | relative band half-widths in (0, 1) |
//! | `sharpness` | indistinguishability | notch parameter `n >= 4` |
//! | `output` | all | default output directory |

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::densities::{Density, DensityRef};
use crate::error::{Error, Result};
use crate::estimators::Schedule;
use crate::geometry::MIN_MC_SAMPLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    Failure,
    Coupon,
    LargestGap,
    Indistinguishability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Bucketing,
    Hard1d,
    Soft,
    Hardnd,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Bucketing => "bucketing",
            EstimatorKind::Hard1d => "hard1d",
            EstimatorKind::Soft => "soft",
            EstimatorKind::Hardnd => "hardnd",
        }
    }

    pub fn is_one_dimensional(self) -> bool {
        matches!(self, EstimatorKind::Bucketing | EstimatorKind::Hard1d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceKind {
    #[serde(rename = "dE")]
    Euclidean,
    #[serde(rename = "df")]
    Density,
    #[serde(rename = "dmu")]
    Mass,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 3] = [
        DistanceKind::Euclidean,
        DistanceKind::Density,
        DistanceKind::Mass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "dE",
            DistanceKind::Density => "df",
            DistanceKind::Mass => "dmu",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    All(f64),
    PerDistance(BTreeMap<DistanceKind, f64>),
}

pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_GRID_RESOLUTION: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sample_sizes: Vec<i64>,
    pub trials: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<DistanceKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Epsilon>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_resolution: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupon_types: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharpness: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

/// Line (1-based) of the first occurrence of `"key"` in the document.
fn key_line(text: Option<&str>, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text?
        .lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            key: "config".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        config.check(Some(text))?;
        Ok(config)
    }

    /// Reads a config file; a missing `id` defaults to the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: Self = serde_json::from_str(&text).map_err(|e| Error::Config {
            key: "config".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        if config.id.is_none() {
            config.id = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        config.check(Some(&text))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.check(None)
    }

    pub fn id(&self) -> &str {
        self.id.as_deref().unwrap_or("experiment")
    }

    pub fn sizes(&self) -> Vec<u64> {
        self.sample_sizes.iter().map(|&m| m as u64).collect()
    }

    pub fn trial_count(&self) -> u64 {
        self.trials as u64
    }

    pub fn epsilon_for(&self, d: DistanceKind) -> f64 {
        match &self.epsilon {
            None => DEFAULT_EPSILON,
            Some(Epsilon::All(e)) => *e,
            Some(Epsilon::PerDistance(map)) => map.get(&d).copied().unwrap_or(DEFAULT_EPSILON),
        }
    }

    pub fn distance_kinds(&self) -> Vec<DistanceKind> {
        let mut kinds = self
            .distances
            .clone()
            .unwrap_or_else(|| DistanceKind::ALL.to_vec());
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn schedule_rule(&self) -> Result<Schedule> {
        Schedule::parse(self.schedule.as_deref().unwrap_or("cbrt"))
    }

    pub fn grid(&self) -> usize {
        self.grid_resolution
            .map_or(DEFAULT_GRID_RESOLUTION, |g| g as usize)
    }

    pub fn oracle_grid(&self) -> usize {
        self.oracle_resolution
            .map_or(10 * self.grid(), |g| g as usize)
    }

    pub fn mc_draws(&self) -> usize {
        self.mc_samples.map_or(MIN_MC_SAMPLES, |n| n as usize)
    }

    pub fn build_density(&self) -> Result<Density> {
        self.density
            .as_ref()
            .ok_or_else(|| Error::param("config has no density"))?
            .build()
    }

    fn check(&self, text: Option<&str>) -> Result<()> {
        let fail = |key: &str, message: String| Error::Config {
            key: key.into(),
            line: key_line(text, key),
            message,
        };

        if let Some(id) = &self.id {
            if id.is_empty()
                || !id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "_-.=".contains(c))
            {
                return Err(fail(
                    "id",
                    format!("`{id}` must be non-empty and use only [A-Za-z0-9_.=-]"),
                ));
            }
        }
        if self.trials < 1 {
            return Err(fail(
                "trials",
                format!("must be at least 1, got {}", self.trials),
            ));
        }
        if self.kind != ExperimentKind::Coupon {
            if self.sample_sizes.is_empty() {
                return Err(fail(
                    "sample_sizes",
                    "must list at least one sample size".into(),
                ));
            }
            if let Some(m) = self.sample_sizes.iter().find(|&&m| m < 1) {
                return Err(fail(
                    "sample_sizes",
                    format!("sample sizes must be positive, got {m}"),
                ));
            }
            if self.sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(fail("sample_sizes", "must be strictly increasing".into()));
            }
        }
        match &self.epsilon {
            Some(Epsilon::All(e)) if !(*e > 0.0) => {
                return Err(fail("epsilon", format!("must be positive, got {e}")));
            }
            Some(Epsilon::PerDistance(map)) => {
                if let Some((d, e)) = map.iter().find(|(_, e)| !(**e > 0.0)) {
                    return Err(fail(
                        "epsilon",
                        format!("{} threshold must be positive, got {e}", d.name()),
                    ));
                }
            }
            _ => {}
        }
        if let Some(d) = &self.distances {
            if d.is_empty() {
                return Err(fail("distances", "must name at least one distance".into()));
            }
        }

        match self.kind {
            ExperimentKind::Convergence => self.check_convergence(&fail)?,
            ExperimentKind::Coupon => {
                match self.coupon_types {
                    Some(n) if n >= 2 => {}
                    other => {
                        return Err(fail(
                            "coupon_types",
                            format!("must be at least 2, got {other:?}"),
                        ))
                    }
                }
                if self.trials < 100 {
                    return Err(fail(
                        "trials",
                        format!(
                            "coupon experiments need at least 100 trials, got {}",
                            self.trials
                        ),
                    ));
                }
                match &self.offsets {
                    Some(c) if !c.is_empty() && c.iter().all(|v| v.is_finite()) => {}
                    _ => {
                        return Err(fail(
                            "offsets",
                            "must list at least one finite offset".into(),
                        ))
                    }
                }
            }
            ExperimentKind::LargestGap => {
                if let Some(m) = self.sample_sizes.iter().find(|&&m| m < 100) {
                    return Err(fail(
                        "sample_sizes",
                        format!("largest-gap runs need m >= 100, got {m}"),
                    ));
                }
                match &self.epsilons {
                    Some(e) if !e.is_empty() && e.iter().all(|v| *v > 0.0 && *v < 1.0) => {}
                    _ => return Err(fail("epsilons", "must list values in (0, 1)".into())),
                }
            }
            ExperimentKind::Failure => {
                if let Some(d) = &self.density {
                    if *d != DensityRef::Named("thm2".into()) {
                        return Err(fail(
                            "density",
                            "the failure regime is defined on `thm2` only".into(),
                        ));
                    }
                }
            }
            ExperimentKind::Indistinguishability => match self.sharpness {
                Some(n) if (4..=i64::from(u32::MAX)).contains(&n) => {}
                other => {
                    return Err(fail(
                        "sharpness",
                        format!("must be at least 4, got {other:?}"),
                    ))
                }
            },
        }
        Ok(())
    }

    fn check_convergence(&self, fail: &dyn Fn(&str, String) -> Error) -> Result<()> {
        let density = self
            .density
            .as_ref()
            .ok_or_else(|| fail("density", "convergence experiments need a density".into()))?
            .build()
            .map_err(|e| fail("density", e.to_string()))?;
        let estimator = self.estimator.ok_or_else(|| {
            fail(
                "estimator",
                "expected one of bucketing, hard1d, soft, hardnd".into(),
            )
        })?;
        if estimator.is_one_dimensional() != (density.dim() == 1) {
            return Err(fail(
                "estimator",
                format!(
                    "`{}` does not apply to a {}-dimensional density",
                    estimator.name(),
                    density.dim()
                ),
            ));
        }
        let schedule = self
            .schedule_rule()
            .map_err(|e| fail("schedule", e.to_string()))?;
        let probe = self.sample_sizes[0] as u64;
        match estimator {
            EstimatorKind::Bucketing => schedule.buckets(probe).map(drop),
            EstimatorKind::Soft => schedule.width(probe).map(drop),
            _ => Ok(()),
        }
        .map_err(|e| fail("schedule", e.to_string()))?;
        if density.dim() > 1 {
            if density.dim() > 3 {
                return Err(fail(
                    "density",
                    "built-in candidate grids cover d <= 3".into(),
                ));
            }
            if let Some(g) = self.grid_resolution {
                if g < 8 {
                    return Err(fail(
                        "grid_resolution",
                        format!("must be at least 8, got {g}"),
                    ));
                }
            }
            if let Some(g) = self.oracle_resolution {
                if g < 8 || (g as usize) < self.grid() {
                    return Err(fail(
                        "oracle_resolution",
                        format!("must be at least the candidate grid size, got {g}"),
                    ));
                }
            }
            if let Some(n) = self.mc_samples {
                if n < MIN_MC_SAMPLES as i64 {
                    return Err(fail(
                        "mc_samples",
                        format!("must be at least {MIN_MC_SAMPLES}, got {n}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
  "id": "c1",
  "kind": "convergence",
  "density": "thm2",
  "estimator": "bucketing",
  "sample_sizes": [100, 1000],
  "trials": 5,
  "seed": 3
}"#;

    #[test]
    fn parses_a_valid_config() {
        let c = ExperimentConfig::from_json_str(GOOD).unwrap();
        assert_eq!(c.kind, ExperimentKind::Convergence);
        assert_eq!(c.sizes(), vec![100, 1000]);
        assert_eq!(c.epsilon_for(DistanceKind::Euclidean), 0.05);
        assert_eq!(c.distance_kinds(), DistanceKind::ALL.to_vec());
    }

    #[test]
    fn negative_trials_names_key_and_line() {
        let bad = GOOD.replace("\"trials\": 5", "\"trials\": -5");
        match ExperimentConfig::from_json_str(&bad) {
            Err(Error::Config { key, line, .. }) => {
                assert_eq!(key, "trials");
                assert_eq!(line, Some(7));
            }
            other => panic!("{other:?}"),
        }
        let msg = ExperimentConfig::from_json_str(&bad)
            .unwrap_err()
            .to_string();
        assert!(msg.starts_with("line 7: `trials`"), "{msg}");
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = GOOD.replace("\"seed\": 3", "\"seed\": 3, \"bogus\": 1");
        let msg = ExperimentConfig::from_json_str(&bad)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.starts_with("line 8"), "{msg}");
    }

    #[test]
    fn rejects_bad_values() {
        let cases = [
            ("[100, 1000]", "[1000, 100]", "sample_sizes"),
            ("\"bucketing\"", "\"soft\"", "estimator"),
            ("\"thm2\"", "\"adversarial(2)\"", "density"),
        ];
        for (from, to, key) in cases {
            match ExperimentConfig::from_json_str(&GOOD.replace(from, to)) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{to}: {other:?}"),
            }
        }
        let eps = GOOD.replace("\"seed\": 3", "\"seed\": 3, \"epsilon\": {\"dE\": 0}");
        assert!(
            matches!(ExperimentConfig::from_json_str(&eps), Err(Error::Config { key, .. }) if key == "epsilon")
        );
        let sched = GOOD.replace("\"seed\": 3", "\"seed\": 3, \"schedule\": \"custom:(\"");
        assert!(
            matches!(ExperimentConfig::from_json_str(&sched), Err(Error::Config { key, .. }) if key == "schedule")
        );
    }

    #[test]
    fn kind_specific_requirements() {
        let coupon = r#"{"kind":"coupon","trials":100,"seed":1,"coupon_types":1,"offsets":[0]}"#;
        assert!(
            matches!(ExperimentConfig::from_json_str(coupon), Err(Error::Config { key, .. }) if key == "coupon_types")
        );
        let gaps =
            r#"{"kind":"largest_gap","trials":10,"seed":1,"sample_sizes":[1000],"epsilons":[1.5]}"#;
        assert!(
            matches!(ExperimentConfig::from_json_str(gaps), Err(Error::Config { key, .. }) if key == "epsilons")
        );
        let lb = r#"{"kind":"indistinguishability","trials":10,"seed":1,"sample_sizes":[100],"sharpness":3}"#;
        assert!(
            matches!(ExperimentConfig::from_json_str(lb), Err(Error::Config { key, .. }) if key == "sharpness")
        );
    }

    #[test]
    fn per_distance_epsilon() {
        let c = ExperimentConfig::from_json_str(&GOOD.replace(
            "\"seed\": 3",
            "\"seed\": 3, \"epsilon\": {\"dE\": 0.1, \"dmu\": 0.2}",
        ))
        .unwrap();
        assert_eq!(c.epsilon_for(DistanceKind::Euclidean), 0.1);
        assert_eq!(c.epsilon_for(DistanceKind::Mass), 0.2);
        assert_eq!(c.epsilon_for(DistanceKind::Density), DEFAULT_EPSILON);
    }
}
