//! Linear-cut learners and their parameter schedules.
//!
//! * [`run_bucketing`]: split `[0, 1]` into `k` equal buckets and return the
//!   midpoint of the emptiest one (rightmost on ties).
//! * [`run_hard_margin_1d`]: midpoint of the widest gap of the sample padded
//!   with `0` and `1`.
//! * [`run_soft_margin`]: the candidate direction whose `gamma`-strip holds
//!   the fewest sample points.
//! * [`run_hard_margin_nd`]: the candidate with the widest empty margin; no
//!   consistency guarantee is known in `d > 1`, so it is flagged experimental.

use std::fmt;

use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};

use crate::densities::Sample;
use crate::error::{Error, Result};
use crate::geometry::UnitDirection;

/// The hyperplane an estimator selects.
#[derive(Debug, Clone, PartialEq)]
pub enum Cut {
    /// A point of `[0, 1]` (the `d = 1` case).
    Position(f64),
    Direction(UnitDirection),
}

impl Cut {
    pub fn dim(&self) -> usize {
        match self {
            Cut::Position(_) => 1,
            Cut::Direction(w) => w.dim(),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Cut::Position(x) => vec![*x],
            Cut::Direction(w) => w.coords().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostics {
    Buckets {
        k: usize,
        index: usize,
        count: usize,
        runner_up: Option<usize>,
    },
    Gap {
        length: f64,
        runner_up: Option<f64>,
    },
    Strip {
        index: usize,
        count: usize,
        runner_up: Option<usize>,
    },
    Margin {
        index: usize,
        margin: f64,
        runner_up: Option<f64>,
    },
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(String::new, T::to_string)
        }
        match self {
            Diagnostics::Buckets {
                k,
                index,
                count,
                runner_up,
            } => {
                write!(
                    f,
                    "k={k};bucket={index};count={count};runner_up={}",
                    opt(runner_up)
                )
            }
            Diagnostics::Gap { length, runner_up } => {
                write!(
                    f,
                    "gap={length:e};runner_up={}",
                    opt(&runner_up.map(|g| format!("{g:e}")))
                )
            }
            Diagnostics::Strip {
                index,
                count,
                runner_up,
            } => {
                write!(
                    f,
                    "candidate={index};count={count};runner_up={}",
                    opt(runner_up)
                )
            }
            Diagnostics::Margin {
                index,
                margin,
                runner_up,
            } => write!(
                f,
                "experimental=1;candidate={index};margin={margin:e};runner_up={}",
                opt(&runner_up.map(|g| format!("{g:e}")))
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutEstimate {
    pub cut: Cut,
    pub diagnostics: Diagnostics,
}

impl CutEstimate {
    pub fn position(&self) -> Option<f64> {
        match self.cut {
            Cut::Position(x) => Some(x),
            Cut::Direction(_) => None,
        }
    }

    pub fn direction(&self) -> Option<&UnitDirection> {
        match &self.cut {
            Cut::Direction(w) => Some(w),
            Cut::Position(_) => None,
        }
    }

    /// Index into the candidate list, for the direction estimators.
    pub fn candidate_index(&self) -> Option<usize> {
        match self.diagnostics {
            Diagnostics::Strip { index, .. } | Diagnostics::Margin { index, .. } => Some(index),
            _ => None,
        }
    }

    pub fn is_experimental(&self) -> bool {
        matches!(self.diagnostics, Diagnostics::Margin { .. })
    }
}

fn unit_interval_values(sample: &Sample) -> Result<&[f64]> {
    if sample.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: sample.dim(),
        });
    }
    let values = sample.coords();
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, x)| !(0.0..=1.0).contains(*x))
    {
        return Err(Error::OutOfUnitInterval { index, value });
    }
    Ok(values)
}

/// Bucket of `x` among `[i/k, (i+1)/k)`, the last bucket closed at 1.
pub fn bucket_index(x: f64, k: usize) -> usize {
    ((x * k as f64).floor() as usize).min(k - 1)
}

/// Bucketing estimator: midpoint of the bucket with the fewest points.
///
/// Ties go to the rightmost bucket.
pub fn run_bucketing(sample: &Sample, k: usize) -> Result<CutEstimate> {
    if k == 0 {
        return Err(Error::param("bucket count k must be at least 1"));
    }
    let values = unit_interval_values(sample)?;
    let mut counts = vec![0usize; k];
    for &x in values {
        counts[bucket_index(x, k)] += 1;
    }
    let (index, count) =
        counts
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, usize::MAX),
                |best, (i, c)| if c <= best.1 { (i, c) } else { best },
            );
    let runner_up = counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, &c)| c)
        .min();
    Ok(CutEstimate {
        cut: Cut::Position((index as f64 + 0.5) / k as f64),
        diagnostics: Diagnostics::Buckets {
            k,
            index,
            count,
            runner_up,
        },
    })
}

/// Hard-margin estimator on `[0, 1]`.
///
/// The sample is padded with the sentinels 0 and 1 and sorted; the output is
/// the midpoint of the largest gap, the leftmost one on ties.
pub fn run_hard_margin_1d(sample: &Sample) -> Result<CutEstimate> {
    let values = unit_interval_values(sample)?;
    let mut sorted = Vec::with_capacity(values.len() + 2);
    sorted.push(0.0);
    sorted.extend_from_slice(values);
    sorted.push(1.0);
    sorted.sort_by(f64::total_cmp);

    let mut best = (0usize, f64::NEG_INFINITY);
    let mut second = f64::NEG_INFINITY;
    for (i, pair) in sorted.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if gap > best.1 {
            second = best.1;
            best = (i, gap);
        } else if gap > second {
            second = gap;
        }
    }
    let (i, length) = best;
    Ok(CutEstimate {
        cut: Cut::Position(0.5 * (sorted[i] + sorted[i + 1])),
        diagnostics: Diagnostics::Gap {
            length,
            runner_up: second.is_finite().then_some(second),
        },
    })
}

fn check_candidates(sample: &Sample, candidates: &[UnitDirection]) -> Result<()> {
    let first = candidates
        .first()
        .ok_or_else(|| Error::param("candidate set is empty"))?;
    if let Some(w) = candidates.iter().find(|w| w.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: w.dim(),
        });
    }
    if sample.dim() != first.dim() {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            got: sample.dim(),
        });
    }
    Ok(())
}

/// Number of sample points in the closed strip `|w^T x| <= gamma`.
pub fn strip_count(sample: &Sample, w: &UnitDirection, gamma: f64) -> Result<usize> {
    if sample.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: sample.dim(),
        });
    }
    if !(gamma >= 0.0) {
        return Err(Error::param(format!("strip width {gamma} must be >= 0")));
    }
    Ok(sample.points().filter(|x| w.dot(x).abs() <= gamma).count())
}

/// Soft-margin estimator: the candidate whose `gamma`-strip holds the fewest
/// points; ties go to the lowest candidate index.
pub fn run_soft_margin(
    sample: &Sample,
    gamma: f64,
    candidates: &[UnitDirection],
) -> Result<CutEstimate> {
    check_candidates(sample, candidates)?;
    let counts = candidates
        .iter()
        .map(|w| strip_count(sample, w, gamma))
        .collect::<Result<Vec<_>>>()?;
    let (index, count) =
        counts
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, usize::MAX),
                |best, (i, c)| if c < best.1 { (i, c) } else { best },
            );
    let runner_up = counts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, &c)| c)
        .min();
    Ok(CutEstimate {
        cut: Cut::Direction(candidates[index].clone()),
        diagnostics: Diagnostics::Strip {
            index,
            count,
            runner_up,
        },
    })
}

/// Widest-empty-margin search over candidates (experimental for `d > 1`).
///
/// Each candidate scores `min_x |w^T x|`; the highest score wins, lowest index on ties.
pub fn run_hard_margin_nd(sample: &Sample, candidates: &[UnitDirection]) -> Result<CutEstimate> {
    check_candidates(sample, candidates)?;
    if sample.is_empty() {
        return Err(Error::param("hard margin is undefined on an empty sample"));
    }
    let margins: Vec<f64> = candidates
        .iter()
        .map(|w| {
            sample
                .points()
                .map(|x| w.dot(x).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (index, margin) =
        margins
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, m)| {
                if m > best.1 {
                    (i, m)
                } else {
                    best
                }
            });
    let runner_up = margins
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != index)
        .map(|(_, &m)| m)
        .reduce(f64::max);
    Ok(CutEstimate {
        cut: Cut::Direction(candidates[index].clone()),
        diagnostics: Diagnostics::Margin {
            index,
            margin,
            runner_up,
        },
    })
}

/// A named rule mapping the sample size `m` to an estimator parameter.
///
/// * `cbrt`: `k(m) = ceil(m^(1/3))` buckets, or strip width `gamma(m) = m^(-1/3)`.
/// * `identity`: `k(m) = m` buckets (the failure regime; not a strip width).
/// * `custom:<expr>`: an arithmetic expression in the float variable `m`, e.g.
///   `custom:m^0.25` or `custom:2 * m / math::ln(m)`. Bucket counts round up.
#[derive(Debug, Clone)]
pub struct Schedule {
    name: String,
    rule: Rule,
}

#[derive(Debug, Clone)]
enum Rule {
    Cbrt,
    Identity,
    Custom(Node<DefaultNumericTypes>),
}

impl PartialEq for Schedule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Schedule {
    pub fn parse(name: &str) -> Result<Self> {
        let rule = match name {
            "cbrt" => Rule::Cbrt,
            "identity" => Rule::Identity,
            _ => {
                let expr = name.strip_prefix("custom:").ok_or_else(|| {
                    Error::param(format!(
                        "unknown schedule `{name}` (expected cbrt, identity or custom:<expr>)"
                    ))
                })?;
                let node = evalexpr::build_operator_tree::<DefaultNumericTypes>(expr)
                    .map_err(|e| Error::param(format!("schedule `{name}`: {e}")))?;
                Rule::Custom(node)
            }
        };
        Ok(Self {
            name: name.to_string(),
            rule,
        })
    }

    pub fn cbrt() -> Self {
        Self {
            name: "cbrt".into(),
            rule: Rule::Cbrt,
        }
    }

    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            rule: Rule::Identity,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn eval_custom(&self, node: &Node<DefaultNumericTypes>, m: u64) -> Result<f64> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        ctx.set_value("m".into(), Value::Float(m as f64))
            .map_err(|e| Error::param(format!("schedule `{}`: {e}", self.name)))?;
        let v = node
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::param(format!("schedule `{}` at m={m}: {e}", self.name)))?;
        if !v.is_finite() {
            return Err(Error::param(format!(
                "schedule `{}` is not finite at m={m}",
                self.name
            )));
        }
        Ok(v)
    }

    /// Bucket count for sample size `m`.
    pub fn buckets(&self, m: u64) -> Result<usize> {
        let m = m.max(1);
        let k = match &self.rule {
            Rule::Cbrt => ceil_cbrt(m),
            Rule::Identity => m,
            Rule::Custom(node) => self.eval_custom(node, m)?.ceil().max(1.0) as u64,
        };
        Ok(k as usize)
    }

    /// Strip width for sample size `m`.
    pub fn width(&self, m: u64) -> Result<f64> {
        let m = m.max(1);
        match &self.rule {
            Rule::Cbrt => Ok(1.0 / (m as f64).cbrt()),
            Rule::Identity => Err(Error::param(
                "the identity schedule is a bucket rule, not a strip width",
            )),
            Rule::Custom(node) => {
                let g = self.eval_custom(node, m)?;
                if g < 0.0 {
                    return Err(Error::param(format!(
                        "schedule `{}` gives negative width at m={m}",
                        self.name
                    )));
                }
                Ok(g)
            }
        }
    }
}

/// Smallest `k` with `k^3 >= m`.
fn ceil_cbrt(m: u64) -> u64 {
    let mut k = (m as f64).cbrt().ceil() as u64;
    while k > 1 && (k - 1).pow(3) >= m {
        k -= 1;
    }
    while k.pow(3) < m {
        k += 1;
    }
    k
}

/// Default bucket schedule, `ceil(m^(1/3))`.
pub fn schedule_k(m: u64) -> usize {
    ceil_cbrt(m.max(1)) as usize
}

/// Default strip-width schedule, `m^(-1/3)`.
pub fn schedule_gamma(m: u64) -> f64 {
    1.0 / (m.max(1) as f64).cbrt()
}
