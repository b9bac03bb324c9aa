//! Unit directions, half-sphere candidate grids, and distances between cuts.

use std::io::Write;

use serde::Serialize;

use crate::densities::{GaussianMixture, PiecewiseLinearDensity};
use crate::error::{Error, Result};
use crate::rng;

const UNIT_TOL: f64 = 1e-9;

/// Normal vector of a homogeneous hyperplane.
///
/// `w` and `-w` name the same hyperplane; the stored representative has its
/// first nonzero coordinate positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct UnitDirection(Vec<f64>);

impl UnitDirection {
    /// Accepts a vector of norm 1 (within 1e-9) and canonicalizes its sign.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = norm(&coords);
        if coords.is_empty() || !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self(canonical(coords)))
    }

    /// Scales a nonzero vector to unit length.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self(canonical(coords.into_iter().map(|v| v / n).collect())))
    }

    /// `(cos theta, sin theta)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(canonical(vec![c, s]))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(self.0.len(), x.len());
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn negated(&self) -> Vec<f64> {
        self.0.iter().map(|v| -v).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Flips the sign so the first nonzero coordinate is positive.
pub fn canonical(mut v: Vec<f64>) -> Vec<f64> {
    if v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// A finite candidate set of directions on the half-sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    resolution: usize,
    directions: Vec<UnitDirection>,
}

/// For `d = 2` every unit vector lies within half an angular step
/// `pi / (2K)` of the grid, so `D_E <= 1 - cos(pi / (2K)) <= COVERING_CONST_2D / K^2`.
pub const COVERING_CONST_2D: f64 = std::f64::consts::PI * std::f64::consts::PI / 8.0;

/// Angular covering radius bound for the `d = 3` spiral grid of `K` points:
/// `COVERING_CONST_3D / sqrt(K)` radians, so `D_E <= 1 - cos(COVERING_CONST_3D / sqrt(K))`.
pub const COVERING_CONST_3D: f64 = 2.0;

impl SphereGrid {
    /// Wraps a caller-supplied candidate list (the route for `d > 3`).
    ///
    /// Rejects mixed dimensions and equal or antipodal pairs.
    pub fn from_directions(directions: Vec<UnitDirection>) -> Result<Self> {
        let dim = directions.first().map_or(0, UnitDirection::dim);
        if dim == 0 {
            return Err(Error::param("candidate set is empty"));
        }
        for (i, w) in directions.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: w.dim(),
                });
            }
            for v in &directions[..i] {
                if 1.0 - w.dot(v.coords()).abs() < 1e-12 {
                    return Err(Error::param(format!(
                        "candidate {i} duplicates an earlier direction up to sign"
                    )));
                }
            }
        }
        Ok(Self {
            dim,
            resolution: directions.len(),
            directions,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn directions(&self) -> &[UnitDirection] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// One direction per row, comma-separated, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|i| format!("w{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for w in &self.directions {
            let row: Vec<String> = w.coords().iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Deterministic half-sphere grid.
///
/// `d = 2`: `(cos(j pi / K), sin(j pi / K))` for `j = 0..K`.
/// `d = 3`: a Fibonacci spiral of `K` points on the upper hemisphere, heights
/// `z_j = 1 - (j + 1/2) / K`, azimuths stepping by the golden angle.
/// Directions are sign-canonicalized.
pub fn sphere_grid(d: usize, resolution: usize) -> Result<SphereGrid> {
    if resolution == 0 {
        return Err(Error::param("grid resolution must be positive"));
    }
    let k = resolution as f64;
    let directions = match d {
        2 => (0..resolution)
            .map(|j| UnitDirection::from_angle(j as f64 * std::f64::consts::PI / k))
            .collect(),
        3 => {
            let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..resolution)
                .map(|j| {
                    let z = 1.0 - (j as f64 + 0.5) / k;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (j as f64 * golden_angle).sin_cos();
                    UnitDirection(canonical(vec![r * c, r * s, z]))
                })
                .collect()
        }
        _ => {
            return Err(Error::param(format!(
                "built-in grids exist for d in {{2, 3}}, got d={d}; supply candidates via SphereGrid::from_directions"
            )))
        }
    };
    Ok(SphereGrid {
        dim: d,
        resolution,
        directions,
    })
}

fn same_dim(w: &UnitDirection, v: &UnitDirection) -> Result<()> {
    if w.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: v.dim(),
        });
    }
    Ok(())
}

/// Angular distance `1 - |w^T w'|`.
pub fn d_e(w: &UnitDirection, v: &UnitDirection) -> Result<f64> {
    same_dim(w, v)?;
    Ok((1.0 - w.dot(v.coords()).abs()).clamp(0.0, 1.0))
}

/// One-dimensional cut distance `|x - y|`.
pub fn position_distance(x: f64, y: f64) -> f64 {
    (x - y).abs()
}

/// Difference of hyperplane densities `|f(w') - f(w)|`.
pub fn d_f(mixture: &GaussianMixture, w: &UnitDirection, v: &UnitDirection) -> Result<f64> {
    same_dim(w, v)?;
    Ok((mixture.projection_density(v)? - mixture.projection_density(w)?).abs())
}

/// `|f(y) - f(x)|` for one-dimensional cuts.
pub fn d_f_1d(density: &PiecewiseLinearDensity, x: f64, y: f64) -> f64 {
    (density.pdf(y) - density.pdf(x)).abs()
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

pub const MIN_MC_SAMPLES: usize = 10_000;

/// Probability mass of the half-space symmetric difference, by Monte Carlo.
///
/// With `s` the fraction of draws on which `w` and `w'` disagree in sign, the two
/// terms of the definition are `s` and `1 - s` (they differ only on the null
/// boundary), so the estimate is `min(s, 1 - s)`.
pub fn d_mu(
    mixture: &GaussianMixture,
    w: &UnitDirection,
    v: &UnitDirection,
    n_mc: usize,
    seed: u64,
) -> Result<Estimate> {
    same_dim(w, v)?;
    if w.dim() != mixture.dim() {
        return Err(Error::DimensionMismatch {
            expected: mixture.dim(),
            got: w.dim(),
        });
    }
    if n_mc < MIN_MC_SAMPLES {
        return Err(Error::param(format!(
            "d_mu needs at least {MIN_MC_SAMPLES} draws, got {n_mc}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut normals = rng::BoxMuller::new();
    let mut x = vec![0.0; mixture.dim()];
    let mut disagree = 0usize;
    for _ in 0..n_mc {
        mixture.draw_into(&mut rng, &mut normals, &mut x);
        if (w.dot(&x) >= 0.0) != (v.dot(&x) >= 0.0) {
            disagree += 1;
        }
    }
    let s = disagree as f64 / n_mc as f64;
    let value = s.min(1.0 - s);
    Ok(Estimate {
        value,
        std_error: (value * (1.0 - value) / n_mc as f64).sqrt(),
    })
}

/// Exact one-dimensional `D_mu`: the cuts at `x` and `y` disagree on `[min, max]`.
pub fn d_mu_1d(density: &PiecewiseLinearDensity, x: f64, y: f64) -> f64 {
    let s = (density.cdf(x) - density.cdf(y)).abs();
    s.min(1.0 - s)
}
