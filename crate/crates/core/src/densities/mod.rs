//! Synthetic distributions with known lowest-density cuts.
//!
//! Two families are provided: piecewise-linear densities on `[0, 1]` for the
//! one-dimensional estimators, and Gaussian mixtures in `d >= 2` whose
//! hyperplane densities have a closed form.

mod gmm;
mod pwl;
mod spec;

pub use gmm::{oracle_minimizer, Component, GaussianMixture, OracleMinimizer};
pub use pwl::{adversarial_pair, thm2_density, PiecewiseLinearDensity};
pub use spec::{ComponentSpec, DensityRef, DensitySpec};

use crate::error::{Error, Result};

/// A finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    dim: usize,
    coords: Vec<f64>,
    seed: u64,
    source: String,
}

impl Sample {
    pub fn new(dim: usize, coords: Vec<f64>, seed: u64, source: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("sample dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::param(format!(
                "{} coordinates do not form {dim}-dimensional points",
                coords.len()
            )));
        }
        if let Some(v) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::param(format!("sample coordinate {v} is not finite")));
        }
        Ok(Self {
            dim,
            coords,
            seed,
            source: source.into(),
        })
    }

    /// One-dimensional sample.
    pub fn from_values(values: Vec<f64>, seed: u64, source: impl Into<String>) -> Result<Self> {
        Self::new(1, values, seed, source)
    }

    /// Unseeded sample from explicit points, mostly for tests and callers with their own data.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::param("points have mixed dimensions"));
        }
        Self::new(dim, points.concat(), 0, "explicit")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Flat row-major coordinates; for `d = 1` these are the sample values.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for p in self.points() {
            acc.iter_mut().zip(p).for_each(|(a, v)| *a += v);
        }
        let n = self.len().max(1) as f64;
        acc.into_iter().map(|a| a / n).collect()
    }
}

/// A constructed density of either family.
#[derive(Debug, Clone)]
pub enum Density {
    Pwl(PiecewiseLinearDensity),
    Gmm(GaussianMixture),
}

impl Density {
    pub fn dim(&self) -> usize {
        match self {
            Density::Pwl(_) => 1,
            Density::Gmm(g) => g.dim(),
        }
    }

    pub fn sample(&self, m: usize, seed: u64, source: &str) -> Sample {
        match self {
            Density::Pwl(f) => f.sample(m, seed, source),
            Density::Gmm(g) => g.sample(m, seed, source),
        }
    }

    pub fn as_pwl(&self) -> Option<&PiecewiseLinearDensity> {
        match self {
            Density::Pwl(f) => Some(f),
            Density::Gmm(_) => None,
        }
    }

    pub fn as_gmm(&self) -> Option<&GaussianMixture> {
        match self {
            Density::Gmm(g) => Some(g),
            Density::Pwl(_) => None,
        }
    }
}
