use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::Sample;
use crate::error::{Error, Result};
use crate::geometry::{sphere_grid, UnitDirection};
use crate::rng::{self, BoxMuller};

const WEIGHT_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Component {
    weight: f64,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    /// lower Cholesky factor of `cov`
    chol: DMatrix<f64>,
}

impl Component {
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        self.cov
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Mean and variance of `w^T X` for `X` drawn from this component.
    fn projection(&self, w: &[f64]) -> (f64, f64) {
        let w = DVector::from_column_slice(w);
        (w.dot(&self.mean), (w.transpose() * &self.cov * &w)[(0, 0)])
    }
}

/// A `d`-dimensional Gaussian mixture, `d >= 2`.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    components: Vec<Component>,
}

impl GaussianMixture {
    /// Builds a mixture from `(weight, mean, covariance)` triples.
    pub fn new(dim: usize, components: Vec<(f64, Vec<f64>, Vec<Vec<f64>>)>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::density(format!(
                "mixture dimension {dim} must be at least 2"
            )));
        }
        if components.is_empty() {
            return Err(Error::density("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::density(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(k, (weight, mean, cov))| {
                if !(weight > 0.0) {
                    return Err(Error::density(format!(
                        "component {k}: weight {weight} must be positive"
                    )));
                }
                if mean.len() != dim || cov.len() != dim || cov.iter().any(|r| r.len() != dim) {
                    return Err(Error::density(format!(
                        "component {k}: mean/covariance must be {dim}-dimensional"
                    )));
                }
                if mean
                    .iter()
                    .chain(cov.iter().flatten())
                    .any(|v| !v.is_finite())
                {
                    return Err(Error::density(format!("component {k}: non-finite entry")));
                }
                let cov = DMatrix::from_fn(dim, dim, |i, j| cov[i][j]);
                for i in 0..dim {
                    for j in 0..i {
                        if (cov[(i, j)] - cov[(j, i)]).abs() > SYMMETRY_TOL {
                            return Err(Error::density(format!(
                                "component {k}: covariance not symmetric"
                            )));
                        }
                    }
                }
                let chol = cov
                    .clone()
                    .cholesky()
                    .ok_or_else(|| {
                        Error::density(format!("component {k}: covariance not positive-definite"))
                    })?
                    .l();
                Ok(Component {
                    weight,
                    mean: DVector::from_vec(mean),
                    cov,
                    chol,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim, components })
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard_normal(dim: usize) -> Result<Self> {
        Self::new(dim, vec![(1.0, vec![0.0; dim], identity(dim))])
    }

    /// Equal-weight pair of unit-covariance Gaussians at `+center` and `-center`.
    pub fn symmetric_pair(center: &[f64]) -> Result<Self> {
        let d = center.len();
        let neg: Vec<f64> = center.iter().map(|v| -v).collect();
        Self::new(
            d,
            vec![(0.5, center.to_vec(), identity(d)), (0.5, neg, identity(d))],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    fn check_dim(&self, w: &UnitDirection) -> Result<()> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: w.dim(),
            });
        }
        Ok(())
    }

    /// Integral of the density over the hyperplane `{x : w^T x = 0}`.
    ///
    /// For a Gaussian this is the density of the projection `w^T X` at zero,
    /// so the mixture value is `sum_k weight_k * phi(0; w^T mu_k, w^T Sigma_k w)`.
    pub fn projection_density(&self, w: &UnitDirection) -> Result<f64> {
        self.check_dim(w)?;
        Ok(self
            .components
            .iter()
            .map(|c| {
                let (mu, var) = c.projection(w.coords());
                c.weight * normal_pdf(0.0, mu, var)
            })
            .sum())
    }

    /// Probability mass of the slab `{x : |w^T x| <= gamma}`.
    pub fn strip_mass(&self, w: &UnitDirection, gamma: f64) -> Result<f64> {
        self.check_dim(w)?;
        if !(gamma >= 0.0) {
            return Err(Error::param(format!("strip width {gamma} must be >= 0")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        let mass: f64 = self
            .components
            .iter()
            .map(|c| {
                let (mu, var) = c.projection(w.coords());
                let sd = var.sqrt();
                c.weight * normal_interval((-gamma - mu) / sd, (gamma - mu) / sd)
            })
            .sum();
        Ok(mass.clamp(0.0, 1.0))
    }

    /// Draws one point into `out`.
    pub fn draw_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        normals: &mut BoxMuller,
        out: &mut [f64],
    ) {
        let u = rng.gen::<f64>();
        let mut acc = 0.0;
        let mut chosen = self.components.len() - 1;
        for (k, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                chosen = k;
                break;
            }
        }
        let c = &self.components[chosen];
        let z = DVector::from_fn(self.dim, |_, _| normals.sample(rng));
        let x = &c.mean + &c.chol * z;
        out.copy_from_slice(x.as_slice());
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Vec<f64> {
        let mut normals = BoxMuller::new();
        let mut coords = vec![0.0; m * self.dim];
        for point in coords.chunks_exact_mut(self.dim) {
            self.draw_into(rng, &mut normals, point);
        }
        coords
    }

    pub fn sample(&self, m: usize, seed: u64, source: &str) -> Sample {
        let mut rng = rng::seeded(seed);
        let coords = self.sample_with(&mut rng, m);
        Sample::new(self.dim, coords, seed, source).expect("gaussian draws are finite")
    }
}

fn identity(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub(crate) fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (std::f64::consts::TAU * var).sqrt()
}

/// `Phi(b) - Phi(a)` for `a <= b`, evaluated on the side that avoids cancellation.
pub(crate) fn normal_interval(a: f64, b: f64) -> f64 {
    use std::f64::consts::FRAC_1_SQRT_2;
    if a >= 0.0 {
        0.5 * (libm::erfc(a * FRAC_1_SQRT_2) - libm::erfc(b * FRAC_1_SQRT_2))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * FRAC_1_SQRT_2) - libm::erfc(-a * FRAC_1_SQRT_2))
    } else {
        0.5 * (libm::erf(b * FRAC_1_SQRT_2) - libm::erf(a * FRAC_1_SQRT_2))
    }
}

/// Brute-force minimum of the hyperplane density over a half-sphere grid.
#[derive(Debug, Clone)]
pub struct OracleMinimizer {
    pub direction: UnitDirection,
    pub density: f64,
    pub index: usize,
    /// every grid direction with its hyperplane density, in grid order
    pub profile: Vec<(UnitDirection, f64)>,
}

impl OracleMinimizer {
    /// Smallest density among grid directions at `D_E >= separation` from the minimizer.
    pub fn runner_up(&self, separation: f64) -> Option<f64> {
        self.profile
            .iter()
            .filter(|(w, _)| {
                crate::geometry::d_e(w, &self.direction).is_ok_and(|d| d >= separation)
            })
            .map(|(_, f)| *f)
            .reduce(f64::min)
    }
}

/// Exhaustive scan of [`GaussianMixture::projection_density`] over
/// `sphere_grid(d, resolution)`; ties go to the lowest grid index.
pub fn oracle_minimizer(mixture: &GaussianMixture, resolution: usize) -> Result<OracleMinimizer> {
    if resolution < 8 {
        return Err(Error::param(format!(
            "oracle resolution {resolution} must be at least 8"
        )));
    }
    let grid = sphere_grid(mixture.dim(), resolution)?;
    let profile = grid
        .directions()
        .iter()
        .map(|w| Ok((w.clone(), mixture.projection_density(w)?)))
        .collect::<Result<Vec<_>>>()?;
    let (index, density) =
        profile
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, (_, f))| if *f < best.1 { (i, *f) } else { best },
            );
    Ok(OracleMinimizer {
        direction: profile[index].0.clone(),
        density,
        index,
        profile,
    })
}
