//! JSON form of density specifications.
//!
//! Inline documents look like
//! `{"kind":"pwl","knots":[[0,1],[1,1]]}` or
//! `{"kind":"gmm","d":2,"components":[{"w":1.0,"mean":[0,0],"cov":[[1,0],[0,1]]}]}`.
//! Built-in densities are referenced by name: `thm2`, `uniform`,
//! `adversarial(n)` (notch at 1/4) and `adversarial_reflected(n)` (notch at 3/4).

use serde::{Deserialize, Serialize};

use super::{adversarial_pair, thm2_density, Density, GaussianMixture, PiecewiseLinearDensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensitySpec {
    Pwl {
        knots: Vec<[f64; 2]>,
    },
    Gmm {
        d: usize,
        components: Vec<ComponentSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub w: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        match self {
            DensitySpec::Pwl { knots } => {
                let knots: Vec<(f64, f64)> = knots.iter().map(|k| (k[0], k[1])).collect();
                Ok(Density::Pwl(PiecewiseLinearDensity::new(&knots)?))
            }
            DensitySpec::Gmm { d, components } => Ok(Density::Gmm(GaussianMixture::new(
                *d,
                components
                    .iter()
                    .map(|c| (c.w, c.mean.clone(), c.cov.clone()))
                    .collect(),
            )?)),
        }
    }
}

impl From<&PiecewiseLinearDensity> for DensitySpec {
    fn from(f: &PiecewiseLinearDensity) -> Self {
        DensitySpec::Pwl {
            knots: f.knots().map(|(x, v)| [x, v]).collect(),
        }
    }
}

impl From<&GaussianMixture> for DensitySpec {
    fn from(g: &GaussianMixture) -> Self {
        DensitySpec::Gmm {
            d: g.dim(),
            components: g
                .components()
                .iter()
                .map(|c| ComponentSpec {
                    w: c.weight(),
                    mean: c.mean().to_vec(),
                    cov: c.covariance(),
                })
                .collect(),
        }
    }
}

/// A density named by a built-in or given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityRef {
    Named(String),
    Inline(DensitySpec),
}

impl DensityRef {
    pub fn build(&self) -> Result<Density> {
        match self {
            DensityRef::Inline(spec) => spec.build(),
            DensityRef::Named(name) => build_named(name),
        }
    }

    pub fn name(&self) -> String {
        match self {
            DensityRef::Named(name) => name.clone(),
            DensityRef::Inline(DensitySpec::Pwl { .. }) => "inline-pwl".into(),
            DensityRef::Inline(DensitySpec::Gmm { .. }) => "inline-gmm".into(),
        }
    }
}

fn build_named(name: &str) -> Result<Density> {
    let name = name.trim();
    match name {
        "thm2" => return Ok(Density::Pwl(thm2_density())),
        "uniform" => return Ok(Density::Pwl(PiecewiseLinearDensity::uniform())),
        _ => {}
    }
    let call =
        |prefix: &str| -> Option<Result<u32>> {
            let arg = name
                .strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')?;
            Some(arg.trim().parse::<u32>().map_err(|_| {
                Error::density(format!("`{name}`: argument must be a positive integer"))
            }))
        };
    if let Some(n) = call("adversarial") {
        return Ok(Density::Pwl(adversarial_pair(n?)?.0));
    }
    if let Some(n) = call("adversarial_reflected") {
        return Ok(Density::Pwl(adversarial_pair(n?)?.1));
    }
    Err(Error::density(format!(
        "unknown density `{name}` (expected thm2, uniform, adversarial(n), adversarial_reflected(n) or an inline spec)"
    )))
}
