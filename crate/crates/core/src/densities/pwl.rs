use rand::Rng;

use super::Sample;
use crate::error::{Error, Result};
use crate::rng;

/// A density on `[0, 1]` that is linear between knots and zero outside.
///
/// The constructor rescales the density values so the trapezoid integral is
/// exactly one; [`normalization`](Self::normalization) reports the factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearDensity {
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// cumulative mass at each knot
    cum: Vec<f64>,
    scale: f64,
}

impl PiecewiseLinearDensity {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::density("need at least two knots"));
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(Error::density("knots must start at x=0 and end at x=1"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::density(format!(
                    "knot positions must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(x, f)) = knots.iter().find(|(_, f)| !f.is_finite() || *f < 0.0) {
            return Err(Error::density(format!(
                "density value {f} at x={x} must be finite and >= 0"
            )));
        }
        let area: f64 = knots
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum();
        if !(area > 0.0) {
            return Err(Error::density("density has zero total mass"));
        }
        let scale = 1.0 / area;
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let fs: Vec<f64> = knots.iter().map(|k| k.1 * scale).collect();
        let mut cum = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (fs[i - 1] + fs[i]);
            cum.push(acc);
        }
        // absorb rounding so cdf(1) is exactly 1
        let total = acc;
        for c in &mut cum {
            *c /= total;
        }
        Ok(Self { xs, fs, cum, scale })
    }

    pub fn uniform() -> Self {
        Self::new(&[(0.0, 1.0), (1.0, 1.0)]).expect("uniform knots are valid")
    }

    /// Factor the supplied density values were multiplied by.
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    /// Normalized knots.
    pub fn knots(&self) -> impl DoubleEndedIterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&k| k <= x);
        i.saturating_sub(1).min(self.xs.len() - 2)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let t = (x - x0) / (x1 - x0);
        self.fs[i] + t * (self.fs[i + 1] - self.fs[i])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() || x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let (f0, f1) = (self.fs[i], self.fs[i + 1]);
        (self.cum[i] + f0 * t + (f1 - f0) * t * t / (2.0 * h)).min(1.0)
    }

    /// Smallest `x` with `cdf(x) >= u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::param(format!("quantile level {u} outside [0, 1]")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        // first segment whose right end reaches u
        let seg = self.cum[1..]
            .partition_point(|&c| c < u)
            .min(self.xs.len() - 2);
        let (x0, x1) = (self.xs[seg], self.xs[seg + 1]);
        let h = x1 - x0;
        let (f0, f1) = (self.fs[seg], self.fs[seg + 1]);
        let r = u - self.cum[seg];
        if r <= 0.0 {
            return x0;
        }
        // solve a t^2 + b t = r for t in [0, h]
        let a = (f1 - f0) / (2.0 * h);
        let b = f0;
        let disc = (b * b + 4.0 * a * r).max(0.0);
        let denom = b + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { h };
        (x0 + t.clamp(0.0, h)).min(x1)
    }

    /// Probability mass of `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf(b) - self.cdf(a)).max(0.0)
    }

    /// Position of the global minimum of the density, lowest position on ties.
    ///
    /// A piecewise-linear function attains its minimum at a knot, so the scan is exact.
    pub fn argmin(&self) -> (f64, f64) {
        self.knots()
            .fold((f64::NAN, f64::INFINITY), |best, (x, f)| {
                if f < best.1 {
                    (x, f)
                } else {
                    best
                }
            })
    }

    /// Minimum of the density over `[0,1]` minus the open ball of `radius` around `center`.
    ///
    /// Returns `None` when the ball covers the whole interval.
    pub fn min_outside(&self, center: f64, radius: f64) -> Option<f64> {
        let inside = |x: f64| (x - center).abs() < radius;
        let mut candidates: Vec<f64> = self.xs.iter().copied().filter(|&x| !inside(x)).collect();
        candidates.extend(
            [center - radius, center + radius]
                .into_iter()
                .filter(|x| (0.0..=1.0).contains(x)),
        );
        candidates.into_iter().map(|x| self.pdf(x)).reduce(f64::min)
    }

    /// `m` i.i.d. draws by inverse-cdf transform of uniform variates.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Vec<f64> {
        (0..m)
            .map(|_| self.quantile_unchecked(rng.gen::<f64>()))
            .collect()
    }

    pub fn sample(&self, m: usize, seed: u64, source: &str) -> Sample {
        let mut rng = rng::seeded(seed);
        let values = self.sample_with(&mut rng, m);
        Sample::from_values(values, seed, source).expect("quantiles are finite")
    }

    /// Mirror image `x -> 1 - x`.
    pub fn reflected(&self) -> Self {
        let knots: Vec<(f64, f64)> = self.knots().rev().map(|(x, f)| (1.0 - x, f)).collect();
        Self::new(&knots).expect("reflection of a valid density is valid")
    }
}

/// The V-shaped density with its unique zero at `1/4`:
/// `(4-16x)/3` on `[0,1/4]`, `(16x-4)/3` on `(1/4,1/2)`, and `4/3` on `[1/2,1]`.
pub fn thm2_density() -> PiecewiseLinearDensity {
    PiecewiseLinearDensity::new(&[
        (0.0, 4.0 / 3.0),
        (0.25, 0.0),
        (0.5, 4.0 / 3.0),
        (1.0, 4.0 / 3.0),
    ])
    .expect("thm2 knots are valid")
}

/// A pair of densities that agree outside two thin V-notches.
///
/// `f` is constant except for a notch of width `1/n` with its zero at `1/4`;
/// `g(x) = f(1 - x)` carries the notch at `3/4`. The constant level is
/// `c = 2n / (2n - 1)`.
pub fn adversarial_pair(n: u32) -> Result<(PiecewiseLinearDensity, PiecewiseLinearDensity)> {
    if n < 4 {
        return Err(Error::param(format!(
            "adversarial sharpness n={n} must be at least 4"
        )));
    }
    let half = 0.5 / n as f64;
    let f = PiecewiseLinearDensity::new(&[
        (0.0, 1.0),
        (0.25 - half, 1.0),
        (0.25, 0.0),
        (0.25 + half, 1.0),
        (1.0, 1.0),
    ])?;
    let g = f.reflected();
    Ok((f, g))
}
