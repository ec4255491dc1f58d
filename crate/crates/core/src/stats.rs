//! Distribution-level estimators over a single attribute's logits: empirical
//! CDF, Gaussian kernel density estimation and 1-D earth mover's distance.

use crate::error::{Error, Result};
use crate::normal;

/// Name recorded in report metadata for the bandwidth selector.
pub const BANDWIDTH_RULE: &str = "silverman: 0.9*min(sd, iqr/1.34)*n^-0.2, floor 1e-6*range";

/// Kernel terms farther than this many bandwidths from the query are below
/// `φ(12) ≈ 2e-32` and are skipped.
const KERNEL_CUTOFF: f64 = 12.0;

/// Grid size used by [`DensityEstimate::grid_integral`].
pub const NORMALIZATION_GRID: usize = 2048;

/// Fraction of `scores` strictly below `x`. `1 - ecdf_at(s, t)` is the
/// positive proportion under the "`score >= t` is positive" rule.
pub fn ecdf_at(scores: &[f64], x: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("ecdf needs at least one score"));
    }
    let below = scores.iter().filter(|&&s| s < x).count();
    Ok(below as f64 / scores.len() as f64)
}

fn sorted_copy(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

fn bandwidth_sorted(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    let (min, max) = match (sorted.first(), sorted.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => {
            return Err(Error::DegenerateSample(format!(
                "bandwidth needs at least 2 distinct values, got {n} sample(s) with one value"
            )))
        }
    };
    let sd = sample_sd(sorted);
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = sd.min(iqr / 1.34);
    let h = 0.9 * spread * libm::pow(n as f64, -0.2);
    Ok(h.max(1e-6 * (max - min)))
}

/// Silverman's rule-of-thumb bandwidth, `0.9 · min(σ, IQR/1.34) · n^(-1/5)`,
/// floored at `1e-6 · (max - min)` so that samples with a collapsed IQR
/// still get a positive bandwidth.
pub fn kde_bandwidth(scores: &[f64]) -> Result<f64> {
    bandwidth_sorted(&sorted_copy(scores))
}

/// Gaussian kernel density estimate of one attribute's logits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl DensityEstimate {
    /// Estimate with a Silverman bandwidth.
    pub fn fit(scores: &[f64]) -> Result<Self> {
        let samples = sorted_copy(scores);
        let bandwidth = bandwidth_sorted(&samples)?;
        Ok(Self { samples, bandwidth })
    }

    /// Estimate with a caller-chosen bandwidth.
    pub fn with_bandwidth(scores: &[f64], bandwidth: f64) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyInput("density estimate needs at least one score"));
        }
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::OutOfRange("non-finite score in density estimate".into()));
        }
        Ok(Self {
            samples: sorted_copy(scores),
            bandwidth,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// The sorted samples the estimate is built on.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `(1 / (n·h)) · Σ φ((x − s_i) / h)`. Samples beyond twelve bandwidths
    /// contribute less than `2e-32` each and are skipped.
    pub fn density_at(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let reach = KERNEL_CUTOFF * h;
        let lo = self.samples.partition_point(|&s| s < x - reach);
        let hi = self.samples.partition_point(|&s| s <= x + reach);
        let inv_h = 1.0 / h;
        let sum: f64 = self.samples[lo..hi]
            .iter()
            .map(|&s| {
                let z = (x - s) * inv_h;
                libm::exp(-0.5 * z * z)
            })
            .sum();
        normal::INV_SQRT_2PI * sum / (self.samples.len() as f64 * h)
    }

    /// Grid `[min − 5h, max + 5h]` with `points` evenly spaced nodes.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        let h = self.bandwidth;
        let a = self.samples[0] - 5.0 * h;
        let b = self.samples[self.samples.len() - 1] + 5.0 * h;
        let step = (b - a) / (points - 1) as f64;
        (0..points).map(|i| a + i as f64 * step).collect()
    }

    /// Trapezoid-rule integral of the density over [`Self::grid`] with
    /// [`NORMALIZATION_GRID`] points. Should be 1 up to discretisation error.
    pub fn grid_integral(&self) -> f64 {
        let xs = self.grid(NORMALIZATION_GRID);
        let step = xs[1] - xs[0];
        let ys: Vec<f64> = xs.iter().map(|&x| self.density_at(x)).collect();
        let inner: f64 = ys[1..ys.len() - 1].iter().sum();
        step * (inner + 0.5 * (ys[0] + ys[ys.len() - 1]))
    }
}

/// Convenience wrapper for `estimate.density_at(x)`.
pub fn kde_density_at(estimate: &DensityEstimate, x: f64) -> f64 {
    estimate.density_at(x)
}

/// Wasserstein-1 distance between the empirical distributions of `a` and `b`.
///
/// Equal sizes pair order statistics. Otherwise `∫ |F_a − F_b|` is
/// integrated exactly by sweeping the merged breakpoints; between two
/// breakpoints both ECDFs are constant.
pub fn emd_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("emd needs two non-empty samples"));
    }
    let a = sorted_copy(a);
    let b = sorted_copy(b);
    if a.len() == b.len() {
        let total: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        return Ok(total / a.len() as f64);
    }

    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut prev = a[0].min(b[0]);
    let mut total = 0.0;
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        // ECDFs on [prev, next) use counts up to and including `prev`.
        let fa = i as f64 / na;
        let fb = j as f64 / nb;
        total += (fa - fb).abs() * (next - prev);
        while i < a.len() && a[i] == next {
            i += 1;
        }
        while j < b.len() && b[j] == next {
            j += 1;
        }
        prev = next;
    }
    Ok(total)
}
