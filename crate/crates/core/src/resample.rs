//! Sampling-error analysis.
//!
//! Two resampling schemes live here and they are deliberately different:
//!
//! * [`bootstrap_proportion_ci`] resamples *with* replacement at the full
//!   sample size to estimate the spread of a positive proportion.
//! * [`sampling_error_curve`] draws subsets *without* replacement from a
//!   reference table and measures the ABS between each subset and the whole
//!   table, showing how much shift finite sampling alone produces.
//!
//! Each replicate owns a ChaCha stream derived from the seed (see
//! [`crate::rng`]), so results do not depend on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biasmetrics::positive_proportion;
use crate::dataspec::{DecisionRule, ScoreTable};
use crate::error::{Error, Result};
use crate::rng::{self, domain};

/// Normal multiplier for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

pub const DEFAULT_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionInterval {
    pub mean: f64,
    pub standard_error: f64,
    pub half_width: f64,
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Bootstrap mean, standard error and 95% half-width of the positive
/// proportion of `scores` at threshold `t`.
pub fn bootstrap_proportion_ci(
    scores: &[f64],
    t: f64,
    replicates: usize,
    seed: u64,
) -> Result<ProportionInterval> {
    bootstrap_proportion_ci_stream(scores, t, replicates, seed, 0)
}

/// As [`bootstrap_proportion_ci`], drawing from the streams reserved for
/// work item `major` (the attribute slot when called from an analysis).
pub fn bootstrap_proportion_ci_stream(
    scores: &[f64],
    t: f64,
    replicates: usize,
    seed: u64,
    major: u64,
) -> Result<ProportionInterval> {
    // Validates emptiness and the threshold.
    positive_proportion(scores, t)?;
    if replicates < 2 {
        return Err(Error::InvalidPlan("bootstrap needs at least 2 replicates".into()));
    }
    let positive: Vec<bool> = scores.iter().map(|&s| s >= t).collect();
    let n = positive.len() as u64;
    let props: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng::stream(seed, domain::BOOTSTRAP, major, rep);
            let hits = (0..n)
                .filter(|_| positive[rng.random_range(0..n) as usize])
                .count();
            hits as f64 / n as f64
        })
        .collect();
    let (mean, se) = mean_and_sd(&props);
    Ok(ProportionInterval {
        mean,
        standard_error: se,
        half_width: Z_95 * se,
    })
}

/// Subset sizes, replicate count and seed for [`sampling_error_curve`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResamplePlan {
    sizes: Vec<usize>,
    replicates: usize,
    seed: u64,
}

impl ResamplePlan {
    pub fn new(sizes: Vec<usize>, replicates: usize, seed: u64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPlan("no subsample sizes".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidPlan("subsample sizes must be positive".into()));
        }
        if replicates < 2 {
            return Err(Error::InvalidPlan("at least 2 replicates are required".into()));
        }
        Ok(Self {
            sizes,
            replicates,
            seed,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub mean_abs: f64,
    pub std_abs: f64,
}

/// For each subset size, the mean and standard deviation over replicates of
/// the ABS between a random subset (without replacement) and the full table.
pub fn sampling_error_curve(
    table: &ScoreTable,
    rule: &DecisionRule,
    plan: &ResamplePlan,
) -> Result<Vec<CurvePoint>> {
    let population = table.n_rows();
    if let Some(&size) = plan.sizes.iter().find(|&&s| s > population) {
        return Err(Error::SizeExceedsPopulation { size, population });
    }
    let mut positive = Vec::with_capacity(table.n_attributes());
    let mut full = Vec::with_capacity(table.n_attributes());
    for (j, name) in table.attributes().iter().enumerate() {
        let t = rule.threshold(name)?;
        let col = table.column(j);
        full.push(positive_proportion(col, t)?);
        positive.push(col.iter().map(|&s| s >= t).collect::<Vec<bool>>());
    }

    plan.sizes
        .iter()
        .map(|&size| {
            let values: Vec<f64> = (0..plan.replicates as u64)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = rng::stream(plan.seed, domain::SUBSAMPLE, size as u64, rep);
                    let rows = rand::seq::index::sample(&mut rng, population, size);
                    let total: f64 = positive
                        .iter()
                        .zip(&full)
                        .map(|(pos, &p_full)| {
                            let hits = rows.iter().filter(|&i| pos[i]).count();
                            (hits as f64 / size as f64 - p_full).abs()
                        })
                        .sum();
                    total / positive.len() as f64
                })
                .collect();
            let (mean_abs, std_abs) = mean_and_sd(&values);
            Ok(CurvePoint {
                size,
                mean_abs,
                std_abs,
            })
        })
        .collect()
}
