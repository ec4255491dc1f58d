//! Proportions, bias against an ideal reference, attribute bias shift, the
//! average shift (ABS) and density-based categorization of attributes.
//!
//! Everything is computed from classifier-predicted labels: a sample counts
//! as positive for an attribute when its logit is at or above the
//! attribute's threshold. Ground-truth labels are never consulted.
//!
//! The bias of a split relative to an ideal proportion is `p − p_ideal`.
//! The shift between a generated and a reference split subtracts two such
//! biases, so the ideal proportion drops out:
//! `|(p_gen − p_ideal) − (p_ref − p_ideal)| = |p_gen − p_ref|`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataspec::{BiasRecord, Category, DecisionRule, ScoreTable};
use crate::error::{Error, Result};
use crate::resample;
use crate::stats::{emd_1d, kde_bandwidth, DensityEstimate};

/// Default boundary-density cut between spectrum and non-spectrum
/// attributes, in probability density per logit unit.
pub const DEFAULT_CATEGORIZATION_THRESHOLD: f64 = 0.01;

/// Default decision threshold in logit space (sigmoid probability 0.5).
pub const DEFAULT_DECISION_THRESHOLD: f64 = 0.0;

fn check_proportion(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("{name} = {p} is not a proportion in [0, 1]")))
    }
}

/// Fraction of scores with `score >= t`.
pub fn positive_proportion(scores: &[f64], t: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("proportion needs at least one score"));
    }
    if !t.is_finite() {
        return Err(Error::OutOfRange(format!("threshold must be finite, got {t}")));
    }
    let positives = scores.iter().filter(|&&s| s >= t).count();
    Ok(positives as f64 / scores.len() as f64)
}

/// Signed bias `p_obs − p_ideal`.
pub fn bias_vs_ideal(p_obs: f64, p_ideal: f64) -> Result<f64> {
    check_proportion("observed proportion", p_obs)?;
    check_proportion("ideal proportion", p_ideal)?;
    Ok(p_obs - p_ideal)
}

/// Attribute bias shift `|p_gen − p_ref|`.
pub fn bias_shift(p_gen: f64, p_ref: f64) -> Result<f64> {
    check_proportion("generated proportion", p_gen)?;
    check_proportion("reference proportion", p_ref)?;
    Ok((p_gen - p_ref).abs())
}

/// Unweighted mean of per-attribute shifts.
pub fn abs_metric(shifts: &[f64]) -> Result<f64> {
    if shifts.is_empty() {
        return Err(Error::EmptyInput("ABS needs at least one shift"));
    }
    for &s in shifts {
        check_proportion("shift", s)?;
    }
    Ok(shifts.iter().sum::<f64>() / shifts.len() as f64)
}

/// `Spectrum` iff `boundary_density > threshold` (strict).
pub fn categorize(boundary_density: f64, threshold: f64) -> Result<Category> {
    if !(boundary_density >= 0.0) {
        return Err(Error::OutOfRange(format!(
            "boundary density must be non-negative, got {boundary_density}"
        )));
    }
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "categorization threshold must be finite and non-negative, got {threshold}"
        )));
    }
    Ok(if boundary_density > threshold {
        Category::Spectrum
    } else {
        Category::NonSpectrum
    })
}

/// Target proportions an analyst considers unbiased.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IdealReference {
    probabilities: BTreeMap<String, f64>,
}

impl IdealReference {
    pub fn new(probabilities: BTreeMap<String, f64>) -> Result<Self> {
        for (name, &p) in &probabilities {
            check_proportion(name, p)?;
        }
        Ok(Self { probabilities })
    }

    pub fn get(&self, attribute: &str) -> Option<f64> {
        self.probabilities.get(attribute).copied()
    }

    /// Signed bias of an observed proportion for `attribute`.
    pub fn bias_of(&self, attribute: &str, p_obs: f64) -> Result<f64> {
        let ideal = self
            .get(attribute)
            .ok_or_else(|| Error::OutOfRange(format!("no ideal proportion for `{attribute}`")))?;
        bias_vs_ideal(p_obs, ideal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub spectrum: usize,
    pub non_spectrum: usize,
}

/// ABS over all attributes and per category. A category with no
/// attributes has no mean (`None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsSummary {
    pub overall: f64,
    pub spectrum: Option<f64>,
    pub non_spectrum: Option<f64>,
    pub counts: CategoryCounts,
}

impl AbsSummary {
    pub fn by_category(&self, category: Category) -> Option<f64> {
        match category {
            Category::Spectrum => self.spectrum,
            Category::NonSpectrum => self.non_spectrum,
        }
    }

    pub fn count(&self, category: Category) -> usize {
        match category {
            Category::Spectrum => self.counts.spectrum,
            Category::NonSpectrum => self.counts.non_spectrum,
        }
    }
}

/// Summarises a set of records into overall and per-category ABS.
pub fn summarize(records: &[BiasRecord]) -> Result<AbsSummary> {
    let all: Vec<f64> = records.iter().map(|r| r.bias_shift).collect();
    let overall = abs_metric(&all)?;
    let mean_of = |c: Category| -> Result<Option<f64>> {
        let shifts: Vec<f64> = records
            .iter()
            .filter(|r| r.category == c)
            .map(|r| r.bias_shift)
            .collect();
        if shifts.is_empty() {
            Ok(None)
        } else {
            abs_metric(&shifts).map(Some)
        }
    };
    let count = |c: Category| records.iter().filter(|r| r.category == c).count();
    Ok(AbsSummary {
        overall,
        spectrum: mean_of(Category::Spectrum)?,
        non_spectrum: mean_of(Category::NonSpectrum)?,
        counts: CategoryCounts {
            spectrum: count(Category::Spectrum),
            non_spectrum: count(Category::NonSpectrum),
        },
    })
}

/// Bootstrap settings for per-attribute confidence intervals on the shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalPlan {
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub categorization_threshold: f64,
    pub intervals: Option<IntervalPlan>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            categorization_threshold: DEFAULT_CATEGORIZATION_THRESHOLD,
            intervals: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub records: Vec<BiasRecord>,
    pub summary: AbsSummary,
}

/// Checks that two tables carry the same attribute set.
pub fn check_attribute_sets(reference: &ScoreTable, generated: &ScoreTable) -> Result<()> {
    let missing_in_gen: Vec<String> = reference
        .attributes()
        .iter()
        .filter(|a| generated.attribute_index(a).is_none())
        .cloned()
        .collect();
    let missing_in_ref: Vec<String> = generated
        .attributes()
        .iter()
        .filter(|a| reference.attribute_index(a).is_none())
        .cloned()
        .collect();
    if missing_in_gen.is_empty() && missing_in_ref.is_empty() {
        Ok(())
    } else {
        Err(Error::AttributeMismatch {
            missing_in_gen,
            missing_in_ref,
        })
    }
}

/// Reference-split boundary density and bandwidth for one attribute.
pub fn boundary_density(reference_scores: &[f64], t: f64) -> Result<(f64, f64)> {
    let est = DensityEstimate::fit(reference_scores)?;
    Ok((est.density_at(t), est.bandwidth()))
}

/// Compares a generated table against a reference table attribute by
/// attribute, in the reference table's header order.
pub fn analyze(
    reference: &ScoreTable,
    generated: &ScoreTable,
    rule: &DecisionRule,
    categorization_threshold: f64,
) -> Result<Analysis> {
    analyze_with(
        reference,
        generated,
        rule,
        &AnalysisOptions {
            categorization_threshold,
            intervals: None,
        },
    )
}

/// [`analyze`] with optional bootstrap intervals. The interval half-width is
/// `1.96 · sqrt(se_ref² + se_gen²)` from independent bootstraps of the two
/// proportions.
pub fn analyze_with(
    reference: &ScoreTable,
    generated: &ScoreTable,
    rule: &DecisionRule,
    options: &AnalysisOptions,
) -> Result<Analysis> {
    check_attribute_sets(reference, generated)?;
    for a in reference.attributes() {
        rule.threshold(a)?;
    }
    if let Some(plan) = options.intervals {
        if plan.replicates < 2 {
            return Err(Error::InvalidPlan("bootstrap needs at least 2 replicates".into()));
        }
    }
    let records = reference
        .attributes()
        .par_iter()
        .enumerate()
        .map(|(j, name)| {
            let ref_col = reference.column(j);
            let gen_col = generated
                .column_by_name(name)
                .expect("attribute sets checked above");
            analyze_attribute(j, name, ref_col, gen_col, rule.threshold(name)?, options)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&records)?;
    Ok(Analysis { records, summary })
}

fn analyze_attribute(
    index: usize,
    name: &str,
    ref_col: &[f64],
    gen_col: &[f64],
    t: f64,
    options: &AnalysisOptions,
) -> Result<BiasRecord> {
    let p_ref = positive_proportion(ref_col, t)?;
    let p_gen = positive_proportion(gen_col, t)?;
    let (density, ref_bandwidth) = boundary_density(ref_col, t).map_err(|e| match e {
        Error::DegenerateSample(msg) => {
            Error::DegenerateSample(format!("reference column `{name}`: {msg}"))
        }
        other => other,
    })?;
    let ci_half_width = match options.intervals {
        Some(plan) => {
            let major = 2 * index as u64;
            let r = resample::bootstrap_proportion_ci_stream(ref_col, t, plan.replicates, plan.seed, major)?;
            let g = resample::bootstrap_proportion_ci_stream(gen_col, t, plan.replicates, plan.seed, major + 1)?;
            Some(resample::Z_95 * (r.standard_error.powi(2) + g.standard_error.powi(2)).sqrt())
        }
        None => None,
    };
    Ok(BiasRecord {
        attribute: name.to_owned(),
        threshold: t,
        p_ref,
        p_gen,
        bias_shift: bias_shift(p_gen, p_ref)?,
        boundary_density: density,
        category: categorize(density, options.categorization_threshold)?,
        emd: emd_1d(ref_col, gen_col)?,
        ci_half_width,
        ref_bandwidth,
        gen_bandwidth: kde_bandwidth(gen_col).ok(),
    })
}
