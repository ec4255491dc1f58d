//! Attribute bias shift between a reference and a generated set of
//! classifier logits.
//!
//! For every attribute the crate measures the positive proportion on both
//! splits, the shift between them, the reference density at the decision
//! boundary (which sorts attributes into *spectrum* and *non-spectrum*
//! ones) and the earth mover's distance between the two logit
//! distributions. [`shiftlab`] checks the translation identity behind the
//! categorization on synthetic mixtures.
//!
//! ```
//! use biasshift_core::{analyze, DecisionRule, ScoreTable, SplitTag};
//!
//! let reference = ScoreTable::new(SplitTag::Val, vec!["smiling".into()],
//!     vec![vec![-1.0, -1.0, 1.0, 1.0]], None).unwrap();
//! let generated = ScoreTable::new(SplitTag::Gen, vec!["smiling".into()],
//!     vec![vec![-1.0, 1.0, 1.0, 1.0]], None).unwrap();
//! let rule = DecisionRule::uniform(&["smiling"], 0.0).unwrap();
//! let out = analyze(&reference, &generated, &rule, 0.01).unwrap();
//! assert_eq!(out.records[0].bias_shift, 0.25);
//! ```

pub mod biasmetrics;
pub mod dataspec;
pub mod error;
pub mod normal;
pub mod resample;
pub mod rng;
pub mod shiftlab;
pub mod stats;

pub use biasmetrics::{
    abs_metric, analyze, analyze_with, bias_shift, bias_vs_ideal, categorize, positive_proportion,
    summarize, AbsSummary, Analysis, AnalysisOptions, IdealReference, IntervalPlan,
    DEFAULT_CATEGORIZATION_THRESHOLD, DEFAULT_DECISION_THRESHOLD,
};
pub use dataspec::{
    load_score_table, read_report, write_report, write_score_table, BiasRecord, Category,
    DecisionRule, Report, ReportFormat, RunMetadata, ScoreTable, SplitTag,
};
pub use error::{Error, Result};
pub use resample::{
    bootstrap_proportion_ci, sampling_error_curve, CurvePoint, ProportionInterval, ResamplePlan,
};
pub use shiftlab::{
    analytic_shift, empirical_shift, fig1_experiment, mixture_cdf, sample_scenario, Component,
    Fig1Table, ScenarioOutcome, ShiftScenario,
};
pub use stats::{ecdf_at, emd_1d, kde_bandwidth, kde_density_at, DensityEstimate};
