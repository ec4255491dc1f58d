use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use biasshift_core::biasmetrics::{boundary_density, AnalysisOptions, IntervalPlan};
use biasshift_core::dataspec::render_report;
use biasshift_core::resample::ResamplePlan;
use biasshift_core::shiftlab::{self, ScenarioOutcome, ShiftScenario};
use biasshift_core::{
    analyze_with, categorize, load_score_table, positive_proportion, sampling_error_curve,
    DecisionRule, DensityEstimate, Error, Report, ReportFormat, RunMetadata, ScoreTable, SplitTag,
};

use crate::args::{AnalyzeArgs, CategorizeArgs, Format, SamplingErrorArgs, SimulateArgs, ThresholdArgs};

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::AttributeMismatch { .. } => EXIT_MISMATCH,
            Error::Io { .. } => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn load(path: &Path, split: SplitTag) -> CliResult<ScoreTable> {
    // Any failure to read an input table, including a missing file, is an
    // input error.
    load_score_table(path, split).map_err(|e| CliError::input(e.to_string()))
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::internal(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::internal(format!("stdout: {e}"))),
    }
}

fn build_rule(table: &ScoreTable, args: &ThresholdArgs) -> CliResult<DecisionRule> {
    let mut rule = DecisionRule::uniform(table.attributes(), args.default_threshold)?;
    for (name, t) in &args.thresholds {
        if table.attribute_index(name).is_none() {
            return Err(CliError::input(format!(
                "--threshold names unknown attribute `{name}`"
            )));
        }
        rule.set(name, *t)?;
    }
    Ok(rule)
}

fn percent(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

pub fn analyze(args: &AnalyzeArgs) -> CliResult {
    let reference = load(&args.reference, SplitTag::from(args.ref_split.as_str()))?;
    let generated = load(&args.generated, SplitTag::from(args.gen_split.as_str()))?;
    let rule = build_rule(&reference, &args.thresholds)?;
    let intervals = match args.replicates {
        0 => None,
        1 => return Err(CliError::input("--replicates must be 0 or at least 2")),
        replicates => Some(IntervalPlan {
            replicates,
            seed: args.seed,
        }),
    };
    let options = AnalysisOptions {
        categorization_threshold: args.cat_threshold,
        intervals,
    };
    let analysis = analyze_with(&reference, &generated, &rule, &options)?;

    let mut metadata = RunMetadata::new(reference.split(), generated.split(), args.cat_threshold);
    metadata.seed = Some(args.seed);
    metadata.replicates = intervals.map(|p| p.replicates);
    let report = Report {
        records: analysis.records,
        abs: analysis.summary,
        metadata,
    };
    let format = match args.format {
        Format::Json => ReportFormat::Json,
        Format::Csv => ReportFormat::Csv,
    };
    let mut buf = Vec::new();
    render_report(&report, format, &mut buf)?;
    emit(args.out.as_ref(), &buf)?;

    if let Some(path) = &args.plot_data {
        let data = density_curves(&reference, &generated, &rule)?;
        std::fs::write(path, data)
            .map_err(|e| CliError::internal(format!("{}: {e}", path.display())))?;
    }

    let abs = &report.abs;
    let mut summary = format!(
        "ABS overall {} over {} attributes\n",
        percent(abs.overall),
        report.records.len()
    );
    for (name, mean, count) in [
        ("spectrum", abs.spectrum, abs.counts.spectrum),
        ("non-spectrum", abs.non_spectrum, abs.counts.non_spectrum),
    ] {
        let shown = mean.map(percent).unwrap_or_else(|| "-".into());
        let _ = writeln!(summary, "  {name:<13} {shown:>8} ({count})");
    }
    eprint!("{summary}");
    Ok(())
}

const PLOT_POINTS: usize = 256;

/// Long-form CSV of both splits' density curves, for plotting each
/// attribute's logit distribution with its boundary marked.
fn density_curves(reference: &ScoreTable, generated: &ScoreTable, rule: &DecisionRule) -> CliResult<String> {
    let mut out = String::from("attribute,split,threshold,x,density\n");
    for (j, name) in reference.attributes().iter().enumerate() {
        let t = rule.threshold(name)?;
        let gen_col = generated.column_by_name(name).expect("attribute sets checked");
        let ref_est = DensityEstimate::fit(reference.column(j))?;
        let gen_est = DensityEstimate::fit(gen_col).ok();
        let h = ref_est.bandwidth();
        let lo = ref_est.samples()[0].min(gen_col.iter().cloned().fold(f64::INFINITY, f64::min)) - 3.0 * h;
        let hi = ref_est.samples()[ref_est.samples().len() - 1]
            .max(gen_col.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            + 3.0 * h;
        let step = (hi - lo) / (PLOT_POINTS - 1) as f64;
        let splits = [(reference.split(), Some(&ref_est)), (generated.split(), gen_est.as_ref())];
        for (split, est) in splits {
            let Some(est) = est else { continue };
            for i in 0..PLOT_POINTS {
                let x = lo + i as f64 * step;
                let _ = writeln!(out, "{},{split},{t},{x},{}", csv_field(name), est.density_at(x));
            }
        }
    }
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn categorize_cmd(args: &CategorizeArgs) -> CliResult {
    let table = load(&args.reference, SplitTag::Val)?;
    let rule = build_rule(&table, &args.thresholds)?;
    let mut out = String::from("attribute,threshold,p_ref,bandwidth,boundary_density,category\n");
    for (j, name) in table.attributes().iter().enumerate() {
        let t = rule.threshold(name)?;
        let col = table.column(j);
        let (density, h) = boundary_density(col, t)
            .map_err(|e| CliError::input(format!("attribute `{name}`: {e}")))?;
        let category = categorize(density, args.cat_threshold)?;
        let p = positive_proportion(col, t)?;
        let _ = writeln!(out, "{},{t},{p},{h},{density},{category}", csv_field(name));
    }
    emit(args.out.as_ref(), out.as_bytes())
}

pub fn sampling_error(args: &SamplingErrorArgs) -> CliResult {
    let table = load(&args.reference, SplitTag::Val)?;
    let rule = build_rule(&table, &args.thresholds)?;
    let plan = ResamplePlan::new(args.sizes.clone(), args.replicates, args.seed)?;
    let curve = sampling_error_curve(&table, &rule, &plan)?;
    let mut out = String::from("size,mean_abs,std\n");
    for p in &curve {
        let _ = writeln!(out, "{},{},{}", p.size, p.mean_abs, p.std_abs);
    }
    emit(args.out.as_ref(), out.as_bytes())
}

pub fn simulate(args: &SimulateArgs) -> CliResult {
    let mut scenarios: Vec<ShiftScenario> = Vec::new();
    if let Some(name) = &args.builtin {
        let set = shiftlab::builtin(name).ok_or_else(|| {
            CliError::input(format!(
                "unknown builtin `{name}`; available: {}",
                shiftlab::BUILTIN_NAMES.join(", ")
            ))
        })?;
        scenarios.extend(set);
    }
    for path in &args.scenario {
        let s = shiftlab::load_scenario(path).map_err(|e| CliError::input(e.to_string()))?;
        scenarios.push(s);
    }
    if args.n == 0 {
        return Err(CliError::input("--n must be at least 1"));
    }
    let rows = shiftlab::run_scenarios(&scenarios, args.n, args.seed)?;

    let bytes = match args.format {
        Format::Csv => simulation_csv(&rows).into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rows).map_err(|e| CliError::internal(e.to_string()))?;
            v.push(b'\n');
            v
        }
    };
    emit(args.out.as_ref(), &bytes)?;

    for r in &rows {
        eprintln!(
            "{:<28} f(t)={:<12.4e} analytic={:<10.6} empirical={:<10.6} emd={:.4}{}",
            r.label,
            r.boundary_density,
            r.analytic_shift,
            r.empirical_shift,
            r.emd,
            if r.within_sampling_bound() { "" } else { "  [outside 3-sigma bound]" }
        );
    }
    if args.builtin.as_deref() == Some("fig1") {
        let table = shiftlab::Fig1Table { rows: rows.clone() };
        eprintln!(
            "fig1: shift contrast {:.1}x (analytic), {:.1}x (empirical); max EMD deviation from |delta| {:.2}%",
            table.contrast_ratio(|r| r.analytic_shift),
            table.contrast_ratio(|r| r.empirical_shift),
            100.0 * table.max_emd_deviation()
        );
    }
    Ok(())
}

fn simulation_csv(rows: &[ScenarioOutcome]) -> String {
    let mut out = String::from(
        "label,boundary_density,analytic_shift,empirical_shift,emd,delta,threshold,n,p_base,sampling_bound\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.label),
            r.boundary_density,
            r.analytic_shift,
            r.empirical_shift,
            r.emd,
            r.delta,
            r.threshold,
            r.n,
            r.p_base,
            r.sampling_bound()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        let mismatch = Error::AttributeMismatch {
            missing_in_gen: vec!["a".into()],
            missing_in_ref: vec![],
        };
        assert_eq!(CliError::from(mismatch).code, EXIT_MISMATCH);
        assert_eq!(CliError::from(Error::MissingThreshold("a".into())).code, EXIT_INPUT);
        assert_eq!(
            CliError::from(Error::SizeExceedsPopulation { size: 5, population: 4 }).code,
            EXIT_INPUT
        );
    }

    #[test]
    fn percentages_use_two_decimals() {
        assert_eq!(percent(0.0325), "3.25%");
        assert_eq!(percent(0.0071), "0.71%");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
