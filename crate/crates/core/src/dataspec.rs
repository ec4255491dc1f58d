//! Score tables, decision rules, per-attribute records and report files.
//!
//! A score table is a wide CSV whose first header cell is literally
//! `sample_id`; every further column holds one attribute's pre-sigmoid
//! logits, one row per sample.
//!
//! ```text
//! sample_id,smiling,eyeglasses
//! img_0001.png,1.25,-3.5
//! img_0002.png,-0.5,-4.0e0
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::biasmetrics::AbsSummary;
use crate::error::{Error, Location, Result};

pub const SAMPLE_ID_HEADER: &str = "sample_id";

/// Which split a table was scored on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum SplitTag {
    Train,
    Val,
    Gen,
    Custom(String),
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitTag::Train => f.write_str("train"),
            SplitTag::Val => f.write_str("val"),
            SplitTag::Gen => f.write_str("gen"),
            SplitTag::Custom(s) => f.write_str(s),
        }
    }
}

impl From<&str> for SplitTag {
    fn from(s: &str) -> Self {
        match s {
            "train" => SplitTag::Train,
            "val" => SplitTag::Val,
            "gen" => SplitTag::Gen,
            other => SplitTag::Custom(other.to_owned()),
        }
    }
}

impl From<String> for SplitTag {
    fn from(s: String) -> Self {
        SplitTag::from(s.as_str())
    }
}

impl From<SplitTag> for String {
    fn from(t: SplitTag) -> Self {
        t.to_string()
    }
}

/// Per-split matrix of pre-sigmoid logits. Stored column-major since every
/// analysis walks one attribute at a time. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    split: SplitTag,
    attributes: Vec<String>,
    columns: Vec<Vec<f64>>,
    sample_ids: Option<Vec<String>>,
}

impl ScoreTable {
    /// Builds a table from per-attribute columns, checking every invariant.
    pub fn new(
        split: SplitTag,
        attributes: Vec<String>,
        columns: Vec<Vec<f64>>,
        sample_ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::InvalidTable("no attributes".into()));
        }
        if attributes.len() != columns.len() {
            return Err(Error::InvalidTable(format!(
                "{} attribute names for {} columns",
                attributes.len(),
                columns.len()
            )));
        }
        check_attribute_names(&attributes).map_err(Error::InvalidTable)?;
        let rows = columns[0].len();
        if rows == 0 {
            return Err(Error::InvalidTable("no rows".into()));
        }
        for (name, col) in attributes.iter().zip(&columns) {
            if col.len() != rows {
                return Err(Error::InvalidTable(format!(
                    "column `{name}` has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "non-finite score {} in column `{name}`, row {}",
                    col[i],
                    i + 1
                )));
            }
        }
        if let Some(ids) = &sample_ids {
            if ids.len() != rows {
                return Err(Error::InvalidTable(format!(
                    "{} sample ids for {rows} rows",
                    ids.len()
                )));
            }
        }
        Ok(Self {
            split,
            attributes,
            columns,
            sample_ids,
        })
    }

    pub fn split(&self) -> &SplitTag {
        &self.split
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn n_rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn sample_ids(&self) -> Option<&[String]> {
        self.sample_ids.as_deref()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == name)
    }

    /// Scores of attribute `j`, in row order.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.attribute_index(name).map(|j| self.column(j))
    }

    pub fn score(&self, row: usize, j: usize) -> f64 {
        self.columns[j][row]
    }

    /// Same table relabelled with another split tag.
    pub fn with_split(mut self, split: SplitTag) -> Self {
        self.split = split;
        self
    }
}

fn check_attribute_names(names: &[String]) -> std::result::Result<(), String> {
    let mut seen = HashSet::new();
    for (i, n) in names.iter().enumerate() {
        if n.trim().is_empty() {
            return Err(format!("attribute name in position {} is empty", i + 1));
        }
        if n == SAMPLE_ID_HEADER {
            return Err(format!("`{SAMPLE_ID_HEADER}` used as an attribute name"));
        }
        if !seen.insert(n.as_str()) {
            return Err(format!("duplicate attribute name `{n}`"));
        }
    }
    Ok(())
}

/// Reads and validates a score table. Problems are reported with the
/// offending data row (1-based) and CSV column (1-based).
pub fn load_score_table(path: impl AsRef<Path>, split: SplitTag) -> Result<ScoreTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r?,
        None => {
            return Err(Error::MalformedHeader {
                path: path.into(),
                reason: "file is empty".into(),
            })
        }
    };
    let malformed_header = |reason: String| Error::MalformedHeader {
        path: path.into(),
        reason,
    };
    if header.get(0) != Some(SAMPLE_ID_HEADER) {
        return Err(malformed_header(format!(
            "first column must be `{SAMPLE_ID_HEADER}`, found `{}`",
            header.get(0).unwrap_or("")
        )));
    }
    let attributes: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if attributes.is_empty() {
        return Err(malformed_header("no attribute columns".into()));
    }
    check_attribute_names(&attributes).map_err(malformed_header)?;

    let width = header.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); attributes.len()];
    let mut ids = Vec::new();
    for (i, record) in records.enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != width {
            return Err(Error::RaggedRow {
                path: path.into(),
                row,
                found: record.len(),
                expected: width,
            });
        }
        ids.push(record[0].to_owned());
        for (j, cell) in record.iter().enumerate().skip(1) {
            let location = || Location {
                row,
                column: j + 1,
                header: Some(attributes[j - 1].clone()),
            };
            let value = f64::from_str(cell.trim()).map_err(|_| Error::MalformedCell {
                path: path.into(),
                location: location(),
                reason: format!("`{cell}` is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::MalformedCell {
                    path: path.into(),
                    location: location(),
                    reason: format!("non-finite score `{cell}`"),
                });
            }
            columns[j - 1].push(value);
        }
    }
    if ids.is_empty() {
        return Err(Error::EmptyTable { path: path.into() });
    }
    ScoreTable::new(split, attributes, columns, Some(ids))
}

/// Writes a table in the wire format. Scores use Rust's shortest
/// round-trip rendering, so loading the file back gives identical bits.
/// Tables without sample ids get their 0-based row index as id.
pub fn write_score_table(table: &ScoreTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec![SAMPLE_ID_HEADER.to_owned()];
    header.extend(table.attributes.iter().cloned());
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..table.n_rows() {
        row.clear();
        row.push(match &table.sample_ids {
            Some(ids) => ids[i].clone(),
            None => i.to_string(),
        });
        row.extend(table.columns.iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Per-attribute decision thresholds in logit space. A score `s` is
/// positive when `s >= t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionRule {
    thresholds: BTreeMap<String, f64>,
}

impl DecisionRule {
    /// Same threshold for every listed attribute.
    pub fn uniform<S: AsRef<str>>(attributes: &[S], t: f64) -> Result<Self> {
        let mut rule = Self::default();
        for a in attributes {
            rule.set(a.as_ref(), t)?;
        }
        Ok(rule)
    }

    pub fn set(&mut self, attribute: &str, t: f64) -> Result<()> {
        if !t.is_finite() {
            return Err(Error::OutOfRange(format!(
                "threshold for `{attribute}` must be finite, got {t}"
            )));
        }
        self.thresholds.insert(attribute.to_owned(), t);
        Ok(())
    }

    pub fn threshold(&self, attribute: &str) -> Result<f64> {
        self.thresholds
            .get(attribute)
            .copied()
            .ok_or_else(|| Error::MissingThreshold(attribute.to_owned()))
    }

    pub fn thresholds(&self) -> &BTreeMap<String, f64> {
        &self.thresholds
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Spectrum,
    NonSpectrum,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Spectrum => "spectrum",
            Category::NonSpectrum => "non_spectrum",
        })
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrum" => Ok(Category::Spectrum),
            "non_spectrum" => Ok(Category::NonSpectrum),
            other => Err(Error::OutOfRange(format!("unknown category `{other}`"))),
        }
    }
}

/// Everything measured for one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRecord {
    pub attribute: String,
    pub threshold: f64,
    pub p_ref: f64,
    pub p_gen: f64,
    /// Always `|p_gen - p_ref|`.
    pub bias_shift: f64,
    /// Reference-split KDE density at the threshold, per logit unit.
    pub boundary_density: f64,
    pub category: Category,
    pub emd: f64,
    pub ci_half_width: Option<f64>,
    pub ref_bandwidth: f64,
    /// `None` when the generated column has fewer than two distinct values.
    pub gen_bandwidth: Option<f64>,
}

/// Run parameters embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub reference_split: String,
    pub generated_split: String,
    pub categorization_threshold: f64,
    pub bandwidth_rule: String,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

impl RunMetadata {
    pub fn new(reference: &SplitTag, generated: &SplitTag, categorization_threshold: f64) -> Self {
        Self {
            tool: "biasshift".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            reference_split: reference.to_string(),
            generated_split: generated.to_string(),
            categorization_threshold,
            bandwidth_rule: crate::stats::BANDWIDTH_RULE.into(),
            seed: None,
            replicates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<BiasRecord>,
    pub abs: AbsSummary,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::OutOfRange(format!("unknown report format `{other}`"))),
        }
    }
}

const RECORD_COLUMNS: [&str; 11] = [
    "attribute",
    "threshold",
    "p_ref",
    "p_gen",
    "bias_shift",
    "boundary_density",
    "category",
    "emd",
    "ci_half_width",
    "ref_bandwidth",
    "gen_bandwidth",
];

/// Renders a report into any writer.
pub fn render_report(report: &Report, format: ReportFormat, out: &mut dyn Write) -> Result<()> {
    if report.records.is_empty() {
        return Err(Error::EmptyInput("report has no records"));
    }
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out).map_err(|e| Error::io("<report>", e))?;
        }
        ReportFormat::Csv => render_csv(report, out)?,
    }
    Ok(())
}

/// Writes a report file. Floats are rendered with shortest round-trip
/// precision in both formats.
pub fn write_report(report: &Report, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    if report.records.is_empty() {
        return Err(Error::EmptyInput("report has no records"));
    }
    let mut buf = Vec::new();
    render_report(report, format, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

fn render_csv(report: &Report, out: &mut dyn Write) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut *out);
        w.write_record(RECORD_COLUMNS)?;
        for r in &report.records {
            w.write_record([
                r.attribute.clone(),
                r.threshold.to_string(),
                r.p_ref.to_string(),
                r.p_gen.to_string(),
                r.bias_shift.to_string(),
                r.boundary_density.to_string(),
                r.category.to_string(),
                r.emd.to_string(),
                opt(&r.ci_half_width),
                r.ref_bandwidth.to_string(),
                opt(&r.gen_bandwidth),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<report>", e))?;
    }
    let a = &report.abs;
    let m = &report.metadata;
    let summary = [
        ("abs_overall", a.overall.to_string()),
        ("abs_spectrum", opt(&a.spectrum)),
        ("abs_non_spectrum", opt(&a.non_spectrum)),
        ("count_spectrum", a.counts.spectrum.to_string()),
        ("count_non_spectrum", a.counts.non_spectrum.to_string()),
        ("tool", m.tool.clone()),
        ("version", m.version.clone()),
        ("reference_split", m.reference_split.clone()),
        ("generated_split", m.generated_split.clone()),
        ("categorization_threshold", m.categorization_threshold.to_string()),
        ("bandwidth_rule", m.bandwidth_rule.clone()),
        ("seed", opt(&m.seed)),
        ("replicates", opt(&m.replicates)),
    ];
    for (k, v) in summary {
        writeln!(out, "# {k},{v}").map_err(|e| Error::io("<report>", e))?;
    }
    Ok(())
}

/// Parses a report written by [`write_report`].
pub fn read_report(path: impl AsRef<Path>, format: ReportFormat) -> Result<Report> {
    let path = path.as_ref();
    match format {
        ReportFormat::Json => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            Ok(serde_json::from_reader(BufReader::new(file))?)
        }
        ReportFormat::Csv => read_csv_report(path),
    }
}

fn read_csv_report(path: &Path) -> Result<Report> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut body = String::new();
    let mut summary = BTreeMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once(',').unwrap_or((rest, ""));
            summary.insert(k.to_owned(), v.to_owned());
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    let bad = |what: &str| Error::MalformedHeader {
        path: path.into(),
        reason: format!("report field `{what}` missing or invalid"),
    };
    let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
    let opt_num = |s: &str, what: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, what).map(Some)
        }
    };

    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != RECORD_COLUMNS.len() {
            return Err(bad("record width"));
        }
        records.push(BiasRecord {
            attribute: rec[0].to_owned(),
            threshold: num(&rec[1], "threshold")?,
            p_ref: num(&rec[2], "p_ref")?,
            p_gen: num(&rec[3], "p_gen")?,
            bias_shift: num(&rec[4], "bias_shift")?,
            boundary_density: num(&rec[5], "boundary_density")?,
            category: rec[6].parse()?,
            emd: num(&rec[7], "emd")?,
            ci_half_width: opt_num(&rec[8], "ci_half_width")?,
            ref_bandwidth: num(&rec[9], "ref_bandwidth")?,
            gen_bandwidth: opt_num(&rec[10], "gen_bandwidth")?,
        });
    }
    let get = |k: &str| summary.get(k).map(String::as_str).ok_or_else(|| bad(k));
    let count = |k: &str| get(k)?.parse::<usize>().map_err(|_| bad(k));
    let abs = AbsSummary {
        overall: num(get("abs_overall")?, "abs_overall")?,
        spectrum: opt_num(get("abs_spectrum")?, "abs_spectrum")?,
        non_spectrum: opt_num(get("abs_non_spectrum")?, "abs_non_spectrum")?,
        counts: crate::biasmetrics::CategoryCounts {
            spectrum: count("count_spectrum")?,
            non_spectrum: count("count_non_spectrum")?,
        },
    };
    let seed = get("seed")?;
    let replicates = get("replicates")?;
    let metadata = RunMetadata {
        tool: get("tool")?.to_owned(),
        version: get("version")?.to_owned(),
        reference_split: get("reference_split")?.to_owned(),
        generated_split: get("generated_split")?.to_owned(),
        categorization_threshold: num(get("categorization_threshold")?, "categorization_threshold")?,
        bandwidth_rule: get("bandwidth_rule")?.to_owned(),
        seed: if seed.is_empty() {
            None
        } else {
            Some(seed.parse().map_err(|_| bad("seed"))?)
        },
        replicates: if replicates.is_empty() {
            None
        } else {
            Some(replicates.parse().map_err(|_| bad("replicates"))?)
        },
    };
    Ok(Report {
        records,
        abs,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biasmetrics::summarize;
    use proptest::prelude::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_table() {
        let f = write_tmp("sample_id,smiling\na,0.5\n");
        let t = load_score_table(f.path(), SplitTag::Val).unwrap();
        assert_eq!(t.attributes(), ["smiling"]);
        assert_eq!(t.n_rows(), 1);
        assert_eq!(t.score(0, 0), 0.5);
        assert_eq!(t.sample_ids().unwrap(), ["a"]);
        assert_eq!(t.split(), &SplitTag::Val);
    }

    #[test]
    fn scientific_notation_and_header_order() {
        let f = write_tmp("sample_id,z,a,m\nx,1e-3,-2.5E2,+4\ny,0,1,2\n");
        let t = load_score_table(f.path(), SplitTag::Gen).unwrap();
        assert_eq!(t.attributes(), ["z", "a", "m"]);
        assert_eq!(t.column(1), [-250.0, 1.0]);
        assert_eq!(t.column(0), [1e-3, 0.0]);
    }

    #[test]
    fn nan_cell_names_row_and_column() {
        let f = write_tmp("sample_id,a,b\nx,1,2\ny,3,NaN\n");
        let err = load_score_table(f.path(), SplitTag::Val).unwrap_err();
        match &err {
            Error::MalformedCell { location, .. } => {
                assert_eq!(location.row, 2);
                assert_eq!(location.column, 3);
                assert_eq!(location.header.as_deref(), Some("b"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("column 3"), "{msg}");
    }

    #[test]
    fn infinite_and_non_numeric_cells() {
        for bad in ["inf", "-infinity", "abc", ""] {
            let f = write_tmp(&format!("sample_id,a\nx,{bad}\n"));
            assert!(matches!(
                load_score_table(f.path(), SplitTag::Val),
                Err(Error::MalformedCell { .. })
            ));
        }
    }

    #[test]
    fn header_errors() {
        for contents in [
            "",
            "id,a\nx,1\n",
            "sample_id\nx\n",
            "sample_id,a,a\nx,1,2\n",
            "sample_id,a,\nx,1,2\n",
        ] {
            let f = write_tmp(contents);
            let err = load_score_table(f.path(), SplitTag::Val).unwrap_err();
            assert!(matches!(err, Error::MalformedHeader { .. }), "{contents:?}: {err:?}");
        }
    }

    #[test]
    fn ragged_and_empty() {
        let f = write_tmp("sample_id,a,b\nx,1,2\ny,3\n");
        assert!(matches!(
            load_score_table(f.path(), SplitTag::Val),
            Err(Error::RaggedRow { row: 2, found: 2, expected: 3, .. })
        ));
        let f = write_tmp("sample_id,a,b\n");
        assert!(matches!(
            load_score_table(f.path(), SplitTag::Val),
            Err(Error::EmptyTable { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_score_table("/nonexistent/scores.csv", SplitTag::Val).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn table_invariants() {
        let cols = vec![vec![1.0, 2.0]];
        assert!(ScoreTable::new(SplitTag::Val, vec!["a".into()], cols.clone(), None).is_ok());
        assert!(ScoreTable::new(SplitTag::Val, vec![], vec![], None).is_err());
        assert!(ScoreTable::new(SplitTag::Val, vec!["a".into()], vec![vec![]], None).is_err());
        assert!(ScoreTable::new(SplitTag::Val, vec!["a".into()], vec![vec![f64::NAN]], None).is_err());
        assert!(ScoreTable::new(SplitTag::Val, vec!["a".into()], cols.clone(), Some(vec!["x".into()])).is_err());
        assert!(ScoreTable::new(
            SplitTag::Val,
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0], vec![1.0]],
            None
        )
        .is_err());
    }

    #[test]
    fn split_tag_names() {
        for s in ["train", "val", "gen", "holdout"] {
            assert_eq!(SplitTag::from(s).to_string(), s);
        }
        assert_eq!(SplitTag::from("holdout"), SplitTag::Custom("holdout".into()));
    }

    #[test]
    fn decision_rule_lookup() {
        let mut rule = DecisionRule::uniform(&["a", "b"], 0.0).unwrap();
        rule.set("b", 1.5).unwrap();
        assert_eq!(rule.threshold("a").unwrap(), 0.0);
        assert_eq!(rule.threshold("b").unwrap(), 1.5);
        assert!(matches!(rule.threshold("c"), Err(Error::MissingThreshold(_))));
        assert!(rule.set("c", f64::NAN).is_err());
    }

    fn record(attribute: &str, shift: f64, category: Category) -> BiasRecord {
        BiasRecord {
            attribute: attribute.into(),
            threshold: 0.0,
            p_ref: 0.5,
            p_gen: 0.5 + shift,
            bias_shift: shift,
            boundary_density: 0.1 + shift / 3.0,
            category,
            emd: 0.1 / 3.0,
            ci_half_width: if shift > 0.02 { Some(0.004) } else { None },
            ref_bandwidth: 0.21,
            gen_bandwidth: Some(0.2),
        }
    }

    fn sample_report() -> Report {
        let records = vec![
            record("smiling", 0.01, Category::Spectrum),
            record("eyeglasses", 0.03, Category::NonSpectrum),
        ];
        let abs = summarize(&records).unwrap();
        let mut metadata = RunMetadata::new(&SplitTag::Val, &SplitTag::Gen, 0.01);
        metadata.seed = Some(0);
        Report {
            records,
            abs,
            metadata,
        }
    }

    #[test]
    fn report_overall_is_mean_of_two() {
        let r = sample_report();
        assert!((r.abs.overall - 0.02).abs() < 1e-15);
    }

    #[test]
    fn empty_report_rejected() {
        let mut r = sample_report();
        r.records.clear();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_report(&r, dir.path().join("r.json"), ReportFormat::Json),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn unwritable_report_path() {
        let r = sample_report();
        assert!(matches!(
            write_report(&r, "/nonexistent/dir/r.json", ReportFormat::Json),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn json_and_csv_reports_agree() {
        let r = sample_report();
        let dir = tempfile::tempdir().unwrap();
        let jp = dir.path().join("r.json");
        let cp = dir.path().join("r.csv");
        write_report(&r, &jp, ReportFormat::Json).unwrap();
        write_report(&r, &cp, ReportFormat::Csv).unwrap();
        let from_json = read_report(&jp, ReportFormat::Json).unwrap();
        let from_csv = read_report(&cp, ReportFormat::Csv).unwrap();
        assert_eq!(from_json, r);
        assert_eq!(from_csv, r);

        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&jp).unwrap()).unwrap();
        assert!(v["abs"]["overall"].is_number());
        assert!(v["abs"]["spectrum"].is_number());
        assert!(v["abs"]["non_spectrum"].is_number());
        assert_eq!(v["records"].as_array().unwrap().len(), 2);
        let text = std::fs::read_to_string(&cp).unwrap();
        assert!(text.lines().any(|l| l.starts_with("# abs_overall,")));
    }

    fn arb_table() -> impl Strategy<Value = ScoreTable> {
        (1usize..4, 1usize..12).prop_flat_map(|(cols, rows)| {
            (
                proptest::collection::vec(
                    proptest::collection::vec(
                        prop_oneof![
                            -1e6f64..1e6,
                            any::<f64>().prop_filter("finite", |v| v.is_finite())
                        ],
                        rows,
                    ),
                    cols,
                ),
                proptest::collection::vec("[a-zA-Z0-9_ ,\"]{0,6}", rows),
            )
                .prop_map(move |(columns, ids)| {
                    let names = (0..cols).map(|j| format!("attr,{j}")).collect();
                    ScoreTable::new(SplitTag::Train, names, columns, Some(ids)).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn score_table_round_trip(table in arb_table()) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("t.csv");
            write_score_table(&table, &p).unwrap();
            let back = load_score_table(&p, SplitTag::Train).unwrap();
            prop_assert_eq!(back.n_rows(), table.n_rows());
            for j in 0..table.n_attributes() {
                let a: Vec<u64> = table.column(j).iter().map(|v| v.to_bits()).collect();
                let b: Vec<u64> = back.column(j).iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(a, b);
            }
            prop_assert_eq!(back, table);
        }
    }
}
