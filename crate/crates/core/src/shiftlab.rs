//! Synthetic translation-shift experiments on Gaussian mixtures.
//!
//! If a logit density `f` is translated by `δ`, the positive proportion at
//! threshold `t` changes by exactly the mass of `f` inside the window
//! `[t − δ, t]`:
//!
//! ```text
//! shift = |F(t) − F(t − δ)| = |∫_{t−δ}^{t} f(x) dx|
//! ```
//!
//! so a boundary sitting in a low-density region barely moves the
//! proportion even when the whole distribution moves by `δ` (and the earth
//! mover's distance is `|δ|`). Mixture CDFs are closed-form, which makes
//! the analytic side exact; [`empirical_shift`] checks it by sampling.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::biasmetrics::{bias_shift, positive_proportion};
use crate::error::{Error, Result};
use crate::normal;
use crate::rng::{self, domain, StreamRng};
use crate::stats::emd_1d;

/// One Gaussian component of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

impl Component {
    pub const fn new(weight: f64, mean: f64, sd: f64) -> Self {
        Self { weight, mean, sd }
    }
}

/// A mixture density, a translation offset and a decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftScenario {
    components: Vec<Component>,
    delta: f64,
    threshold: f64,
    label: String,
}

impl ShiftScenario {
    pub fn new(
        label: impl Into<String>,
        components: Vec<Component>,
        delta: f64,
        threshold: f64,
    ) -> Result<Self> {
        let label = label.into();
        let bad = |msg: String| Err(Error::InvalidScenario(format!("{label}: {msg}")));
        if components.is_empty() {
            return bad("no mixture components".into());
        }
        for c in &components {
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return bad(format!("weight {} must be non-negative", c.weight));
            }
            if !c.mean.is_finite() {
                return bad(format!("mean {} must be finite", c.mean));
            }
            if !(c.sd > 0.0 && c.sd.is_finite()) {
                return bad(format!("stddev {} must be positive", c.sd));
            }
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("weights sum to {total}, expected 1"));
        }
        if !delta.is_finite() || !threshold.is_finite() {
            return bad("delta and threshold must be finite".into());
        }
        Ok(Self {
            components,
            delta,
            threshold,
            label,
        })
    }

    /// Single-Gaussian scenario.
    pub fn normal(label: impl Into<String>, mean: f64, sd: f64, delta: f64, threshold: f64) -> Result<Self> {
        Self::new(label, vec![Component::new(1.0, mean, sd)], delta, threshold)
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Same mixture and threshold with another translation.
    pub fn with_delta(&self, delta: f64) -> Self {
        Self {
            delta,
            ..self.clone()
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal::pdf((x - c.mean) / c.sd) / c.sd)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components
            .iter()
            .map(|c| c.weight * (c.sd * c.sd + (c.mean - m) * (c.mean - m)))
            .sum()
    }

    /// Mixture mass on `[lo, hi]`, summed per component from whichever
    /// tail keeps precision.
    fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let a = (lo - c.mean) / c.sd;
                let b = (hi - c.mean) / c.sd;
                let m = if a > 0.0 {
                    normal::cdf(-a) - normal::cdf(-b)
                } else {
                    normal::cdf(b) - normal::cdf(a)
                };
                c.weight * m
            })
            .sum()
    }

    /// Text form accepted by [`parse_scenario`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label = {}", self.label);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "threshold = {}", self.threshold);
        for c in &self.components {
            let _ = writeln!(s, "{},{},{}", c.weight, c.mean, c.sd);
        }
        s
    }
}

/// `Σ_k w_k Φ((x − μ_k) / σ_k)`.
pub fn mixture_cdf(scenario: &ShiftScenario, x: f64) -> f64 {
    scenario
        .components
        .iter()
        .map(|c| c.weight * normal::cdf((x - c.mean) / c.sd))
        .sum()
}

/// Exact bias shift of the translated mixture, `|F(t) − F(t − δ)|`.
pub fn analytic_shift(scenario: &ShiftScenario) -> f64 {
    let t = scenario.threshold;
    let d = scenario.delta;
    if d == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if d > 0.0 { (t - d, t) } else { (t, t - d) };
    scenario.mass_between(lo, hi).abs()
}

fn draw(scenario: &ShiftScenario, rng: &mut StreamRng) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let last = scenario.components.len() - 1;
    let mut chosen = &scenario.components[last];
    for c in &scenario.components[..last] {
        acc += c.weight;
        if u < acc {
            chosen = c;
            break;
        }
    }
    let z = rng::standard_normal(rng);
    chosen.mean + chosen.sd * z
}

/// Two independent size-`n` draws from the mixture; the second is
/// translated by `δ`. Streams are keyed by `(seed, label)`.
pub fn sample_scenario(scenario: &ShiftScenario, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::EmptyInput("scenario sample size must be at least 1"));
    }
    let key = rng::label_key(&scenario.label);
    let mut base_rng = rng::stream(seed, domain::SCENARIO, key, 0);
    let mut shifted_rng = rng::stream(seed, domain::SCENARIO, key, 1);
    let base = (0..n).map(|_| draw(scenario, &mut base_rng)).collect();
    let shifted = (0..n)
        .map(|_| draw(scenario, &mut shifted_rng) + scenario.delta)
        .collect();
    Ok((base, shifted))
}

/// Sampled counterpart of [`analytic_shift`].
pub fn empirical_shift(scenario: &ShiftScenario, n: usize, seed: u64) -> Result<f64> {
    let (base, shifted) = sample_scenario(scenario, n, seed)?;
    let t = scenario.threshold;
    bias_shift(positive_proportion(&shifted, t)?, positive_proportion(&base, t)?)
}

/// One row of a simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub label: String,
    pub delta: f64,
    pub threshold: f64,
    pub n: usize,
    /// Mixture density at the threshold.
    pub boundary_density: f64,
    pub analytic_shift: f64,
    pub empirical_shift: f64,
    /// EMD between the base and the translated draw.
    pub emd: f64,
    /// Positive proportion of the base draw.
    pub p_base: f64,
}

impl ScenarioOutcome {
    /// Three-sigma bound on `|empirical − analytic|`,
    /// `3 · sqrt(2 · p(1 − p) / n)` with `p` from the base draw.
    pub fn sampling_bound(&self) -> f64 {
        3.0 * (2.0 * self.p_base * (1.0 - self.p_base) / self.n as f64).sqrt()
    }

    pub fn within_sampling_bound(&self) -> bool {
        (self.empirical_shift - self.analytic_shift).abs() <= self.sampling_bound()
    }
}

/// Samples a scenario and reports analytic and empirical shift plus EMD.
pub fn run_scenario(scenario: &ShiftScenario, n: usize, seed: u64) -> Result<ScenarioOutcome> {
    let (base, shifted) = sample_scenario(scenario, n, seed)?;
    let t = scenario.threshold;
    let p_base = positive_proportion(&base, t)?;
    let p_shifted = positive_proportion(&shifted, t)?;
    Ok(ScenarioOutcome {
        label: scenario.label.clone(),
        delta: scenario.delta,
        threshold: t,
        n,
        boundary_density: scenario.pdf(t),
        analytic_shift: analytic_shift(scenario),
        empirical_shift: bias_shift(p_shifted, p_base)?,
        emd: emd_1d(&base, &shifted)?,
        p_base,
    })
}

/// Runs several scenarios in parallel; output order follows input order.
pub fn run_scenarios(scenarios: &[ShiftScenario], n: usize, seed: u64) -> Result<Vec<ScenarioOutcome>> {
    scenarios
        .par_iter()
        .map(|s| run_scenario(s, n, seed))
        .collect()
}

pub const FIG1_DELTA: f64 = 0.3;
pub const FIG1_BIMODAL_HIGH: &str = "bimodal-high";
pub const FIG1_UNIMODAL_HIGH: &str = "unimodal-high";
pub const FIG1_BIMODAL_LOW: &str = "bimodal-low";
pub const FIG1_UNIMODAL_LOW: &str = "unimodal-low";

/// The four boundary-density fixtures: uni/bimodal densities with the
/// threshold (0) in a high- or a low-density region, all translated by 0.3.
pub fn fig1_scenarios() -> Vec<ShiftScenario> {
    let d = FIG1_DELTA;
    vec![
        ShiftScenario::new(
            FIG1_BIMODAL_HIGH,
            vec![Component::new(0.5, -1.0, 0.8), Component::new(0.5, 1.0, 0.8)],
            d,
            0.0,
        ),
        ShiftScenario::normal(FIG1_UNIMODAL_HIGH, 0.3, 1.0, d, 0.0),
        ShiftScenario::new(
            FIG1_BIMODAL_LOW,
            vec![Component::new(0.5, -3.0, 0.5), Component::new(0.5, 3.0, 0.5)],
            d,
            0.0,
        ),
        ShiftScenario::normal(FIG1_UNIMODAL_LOW, 3.0, 1.0, d, 0.0),
    ]
    .into_iter()
    .map(|s| s.expect("builtin scenario is valid"))
    .collect()
}

/// The fig1 fixtures plus extra cases exercising larger, zero and negative
/// translations, a non-zero threshold and an asymmetric mixture.
pub fn verification_scenarios() -> Vec<ShiftScenario> {
    let mut v = fig1_scenarios();
    v.extend(
        [
            ShiftScenario::normal("standard-normal-delta-0.5", 0.0, 1.0, 0.5, 0.0),
            ShiftScenario::new(
                "bimodal-low-delta-0.5",
                vec![Component::new(0.5, -3.0, 0.5), Component::new(0.5, 3.0, 0.5)],
                0.5,
                0.0,
            ),
            ShiftScenario::normal("null-shift", 0.5, 1.0, 0.0, 0.0),
            ShiftScenario::normal("negative-shift", 0.5, 1.2, -0.4, 0.25),
            ShiftScenario::new(
                "skewed-mixture",
                vec![Component::new(0.7, -0.5, 1.0), Component::new(0.3, 2.0, 0.6)],
                0.2,
                0.5,
            ),
        ]
        .into_iter()
        .map(|s| s.expect("builtin scenario is valid")),
    );
    v
}

/// Builtin scenario sets by name: `fig1` and `verification`.
pub fn builtin(name: &str) -> Option<Vec<ShiftScenario>> {
    match name {
        "fig1" => Some(fig1_scenarios()),
        "verification" => Some(verification_scenarios()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 2] = ["fig1", "verification"];

/// Boundary-density contrast table over the four fig1 fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig1Table {
    pub rows: Vec<ScenarioOutcome>,
}

impl Fig1Table {
    fn pick(&self, labels: [&'static str; 2]) -> impl Iterator<Item = &ScenarioOutcome> {
        self.rows.iter().filter(move |r| labels.contains(&r.label.as_str()))
    }

    fn high(&self) -> impl Iterator<Item = &ScenarioOutcome> {
        self.pick([FIG1_BIMODAL_HIGH, FIG1_UNIMODAL_HIGH])
    }

    fn low(&self) -> impl Iterator<Item = &ScenarioOutcome> {
        self.pick([FIG1_BIMODAL_LOW, FIG1_UNIMODAL_LOW])
    }

    /// Smallest high-density shift over largest low-density shift, using
    /// the chosen column.
    pub fn contrast_ratio(&self, shift: impl Fn(&ScenarioOutcome) -> f64) -> f64 {
        let hi = self.high().map(&shift).fold(f64::INFINITY, f64::min);
        let lo = self.low().map(&shift).fold(0.0, f64::max);
        hi / lo
    }

    /// Largest relative deviation of a row's EMD from `|δ|`.
    pub fn max_emd_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.emd - r.delta.abs()).abs() / r.delta.abs())
            .fold(0.0, f64::max)
    }

    /// High-density shifts at least 10x the low-density ones (both
    /// columns) while every EMD stays within 10% of `|δ|`.
    pub fn holds(&self) -> bool {
        self.contrast_ratio(|r| r.analytic_shift) >= 10.0
            && self.contrast_ratio(|r| r.empirical_shift) >= 10.0
            && self.max_emd_deviation() <= 0.10
    }
}

/// Runs the four fig1 fixtures at sample size `n` (at least 10^4).
pub fn fig1_experiment(n: usize, seed: u64) -> Result<Fig1Table> {
    if n < 10_000 {
        return Err(Error::OutOfRange(format!("fig1 experiment needs n >= 10000, got {n}")));
    }
    Ok(Fig1Table {
        rows: run_scenarios(&fig1_scenarios(), n, seed)?,
    })
}

/// Parses the scenario text format:
///
/// ```text
/// # comments and blank lines are ignored
/// label = unimodal-high
/// delta = 0.3
/// threshold = 0
/// 1.0,0.3,1.0          # weight,mean,stddev; `component = w,m,s` also works
/// ```
///
/// `threshold` defaults to 0 and `label` to `scenario`; `delta` and at
/// least one component are required.
pub fn parse_scenario(text: &str) -> Result<ShiftScenario> {
    let mut label = None;
    let mut delta = None;
    let mut threshold = None;
    let mut components = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| Error::InvalidScenario(format!("line {line_no}: {msg}: `{raw}`"));
        let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let triple = |s: &str| -> Result<Component> {
            let parts: Vec<&str> = s.split(',').collect();
            if parts.len() != 3 {
                return Err(bad("expected weight,mean,stddev"));
            }
            Ok(Component::new(number(parts[0])?, number(parts[1])?, number(parts[2])?))
        };
        match line.split_once('=') {
            Some((key, value)) => {
                let value = value.trim();
                match key.trim() {
                    "label" => label = Some(value.to_owned()),
                    "delta" => delta = Some(number(value)?),
                    "threshold" => threshold = Some(number(value)?),
                    "component" => components.push(triple(value)?),
                    _ => return Err(bad("unknown key")),
                }
            }
            None => components.push(triple(line)?),
        }
    }
    let delta = delta.ok_or_else(|| Error::InvalidScenario("missing `delta`".into()))?;
    ShiftScenario::new(
        label.unwrap_or_else(|| "scenario".into()),
        components,
        delta,
        threshold.unwrap_or(0.0),
    )
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ShiftScenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::InvalidScenario(msg) => Error::InvalidScenario(format!("{}: {msg}", path.display())),
        other => other,
    })
}
