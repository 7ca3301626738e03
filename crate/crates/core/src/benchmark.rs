//! Repeated detection experiments on simulated data.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoffs::{CutoffSpec, FlagSet};
use crate::error::{Error, Result};
use crate::multivariate::{
    apply_thresholds, detect_marginal, detect_stringed, generate_directions, projection_votes,
    select_thresholds, Baselines, Scale, SelectionParams, ThresholdTriple, VoteMatrix,
};
use crate::rng::repetition_seeds;
use crate::simulation::{generate, LabeledDataset, SimulationSpec};

/// Detection strategies compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodKind {
    /// Union over margins.
    #[serde(rename = "FST_MAR")]
    Marginal,
    /// Concatenated dimensions.
    #[serde(rename = "FST_STR")]
    Stringed,
    /// Projections with thresholds selected from baselines.
    #[serde(rename = "FST_PRJ")]
    ProjectionAdaptive,
    /// Projections with the fixed thresholds `(0.4, 0.3, 0.3)`.
    #[serde(rename = "FST_PRJ1")]
    ProjectionFixed,
    /// Projections flagging on any single vote.
    #[serde(rename = "FST_PRJ2")]
    ProjectionAnyVote,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Marginal,
        MethodKind::Stringed,
        MethodKind::ProjectionAdaptive,
        MethodKind::ProjectionFixed,
        MethodKind::ProjectionAnyVote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Marginal => "FST_MAR",
            MethodKind::Stringed => "FST_STR",
            MethodKind::ProjectionAdaptive => "FST_PRJ",
            MethodKind::ProjectionFixed => "FST_PRJ1",
            MethodKind::ProjectionAnyVote => "FST_PRJ2",
        }
    }

    pub fn uses_projections(self) -> bool {
        matches!(
            self,
            MethodKind::ProjectionAdaptive | MethodKind::ProjectionFixed | MethodKind::ProjectionAnyVote
        )
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are interchangeable and the `FST_`
    /// prefix is optional.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        let norm = norm.strip_prefix("FST_").unwrap_or(&norm);
        MethodKind::ALL
            .into_iter()
            .find(|m| &m.name()[4..] == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

/// Which flags count as detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportScope {
    Union,
    ShapeOnly,
    AmplitudeOnly,
    MagnitudeOnly,
}

impl ReportScope {
    pub const ALL: [ReportScope; 4] =
        [ReportScope::Union, ReportScope::ShapeOnly, ReportScope::AmplitudeOnly, ReportScope::MagnitudeOnly];

    pub fn select(self, flags: &FlagSet) -> &BTreeSet<usize> {
        match self {
            ReportScope::Union => &flags.union,
            ReportScope::ShapeOnly => &flags.shape,
            ReportScope::AmplitudeOnly => &flags.amplitude,
            ReportScope::MagnitudeOnly => &flags.magnitude,
        }
    }

    /// Column suffix used in result tables: empty, `SH`, `AM`, `MG`.
    pub fn suffix(self) -> &'static str {
        match self {
            ReportScope::Union => "",
            ReportScope::ShapeOnly => "SH",
            ReportScope::AmplitudeOnly => "AM",
            ReportScope::MagnitudeOnly => "MG",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReportScope::Union => "union",
            ReportScope::ShapeOnly => "shape_only",
            ReportScope::AmplitudeOnly => "amplitude_only",
            ReportScope::MagnitudeOnly => "magnitude_only",
        }
    }
}

impl FromStr for ReportScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        ReportScope::ALL
            .into_iter()
            .find(|r| r.name() == norm || r.suffix().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scope '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: MethodKind,
    pub scope: ReportScope,
    /// Number of projection directions `L`.
    pub directions: usize,
    /// Required by [`MethodKind::ProjectionAdaptive`].
    pub baselines: Option<Baselines>,
    pub selection: SelectionParams,
    pub cutoff: CutoffSpec,
    pub scale: Scale,
}

impl MethodConfig {
    /// Union scope, `L = 60`, default cutoffs and selection parameters.
    pub fn new(method: MethodKind) -> Self {
        Self {
            method,
            scope: ReportScope::Union,
            directions: 60,
            baselines: None,
            selection: SelectionParams::default(),
            cutoff: CutoffSpec::default(),
            scale: Scale::default(),
        }
    }

    pub fn with_scope(self, scope: ReportScope) -> Self {
        Self { scope, ..self }
    }

    pub fn with_baselines(self, baselines: Baselines) -> Self {
        Self { baselines: Some(baselines), ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.cutoff.validate()?;
        if self.method.uses_projections() && self.directions == 0 {
            return Err(Error::InvalidConfig("projection methods need at least one direction".into()));
        }
        if self.method == MethodKind::ProjectionAdaptive {
            let b = self
                .baselines
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("FST_PRJ requires baselines".into()))?;
            b.validate()?;
            self.selection.validate()?;
        }
        Ok(())
    }

    /// Runs the configured method on one dataset.
    pub fn detect(&self, ds: &LabeledDataset, direction_seed: u64) -> Result<FlagSet> {
        let data = &ds.data;
        match self.method {
            MethodKind::Marginal => Ok(detect_marginal(data, &self.cutoff)?.flags),
            MethodKind::Stringed => Ok(detect_stringed(data, self.scale, &self.cutoff)?.flags),
            _ => {
                let votes = self.votes(ds, direction_seed)?;
                Ok(apply_thresholds(&votes, &self.thresholds(&votes)?))
            }
        }
    }

    fn votes(&self, ds: &LabeledDataset, direction_seed: u64) -> Result<VoteMatrix> {
        let dirs = generate_directions(ds.data.d(), self.directions, direction_seed)?;
        projection_votes(&ds.data, &dirs, &self.cutoff)
    }

    fn thresholds(&self, votes: &VoteMatrix) -> Result<ThresholdTriple> {
        match self.method {
            MethodKind::ProjectionFixed => Ok(ThresholdTriple::recommended()),
            MethodKind::ProjectionAnyVote => Ok(ThresholdTriple::any_vote()),
            MethodKind::ProjectionAdaptive => {
                let b = self.baselines.as_ref().expect("validated");
                select_thresholds(votes, b, &self.selection)
            }
            _ => unreachable!("non-projection method"),
        }
    }
}

/// Per-repetition rates (percent) and their summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub model: String,
    pub method: String,
    pub scope: ReportScope,
    pub reps: usize,
    /// Empty when the model has no outliers.
    pub tpr: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr_mean: Option<f64>,
    pub tpr_sd: Option<f64>,
    pub fpr_mean: f64,
    pub fpr_sd: f64,
    #[serde(skip)]
    pub runtime_secs: f64,
}

/// Sample mean and standard deviation (`n − 1` denominator, 0 for one value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `(TPR, FPR)` in percent; TPR is `None` without true outliers.
pub fn rates(flagged: &BTreeSet<usize>, truth: &BTreeSet<usize>, n: usize) -> (Option<f64>, f64) {
    let tp = flagged.intersection(truth).count();
    let fp = flagged.len() - tp;
    let tpr = (!truth.is_empty()).then(|| 100.0 * tp as f64 / truth.len() as f64);
    let negatives = n - truth.len();
    let fpr = if negatives == 0 { 0.0 } else { 100.0 * fp as f64 / negatives as f64 };
    (tpr, fpr)
}

/// Harmonic mean of precision and recall; 0 when nothing is detected
/// correctly.
pub fn f1_score(flagged: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> f64 {
    let tp = flagged.intersection(truth).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / flagged.len() as f64;
    let recall = tp / truth.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < 1 {
        return Err(Error::InvalidConfig("at least one repetition is required".into()));
    }
    Ok(())
}

/// Generates `reps` datasets and runs `detector` on each.
///
/// Repetition `r` uses the seeds from [`repetition_seeds`]`(seed, r)`; the
/// detector receives the dataset and the direction seed.
pub fn collect_flags<F>(spec: &SimulationSpec, reps: usize, seed: u64, detector: F) -> Result<Vec<(BTreeSet<usize>, FlagSet)>>
where
    F: Fn(&LabeledDataset, u64) -> Result<FlagSet> + Sync,
{
    check_reps(reps)?;
    spec.validate()?;
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let (data_seed, direction_seed) = repetition_seeds(seed, r as u64);
            let ds = generate(&spec.with_seed(data_seed))?;
            let flags = detector(&ds, direction_seed)?;
            Ok((ds.outlier_indices, flags))
        })
        .collect()
}

/// Summarizes collected flags for one scope.
pub fn summarize(
    spec: &SimulationSpec,
    method: &str,
    scope: ReportScope,
    runs: &[(BTreeSet<usize>, FlagSet)],
    runtime_secs: f64,
) -> BenchmarkResult {
    let mut tpr = Vec::new();
    let mut fpr = Vec::with_capacity(runs.len());
    for (truth, flags) in runs {
        let (t, f) = rates(scope.select(flags), truth, spec.n);
        tpr.extend(t);
        fpr.push(f);
    }
    let (fpr_mean, fpr_sd) = mean_sd(&fpr);
    let tpr_stats = (!tpr.is_empty()).then(|| mean_sd(&tpr));
    BenchmarkResult {
        model: spec.model.to_string(),
        method: method.to_string(),
        scope,
        reps: runs.len(),
        tpr_mean: tpr_stats.map(|s| s.0),
        tpr_sd: tpr_stats.map(|s| s.1),
        tpr,
        fpr,
        fpr_mean,
        fpr_sd,
        runtime_secs,
    }
}

/// Benchmark with an arbitrary detector, e.g. an oracle in tests.
pub fn run_benchmark_with<F>(
    spec: &SimulationSpec,
    name: &str,
    scope: ReportScope,
    reps: usize,
    seed: u64,
    detector: F,
) -> Result<BenchmarkResult>
where
    F: Fn(&LabeledDataset, u64) -> Result<FlagSet> + Sync,
{
    let start = Instant::now();
    let runs = collect_flags(spec, reps, seed, detector)?;
    Ok(summarize(spec, name, scope, &runs, start.elapsed().as_secs_f64()))
}

/// Benchmark of `method` for every requested scope from one set of runs.
pub fn run_benchmark_scopes(
    spec: &SimulationSpec,
    method: &MethodConfig,
    scopes: &[ReportScope],
    reps: usize,
    seed: u64,
) -> Result<Vec<BenchmarkResult>> {
    method.validate()?;
    let start = Instant::now();
    let runs = collect_flags(spec, reps, seed, |ds, s| method.detect(ds, s))?;
    let secs = start.elapsed().as_secs_f64();
    Ok(scopes
        .iter()
        .map(|&scope| summarize(spec, method.method.name(), scope, &runs, secs))
        .collect())
}

pub fn run_benchmark(spec: &SimulationSpec, method: &MethodConfig, reps: usize, seed: u64) -> Result<BenchmarkResult> {
    let mut out = run_benchmark_scopes(spec, method, &[method.scope], reps, seed)?;
    Ok(out.remove(0))
}

/// F1 (or, without true outliers, only FPR) of fixed thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub thresholds: ThresholdTriple,
    /// Per-repetition F1; `None` in FPR-only mode.
    pub f1: Option<Vec<f64>>,
    pub f1_mean: Option<f64>,
    pub f1_sd: Option<f64>,
    /// Per-repetition union FPR (percent).
    pub fpr: Vec<f64>,
    pub fpr_mean: f64,
    pub fpr_sd: f64,
}

/// Union-scope F1 of fixed-threshold projection voting for each triple in
/// `grid`. Votes are computed once per repetition and shared by all
/// triples.
pub fn threshold_sweep(
    spec: &SimulationSpec,
    grid: &[ThresholdTriple],
    directions: usize,
    cutoff: &CutoffSpec,
    reps: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("threshold grid is empty".into()));
    }
    check_reps(reps)?;
    spec.validate()?;
    let method = MethodConfig { directions, cutoff: *cutoff, ..MethodConfig::new(MethodKind::ProjectionFixed) };
    method.validate()?;
    let per_rep: Vec<(BTreeSet<usize>, VoteMatrix)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let (data_seed, direction_seed) = repetition_seeds(seed, r as u64);
            let ds = generate(&spec.with_seed(data_seed))?;
            let votes = method.votes(&ds, direction_seed)?;
            Ok((ds.outlier_indices, votes))
        })
        .collect::<Result<_>>()?;
    let fpr_only = per_rep.iter().all(|(truth, _)| truth.is_empty());
    Ok(grid
        .iter()
        .map(|q| {
            let mut f1 = Vec::with_capacity(reps);
            let mut fpr = Vec::with_capacity(reps);
            for (truth, votes) in &per_rep {
                let flags = apply_thresholds(votes, q);
                fpr.push(rates(&flags.union, truth, spec.n).1);
                f1.push(f1_score(&flags.union, truth));
            }
            let (fpr_mean, fpr_sd) = mean_sd(&fpr);
            let (f1, f1_mean, f1_sd) = if fpr_only {
                (None, None, None)
            } else {
                let (m, s) = mean_sd(&f1);
                (Some(f1), Some(m), Some(s))
            };
            SweepRow { thresholds: *q, f1, f1_mean, f1_sd, fpr, fpr_mean, fpr_sd }
        })
        .collect())
}

/// `count` triples `(τ, τ, τ)` evenly spaced from `lo` to `hi`.
pub fn uniform_threshold_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<ThresholdTriple>> {
    if count == 0 {
        return Err(Error::InvalidConfig("threshold grid needs at least one value".into()));
    }
    (0..count)
        .map(|i| {
            let tau = if count == 1 { lo } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
            ThresholdTriple::new(tau, tau, tau)
        })
        .collect()
}
