use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use fmuod_core::benchmark::{
    run_benchmark_scopes, threshold_sweep, uniform_threshold_grid, BenchmarkResult, MethodConfig, MethodKind,
    ReportScope,
};
use fmuod_core::indices::{compute_index_table, reference_from_sample, IndexTable, IndexVariant, Location};
use fmuod_core::multivariate::{
    detect_marginal, detect_projection, detect_projection_adaptive, detect_stringed, estimate_baselines,
    generate_directions, project, string_dimensions, Baselines, OutlierReport, OutlierType, Scale,
    SelectionParams, ThresholdTriple,
};
use fmuod_core::simulation::{generate, ModelId, SimulationSpec, MODEL_DIMENSION};
use fmuod_core::{CutoffSpec, Error as CoreError, MultivariateFunctionalDataset};
use serde::{Deserialize, Serialize};

use crate::args::{BaselinesArgs, BenchmarkArgs, DetectArgs, ScaleArg, SimOpts, SimulateArgs, SweepArgs};
use crate::error::{CliError, CliResult};
use crate::io::{self, fmt_f64, fmt_opt, CsvOut, Layout};

/// Version of the JSON files written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn create_out(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn cutoff(whisker: f64) -> CliResult<CutoffSpec> {
    Ok(CutoffSpec::with_whisker_factor(whisker)?)
}

fn scale(arg: ScaleArg) -> Scale {
    match arg {
        ScaleArg::Minmax => Scale::MinMax,
        ScaleArg::None => Scale::None,
    }
}

fn sim_spec(opts: &SimOpts, seed: u64) -> CliResult<SimulationSpec> {
    let spec = SimulationSpec {
        model: opts.model.parse()?,
        n: opts.n,
        k: opts.k,
        d: MODEL_DIMENSION,
        basis_count: opts.basis,
        contamination_rate: opts.alpha,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

/// Contents of `baselines.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct BaselinesFile {
    pub schema_version: u32,
    pub library_version: String,
    pub baselines: Baselines,
    pub model: String,
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    pub directions: usize,
    pub whisker_factor: f64,
    pub seed: u64,
}

pub fn load_baselines(path: &Path) -> CliResult<Baselines> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: BaselinesFile = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    file.baselines.validate()?;
    Ok(file.baselines)
}

#[derive(Serialize)]
struct InputSummary<'a> {
    layout: &'static str,
    n: usize,
    k: usize,
    d: usize,
    dim_names: Option<&'a [String]>,
}

#[derive(Serialize)]
struct NamedFlags {
    shape: Vec<String>,
    amplitude: Vec<String>,
    magnitude: Vec<String>,
    union: Vec<String>,
}

#[derive(Serialize)]
struct CurveProportion<'a> {
    curve_id: &'a str,
    shape: f64,
    amplitude: f64,
    magnitude: f64,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    library_version: &'static str,
    method: &'static str,
    input: InputSummary<'a>,
    flags: NamedFlags,
    thresholds: Option<ThresholdTriple>,
    proportions: Option<Vec<CurveProportion<'a>>>,
    degenerate_projections: usize,
    config: &'a fmuod_core::multivariate::ReportConfig,
}

fn index_rows(out: &mut CsvOut, ids: &[String], source: &str, table: &IndexTable) -> CliResult<()> {
    for (id, row) in ids.iter().zip(&table.rows) {
        out.row([
            id.clone(),
            source.to_string(),
            fmt_f64(row.shape),
            fmt_f64(row.amplitude),
            fmt_f64(row.magnitude),
        ])?;
    }
    Ok(())
}

/// Index table against the sample median, or `None` when that median is
/// constant.
fn median_table(data: &fmuod_core::FunctionalDataset) -> CliResult<Option<IndexTable>> {
    let reference = reference_from_sample(data, Location::Median)?;
    match compute_index_table(data, &reference, IndexVariant::Standard) {
        Ok(t) => Ok(Some(t)),
        Err(CoreError::DegenerateReference) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn fixed_thresholds(args: &DetectArgs) -> CliResult<Option<ThresholdTriple>> {
    if args.tau_shape.is_none() && args.tau_amplitude.is_none() && args.tau_magnitude.is_none() {
        return Ok(None);
    }
    let r = ThresholdTriple::recommended();
    Ok(Some(ThresholdTriple::new(
        args.tau_shape.unwrap_or(r.shape),
        args.tau_amplitude.unwrap_or(r.amplitude),
        args.tau_magnitude.unwrap_or(r.magnitude),
    )?))
}

fn run_detection(
    args: &DetectArgs,
    method: MethodKind,
    data: &MultivariateFunctionalDataset,
    spec: &CutoffSpec,
) -> CliResult<OutlierReport> {
    let opts = &args.detection;
    let custom = fixed_thresholds(args)?;
    if custom.is_some() && method != MethodKind::ProjectionFixed {
        return Err(CliError::Config("--tau-* options apply to FST_PRJ1 only".into()));
    }
    let report = match method {
        MethodKind::Marginal => detect_marginal(data, spec)?,
        MethodKind::Stringed => detect_stringed(data, scale(opts.scale), spec)?,
        _ => {
            let dirs = generate_directions(data.d(), opts.directions, args.seed)?;
            match method {
                MethodKind::ProjectionFixed => {
                    let q = custom.unwrap_or_else(ThresholdTriple::recommended);
                    detect_projection(data, &dirs, &q, spec)?
                }
                MethodKind::ProjectionAnyVote => detect_projection(data, &dirs, &ThresholdTriple::any_vote(), spec)?,
                _ => {
                    let path = opts
                        .baselines
                        .as_ref()
                        .ok_or_else(|| CliError::Config("FST_PRJ requires --baselines FILE".into()))?;
                    let b = load_baselines(path)?;
                    detect_projection_adaptive(data, &dirs, &b, &SelectionParams::default(), spec)?
                }
            }
        }
    };
    if method.uses_projections() {
        if report.degenerate_projections == opts.directions {
            return Err(CliError::Numeric("every projection has a constant median curve".into()));
        }
        if report.degenerate_projections > 0 {
            eprintln!(
                "warning: {} of {} projections had a constant median curve and cast no votes",
                report.degenerate_projections, opts.directions
            );
        }
    }
    Ok(report)
}

pub fn detect(args: &DetectArgs) -> CliResult<()> {
    let delimiter = u8::try_from(args.delimiter)
        .map_err(|_| CliError::Config(format!("delimiter '{}' is not a single byte", args.delimiter)))?;
    let method: MethodKind = args.detection.method.parse()?;
    let spec = cutoff(args.detection.whisker)?;
    let loaded = io::read(&args.input, args.layout, delimiter, args.header)?;
    let (data, ids) = (&loaded.data, &loaded.curve_ids);
    let report = run_detection(args, method, data, &spec)?;
    create_out(&args.out)?;

    let mut indices = CsvOut::create(&args.out.join("indices.csv"))?;
    indices.row(["curve_id", "source", "shape", "amplitude", "magnitude"])?;
    match method {
        MethodKind::Marginal => {
            for m in 0..data.d() {
                let name = data.dim_names().map_or_else(|| format!("dim_{}", m + 1), |n| n[m].clone());
                if let Some(t) = median_table(&data.margin(m))? {
                    index_rows(&mut indices, ids, &name, &t)?;
                }
            }
        }
        MethodKind::Stringed => {
            if let Some(t) = median_table(&string_dimensions(data, scale(args.detection.scale))?)? {
                index_rows(&mut indices, ids, "stringed", &t)?;
            }
        }
        _ => {
            let dirs = generate_directions(data.d(), args.detection.directions, args.seed)?;
            for (l, dir) in dirs.iter().enumerate() {
                if let Some(t) = median_table(&project(data, dir)?)? {
                    index_rows(&mut indices, ids, &format!("projection_{}", l + 1), &t)?;
                }
            }
        }
    }
    indices.finish()?;

    let mut flags_csv = CsvOut::create(&args.out.join("flags.csv"))?;
    flags_csv.row(["curve_id", "type", "proportion", "flagged"])?;
    for (i, id) in ids.iter().enumerate() {
        for t in OutlierType::ALL {
            let set = match t {
                OutlierType::Shape => &report.flags.shape,
                OutlierType::Amplitude => &report.flags.amplitude,
                OutlierType::Magnitude => &report.flags.magnitude,
            };
            let p = report.proportions.as_ref().map(|p| p[i][t.index()]);
            flags_csv.row([id.clone(), t.name().to_string(), fmt_opt(p), set.contains(&i).to_string()])?;
        }
    }
    flags_csv.finish()?;

    let named = |s: &std::collections::BTreeSet<usize>| s.iter().map(|&i| ids[i].clone()).collect();
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        library_version: library_version(),
        method: method.name(),
        input: InputSummary {
            layout: match args.layout {
                Layout::Wide => "wide_univariate",
                Layout::Long => "long_multivariate",
            },
            n: data.n(),
            k: data.k(),
            d: data.d(),
            dim_names: data.dim_names(),
        },
        flags: NamedFlags {
            shape: named(&report.flags.shape),
            amplitude: named(&report.flags.amplitude),
            magnitude: named(&report.flags.magnitude),
            union: named(&report.flags.union),
        },
        thresholds: report.thresholds,
        proportions: report.proportions.as_ref().map(|p| {
            ids.iter()
                .zip(p)
                .map(|(id, v)| CurveProportion { curve_id: id, shape: v[0], amplitude: v[1], magnitude: v[2] })
                .collect()
        }),
        degenerate_projections: report.degenerate_projections,
        config: &report.config,
    };
    io::write_json(&args.out.join("report.json"), &file)?;
    eprintln!("{} of {} curves flagged", report.flags.union.len(), data.n());
    Ok(())
}

#[derive(Serialize)]
struct SimulationFile<'a> {
    schema_version: u32,
    library_version: &'static str,
    spec: &'a SimulationSpec,
    noise_levels: [f64; 3],
    outliers: usize,
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let spec = sim_spec(&args.sim, args.seed)?;
    let ds = generate(&spec)?;
    create_out(&args.out)?;
    let ids: Vec<String> = (0..spec.n).map(|i| i.to_string()).collect();
    io::write_long(&args.out.join("data.csv"), &ds.data, &ids)?;

    let mut truth = CsvOut::create(&args.out.join("truth.csv"))?;
    truth.row(["curve_id", "sign_1", "sign_2", "sign_3", "window_start", "scale_1", "scale_2", "scale_3"])?;
    for p in &ds.outlier_params {
        let triple = |v: Option<[f64; 3]>| -> [String; 3] { std::array::from_fn(|c| fmt_opt(v.map(|a| a[c]))) };
        let mut rec = vec![p.index.to_string()];
        rec.extend(triple(p.signs));
        rec.push(fmt_opt(p.window_start));
        rec.extend(triple(p.scales));
        truth.row(rec)?;
    }
    truth.finish()?;

    io::write_json(
        &args.out.join("simulation.json"),
        &SimulationFile {
            schema_version: SCHEMA_VERSION,
            library_version: library_version(),
            spec: &spec,
            noise_levels: ds.noise_levels,
            outliers: ds.outlier_indices.len(),
        },
    )
}

fn pct(mean: Option<f64>, sd: Option<f64>) -> String {
    match (mean, sd) {
        (Some(m), Some(s)) => format!("{m:.1}({s:.1})"),
        _ => "-".to_string(),
    }
}

/// Plain-text table with one row per method and scope and a TPR/FPR column
/// pair per model.
pub fn render_table(results: &[BenchmarkResult], models: &[ModelId]) -> String {
    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    for r in results {
        let label = match r.scope.suffix() {
            "" => r.method.replace('_', "-"),
            s => format!("{}-{s}", r.method.replace('_', "-")),
        };
        let col = models.iter().position(|m| m.name() == r.model).expect("result model listed");
        let idx = match rows.iter().position(|(l, _)| *l == label) {
            Some(i) => i,
            None => {
                rows.push((label, vec!["-".to_string(); 2 * models.len()]));
                rows.len() - 1
            }
        };
        rows[idx].1[2 * col] = pct(r.tpr_mean, r.tpr_sd);
        rows[idx].1[2 * col + 1] = pct(Some(r.fpr_mean), Some(r.fpr_sd));
    }
    let mut header = vec!["Method".to_string()];
    for m in models {
        header.push(format!("{m} TPR"));
        header.push(format!("{m} FPR"));
    }
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for (label, cells) in &rows {
        widths[0] = widths[0].max(label.chars().count());
        for (c, cell) in cells.iter().enumerate() {
            widths[c + 1] = widths[c + 1].max(cell.len());
        }
    }
    let mut text = String::new();
    let line = |text: &mut String, cells: &[String]| {
        for (c, cell) in cells.iter().enumerate() {
            if c == 0 {
                let _ = write!(text, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(text, "  {cell:>w$}", w = widths[c]);
            }
        }
        text.push('\n');
    };
    line(&mut text, &header);
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    text.push_str(&"-".repeat(total));
    text.push('\n');
    for (label, cells) in rows {
        let mut all = vec![label];
        all.extend(cells);
        line(&mut text, &all);
    }
    text
}

/// `all` expands to every scope; duplicates are dropped.
fn parse_scopes(raw: &[String]) -> CliResult<Vec<ReportScope>> {
    let mut scopes = Vec::new();
    for s in raw {
        let parsed: Vec<ReportScope> =
            if s.trim().eq_ignore_ascii_case("all") { ReportScope::ALL.to_vec() } else { vec![s.parse()?] };
        for p in parsed {
            if !scopes.contains(&p) {
                scopes.push(p);
            }
        }
    }
    if scopes.is_empty() {
        return Err(CliError::Config("at least one scope is required".into()));
    }
    Ok(scopes)
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let models = args.model.iter().map(|m| m.parse()).collect::<Result<Vec<ModelId>, _>>()?;
    let methods = args.method.iter().map(|m| m.parse()).collect::<Result<Vec<MethodKind>, _>>()?;
    if models.is_empty() || methods.is_empty() {
        return Err(CliError::Config("at least one model and one method are required".into()));
    }
    let scopes = parse_scopes(&args.scope)?;
    let baselines = args.baselines.as_deref().map(load_baselines).transpose()?;
    let cutoff = cutoff(args.whisker)?;
    create_out(&args.out)?;

    let mut results = Vec::new();
    for &method in &methods {
        let config = MethodConfig {
            method,
            directions: args.directions,
            baselines,
            cutoff,
            scale: scale(args.scale),
            ..MethodConfig::new(method)
        };
        let scopes: &[ReportScope] = if method.uses_projections() { &scopes } else { &[ReportScope::Union] };
        for &model in &models {
            let spec = SimulationSpec {
                model,
                n: args.n,
                k: args.k,
                d: MODEL_DIMENSION,
                basis_count: args.basis,
                contamination_rate: args.alpha,
                seed: 0,
            };
            let start = Instant::now();
            let res = run_benchmark_scopes(&spec, &config, scopes, args.reps, args.seed)?;
            eprintln!("{method} on {model}: {:.2}s", start.elapsed().as_secs_f64());
            results.extend(res);
        }
    }

    let mut csv = CsvOut::create(&args.out.join("benchmark.csv"))?;
    csv.row(["model", "method", "scope", "reps", "tpr_mean", "tpr_sd", "fpr_mean", "fpr_sd"])?;
    for r in &results {
        csv.row([
            r.model.clone(),
            r.method.clone(),
            r.scope.name().to_string(),
            r.reps.to_string(),
            fmt_opt(r.tpr_mean),
            fmt_opt(r.tpr_sd),
            fmt_f64(r.fpr_mean),
            fmt_f64(r.fpr_sd),
        ])?;
    }
    csv.finish()?;

    let mut reps = CsvOut::create(&args.out.join("benchmark_reps.csv"))?;
    reps.row(["model", "method", "scope", "rep", "tpr", "fpr"])?;
    for r in &results {
        let has_tpr = !r.tpr.is_empty();
        for (i, fpr) in r.fpr.iter().enumerate() {
            let tpr = if has_tpr { fmt_f64(r.tpr[i]) } else { String::new() };
            reps.row([r.model.clone(), r.method.clone(), r.scope.name().to_string(), i.to_string(), tpr, fmt_f64(*fpr)])?;
        }
    }
    reps.finish()?;

    let table = render_table(&results, &models);
    io::write_text(&args.out.join("benchmark.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn parse_triple(s: &str) -> CliResult<ThresholdTriple> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let values = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .ok()
        .filter(|v| v.len() == 3)
        .ok_or_else(|| CliError::Config(format!("--q expects three comma-separated numbers, got '{s}'")))?;
    Ok(ThresholdTriple::new(values[0], values[1], values[2])?)
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let spec = sim_spec(&args.sim, 0)?;
    let grid = if args.q.is_empty() {
        uniform_threshold_grid(0.2, 0.7, 6)?
    } else {
        args.q.iter().map(|q| parse_triple(q)).collect::<CliResult<Vec<_>>>()?
    };
    let cutoff = cutoff(args.whisker)?;
    let start = Instant::now();
    let rows = threshold_sweep(&spec, &grid, args.directions, &cutoff, args.reps, args.seed)?;
    eprintln!("sweep on {}: {:.2}s", spec.model, start.elapsed().as_secs_f64());
    create_out(&args.out)?;

    let mut csv = CsvOut::create(&args.out.join("sweep.csv"))?;
    csv.row(["tau_shape", "tau_amplitude", "tau_magnitude", "reps", "f1_mean", "f1_sd", "fpr_mean", "fpr_sd"])?;
    for r in &rows {
        let q = &r.thresholds;
        csv.row([
            fmt_f64(q.shape),
            fmt_f64(q.amplitude),
            fmt_f64(q.magnitude),
            args.reps.to_string(),
            fmt_opt(r.f1_mean),
            fmt_opt(r.f1_sd),
            fmt_f64(r.fpr_mean),
            fmt_f64(r.fpr_sd),
        ])?;
    }
    csv.finish()?;

    let mut per_rep = CsvOut::create(&args.out.join("sweep_reps.csv"))?;
    per_rep.row(["tau_shape", "tau_amplitude", "tau_magnitude", "rep", "f1", "fpr"])?;
    for r in &rows {
        let q = &r.thresholds;
        for (i, fpr) in r.fpr.iter().enumerate() {
            let f1 = r.f1.as_ref().map(|f| f[i]);
            per_rep.row([
                fmt_f64(q.shape),
                fmt_f64(q.amplitude),
                fmt_f64(q.magnitude),
                i.to_string(),
                fmt_opt(f1),
                fmt_f64(*fpr),
            ])?;
        }
    }
    per_rep.finish()
}

pub fn baselines(args: &BaselinesArgs) -> CliResult<()> {
    let spec = sim_spec(&args.sim, 0)?;
    let cutoff = cutoff(args.whisker)?;
    let start = Instant::now();
    let b = estimate_baselines(&spec, args.reps, args.directions, args.seed, &cutoff)?;
    eprintln!("baselines on {}: {:.2}s", spec.model, start.elapsed().as_secs_f64());
    create_out(&args.out)?;
    io::write_json(
        &args.out.join("baselines.json"),
        &BaselinesFile {
            schema_version: SCHEMA_VERSION,
            library_version: library_version().to_string(),
            baselines: b,
            model: spec.model.to_string(),
            n: spec.n,
            k: spec.k,
            reps: args.reps,
            directions: args.directions,
            whisker_factor: args.whisker,
            seed: args.seed,
        },
    )
}
