use std::fs;
use std::path::Path;

use predclust::eval::{
    benchmark_fig2, cluster_summaries, cross_validate, write_benchmark_csv, ClusterSummary, CvReport, Method, Metric,
    SplitScheme,
};
use predclust::greedy::{self, FitReport};
use predclust::milp::{build_milp, export_mps, to_lp_string};
use predclust::solve::{fit_exact, SolveSummary};
use predclust::synth::{generate, SynthTask};
use predclust::{load_csv, per_datum_loss, Dataset, Error, LossSpec, Regularization, TaskKind};
use serde::Serialize;

use crate::config::{MethodKind, RunConfig};
use crate::{BenchmarkArgs, EvaluateArgs, ExportArgs, FitArgs, ModelArgs, SynthArgs};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
    pub hint: Option<String>,
}

impl CliError {
    fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
            hint: None,
        }
    }

    fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoSolution(_) => 3,
            Error::Decode(_) | Error::Model(_) => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
            hint: None,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::invalid(format!("{}: {e}", path.display()))
}

fn resolve(args: &ModelArgs) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(args.config.as_deref())?;
    let run = &mut cfg.run;
    if let Some(v) = args.seed {
        run.seed = Some(v);
    }
    if let Some(v) = args.method {
        run.method = v;
    }
    if let Some(v) = args.task {
        run.task = v;
    }
    if let Some(v) = &args.target {
        run.target = Some(v.clone());
    }
    if let Some(v) = args.k {
        run.k = v;
    }
    if let Some(v) = args.geometry {
        run.geometry = v;
    }
    if let Some(v) = args.exact_max_n {
        run.exact_max_n = v;
    }
    if args.no_standardize {
        run.standardize = false;
    }
    if let Some(v) = args.loss {
        cfg.loss.kind = Some(v);
    }
    if let Some(v) = args.svm_c {
        cfg.loss.svm_c = Some(v);
    }
    if let Some(v) = args.l1 {
        cfg.loss.regularization = Some(Regularization::L1(v));
    }
    if let Some(v) = args.l2 {
        cfg.loss.regularization = Some(Regularization::L2(v));
    }
    if let Some(v) = args.restarts {
        cfg.greedy.restarts = v;
    }
    if let Some(v) = args.workers {
        cfg.greedy.workers = v;
    }
    if let Some(v) = args.lambda {
        cfg.milp.lambda = v;
    }
    if let Some(v) = args.theta_bound {
        cfg.milp.theta_bound = v;
    }
    if args.strict_boxes {
        cfg.milp.strict_boxes = true;
    }
    if let Some(v) = args.time_limit {
        cfg.solver.time_limit = v;
    }
    if let Some(v) = args.gap {
        cfg.solver.gap_threshold = v;
    }
    let seed = cfg.seed()?;
    cfg.run.seed = Some(seed);
    cfg.eval.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

fn last_column(path: &Path) -> CliResult<String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let headers = rdr.headers().map_err(|e| io_error(path, e))?;
    headers
        .iter()
        .next_back()
        .map(|h| h.trim().to_string())
        .filter(|h| !h.is_empty())
        .ok_or_else(|| CliError::invalid(format!("{} has no header", path.display())))
}

fn load(path: &Path, cfg: &mut RunConfig) -> CliResult<Dataset> {
    if !path.is_file() {
        return Err(CliError::invalid(format!("input file {} not found", path.display())));
    }
    let target = match &cfg.run.target {
        Some(t) => t.clone(),
        None => last_column(path)?,
    };
    cfg.run.target = Some(target.clone());
    Ok(load_csv(path, &target, cfg.run.task, cfg.run.standardize)?)
}

fn check_exact_size(cfg: &RunConfig, n: usize) -> CliResult<()> {
    if cfg.run.method == MethodKind::Exact && n > cfg.run.exact_max_n {
        return Err(CliError::invalid(format!(
            "exact method refused: N = {n} exceeds the cap of {}",
            cfg.run.exact_max_n
        ))
        .with_hint("use --method greedy, subsample the data, or raise --exact-max-n"));
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::invalid(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct FitOutput<'a> {
    input: String,
    n: usize,
    d: usize,
    config: &'a RunConfig,
    loss: LossSpec,
    report: &'a FitReport,
    solve: Option<SolveSummary>,
    clusters: Vec<ClusterSummary>,
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let mut cfg = resolve(&args.model)?;
    let ds = load(&args.data, &mut cfg)?;
    check_exact_size(&cfg, ds.n())?;
    let spec = cfg.loss_spec(ds.task().is_classification())?;
    let (report, solve) = match cfg.run.method {
        MethodKind::Greedy => (greedy::fit(&ds, &spec, &cfg.greedy_config()?)?, None),
        MethodKind::Exact => {
            let f = fit_exact(&ds, &spec, &cfg.exact_config())?;
            (f.report, Some(f.solve))
        }
    };
    let clusters = cluster_summaries(&ds, &report.assignment, &report.params);
    let out = FitOutput {
        input: args.data.display().to_string(),
        n: ds.n(),
        d: ds.d(),
        config: &cfg,
        loss: report.loss,
        report: &report,
        solve,
        clusters,
    };
    write_json(&args.out, &out)?;
    if let Some(path) = &args.assignments {
        write_assignments(path, &ds, &report)?;
    }
    let metric = report
        .metrics
        .iter()
        .map(|(k, v)| format!("{k} = {v:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} {} K = {}: loss {:.6}, {metric}, {:.2}s",
        format!("{:?}", cfg.run.method).to_lowercase(),
        cfg.run.geometry,
        cfg.run.k,
        report.final_loss,
        report.wall_time
    );
    Ok(())
}

fn write_assignments(path: &Path, ds: &Dataset, report: &FitReport) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(["row_id", "cluster", "loss"]).map_err(|e| io_error(path, e))?;
    for i in 0..ds.n() {
        let k = report.assignment.cluster_of(i);
        let l = per_datum_loss(ds.row(i), ds.response(i), &report.params.weights[k], &report.loss)?;
        w.write_record([i.to_string(), k.to_string(), format!("{l}")])
            .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

pub fn export(args: &ExportArgs) -> CliResult<()> {
    let mut cfg = resolve(&args.model)?;
    cfg.run.method = MethodKind::Exact;
    let ds = load(&args.data, &mut cfg)?;
    let spec = cfg.loss_spec(ds.task().is_classification())?;
    let model = build_milp(&ds, &spec, cfg.run.geometry, cfg.run.k, &cfg.milp)?;
    export_mps(&model, &args.mps)?;
    if let Some(path) = &args.lp {
        fs::write(path, to_lp_string(&model)).map_err(|e| io_error(path, e))?;
    }
    println!(
        "wrote {} columns, {} rows to {}",
        model.num_vars(),
        model.constraints.len(),
        args.mps.display()
    );
    Ok(())
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let mut spec = cfg.synth.clone();
    spec.seed = match args.seed {
        Some(s) => s,
        None if cfg.run.seed.is_some() || std::env::var(crate::config::SEED_ENV).is_ok() => cfg.seed()?,
        None => spec.seed,
    };
    if let Some(t) = args.task {
        spec.task = match t {
            TaskKind::Regression => SynthTask::Regression,
            TaskKind::Classification => SynthTask::Classification,
        };
    }
    if let Some(v) = args.n {
        spec.n = v;
    }
    if let Some(v) = args.d {
        spec.d = v;
    }
    if let Some(v) = args.k_true {
        spec.k_true = v;
    }
    if let Some(v) = args.separation {
        spec.separation = v;
    }
    if let Some(v) = args.noise {
        spec.noise_sigma = v;
    }
    if let Some(v) = args.flip {
        spec.label_flip_prob = v;
    }
    let data = generate(&spec)?;
    data.dataset
        .write_csv(&args.out, Some(("cluster", data.true_labels.labels())))?;
    println!("wrote {} rows to {}", data.dataset.n(), args.out.display());
    Ok(())
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let cfg = RunConfig::load(args.config.as_deref())?;
    let mut grid = cfg.benchmark.clone();
    if let Some(v) = &args.sizes {
        grid.sizes = v.clone();
    }
    if let Some(v) = &args.geometries {
        grid.geometries = v.clone();
    }
    if let Some(v) = args.k {
        grid.k = v;
    }
    if let Some(v) = args.milp_cap {
        grid.milp_cap = v;
    }
    if let Some(v) = args.time_limit {
        grid.solve.time_limit = v;
    }
    if let Some(v) = args.restarts {
        grid.greedy.restarts = v;
    }
    let seed = match args.seed {
        Some(s) => Some(s),
        None if cfg.run.seed.is_some() || std::env::var(crate::config::SEED_ENV).is_ok() => Some(cfg.seed()?),
        None => None,
    };
    if let Some(s) = seed {
        grid.synth.seed = s;
        grid.greedy.seed = s;
    }
    grid.solve.validate()?;
    let rows = benchmark_fig2(&grid)?;
    write_benchmark_csv(&rows, &args.out)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn parse_k_grid(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::invalid(format!("cannot parse K grid {s:?}; use 2..7 or 2,3,5"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn parse_protocol(s: &str) -> CliResult<SplitScheme> {
    let s = s.to_ascii_lowercase();
    if s == "holdout" {
        return Ok(SplitScheme::Holdout {
            train: 0.65,
            val: 0.15,
            test: 0.20,
        });
    }
    s.strip_prefix("cv")
        .and_then(|f| f.parse().ok())
        .map(|folds| SplitScheme::KFold { folds })
        .ok_or_else(|| CliError::invalid(format!("unknown protocol {s:?}; use cv5 or holdout")))
}

fn parse_metric(s: &str) -> CliResult<Metric> {
    match s.to_ascii_lowercase().as_str() {
        "r2" => Ok(Metric::R2),
        "rmse" => Ok(Metric::Rmse),
        "accuracy" | "acc" => Ok(Metric::Accuracy),
        other => Err(CliError::invalid(format!("unknown metric {other:?}"))),
    }
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    input: String,
    n: usize,
    d: usize,
    config: &'a RunConfig,
    cv: &'a CvReport,
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let mut cfg = resolve(&args.model)?;
    if let Some(p) = &args.protocol {
        cfg.eval.split = parse_protocol(p)?;
    }
    if let Some(g) = &args.k_grid {
        cfg.eval.k_grid = parse_k_grid(g)?;
    }
    if let Some(m) = &args.metric {
        cfg.eval.metric = Some(parse_metric(m)?);
    }
    // the protocol fits its own feature transform per fold
    cfg.eval.standardize = cfg.run.standardize;
    cfg.run.standardize = false;
    cfg.validate()?;
    let ds = load(&args.data, &mut cfg)?;
    cfg.run.standardize = cfg.eval.standardize;
    check_exact_size(&cfg, ds.n())?;
    let spec = cfg.loss_spec(ds.task().is_classification())?;
    let method = match cfg.run.method {
        MethodKind::Greedy => Method::Greedy(cfg.greedy_config()?),
        MethodKind::Exact => Method::Exact(cfg.exact_config()),
    };
    let report = cross_validate(&ds, &cfg.eval, &method, &spec)?;
    write_json(
        &args.out,
        &EvaluateOutput {
            input: args.data.display().to_string(),
            n: ds.n(),
            d: ds.d(),
            config: &cfg,
            cv: &report,
        },
    )?;
    let per_k = report
        .per_k_val_mean
        .iter()
        .map(|s| format!("K={}: {:.4}", s.k, s.score))
        .collect::<Vec<_>>()
        .join(", ");
    println!(
        "{} mean {:.4} (sd {:.4}) over {} folds; selected K = {}; validation [{per_k}]",
        report.metric.name(),
        report.mean,
        report.std,
        report.per_fold.len(),
        report.selected_k
    );
    Ok(())
}
