//! `trigsift` — find suspicious guarded behavior in TIR programs.
//!
//! Typical workflow:
//!
//! ```text
//! trigsift gen --out corpus/ --apps 200 --seed 7
//! trigsift train --apps corpus/ --out model.json
//! trigsift analyze --apps suspects/ --model model.json --out report.json
//! trigsift score --report report.json --truth suspects/truth.json
//! ```
//!
//! Exit codes: 0 on success, 1 on usage or hard errors, 2 when the run
//! completed but some apps failed to analyze or timed out.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use trigsift::catalog::Catalog;
use trigsift::cfg::{dominator_tree, Cfg};
use trigsift::corpus::{generate, CorpusSpec, GroundTruth};
use trigsift::features::{csv_record, CSV_HEADER};
use trigsift::ocsvm::{cross_validate, fit, FitConfig, SvmModel};
use trigsift::pipeline::{analyze_source, AnalysisOptions, AppAnalysis};
use trigsift::report::{AppReport, Report, Timings, TriggerRecord};
use trigsift::tir::{emit_program, parse_program};

#[derive(Parser)]
#[command(name = "trigsift", version, about = "Guarded-behavior triage for TIR programs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic corpus with ground truth
    Gen(GenArgs),
    /// Train an anomaly model on a directory of apps
    Train(TrainArgs),
    /// Analyze apps against a trained model and emit a report
    Analyze(AnalyzeArgs),
    /// Compare a report against a corpus's ground truth
    Score(ScoreArgs),
    /// Print control-flow graphs as Graphviz dot
    DumpCfg(DumpCfgArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Directory to write app_NNNN.tir files and truth.json into
    #[arg(long)]
    out: PathBuf,
    /// Corpus spec JSON; flags below override its fields
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    apps: Option<usize>,
    /// Fraction of apps carrying a hidden payload
    #[arg(long)]
    bomb_rate: Option<f64>,
    #[arg(long)]
    blocks_min: Option<usize>,
    #[arg(long)]
    blocks_max: Option<usize>,
}

#[derive(Args)]
struct AnalysisFlags {
    /// Source/sensitive-API catalog JSON (defaults to the built-in one)
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Per-app taint budget in seconds
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Call-graph depth bound for reachability features
    #[arg(long, default_value_t = 20)]
    depth_limit: usize,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of .tir apps to train on
    #[arg(long)]
    apps: PathBuf,
    /// Where to write the model JSON
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisFlags,
    /// Expected outlier fraction in the training data
    #[arg(long, default_value_t = 0.05)]
    nu: f64,
    /// RBF kernel width (defaults to 1/dim)
    #[arg(long)]
    gamma: Option<f64>,
    /// Train on a seeded random subset of this many apps
    #[arg(long)]
    sample: Option<usize>,
    /// Seed for --sample and cross-validation folds
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the training vectors as CSV
    #[arg(long)]
    vectors_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory of .tir apps to analyze
    #[arg(long)]
    apps: PathBuf,
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    analysis: AnalysisFlags,
    /// Write instrumented copies of every app into this directory
    #[arg(long)]
    emit_instrumented: Option<PathBuf>,
    /// Zero out wall-clock fields so reports are byte-reproducible
    #[arg(long)]
    no_timings: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Report produced by `analyze`
    #[arg(long)]
    report: PathBuf,
    /// truth.json produced by `gen`
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct DumpCfgArgs {
    /// A single .tir file
    #[arg(long)]
    input: PathBuf,
    /// Restrict to one method, e.g. `App.main/0`
    #[arg(long)]
    method: Option<String>,
    /// Include dominator-tree edges
    #[arg(long)]
    dominators: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let is_help = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Score(args) => cmd_score(args),
        Cmd::DumpCfg(args) => cmd_dump_cfg(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading spec {}", path.display()))?;
            serde_json::from_str::<CorpusSpec>(&text)
                .with_context(|| format!("parsing spec {}", path.display()))?
        }
        None => CorpusSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(apps) = args.apps {
        spec.apps = apps;
    }
    if let Some(rate) = args.bomb_rate {
        spec.bomb_rate = rate;
    }
    if let Some(min) = args.blocks_min {
        spec.blocks_min = min;
    }
    if let Some(max) = args.blocks_max {
        spec.blocks_max = max;
    }

    let corpus = generate(&spec)?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for app in &corpus.apps {
        let path = args.out.join(format!("{}.tir", app.name));
        fs::write(&path, emit_program(&app.program))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let truth = corpus.truth();
    let mut truth_json = serde_json::to_string_pretty(&truth)?;
    truth_json.push('\n');
    fs::write(args.out.join("truth.json"), truth_json)?;

    let bombs = corpus.apps.iter().filter(|a| a.truth.bomb_template.is_some()).count();
    println!(
        "wrote {} apps ({} with payloads) to {}",
        corpus.apps.len(),
        bombs,
        args.out.display()
    );
    Ok(0)
}

fn load_catalog(path: &Option<PathBuf>) -> Result<Catalog> {
    Ok(match path {
        Some(p) => Catalog::load(p)?,
        None => Catalog::default_catalog(),
    })
}

fn analysis_options(flags: &AnalysisFlags) -> AnalysisOptions {
    AnalysisOptions {
        depth_limit: flags.depth_limit,
        timeout: Duration::from_secs(flags.timeout_secs),
    }
}

/// All .tir files directly inside `dir`, sorted by file name.
fn tir_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "tir"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .tir files in {}", dir.display());
    }
    Ok(files)
}

fn app_name(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// Runs the pipeline over files in parallel, preserving input order.
fn analyze_all(
    files: &[PathBuf],
    cat: &Catalog,
    opts: &AnalysisOptions,
    workers: usize,
) -> Result<Vec<(PathBuf, Result<AppAnalysis, String>)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let outcome = fs::read_to_string(path)
                    .map_err(|e| format!("read: {e}"))
                    .and_then(|text| {
                        analyze_source(&app_name(path), &text, cat, opts)
                            .map_err(|e| e.to_string())
                    });
                (path.clone(), outcome)
            })
            .collect()
    }))
}

fn cmd_train(args: TrainArgs) -> Result<i32> {
    let cat = load_catalog(&args.analysis.catalog)?;
    let opts = analysis_options(&args.analysis);
    let mut files = tir_files(&args.apps)?;

    if let Some(n) = args.sample {
        if n < files.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let mut picked = rand::seq::index::sample(&mut rng, files.len(), n).into_vec();
            picked.sort_unstable();
            files = picked.into_iter().map(|i| files[i].clone()).collect();
        }
    }

    let results = analyze_all(&files, &cat, &opts, args.analysis.workers)?;
    let mut failed = 0usize;
    let mut rows: Vec<String> = Vec::new();
    let mut vectors = Vec::new();
    for (path, outcome) in &results {
        match outcome {
            Ok(analysis) => {
                if analysis.timed_out {
                    eprintln!("warning: {}: taint pass timed out", path.display());
                    failed += 1;
                }
                for t in &analysis.triggers {
                    rows.push(csv_record(&analysis.name, &t.trigger, &t.vector));
                    vectors.push(t.vector);
                }
            }
            Err(e) => {
                eprintln!("warning: skipping {}: {e}", path.display());
                failed += 1;
            }
        }
    }
    if vectors.is_empty() {
        bail!("no vectors extracted from {}", args.apps.display());
    }

    if let Some(path) = &args.vectors_out {
        let mut csv = String::from(CSV_HEADER);
        csv.push('\n');
        for row in &rows {
            csv.push_str(row);
            csv.push('\n');
        }
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }

    let cfg = FitConfig { nu: args.nu, gamma: args.gamma, ..FitConfig::default() };
    let model = fit(&vectors, &cfg)?;
    eprintln!(
        "trained on {} vectors from {} apps ({} support vectors, rho {:.6})",
        vectors.len(),
        files.len() - failed,
        model.svs.len(),
        model.rho
    );

    if vectors.len() >= 10 {
        let cv = cross_validate(&vectors, &cfg, 10, args.seed)?;
        eprintln!("10-fold inlier rate: mean {:.4}, folds {:?}", cv.mean, cv.fold_accuracies);
    }

    let mut json = model.to_json();
    json.push('\n');
    fs::write(&args.out, json).with_context(|| format!("writing {}", args.out.display()))?;
    println!("model written to {}", args.out.display());
    Ok(if failed > 0 { 2 } else { 0 })
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32> {
    let cat = load_catalog(&args.analysis.catalog)?;
    let opts = analysis_options(&args.analysis);
    let model_text = fs::read_to_string(&args.model)
        .with_context(|| format!("reading model {}", args.model.display()))?;
    let model = SvmModel::from_json(&model_text)
        .with_context(|| format!("parsing model {}", args.model.display()))?;

    let files = tir_files(&args.apps)?;
    let results = analyze_all(&files, &cat, &opts, args.analysis.workers)?;

    if let Some(dir) = &args.emit_instrumented {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut partial = false;
    let mut apps = Vec::with_capacity(results.len());
    for (path, outcome) in results {
        let name = app_name(&path);
        let path_str = path.to_string_lossy().into_owned();
        match outcome {
            Ok(analysis) => {
                if let Some(dir) = &args.emit_instrumented {
                    let out = dir.join(format!("{name}.tir"));
                    fs::write(&out, emit_program(&analysis.instrumented))
                        .with_context(|| format!("writing {}", out.display()))?;
                }
                let t0 = Instant::now();
                let triggers: Vec<TriggerRecord> = analysis
                    .triggers
                    .iter()
                    .map(|t| {
                        let (score, is_outlier) = model.predict(&t.vector);
                        TriggerRecord::new(&t.trigger, t.vector, score, is_outlier)
                    })
                    .collect();
                let predict_ms = t0.elapsed().as_secs_f64() * 1e3;
                if analysis.timed_out {
                    partial = true;
                }
                apps.push(AppReport {
                    name,
                    path: path_str,
                    error: None,
                    timed_out: analysis.timed_out,
                    triggers,
                    timings_ms: Timings::from_phases(analysis.timings, predict_ms),
                });
            }
            Err(e) => {
                partial = true;
                apps.push(AppReport::failed(&name, &path_str, e));
            }
        }
    }

    let mut report = Report::new(apps);
    if args.no_timings {
        report.zero_timings();
    }
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{json}"),
    }
    eprintln!(
        "{} apps, {} triggers, {} flagged",
        report.summary.apps_total, report.summary.triggers_total, report.summary.shso_total
    );
    Ok(if partial { 2 } else { 0 })
}

fn cmd_score(args: ScoreArgs) -> Result<i32> {
    let report: Report = Report::from_json(
        &fs::read_to_string(&args.report)
            .with_context(|| format!("reading {}", args.report.display()))?,
    )?;
    let truth: GroundTruth = serde_json::from_str(
        &fs::read_to_string(&args.truth)
            .with_context(|| format!("reading {}", args.truth.display()))?,
    )?;

    let report_apps: BTreeSet<&str> = report.apps.iter().map(|a| a.name.as_str()).collect();
    let truth_apps: BTreeSet<&str> = truth.apps.iter().map(|a| a.name.as_str()).collect();
    if report_apps != truth_apps {
        let missing: Vec<_> = truth_apps.difference(&report_apps).collect();
        let extra: Vec<_> = report_apps.difference(&truth_apps).collect();
        bail!("report and truth cover different apps (missing {missing:?}, extra {extra:?})");
    }

    // A flagged site is a true positive iff the truth marks that exact
    // (app, method, label) as a payload trigger.
    let mut bomb_sites: BTreeSet<(String, String, String)> = BTreeSet::new();
    for app in &truth.apps {
        for t in app.triggers.iter().filter(|t| t.is_bomb) {
            bomb_sites.insert((app.name.clone(), t.method.clone(), t.label.clone()));
        }
    }
    let mut flagged_total = 0usize;
    let mut true_positives = 0usize;
    for app in &report.apps {
        for t in app.triggers.iter().filter(|t| t.is_outlier) {
            flagged_total += 1;
            let site = (app.name.clone(), t.method.clone(), t.label.clone());
            if bomb_sites.contains(&site) {
                true_positives += 1;
            }
        }
    }

    let recall = if bomb_sites.is_empty() {
        1.0
    } else {
        true_positives as f64 / bomb_sites.len() as f64
    };
    let precision = if flagged_total == 0 {
        1.0
    } else {
        true_positives as f64 / flagged_total as f64
    };

    let out = serde_json::json!({
        "apps": report.summary.apps_total,
        "triggers_total": report.summary.triggers_total,
        "flagged_total": flagged_total,
        "payloads_total": bomb_sites.len(),
        "true_positives": true_positives,
        "recall": recall,
        "precision": precision,
        "search_space_reduction": report.summary.search_space_reduction,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_dump_cfg(args: DumpCfgArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let program = parse_program(&text)?;
    let mut printed = 0;
    for (class, method) in program.methods() {
        let sig = method.sig_in(class);
        if let Some(filter) = &args.method {
            if sig.to_string() != *filter {
                continue;
            }
        }
        let cfg = Cfg::build(class, method);
        let dom = args.dominators.then(|| dominator_tree(&cfg));
        print!("{}", cfg.to_dot(dom.as_ref()));
        printed += 1;
    }
    if printed == 0 {
        bail!(
            "no methods matched{}",
            args.method.as_deref().map(|m| format!(" `{m}`")).unwrap_or_default()
        );
    }
    Ok(0)
}
