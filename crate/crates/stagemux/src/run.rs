//! Command drivers shared by the binary and the test suites. Every
//! driver resolves its inputs, runs the core pipeline, writes its output
//! files into a directory and returns a small summary for the caller to
//! print. Outputs are deterministic given config plus seed.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stagemux_core::demux::FeatureSet;
use stagemux_core::hmm::{train_supervised, TrainConfig};
use stagemux_core::metrics::{evaluate, EvalOptions, EvaluationReport};
use stagemux_core::scenario::{derive_seed, synthesize_corpus, InstanceInfo, ScenarioSpec};
use stagemux_core::{
    run_stream_arch1, run_stream_arch2, AlertStream, DetectionTrace, HmmTemplate, SymbolMap,
};

use crate::io::alerts::{read_alert_file, read_severity_map, write_alert_file};
use crate::io::manifest::write_manifest;
use crate::io::report::{write_report, write_sweep, SweepRowDoc};
use crate::io::scenario::load_scenario;
use crate::io::template::{read_template, write_template};
use crate::io::trace::{read_trace, write_trace};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const INSTANCES_FILE: &str = "instances.json";

/// Which detection pipeline to run. `Generic` is the single-stream
/// pipeline without the return-to-start transitions (epsilon2 forced to
/// zero), the baseline the modified pipeline is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Arch {
    Generic,
    Arch1,
    Arch2,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Generic => "generic",
            Arch::Arch1 => "arch1",
            Arch::Arch2 => "arch2",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DetectOptions {
    pub arch: Arch,
    pub window: usize,
    pub thr: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
}

impl Serialize for Arch {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// Applies the per-architecture template preparation: the single-stream
/// pipelines need the unrelated-symbol modification, the demultiplexing
/// pipeline consumes templates as trained.
pub fn prepare_templates(
    templates: Vec<HmmTemplate>,
    opts: &DetectOptions,
) -> Result<Vec<HmmTemplate>> {
    match opts.arch {
        Arch::Generic => templates
            .into_iter()
            .map(|t| {
                t.apply_epsilon_modification(opts.epsilon1, 0.0)
                    .map_err(|e| anyhow::anyhow!("{e}"))
            })
            .collect(),
        Arch::Arch1 => templates
            .into_iter()
            .map(|t| {
                t.apply_epsilon_modification(opts.epsilon1, opts.epsilon2)
                    .map_err(|e| anyhow::anyhow!("{e}"))
            })
            .collect(),
        Arch::Arch2 => Ok(templates),
    }
}

fn run_detection(
    stream: &AlertStream,
    templates: &[HmmTemplate],
    opts: &DetectOptions,
) -> Result<DetectionTrace> {
    ensure!(opts.window >= 1, "window must be at least 1");
    let trace = match opts.arch {
        Arch::Generic | Arch::Arch1 => run_stream_arch1(stream, templates, opts.thr, opts.window),
        Arch::Arch2 => run_stream_arch2(stream, templates, opts.window, FeatureSet::ip_pair()),
    };
    trace.map_err(|e| anyhow::anyhow!("detection failed: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub instance_id: String,
    pub template_id: String,
}

pub fn write_instances(path: &Path, instances: &[InstanceInfo]) -> Result<()> {
    let docs: Vec<InstanceDoc> = instances
        .iter()
        .map(|i| InstanceDoc {
            instance_id: i.instance_id.clone(),
            template_id: i.template_id.clone(),
        })
        .collect();
    serde_json::to_writer_pretty(File::create(path)?, &docs)
        .with_context(|| format!("write {}", path.display()))
}

pub fn read_instances(path: &Path) -> Result<Vec<InstanceInfo>> {
    let docs: Vec<InstanceDoc> = serde_json::from_reader(
        File::open(path).with_context(|| format!("open {}", path.display()))?,
    )
    .with_context(|| format!("parse {}", path.display()))?;
    Ok(docs
        .into_iter()
        .map(|d| InstanceInfo {
            instance_id: d.instance_id,
            template_id: d.template_id,
        })
        .collect())
}

pub struct TrainSummary {
    pub template_path: PathBuf,
    pub alerts: usize,
    pub symbols_seen: usize,
}

/// Trains one template from a fully stage-labeled corpus. Symbols are
/// numbered by first appearance; ids beyond `n_symbols` fail, unseen
/// symbol slots get placeholder names.
pub fn train_run(
    corpus: &Path,
    id: &str,
    n_states: usize,
    n_symbols: usize,
    smoothing: f64,
    out_dir: &Path,
) -> Result<TrainSummary> {
    fs::create_dir_all(out_dir)?;
    let parsed = read_alert_file(corpus)?;
    let symbols = SymbolMap::derive(&parsed.stream);
    ensure!(
        symbols.len() <= n_symbols,
        "corpus has {} distinct alert ids, more than n_symbols = {}",
        symbols.len(),
        n_symbols
    );
    let labeled = symbols
        .labeled_pairs(&parsed.stream)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let cfg = TrainConfig {
        n_states,
        n_symbols,
        smoothing,
    };
    let mut tmpl = train_supervised(id, &labeled, &cfg)
        .map_err(|e| anyhow::anyhow!("training failed: {e}"))?;
    let mut vocab = symbols.names_by_symbol();
    for s in vocab.len()..n_symbols {
        vocab.push(format!("sym{}", s + 1));
    }
    tmpl.set_vocab(vocab).map_err(|e| anyhow::anyhow!("{e}"))?;

    let template_path = out_dir.join(format!("{id}.template.json"));
    write_template(&template_path, &tmpl)?;
    write_manifest(
        out_dir,
        "train",
        &(
            corpus.display().to_string(),
            id,
            n_states,
            n_symbols,
            smoothing,
        ),
        None,
    )?;
    Ok(TrainSummary {
        template_path,
        alerts: parsed.stream.len(),
        symbols_seen: symbols.len(),
    })
}

pub struct SynthesizeSummary {
    pub corpus_path: PathBuf,
    pub alerts: usize,
    pub instances: usize,
    pub seed: u64,
}

pub fn synthesize_run(
    spec_path: &Path,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<SynthesizeSummary> {
    fs::create_dir_all(out_dir)?;
    let mut spec = load_scenario(spec_path)?;
    if let Some(seed) = seed_override {
        spec.seed = seed;
    }
    let (stream, instances) =
        synthesize_corpus(&spec).map_err(|e| anyhow::anyhow!("synthesis failed: {e}"))?;

    let corpus_path = out_dir.join(CORPUS_FILE);
    write_alert_file(&corpus_path, &stream)?;
    write_instances(&out_dir.join(INSTANCES_FILE), &instances)?;
    let spec_text = fs::read_to_string(spec_path)?;
    write_manifest(
        out_dir,
        "synthesize",
        &(spec_text, spec.seed),
        Some(spec.seed),
    )?;
    Ok(SynthesizeSummary {
        corpus_path,
        alerts: stream.len(),
        instances: instances.len(),
        seed: spec.seed,
    })
}

pub struct DetectSummary {
    pub records: usize,
    pub windows: u64,
    pub defaulted_severities: usize,
}

pub fn detect_run(
    corpus: &Path,
    template_paths: &[PathBuf],
    opts: &DetectOptions,
    severity_map: Option<&Path>,
    out_dir: &Path,
) -> Result<DetectSummary> {
    fs::create_dir_all(out_dir)?;
    ensure!(!template_paths.is_empty(), "need at least one template");
    let parsed = read_alert_file(corpus)?;
    let mut stream = parsed.stream;
    let defaulted = match severity_map {
        Some(path) => {
            let table = read_severity_map(path)?;
            stream.assign_severity(&table)
        }
        None => 0,
    };
    let templates: Vec<HmmTemplate> = template_paths
        .iter()
        .map(|p| read_template(p))
        .collect::<Result<_>>()?;
    let prepared = prepare_templates(templates, opts)?;
    let trace = run_detection(&stream, &prepared, opts)?;
    write_trace(out_dir, &trace)?;
    write_manifest(
        out_dir,
        "detect",
        &(
            corpus.display().to_string(),
            template_paths
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>(),
            opts,
        ),
        None,
    )?;
    Ok(DetectSummary {
        records: trace.records.len(),
        windows: trace.counters.windows,
        defaulted_severities: defaulted,
    })
}

pub struct EvaluateSummary {
    pub global_error_rate: f64,
    pub scored_alerts: usize,
    pub attacks: usize,
}

pub fn evaluate_run(
    run_dir: &Path,
    corpus: &Path,
    instances_path: &Path,
    count_noise: bool,
    out_dir: &Path,
) -> Result<EvaluateSummary> {
    fs::create_dir_all(out_dir)?;
    let trace = read_trace(run_dir)?;
    let parsed = read_alert_file(corpus)?;
    let instances = read_instances(instances_path)?;
    let report = evaluate(
        &trace,
        &parsed.stream,
        &instances,
        EvalOptions { count_noise },
    )
    .map_err(|e| anyhow::anyhow!("evaluation failed: {e}"))?;
    write_report(out_dir, &report, &trace)?;
    write_manifest(
        out_dir,
        "evaluate",
        &(
            run_dir.display().to_string(),
            corpus.display().to_string(),
            count_noise,
        ),
        None,
    )?;
    Ok(EvaluateSummary {
        global_error_rate: report.global_error_rate,
        scored_alerts: report.scored_alerts,
        attacks: report.attacks.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOptions {
    pub windows: Vec<usize>,
    pub fdrs: Vec<f64>,
    pub fnrs: Vec<f64>,
    pub experiments: usize,
}

pub struct SweepSummary {
    pub rows: Vec<SweepRowDoc>,
}

/// Synthesize-detect-evaluate over the full (window, fdr, fnr) grid,
/// averaging the global error rate over `experiments` seeded runs per
/// cell. Experiment `e` reuses seed `derive_seed(base, e)` in every
/// cell, so cells differ only in the swept rates.
pub fn sweep_run(
    spec_path: &Path,
    template_paths: &[PathBuf],
    detect: &DetectOptions,
    sweep: &SweepOptions,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<SweepSummary> {
    fs::create_dir_all(out_dir)?;
    ensure!(
        !sweep.windows.is_empty() && !sweep.fdrs.is_empty() && !sweep.fnrs.is_empty(),
        "sweep grid is empty: need at least one window, fdr and fnr"
    );
    ensure!(sweep.experiments >= 1, "need at least one experiment");
    ensure!(!template_paths.is_empty(), "need at least one template");

    let mut base_spec = load_scenario(spec_path)?;
    if let Some(seed) = seed_override {
        base_spec.seed = seed;
    }
    let templates: Vec<HmmTemplate> = template_paths
        .iter()
        .map(|p| read_template(p))
        .collect::<Result<_>>()?;
    let prepared = prepare_templates(templates, detect)?;

    let mut cells = Vec::new();
    for &window in &sweep.windows {
        for &fdr in &sweep.fdrs {
            for &fnr in &sweep.fnrs {
                cells.push((window, fdr, fnr));
            }
        }
    }
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..sweep.experiments as u64).map(move |e| (c, e)))
        .collect();

    let rates: Vec<(usize, f64)> = jobs
        .into_par_iter()
        .map(|(cell, e)| -> Result<(usize, f64)> {
            let (window, fdr, fnr) = cells[cell];
            let mut spec = base_spec.clone();
            spec.fdr = fdr;
            spec.fnr = fnr;
            spec.seed = derive_seed(base_spec.seed, e);
            let report = run_cell(&spec, &prepared, detect, window)?;
            Ok((cell, report.global_error_rate))
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0f64; cells.len()];
    for (cell, er) in rates {
        sums[cell] += er;
    }
    let rows: Vec<SweepRowDoc> = cells
        .iter()
        .zip(&sums)
        .map(|(&(window, fdr, fnr), &sum)| SweepRowDoc {
            window,
            fdr,
            fnr,
            experiments: sweep.experiments,
            mean_error_rate: sum / sweep.experiments as f64,
        })
        .collect();

    write_sweep(out_dir, detect.arch.name(), &rows)?;
    let spec_text = fs::read_to_string(spec_path)?;
    write_manifest(
        out_dir,
        "sweep",
        &(spec_text, detect, sweep, base_spec.seed),
        Some(base_spec.seed),
    )?;
    Ok(SweepSummary { rows })
}

fn run_cell(
    spec: &ScenarioSpec,
    prepared: &[HmmTemplate],
    detect: &DetectOptions,
    window: usize,
) -> Result<EvaluationReport> {
    let (stream, instances) =
        synthesize_corpus(spec).map_err(|e| anyhow::anyhow!("synthesis failed: {e}"))?;
    let opts = DetectOptions { window, ..*detect };
    let trace = run_detection(&stream, prepared, &opts)?;
    evaluate(&trace, &stream, &instances, EvalOptions::default())
        .map_err(|e| anyhow::anyhow!("evaluation failed: {e}"))
}
