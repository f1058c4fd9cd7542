use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stagemux::run::{
    detect_run, evaluate_run, sweep_run, synthesize_run, train_run, Arch, DetectOptions,
    SweepOptions,
};

/// Multi-stage attack detection over interleaved alert streams.
#[derive(Parser)]
#[command(name = "stagemux", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DetectArgs {
    /// Detection pipeline to run.
    #[arg(long, value_enum, default_value = "arch2")]
    arch: Arch,
    /// Observation window length in alerts.
    #[arg(long, default_value_t = 500)]
    window: usize,
    /// Activity gate on the per-alert geometric-mean probability, 0 to 0.5.
    #[arg(long, default_value_t = 0.0)]
    thr: f64,
    /// Unrelated-symbol emission probability (single-stream pipelines).
    #[arg(long, default_value_t = 1e-6)]
    eps1: f64,
    /// Return-to-start transition probability (arch1 only).
    #[arg(long, default_value_t = 1e-3)]
    eps2: f64,
}

impl DetectArgs {
    fn options(&self) -> DetectOptions {
        DetectOptions {
            arch: self.arch,
            window: self.window,
            thr: self.thr,
            epsilon1: self.eps1,
            epsilon2: self.eps2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a template from a stage-labeled alert corpus.
    Train {
        /// Labeled corpus (JSONL or CSV); every alert needs a truth_stage.
        #[arg(long)]
        corpus: PathBuf,
        /// Template id, also the output file stem.
        #[arg(long)]
        id: String,
        /// Number of attack stages.
        #[arg(long)]
        states: usize,
        /// Vocabulary size; must cover the corpus's distinct alert ids.
        #[arg(long)]
        symbols: usize,
        /// Additive smoothing weight.
        #[arg(long, default_value_t = 0.0)]
        smoothing: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a labeled interleaved corpus from a scenario file.
    Synthesize {
        /// Scenario recipe (JSON or TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run detection over a corpus and write the trace.
    Detect {
        #[arg(long)]
        corpus: PathBuf,
        /// Template file; repeat for several templates.
        #[arg(long = "template", required = true)]
        templates: Vec<PathBuf>,
        #[command(flatten)]
        detect: DetectArgs,
        /// Optional alert-id to severity JSON table, applied before windowing.
        #[arg(long)]
        severity_map: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a detection run against its labeled corpus.
    Evaluate {
        /// Directory a detect run wrote (trace.jsonl + counters.json).
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// instances.json from the synthesize run.
        #[arg(long)]
        instances: PathBuf,
        /// Leave injected noise out of the error-rate denominator.
        #[arg(long)]
        skip_noise: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Average error rates over a (window, fdr, fnr) grid of seeded runs.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "template", required = true)]
        templates: Vec<PathBuf>,
        #[command(flatten)]
        detect: DetectArgs,
        /// Window lengths to sweep; defaults to the --window value.
        #[arg(long, value_delimiter = ',')]
        windows: Vec<usize>,
        /// FDR values to sweep; defaults to the scenario's fdr.
        #[arg(long, value_delimiter = ',')]
        fdrs: Vec<f64>,
        /// FNR values to sweep; defaults to the scenario's fnr.
        #[arg(long, value_delimiter = ',')]
        fnrs: Vec<f64>,
        /// Seeded runs averaged per grid cell.
        #[arg(long, default_value_t = 10)]
        experiments: usize,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train {
            corpus,
            id,
            states,
            symbols,
            smoothing,
            out,
        } => {
            let summary = train_run(&corpus, &id, states, symbols, smoothing, &out)?;
            println!(
                "trained {} from {} alerts ({} distinct ids) -> {}",
                id,
                summary.alerts,
                summary.symbols_seen,
                summary.template_path.display()
            );
        }
        Command::Synthesize { spec, seed, out } => {
            let summary = synthesize_run(&spec, seed, &out)?;
            println!(
                "synthesized {} alerts across {} instances (seed {}) -> {}",
                summary.alerts,
                summary.instances,
                summary.seed,
                summary.corpus_path.display()
            );
        }
        Command::Detect {
            corpus,
            templates,
            detect,
            severity_map,
            out,
        } => {
            let opts = detect.options();
            let summary = detect_run(&corpus, &templates, &opts, severity_map.as_deref(), &out)?;
            println!(
                "{}: {} records over {} windows -> {}",
                opts.arch.name(),
                summary.records,
                summary.windows,
                out.display()
            );
        }
        Command::Evaluate {
            run,
            corpus,
            instances,
            skip_noise,
            out,
        } => {
            let summary = evaluate_run(&run, &corpus, &instances, !skip_noise, &out)?;
            println!(
                "error rate {:.2}% over {} scored alerts, {} attacks -> {}",
                summary.global_error_rate,
                summary.scored_alerts,
                summary.attacks,
                out.display()
            );
        }
        Command::Sweep {
            spec,
            templates,
            detect,
            windows,
            fdrs,
            fnrs,
            experiments,
            seed,
            out,
        } => {
            let opts = detect.options();
            let sweep = SweepOptions {
                windows: if windows.is_empty() {
                    vec![opts.window]
                } else {
                    windows
                },
                fdrs,
                fnrs,
                experiments,
            };
            let mut sweep = sweep;
            if sweep.fdrs.is_empty() || sweep.fnrs.is_empty() {
                let doc = stagemux::io::scenario::read_scenario_doc(&spec)?;
                if sweep.fdrs.is_empty() {
                    sweep.fdrs = vec![doc.fdr];
                }
                if sweep.fnrs.is_empty() {
                    sweep.fnrs = vec![doc.fnr];
                }
            }
            let summary = sweep_run(&spec, &templates, &opts, &sweep, seed, &out)?;
            println!(
                "{} cells x {} experiments -> {}",
                summary.rows.len(),
                experiments,
                out.display()
            );
        }
    }
    Ok(())
}
