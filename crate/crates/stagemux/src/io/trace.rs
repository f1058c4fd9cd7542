//! Detection run files: the per-alert trace as JSONL, a JSON run summary
//! carrying the template list and complexity counters, and the per-window
//! demultiplexer report as JSONL. Decoded states are one-based on the
//! wire and zero-based in memory.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stagemux_core::demux::{DemuxWindowReport, SubstreamSummary};
use stagemux_core::{ComplexityCounters, DetectionRecord, DetectionTrace};

pub const TRACE_FILE: &str = "trace.jsonl";
pub const SUMMARY_FILE: &str = "counters.json";
pub const DEMUX_FILE: &str = "demux.jsonl";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecordDoc {
    pub window_id: usize,
    pub alert_index: usize,
    pub template_id: String,
    /// One-based decoded state.
    pub state: usize,
    pub gamma: Vec<f64>,
    pub active: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountersDoc {
    pub windows: u64,
    pub forward_runs: u64,
    pub forward_symbols: u64,
    pub viterbi_runs: u64,
    pub viterbi_symbols: u64,
    pub demux_steps: u64,
}

impl From<&ComplexityCounters> for CountersDoc {
    fn from(c: &ComplexityCounters) -> Self {
        CountersDoc {
            windows: c.windows,
            forward_runs: c.forward_runs,
            forward_symbols: c.forward_symbols,
            viterbi_runs: c.viterbi_runs,
            viterbi_symbols: c.viterbi_symbols,
            demux_steps: c.demux_steps,
        }
    }
}

impl CountersDoc {
    fn into_counters(self) -> ComplexityCounters {
        ComplexityCounters {
            windows: self.windows,
            forward_runs: self.forward_runs,
            forward_symbols: self.forward_symbols,
            viterbi_runs: self.viterbi_runs,
            viterbi_symbols: self.viterbi_symbols,
            demux_steps: self.demux_steps,
        }
    }
}

/// Run summary beside the trace: the full template roster (templates
/// that emitted no records still count) and the complexity counters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummaryDoc {
    pub schema: u32,
    pub templates: Vec<String>,
    pub counters: CountersDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemuxSubstreamDoc {
    pub id: usize,
    pub len: usize,
    pub signature: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemuxWindowDoc {
    pub window_id: usize,
    pub substreams: Vec<DemuxSubstreamDoc>,
}

pub fn write_trace(dir: &Path, trace: &DetectionTrace) -> Result<()> {
    let mut out = File::create(dir.join(TRACE_FILE))?;
    for record in &trace.records {
        let doc = TraceRecordDoc {
            window_id: record.window_id,
            alert_index: record.alert_index,
            template_id: trace.template_ids[record.template].clone(),
            state: record.state + 1,
            gamma: record.gamma.clone(),
            active: record.active,
        };
        serde_json::to_writer(&mut out, &doc)?;
        out.write_all(b"\n")?;
    }

    let summary = RunSummaryDoc {
        schema: 1,
        templates: trace.template_ids.clone(),
        counters: CountersDoc::from(&trace.counters),
    };
    serde_json::to_writer_pretty(File::create(dir.join(SUMMARY_FILE))?, &summary)?;

    if !trace.demux.is_empty() {
        let mut out = File::create(dir.join(DEMUX_FILE))?;
        for report in &trace.demux {
            let doc = DemuxWindowDoc {
                window_id: report.window_id,
                substreams: report
                    .substreams
                    .iter()
                    .map(|s| DemuxSubstreamDoc {
                        id: s.id,
                        len: s.len,
                        signature: s.signature.clone(),
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &doc)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Reads a detection run back from `dir`. The demux report is optional;
/// single-stream runs never write one.
pub fn read_trace(dir: &Path) -> Result<DetectionTrace> {
    let summary: RunSummaryDoc = serde_json::from_reader(
        File::open(dir.join(SUMMARY_FILE))
            .with_context(|| format!("open {}", dir.join(SUMMARY_FILE).display()))?,
    )
    .context("parse run summary")?;
    if summary.schema != 1 {
        bail!("unsupported run summary schema {}", summary.schema);
    }

    let trace_path = dir.join(TRACE_FILE);
    let file = File::open(&trace_path).with_context(|| format!("open {}", trace_path.display()))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: TraceRecordDoc = serde_json::from_str(&line)
            .with_context(|| format!("line {line_no}: invalid trace record"))?;
        let template = summary
            .templates
            .iter()
            .position(|id| *id == doc.template_id)
            .with_context(|| {
                format!(
                    "line {line_no}: template {} missing from run summary",
                    doc.template_id
                )
            })?;
        if doc.state == 0 {
            bail!("line {line_no}: decoded state is one-based, got 0");
        }
        records.push(DetectionRecord {
            window_id: doc.window_id,
            alert_index: doc.alert_index,
            template,
            state: doc.state - 1,
            gamma: doc.gamma,
            active: doc.active,
        });
    }

    let demux_path = dir.join(DEMUX_FILE);
    let demux = if demux_path.exists() {
        read_demux(File::open(&demux_path)?)?
    } else {
        Vec::new()
    };

    Ok(DetectionTrace {
        template_ids: summary.templates,
        records,
        counters: summary.counters.into_counters(),
        demux,
    })
}

fn read_demux(reader: impl Read) -> Result<Vec<DemuxWindowReport>> {
    let mut reports = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: DemuxWindowDoc = serde_json::from_str(&line)
            .with_context(|| format!("line {}: invalid demux record", idx + 1))?;
        reports.push(DemuxWindowReport {
            window_id: doc.window_id,
            substreams: doc
                .substreams
                .into_iter()
                .map(|s| SubstreamSummary {
                    id: s.id,
                    len: s.len,
                    signature: s.signature,
                })
                .collect(),
        });
    }
    Ok(reports)
}
