//! Evaluation outputs: a versioned JSON summary plus CSV series for the
//! risk curves and the per-alert state posterior heatmap. Stage indices
//! are one-based on the wire.

use std::collections::BTreeSet;
use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use stagemux_core::metrics::EvaluationReport;
use stagemux_core::DetectionTrace;

use super::trace::CountersDoc;

pub const REPORT_FILE: &str = "report.json";
pub const RISK_FILE: &str = "risk.csv";
pub const GAMMA_FILE: &str = "gamma.csv";
pub const SWEEP_JSON_FILE: &str = "sweep.json";
pub const SWEEP_CSV_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackReportDoc {
    pub instance_id: String,
    pub template_id: String,
    pub alerts: usize,
    pub error_rate: f64,
    /// One-based stage indices.
    pub detected_stages: Vec<usize>,
    pub detectable_stages: Vec<usize>,
    pub detection_order: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskSeriesDoc {
    pub template_id: String,
    pub points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema: u32,
    pub global_error_rate: f64,
    pub scored_alerts: usize,
    pub noise_alerts: usize,
    pub counters: CountersDoc,
    pub attacks: Vec<AttackReportDoc>,
    pub risk: Vec<RiskSeriesDoc>,
}

impl ReportDoc {
    pub fn from_report(report: &EvaluationReport) -> Self {
        let one_based = |stages: &[usize]| stages.iter().map(|s| s + 1).collect::<Vec<_>>();
        ReportDoc {
            schema: 1,
            global_error_rate: report.global_error_rate,
            scored_alerts: report.scored_alerts,
            noise_alerts: report.noise_alerts,
            counters: CountersDoc::from(&report.counters),
            attacks: report
                .attacks
                .iter()
                .map(|a| AttackReportDoc {
                    instance_id: a.instance_id.clone(),
                    template_id: a.template_id.clone(),
                    alerts: a.alerts,
                    error_rate: a.error_rate,
                    detected_stages: one_based(&a.detected_stages),
                    detectable_stages: one_based(&a.detectable_stages),
                    detection_order: one_based(&a.detection_order),
                })
                .collect(),
            risk: report
                .risk
                .iter()
                .map(|r| RiskSeriesDoc {
                    template_id: r.template_id.clone(),
                    points: r.points.clone(),
                })
                .collect(),
        }
    }
}

/// One aggregated sweep cell: the grid coordinates and the error rate
/// averaged over that cell's experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRowDoc {
    pub window: usize,
    pub fdr: f64,
    pub fnr: f64,
    pub experiments: usize,
    pub mean_error_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepDoc {
    pub schema: u32,
    pub arch: String,
    pub rows: Vec<SweepRowDoc>,
}

/// Writes report.json, risk.csv (one column per template, aligned on
/// alert index) and gamma.csv (the posterior row each template produced
/// for each alert).
pub fn write_report(dir: &Path, report: &EvaluationReport, trace: &DetectionTrace) -> Result<()> {
    let doc = ReportDoc::from_report(report);
    serde_json::to_writer_pretty(File::create(dir.join(REPORT_FILE))?, &doc)
        .context("write report.json")?;
    write_risk_csv(&dir.join(RISK_FILE), report)?;
    write_gamma_csv(&dir.join(GAMMA_FILE), trace)?;
    Ok(())
}

fn write_risk_csv(path: &Path, report: &EvaluationReport) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header = vec![String::from("alert_index")];
    header.extend(report.risk.iter().map(|r| r.template_id.clone()));
    wtr.write_record(&header)?;

    let indices: BTreeSet<usize> = report
        .risk
        .iter()
        .flat_map(|r| r.points.iter().map(|&(idx, _)| idx))
        .collect();
    for idx in indices {
        let mut row = vec![idx.to_string()];
        for series in &report.risk {
            let cell = series
                .points
                .iter()
                .find(|&&(i, _)| i == idx)
                .map(|&(_, risk)| risk.to_string())
                .unwrap_or_default();
            row.push(cell);
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_gamma_csv(path: &Path, trace: &DetectionTrace) -> Result<()> {
    let n_max = trace
        .records
        .iter()
        .map(|r| r.gamma.len())
        .max()
        .unwrap_or(0);
    let mut wtr = csv::Writer::from_path(path)?;
    let mut header = vec![
        String::from("alert_index"),
        String::from("window_id"),
        String::from("template_id"),
        String::from("state"),
    ];
    header.extend((1..=n_max).map(|i| format!("gamma_{i}")));
    wtr.write_record(&header)?;

    let mut order: Vec<usize> = (0..trace.records.len()).collect();
    order.sort_by_key(|&i| {
        let r = &trace.records[i];
        (r.alert_index, r.template)
    });
    for i in order {
        let r = &trace.records[i];
        let mut row = vec![
            r.alert_index.to_string(),
            r.window_id.to_string(),
            trace.template_ids[r.template].clone(),
            (r.state + 1).to_string(),
        ];
        for k in 0..n_max {
            row.push(r.gamma.get(k).map(|g| g.to_string()).unwrap_or_default());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the aggregated sweep table as CSV and JSON.
pub fn write_sweep(dir: &Path, arch: &str, rows: &[SweepRowDoc]) -> Result<()> {
    let doc = SweepDoc {
        schema: 1,
        arch: arch.to_string(),
        rows: rows.to_vec(),
    };
    serde_json::to_writer_pretty(File::create(dir.join(SWEEP_JSON_FILE))?, &doc)
        .context("write sweep.json")?;

    let mut wtr = csv::Writer::from_path(dir.join(SWEEP_CSV_FILE))?;
    wtr.write_record(["window", "fdr", "fnr", "experiments", "mean_error_rate"])?;
    for row in rows {
        wtr.write_record(&[
            row.window.to_string(),
            row.fdr.to_string(),
            row.fnr.to_string(),
            row.experiments.to_string(),
            row.mean_error_rate.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
