//! Risk scoring, error rate and stage-detection accounting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::alert::AlertStream;
use crate::counters::ComplexityCounters;
use crate::error::{Error, Result};
use crate::scenario::InstanceInfo;
use crate::{DetectionTrace, NOISE_ATTACK_ID};

/// Evaluation knobs.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Whether injected noise alerts enter the global error-rate
    /// denominator (they always enter the numerator when misdecoded).
    pub count_noise: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { count_noise: true }
    }
}

/// Attack progress over time: alert index versus highest risk so far.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSeries {
    pub template_id: String,
    /// `(alert index, risk)` pairs; risk is non-decreasing in `[0, 1]`.
    pub points: Vec<(usize, f64)>,
}

/// Per-instance evaluation results. Stage indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub instance_id: String,
    pub template_id: String,
    pub alerts: usize,
    /// Percent of the instance's alerts whose decoded state missed the
    /// truth stage under the owning template.
    pub error_rate: f64,
    /// Stages with at least one correctly decoded alert, ascending.
    pub detected_stages: Vec<usize>,
    /// Stages that actually occur in the instance's truth labels.
    pub detectable_stages: Vec<usize>,
    /// Stages ordered by the alert index of their first correct decode.
    pub detection_order: Vec<usize>,
}

/// Whole-run evaluation: per-instance reports, per-template risk series
/// and the global error rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub attacks: Vec<AttackReport>,
    pub risk: Vec<RiskSeries>,
    /// Percent of scored alerts decoded to the wrong state.
    pub global_error_rate: f64,
    pub scored_alerts: usize,
    pub noise_alerts: usize,
    pub counters: ComplexityCounters,
}

/// Risk of the attack a template tracks, per alert the template decoded.
///
/// Each record contributes `sum_i gamma(i) * (i + 1) / N`, the posterior
/// expectation of the one-based stage over the stage count; the series
/// reports the running maximum so estimated progress never regresses.
pub fn attack_risk(trace: &DetectionTrace, template: usize) -> Vec<(usize, f64)> {
    let mut records: Vec<_> = trace
        .records
        .iter()
        .filter(|r| r.template == template)
        .collect();
    records.sort_by_key(|r| r.alert_index);
    let mut out = Vec::with_capacity(records.len());
    let mut peak = 0.0f64;
    for record in records {
        let n = record.gamma.len() as f64;
        let raw: f64 = record
            .gamma
            .iter()
            .enumerate()
            .map(|(i, g)| g * (i + 1) as f64)
            .sum::<f64>()
            / n;
        // Posterior rows normalize to 1 only within a few ulps; clamp so
        // the published range [0, 1] holds exactly.
        peak = peak.max(raw.min(1.0));
        out.push((record.alert_index, peak));
    }
    out
}

/// Full evaluation of a trace against the labeled corpus it came from.
///
/// Each instance is scored under its owning template only: an alert is
/// correct when that template decoded it to its truth stage, and an alert
/// the owning template never decoded counts as an implicit state 0, which
/// is only correct for stage-0 truth. Noise alerts are correct unless
/// some template decoded them past state 0. Alerts without any truth
/// label are skipped.
pub fn evaluate(
    trace: &DetectionTrace,
    stream: &AlertStream,
    instances: &[InstanceInfo],
    opts: EvalOptions,
) -> Result<EvaluationReport> {
    let template_idx: BTreeMap<&str, usize> = trace
        .template_ids
        .iter()
        .enumerate()
        .map(|(idx, id)| (id.as_str(), idx))
        .collect();
    let mut owners: BTreeMap<&str, usize> = BTreeMap::new();
    for info in instances {
        let idx = *template_idx
            .get(info.template_id.as_str())
            .ok_or_else(|| Error::UnknownTemplate(info.template_id.clone()))?;
        owners.insert(info.instance_id.as_str(), idx);
    }

    let mut decoded: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for record in &trace.records {
        decoded.insert((record.template, record.alert_index), record.state);
    }

    struct Tally {
        alerts: usize,
        wrong: usize,
        detected_first: BTreeMap<usize, usize>,
        detectable: BTreeSet<usize>,
    }
    let mut tallies: BTreeMap<&str, Tally> = instances
        .iter()
        .map(|info| {
            (
                info.instance_id.as_str(),
                Tally {
                    alerts: 0,
                    wrong: 0,
                    detected_first: BTreeMap::new(),
                    detectable: BTreeSet::new(),
                },
            )
        })
        .collect();

    let mut noise_alerts = 0usize;
    let mut noise_wrong = 0usize;
    for (idx, alert) in stream.alerts().iter().enumerate() {
        let Some(owner) = alert.truth_attack.as_deref() else {
            continue;
        };
        if owner == NOISE_ATTACK_ID {
            noise_alerts += 1;
            let flagged = trace
                .records
                .iter()
                .any(|r| r.alert_index == idx && r.state != 0);
            if flagged {
                noise_wrong += 1;
            }
            continue;
        }
        let template = *owners
            .get(owner)
            .ok_or_else(|| Error::UnmappedInstance(String::from(owner)))?;
        let stage = alert
            .truth_stage
            .ok_or(Error::MissingStageLabel { alert_index: idx })?;
        let tally = tallies.get_mut(owner).expect("owner registered");
        tally.alerts += 1;
        tally.detectable.insert(stage);
        let state = decoded.get(&(template, idx)).copied().unwrap_or(0);
        if state == stage {
            tally.detected_first.entry(stage).or_insert(idx);
        } else {
            tally.wrong += 1;
        }
    }

    let mut attacks = Vec::with_capacity(instances.len());
    let mut scored = noise_alerts;
    let mut wrong_total = noise_wrong;
    for info in instances {
        let tally = &tallies[info.instance_id.as_str()];
        scored += tally.alerts;
        wrong_total += tally.wrong;
        let mut order: Vec<(usize, usize)> = tally
            .detected_first
            .iter()
            .map(|(&stage, &first)| (first, stage))
            .collect();
        order.sort_unstable();
        attacks.push(AttackReport {
            instance_id: info.instance_id.clone(),
            template_id: info.template_id.clone(),
            alerts: tally.alerts,
            error_rate: percent(tally.wrong, tally.alerts),
            detected_stages: tally.detected_first.keys().copied().collect(),
            detectable_stages: tally.detectable.iter().copied().collect(),
            detection_order: order.into_iter().map(|(_, stage)| stage).collect(),
        });
    }
    if !opts.count_noise {
        scored -= noise_alerts;
        wrong_total -= noise_wrong;
    }

    let risk = trace
        .template_ids
        .iter()
        .enumerate()
        .map(|(idx, id)| RiskSeries {
            template_id: id.clone(),
            points: attack_risk(trace, idx),
        })
        .collect();

    Ok(EvaluationReport {
        attacks,
        risk,
        global_error_rate: percent(wrong_total, scored),
        scored_alerts: scored,
        noise_alerts,
        counters: trace.counters,
    })
}

/// Global error rate in percent; see [`evaluate`] for the scoring rules.
pub fn error_rate(
    trace: &DetectionTrace,
    stream: &AlertStream,
    instances: &[InstanceInfo],
    opts: EvalOptions,
) -> Result<f64> {
    Ok(evaluate(trace, stream, instances, opts)?.global_error_rate)
}

/// Detected and detectable stages per instance; see [`evaluate`].
pub fn detected_stages(
    trace: &DetectionTrace,
    stream: &AlertStream,
    instances: &[InstanceInfo],
) -> Result<Vec<AttackReport>> {
    Ok(evaluate(trace, stream, instances, EvalOptions::default())?.attacks)
}

fn percent(wrong: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * wrong as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::Alert;
    use crate::DetectionRecord;
    use alloc::vec;
    use core::net::Ipv4Addr;

    fn alert(owner: Option<&str>, stage: Option<usize>) -> Alert {
        Alert {
            ts: 0,
            id: String::from("x"),
            src_ip: Ipv4Addr::new(10, 0, 0, 1),
            src_port: 1,
            dst_ip: Ipv4Addr::new(10, 0, 0, 2),
            dst_port: 2,
            priority: 1,
            severity: None,
            truth_attack: owner.map(String::from),
            truth_stage: stage,
        }
    }

    fn record(
        alert_index: usize,
        template: usize,
        state: usize,
        gamma: Vec<f64>,
    ) -> DetectionRecord {
        DetectionRecord {
            window_id: 0,
            alert_index,
            template,
            state,
            gamma,
            active: true,
        }
    }

    fn instance(id: &str, template: &str) -> InstanceInfo {
        InstanceInfo {
            instance_id: String::from(id),
            template_id: String::from(template),
        }
    }

    #[test]
    fn risk_series_is_the_running_max_of_expected_stage() {
        let trace = DetectionTrace {
            template_ids: vec![String::from("atk")],
            records: vec![
                record(0, 0, 0, vec![1.0, 0.0]),
                record(1, 0, 0, vec![0.5, 0.5]),
                record(2, 0, 1, vec![0.2, 0.8]),
                record(3, 0, 0, vec![0.6, 0.4]),
            ],
            counters: ComplexityCounters::default(),
            demux: Vec::new(),
        };
        let series = attack_risk(&trace, 0);
        let expect = [(0, 0.5), (1, 0.75), (2, 0.9), (3, 0.9)];
        assert_eq!(series.len(), 4);
        for ((idx, risk), (want_idx, want)) in series.iter().zip(expect) {
            assert_eq!(*idx, want_idx);
            assert!((risk - want).abs() < 1e-12);
        }
    }

    #[test]
    fn error_rate_counts_misdecodes_and_noise_flags() {
        // Instance a#0: truth stages 0 0 1 1, decoded 0 1 1 1 (one wrong).
        // One noise alert decoded to state 1 by the other template.
        let stream = AlertStream::new(vec![
            alert(Some("a#0"), Some(0)),
            alert(Some("a#0"), Some(0)),
            alert(Some("a#0"), Some(1)),
            alert(Some("a#0"), Some(1)),
            alert(Some(NOISE_ATTACK_ID), None),
        ]);
        let trace = DetectionTrace {
            template_ids: vec![String::from("atk"), String::from("other")],
            records: vec![
                record(0, 0, 0, vec![1.0, 0.0]),
                record(1, 0, 1, vec![0.0, 1.0]),
                record(2, 0, 1, vec![0.0, 1.0]),
                record(3, 0, 1, vec![0.0, 1.0]),
                record(4, 1, 1, vec![0.0, 1.0]),
            ],
            counters: ComplexityCounters::default(),
            demux: Vec::new(),
        };
        let instances = [instance("a#0", "atk")];
        let report = evaluate(&trace, &stream, &instances, EvalOptions::default()).unwrap();
        assert_eq!(report.scored_alerts, 5);
        assert_eq!(report.noise_alerts, 1);
        assert!((report.global_error_rate - 40.0).abs() < 1e-12);
        assert!((report.attacks[0].error_rate - 25.0).abs() < 1e-12);

        let no_noise = evaluate(
            &trace,
            &stream,
            &instances,
            EvalOptions { count_noise: false },
        )
        .unwrap();
        assert!((no_noise.global_error_rate - 25.0).abs() < 1e-12);
        assert_eq!(no_noise.scored_alerts, 4);
    }

    #[test]
    fn missing_records_default_to_state_zero() {
        let stream = AlertStream::new(vec![
            alert(Some("a#0"), Some(0)),
            alert(Some("a#0"), Some(1)),
        ]);
        let trace = DetectionTrace {
            template_ids: vec![String::from("atk")],
            records: Vec::new(),
            counters: ComplexityCounters::default(),
            demux: Vec::new(),
        };
        let instances = [instance("a#0", "atk")];
        let report = evaluate(&trace, &stream, &instances, EvalOptions::default()).unwrap();
        // Stage 0 truth matches the implicit state 0; stage 1 does not.
        assert!((report.global_error_rate - 50.0).abs() < 1e-12);
        assert_eq!(report.attacks[0].detected_stages, vec![0]);
    }

    #[test]
    fn stage_detection_reports_detectable_and_order() {
        let stream = AlertStream::new(vec![
            alert(Some("a#0"), Some(1)),
            alert(Some("a#0"), Some(0)),
            alert(Some("a#0"), Some(2)),
        ]);
        let trace = DetectionTrace {
            template_ids: vec![String::from("atk")],
            records: vec![
                record(0, 0, 1, vec![0.0, 1.0, 0.0]),
                record(1, 0, 0, vec![1.0, 0.0, 0.0]),
                record(2, 0, 1, vec![0.0, 1.0, 0.0]),
            ],
            counters: ComplexityCounters::default(),
            demux: Vec::new(),
        };
        let instances = [instance("a#0", "atk")];
        let reports = detected_stages(&trace, &stream, &instances).unwrap();
        assert_eq!(reports[0].detectable_stages, vec![0, 1, 2]);
        assert_eq!(reports[0].detected_stages, vec![0, 1]);
        // Stage 1 was detected at alert 0, stage 0 at alert 1.
        assert_eq!(reports[0].detection_order, vec![1, 0]);
    }

    #[test]
    fn unmapped_instances_and_unknown_templates_error() {
        let stream = AlertStream::new(vec![alert(Some("mystery#0"), Some(0))]);
        let trace = DetectionTrace {
            template_ids: vec![String::from("atk")],
            records: Vec::new(),
            counters: ComplexityCounters::default(),
            demux: Vec::new(),
        };
        let err = evaluate(&trace, &stream, &[], EvalOptions::default()).unwrap_err();
        assert_eq!(err, Error::UnmappedInstance(String::from("mystery#0")));

        let err = evaluate(
            &trace,
            &stream,
            &[instance("mystery#0", "ghost")],
            EvalOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::UnknownTemplate(String::from("ghost")));
    }
}
