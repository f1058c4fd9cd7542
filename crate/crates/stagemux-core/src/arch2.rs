//! Pipeline two: demultiplex each window, then match templates to
//! substreams.
//!
//! Every template scores every substream with the forward pass and claims
//! the substream with the highest length-normalized log-likelihood; only
//! the claimed substream is Viterbi-decoded under that template. The
//! templates stay unmodified because the demultiplexer, not an unrelated
//! symbol, separates concurrent attacks.

use alloc::string::String;
use alloc::vec::Vec;

use crate::alert::{Alert, AlertStream, ObservationWindow};
use crate::counters::ComplexityCounters;
use crate::demux::{Demultiplexer, DemuxWindowReport, FeatureSet, Substream};
use crate::error::{Error, Result};
use crate::hmm::{forward_log_prob, viterbi_decode, HmmTemplate, Obs};
use crate::{DetectionRecord, DetectionTrace};

fn map_substream(tmpl: &HmmTemplate, alerts: &[Alert], sub: &Substream) -> Vec<Obs> {
    let lookup = tmpl.symbol_lookup();
    sub.indices
        .iter()
        .map(|&local| match lookup.get(alerts[local].id.as_str()) {
            Some(&s) => Obs::Sym(s),
            None => Obs::Floor,
        })
        .collect()
}

/// Demultiplexes one window and decodes each template's best substream.
///
/// Returns the records plus the per-window demultiplexer summary. Several
/// templates may claim the same substream; likelihood ties resolve to the
/// lower substream id.
pub fn detect_window_arch2(
    stream: &AlertStream,
    window: &ObservationWindow,
    templates: &[HmmTemplate],
    demux: &mut Demultiplexer,
    counters: &mut ComplexityCounters,
) -> Result<(Vec<DetectionRecord>, DemuxWindowReport)> {
    let alerts = window.alerts(stream);
    let substreams = demux.demultiplex(alerts);
    counters.record_demux(alerts.len(), demux.features().len());
    let report = Demultiplexer::summarize(window.id, &substreams);

    let mut records = Vec::new();
    if substreams.is_empty() {
        return Ok((records, report));
    }
    for (k, tmpl) in templates.iter().enumerate() {
        if tmpl.is_modified() {
            return Err(Error::ModifiedTemplate {
                template: String::from(tmpl.id()),
            });
        }
        let mut best: Option<(f64, usize)> = None;
        for (slot, sub) in substreams.iter().enumerate() {
            let obs = map_substream(tmpl, alerts, sub);
            let log_prob = forward_log_prob(tmpl, &obs)?;
            counters.record_forward(obs.len());
            let score = log_prob / obs.len() as f64;
            let better = match best {
                None => true,
                Some((s, slot_idx)) => {
                    score > s || (score == s && sub.id < substreams[slot_idx].id)
                }
            };
            if better {
                best = Some((score, slot));
            }
        }
        let (_, slot) = best.expect("at least one substream");
        let sub = &substreams[slot];
        let obs = map_substream(tmpl, alerts, sub);
        let post = viterbi_decode(tmpl, &obs)?;
        counters.record_viterbi(obs.len());
        for (pos, (&state, gamma)) in post.path.iter().zip(post.gamma).enumerate() {
            records.push(DetectionRecord {
                window_id: window.id,
                alert_index: window.range.start + sub.indices[pos],
                template: k,
                state,
                gamma,
                active: true,
            });
        }
    }
    Ok((records, report))
}

/// Runs the demultiplexing pipeline over the whole stream. Correlation
/// state persists across windows, so an attack spanning several windows
/// keeps one substream id in the demux reports.
pub fn run_stream_arch2(
    stream: &AlertStream,
    templates: &[HmmTemplate],
    window_len: usize,
    features: FeatureSet,
) -> Result<DetectionTrace> {
    let mut demux = Demultiplexer::new(features)?;
    let mut trace = DetectionTrace {
        template_ids: templates.iter().map(|t| t.id().into()).collect(),
        ..DetectionTrace::default()
    };
    for window in stream.windows(window_len)? {
        trace.counters.windows += 1;
        let (mut records, report) =
            detect_window_arch2(stream, &window, templates, &mut demux, &mut trace.counters)?;
        trace.records.append(&mut records);
        trace.demux.push(report);
    }
    Ok(trace)
}
