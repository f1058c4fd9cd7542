//! Pipeline one: every template scores the raw window.
//!
//! Templates must be epsilon-modified so that alerts from other attacks
//! (or noise) map onto the unrelated symbol, which only state 0 emits.
//! A window that is entirely unrelated under a template therefore decodes
//! to a flat run of state 0, and the template's activity gate compares the
//! per-alert geometric mean of the window likelihood against `thr`.

use alloc::vec::Vec;

use crate::alert::{AlertStream, ObservationWindow};
use crate::counters::ComplexityCounters;
use crate::error::{Error, Result};
use crate::hmm::{forward_log_prob, viterbi_decode, HmmTemplate, Obs};
use crate::math::exp;
use crate::{DetectionRecord, DetectionTrace};

/// Inclusive upper bound for the activity threshold.
pub const THR_LIMIT: f64 = 0.5;

fn check_thr(thr: f64) -> Result<()> {
    if !(0.0..=THR_LIMIT).contains(&thr) {
        return Err(Error::ParameterOutOfRange {
            name: "thr",
            value: thr,
        });
    }
    Ok(())
}

fn map_window(tmpl: &HmmTemplate, alerts: &[crate::alert::Alert]) -> Vec<Obs> {
    let lookup = tmpl.symbol_lookup();
    alerts
        .iter()
        .map(|a| match lookup.get(a.id.as_str()) {
            Some(&s) => Obs::Sym(s),
            None => Obs::Sym(tmpl.unrelated_symbol()),
        })
        .collect()
}

/// Scores one window against every template and decodes the active ones.
///
/// Emits one record per alert for each template whose length-normalized
/// window probability reaches `thr`; templates below the gate emit
/// nothing. With `thr = 0` every template is always active.
pub fn detect_window_arch1(
    stream: &AlertStream,
    window: &ObservationWindow,
    templates: &[HmmTemplate],
    thr: f64,
    counters: &mut ComplexityCounters,
) -> Result<Vec<DetectionRecord>> {
    check_thr(thr)?;
    let alerts = window.alerts(stream);
    let mut records = Vec::new();
    if alerts.is_empty() {
        return Ok(records);
    }
    for (k, tmpl) in templates.iter().enumerate() {
        if !tmpl.is_modified() {
            return Err(Error::NotModified {
                template: alloc::string::String::from(tmpl.id()),
            });
        }
        let obs = map_window(tmpl, alerts);
        let log_prob = forward_log_prob(tmpl, &obs)?;
        counters.record_forward(obs.len());
        let per_alert = exp(log_prob / obs.len() as f64);
        if per_alert < thr {
            continue;
        }
        let post = viterbi_decode(tmpl, &obs)?;
        counters.record_viterbi(obs.len());
        for (t, (&state, gamma)) in post.path.iter().zip(post.gamma).enumerate() {
            records.push(DetectionRecord {
                window_id: window.id,
                alert_index: window.range.start + t,
                template: k,
                state,
                gamma,
                active: true,
            });
        }
    }
    Ok(records)
}

/// Tiles the stream into windows of `window_len` and runs every template
/// over each window.
pub fn run_stream_arch1(
    stream: &AlertStream,
    templates: &[HmmTemplate],
    thr: f64,
    window_len: usize,
) -> Result<DetectionTrace> {
    check_thr(thr)?;
    let mut trace = DetectionTrace {
        template_ids: templates.iter().map(|t| t.id().into()).collect(),
        ..DetectionTrace::default()
    };
    for window in stream.windows(window_len)? {
        trace.counters.windows += 1;
        let mut records =
            detect_window_arch1(stream, &window, templates, thr, &mut trace.counters)?;
        trace.records.append(&mut records);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alert::Alert;
    use crate::hmm::TrainConfig;
    use alloc::string::String;
    use alloc::vec;
    use core::net::Ipv4Addr;

    fn named_alert(ts: i64, id: &str) -> Alert {
        Alert {
            ts,
            id: String::from(id),
            src_ip: Ipv4Addr::new(10, 0, 0, 1),
            src_port: 40000,
            dst_ip: Ipv4Addr::new(10, 0, 0, 2),
            dst_port: 80,
            priority: 1,
            severity: None,
            truth_attack: None,
            truth_stage: None,
        }
    }

    /// Two-stage template over the ids "probe" and "exploit".
    fn toy_template(id: &str, vocab: [&str; 2]) -> HmmTemplate {
        let labeled = vec![(0, 0), (0, 0), (0, 0), (1, 1), (1, 1), (1, 1)];
        let cfg = TrainConfig {
            n_states: 2,
            n_symbols: 2,
            smoothing: 0.0,
        };
        let mut t = crate::hmm::train_supervised(id, &labeled, &cfg).unwrap();
        t.set_vocab(vocab.iter().map(|s| String::from(*s)).collect())
            .unwrap();
        t.apply_epsilon_modification(1e-6, 0.001).unwrap()
    }

    #[test]
    fn plain_templates_are_rejected() {
        let labeled = vec![(0, 0), (1, 1)];
        let cfg = TrainConfig {
            n_states: 2,
            n_symbols: 2,
            smoothing: 1.0,
        };
        let plain = crate::hmm::train_supervised("p", &labeled, &cfg).unwrap();
        let stream = AlertStream::new(vec![named_alert(0, "probe")]);
        let window = &stream.windows(4).unwrap()[0];
        let mut counters = ComplexityCounters::default();
        let err = detect_window_arch1(&stream, window, &[plain], 0.0, &mut counters).unwrap_err();
        assert!(matches!(err, Error::NotModified { .. }));
    }

    #[test]
    fn counters_count_one_forward_per_template_and_gated_viterbis() {
        let t1 = toy_template("atk1", ["probe", "exploit"]);
        let t2 = toy_template("atk2", ["recon", "exfil"]);
        let stream = AlertStream::new(
            (0..20)
                .map(|i| named_alert(i, if i % 2 == 0 { "probe" } else { "exploit" }))
                .collect(),
        );
        let trace = run_stream_arch1(&stream, &[t1, t2], 0.0, 5).unwrap();
        assert_eq!(trace.counters.windows, 4);
        assert_eq!(trace.counters.forward_runs, 8);
        assert_eq!(trace.counters.forward_symbols, 40);
        // thr = 0 keeps every template active, so Viterbi mirrors forward.
        assert_eq!(trace.counters.viterbi_runs, 8);
        assert_eq!(trace.counters.viterbi_symbols, 40);
        assert_eq!(trace.records.len(), 40);
    }

    #[test]
    fn gate_drops_templates_below_thr() {
        let t1 = toy_template("atk1", ["probe", "exploit"]);
        let t2 = toy_template("atk2", ["recon", "exfil"]);
        // All alerts belong to atk1's vocabulary, so atk2 sees a window of
        // unrelated symbols whose per-alert likelihood is near epsilon1.
        let stream = AlertStream::new(
            (0..8)
                .map(|i| named_alert(i, if i < 4 { "probe" } else { "exploit" }))
                .collect(),
        );
        let trace = run_stream_arch1(&stream, &[t1, t2], 0.01, 8).unwrap();
        assert_eq!(trace.counters.forward_runs, 2);
        assert_eq!(trace.counters.viterbi_runs, 1);
        assert!(trace.records.iter().all(|r| r.template == 0));
        assert_eq!(trace.records.len(), 8);
    }

    #[test]
    fn unrelated_window_decodes_to_a_flat_state_zero_run() {
        let t1 = toy_template("atk1", ["probe", "exploit"]);
        let stream = AlertStream::new((0..6).map(|i| named_alert(i, "noise-id")).collect());
        let trace = run_stream_arch1(&stream, &[t1], 0.0, 6).unwrap();
        assert_eq!(trace.records.len(), 6);
        assert!(trace.records.iter().all(|r| r.state == 0));
        // The posterior concentrates on state 0 because only it can emit
        // the unrelated symbol.
        for r in &trace.records {
            assert!(r.gamma[0] > 1.0 - 1e-9);
        }
    }

    #[test]
    fn thr_outside_range_is_rejected() {
        let stream = AlertStream::default();
        assert!(matches!(
            run_stream_arch1(&stream, &[], 0.6, 5),
            Err(Error::ParameterOutOfRange { name: "thr", .. })
        ));
        assert!(matches!(
            run_stream_arch1(&stream, &[], -0.1, 5),
            Err(Error::ParameterOutOfRange { name: "thr", .. })
        ));
    }
}
