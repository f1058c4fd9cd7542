//! Detection engine for interleaved multi-stage network attacks.
//!
//! Each attack type is described by a discrete left-right hidden Markov
//! model template trained on labeled alert sequences. Incoming alert
//! streams are split into fixed-size observation windows and scored
//! against every template; two pipelines are provided:
//!
//! * [`arch1`] runs every template over the raw window, relying on an
//!   epsilon modification of the template so unrelated alerts park the
//!   decoder in the first state,
//! * [`arch2`] first demultiplexes the window into per-attack substreams
//!   by correlating alert features, then matches each template to its
//!   best substream.
//!
//! The crate is `no_std` compatible (requires `alloc`); enable the
//! `libm` feature for float math on targets without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("stagemux-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod alert;
pub mod arch1;
pub mod arch2;
pub mod counters;
pub mod demux;
pub mod error;
pub mod hmm;
pub mod math;
pub mod metrics;
pub mod scenario;

pub use alert::{Alert, AlertStream, ObservationWindow, SymbolMap};
pub use arch1::{detect_window_arch1, run_stream_arch1};
pub use arch2::{detect_window_arch2, run_stream_arch2};
pub use counters::ComplexityCounters;
pub use demux::{Demultiplexer, FeatureSet, Substream};
pub use error::{Error, Result};
pub use hmm::{HmmTemplate, Obs, StatePosterior, TrainConfig};
pub use metrics::{EvalOptions, EvaluationReport};
pub use scenario::{InterleavePattern, ScenarioSpec};

/// Truth label carried by injected false-positive alerts.
pub const NOISE_ATTACK_ID: &str = "noise";

/// Detection verdict for a single alert under a single template.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    /// Zero-based index of the observation window the alert fell into.
    pub window_id: usize,
    /// Index of the alert in the full parent stream.
    pub alert_index: usize,
    /// Index into [`DetectionTrace::template_ids`].
    pub template: usize,
    /// Decoded hidden state, zero-based.
    pub state: usize,
    /// Smoothed per-state posterior for this alert, sums to one.
    pub gamma: alloc::vec::Vec<f64>,
    /// Whether the template passed the activity gate for this window.
    pub active: bool,
}

/// Output of a full detection run over a stream.
#[derive(Debug, Clone, Default)]
pub struct DetectionTrace {
    /// Template ids, indexed by [`DetectionRecord::template`].
    pub template_ids: alloc::vec::Vec<alloc::string::String>,
    /// Per-alert records in (window, template, alert) order.
    pub records: alloc::vec::Vec<DetectionRecord>,
    /// Work counters accumulated over the run.
    pub counters: ComplexityCounters,
    /// Per-window demultiplexer summaries, empty for pipelines without demux.
    pub demux: alloc::vec::Vec<demux::DemuxWindowReport>,
}
