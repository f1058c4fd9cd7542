//! Alert records, streams, symbol maps and observation windows.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::net::Ipv4Addr;
use core::ops::Range;

use crate::error::{Error, Result};

/// One IDS alert. Timestamps are microseconds; truth labels are only
/// present on synthesized or hand-labeled streams. `truth_stage` is
/// zero-based, like every state index inside this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alert {
    pub ts: i64,
    pub id: String,
    pub src_ip: Ipv4Addr,
    pub src_port: u16,
    pub dst_ip: Ipv4Addr,
    pub dst_port: u16,
    pub priority: u32,
    pub severity: Option<u32>,
    pub truth_attack: Option<String>,
    pub truth_stage: Option<usize>,
}

/// An ordered alert sequence, sorted by timestamp (stable among equals).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlertStream {
    alerts: Vec<Alert>,
}

impl AlertStream {
    pub fn new(alerts: Vec<Alert>) -> Self {
        AlertStream { alerts }
    }

    pub fn alerts(&self) -> &[Alert] {
        &self.alerts
    }

    pub fn into_alerts(self) -> Vec<Alert> {
        self.alerts
    }

    pub fn len(&self) -> usize {
        self.alerts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alerts.is_empty()
    }

    pub fn push(&mut self, alert: Alert) {
        self.alerts.push(alert);
    }

    /// Stable sort by timestamp; equal timestamps keep their input order.
    pub fn sort_by_ts(&mut self) {
        self.alerts.sort_by_key(|a| a.ts);
    }

    /// Tiles the stream into non-overlapping windows of `length` alerts.
    /// The last window may be shorter; an empty stream yields no windows.
    pub fn windows(&self, length: usize) -> Result<Vec<ObservationWindow>> {
        if length == 0 {
            return Err(Error::ZeroWindow);
        }
        let mut out = Vec::new();
        let mut start = 0;
        let mut id = 0;
        while start < self.alerts.len() {
            let end = usize::min(start + length, self.alerts.len());
            out.push(ObservationWindow {
                id,
                range: start..end,
            });
            start = end;
            id += 1;
        }
        Ok(out)
    }

    /// Fills in severities from an `alert id -> severity` table; ids
    /// without an entry get severity 1. Returns how many defaulted.
    pub fn assign_severity(&mut self, table: &BTreeMap<String, u32>) -> usize {
        let mut defaulted = 0;
        for alert in &mut self.alerts {
            match table.get(&alert.id) {
                Some(&s) => alert.severity = Some(s),
                None => {
                    alert.severity = Some(1);
                    defaulted += 1;
                }
            }
        }
        defaulted
    }
}

/// A contiguous run of `T` alerts inside a stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationWindow {
    pub id: usize,
    pub range: Range<usize>,
}

impl ObservationWindow {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn alerts<'a>(&self, stream: &'a AlertStream) -> &'a [Alert] {
        &stream.alerts()[self.range.clone()]
    }
}

/// Shared `alert id -> symbol` table used when training templates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolMap {
    map: BTreeMap<String, usize>,
}

impl SymbolMap {
    pub fn new(map: BTreeMap<String, usize>) -> Self {
        SymbolMap { map }
    }

    /// Builds a map over the distinct ids of a stream, numbering them in
    /// first-appearance order.
    pub fn derive(stream: &AlertStream) -> Self {
        let mut map = BTreeMap::new();
        let mut next = 0;
        for alert in stream.alerts() {
            if !map.contains_key(&alert.id) {
                map.insert(alert.id.clone(), next);
                next += 1;
            }
        }
        SymbolMap { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.map.get(id).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, usize)> {
        self.map.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Symbol names ordered by symbol index, for template vocabularies.
    pub fn names_by_symbol(&self) -> Vec<String> {
        let mut pairs: Vec<(usize, &String)> = self.map.iter().map(|(k, &v)| (v, k)).collect();
        pairs.sort_by_key(|&(v, _)| v);
        pairs.into_iter().map(|(_, k)| k.clone()).collect()
    }

    /// Turns a fully labeled stream into `(symbol, stage)` training pairs.
    pub fn labeled_pairs(&self, stream: &AlertStream) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(stream.len());
        for (idx, alert) in stream.alerts().iter().enumerate() {
            let symbol = self
                .lookup(&alert.id)
                .ok_or_else(|| Error::UnknownAlertId(alert.id.clone()))?;
            let stage = alert
                .truth_stage
                .ok_or(Error::MissingStageLabel { alert_index: idx })?;
            out.push((symbol, stage));
        }
        Ok(out)
    }
}
