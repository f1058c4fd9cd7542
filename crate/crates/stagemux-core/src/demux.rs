//! Feature-correlation demultiplexer: splits a window into per-attack
//! substreams by grouping alerts that share feature values.
//!
//! Correlation is transitive. With the default feature pair (source and
//! destination IP) two alerts join the same substream when they share a
//! source, share a destination, or chain through a stepping stone, one
//! alert's destination being the other's source. The union-find state
//! persists across windows so an attack spanning several windows keeps
//! one substream id.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::alert::Alert;
use crate::error::{Error, Result};

/// The alert features available for correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    Timestamp,
    AlertId,
    SrcIp,
    SrcPort,
    DstIp,
    DstPort,
    Priority,
}

impl Feature {
    pub const ALL: [Feature; 7] = [
        Feature::Timestamp,
        Feature::AlertId,
        Feature::SrcIp,
        Feature::SrcPort,
        Feature::DstIp,
        Feature::DstPort,
        Feature::Priority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Timestamp => "timestamp",
            Feature::AlertId => "id",
            Feature::SrcIp => "src_ip",
            Feature::SrcPort => "src_port",
            Feature::DstIp => "dst_ip",
            Feature::DstPort => "dst_port",
            Feature::Priority => "priority",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Feature::Timestamp => 1 << 0,
            Feature::AlertId => 1 << 1,
            Feature::SrcIp => 1 << 2,
            Feature::SrcPort => 1 << 3,
            Feature::DstIp => 1 << 4,
            Feature::DstPort => 1 << 5,
            Feature::Priority => 1 << 6,
        }
    }
}

/// A non-empty subset of [`Feature::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureSet(u8);

impl FeatureSet {
    pub const fn empty() -> Self {
        FeatureSet(0)
    }

    /// The default correlation pair: source and destination IP.
    pub fn ip_pair() -> Self {
        FeatureSet::empty()
            .with(Feature::SrcIp)
            .with(Feature::DstIp)
    }

    #[must_use]
    pub fn with(self, f: Feature) -> Self {
        FeatureSet(self.0 | f.bit())
    }

    pub fn contains(self, f: Feature) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

/// A correlated value. Both IP features share one value space so that
/// stepping-stone chains (one alert's destination is another's source)
/// correlate; the other features each keep their own space.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum EntityKey {
    Ip(u32),
    AlertId(String),
    SrcPort(u16),
    DstPort(u16),
    Priority(u32),
    Timestamp(i64),
}

impl EntityKey {
    fn display(&self) -> String {
        match self {
            EntityKey::Ip(raw) => core::net::Ipv4Addr::from_bits(*raw).to_string(),
            EntityKey::AlertId(id) => format!("id:{id}"),
            EntityKey::SrcPort(p) => format!("src_port:{p}"),
            EntityKey::DstPort(p) => format!("dst_port:{p}"),
            EntityKey::Priority(p) => format!("priority:{p}"),
            EntityKey::Timestamp(t) => format!("ts:{t}"),
        }
    }
}

fn entity_keys(alert: &Alert, features: FeatureSet, out: &mut Vec<EntityKey>) {
    out.clear();
    for f in features.features() {
        match f {
            Feature::Timestamp => out.push(EntityKey::Timestamp(alert.ts)),
            Feature::AlertId => out.push(EntityKey::AlertId(alert.id.clone())),
            Feature::SrcIp => out.push(EntityKey::Ip(alert.src_ip.to_bits())),
            Feature::SrcPort => out.push(EntityKey::SrcPort(alert.src_port)),
            Feature::DstIp => out.push(EntityKey::Ip(alert.dst_ip.to_bits())),
            Feature::DstPort => out.push(EntityKey::DstPort(alert.dst_port)),
            Feature::Priority => out.push(EntityKey::Priority(alert.priority)),
        }
    }
}

/// Union-find with path compression; roots carry the substream label.
#[derive(Debug, Clone, Default)]
struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    label: Vec<Option<usize>>,
}

impl UnionFind {
    fn make_node(&mut self) -> usize {
        let idx = self.parent.len();
        self.parent.push(idx);
        self.rank.push(0);
        self.label.push(None);
        idx
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges two components. When both already carry a substream label
    /// the smaller (older) one survives.
    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        let merged = match (self.label[ra], self.label[rb]) {
            (Some(x), Some(y)) => Some(usize::min(x, y)),
            (x, y) => x.or(y),
        };
        let (hi, lo) = if self.rank[ra] >= self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] += 1;
        }
        self.label[hi] = merged;
        self.label[lo] = None;
    }
}

/// One demultiplexed substream of a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substream {
    /// Stable substream id; attacks spanning windows keep theirs.
    pub id: usize,
    /// Ascending indices into the window the substream was cut from.
    pub indices: Vec<usize>,
    /// Sorted display strings of the correlated feature values.
    pub signature: Vec<String>,
}

/// Per-window demultiplexer summary for traces and reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemuxWindowReport {
    pub window_id: usize,
    pub substreams: Vec<SubstreamSummary>,
}

/// Size and signature of one substream within one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstreamSummary {
    pub id: usize,
    pub len: usize,
    pub signature: Vec<String>,
}

/// Streaming demultiplexer. Feed windows in order; correlation state and
/// substream ids persist across calls.
#[derive(Debug, Clone)]
pub struct Demultiplexer {
    features: FeatureSet,
    entities: BTreeMap<EntityKey, usize>,
    uf: UnionFind,
    next_id: usize,
}

impl Demultiplexer {
    pub fn new(features: FeatureSet) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyFeatureSet);
        }
        Ok(Demultiplexer {
            features,
            entities: BTreeMap::new(),
            uf: UnionFind::default(),
            next_id: 0,
        })
    }

    pub fn features(&self) -> FeatureSet {
        self.features
    }

    /// Splits one window into substreams, ordered by first alert index.
    pub fn demultiplex(&mut self, window: &[Alert]) -> Vec<Substream> {
        let mut anchors = Vec::with_capacity(window.len());
        let mut keys = Vec::new();
        for alert in window {
            entity_keys(alert, self.features, &mut keys);
            let mut anchor = None;
            for key in keys.drain(..) {
                let node = match self.entities.get(&key) {
                    Some(&n) => n,
                    None => {
                        let n = self.uf.make_node();
                        self.entities.insert(key, n);
                        n
                    }
                };
                match anchor {
                    None => anchor = Some(node),
                    Some(a) => self.uf.union(a, node),
                }
            }
            // A non-empty feature set yields at least one key per alert.
            anchors.push(anchor.expect("non-empty feature set"));
        }

        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
        for (local, &anchor) in anchors.iter().enumerate() {
            let root = self.uf.find(anchor);
            match by_root.get(&root) {
                Some(&slot) => groups[slot].1.push(local),
                None => {
                    by_root.insert(root, groups.len());
                    groups.push((root, alloc::vec![local]));
                }
            }
        }

        let mut out = Vec::with_capacity(groups.len());
        for (root, indices) in groups {
            let id = match self.uf.label[root] {
                Some(id) => id,
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.uf.label[root] = Some(id);
                    id
                }
            };
            let mut sig: BTreeSet<EntityKey> = BTreeSet::new();
            for &local in &indices {
                entity_keys(&window[local], self.features, &mut keys);
                sig.extend(keys.drain(..));
            }
            let signature = sig.iter().map(EntityKey::display).collect();
            out.push(Substream {
                id,
                indices,
                signature,
            });
        }
        out
    }

    /// Report-friendly summary of one demultiplexed window.
    pub fn summarize(window_id: usize, substreams: &[Substream]) -> DemuxWindowReport {
        DemuxWindowReport {
            window_id,
            substreams: substreams
                .iter()
                .map(|s| SubstreamSummary {
                    id: s.id,
                    len: s.indices.len(),
                    signature: s.signature.clone(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::net::Ipv4Addr;

    fn alert(src: [u8; 4], dst: [u8; 4]) -> Alert {
        Alert {
            ts: 0,
            id: String::from("x"),
            src_ip: Ipv4Addr::from(src),
            src_port: 1000,
            dst_ip: Ipv4Addr::from(dst),
            dst_port: 80,
            priority: 1,
            severity: None,
            truth_attack: None,
            truth_stage: None,
        }
    }

    #[test]
    fn shared_and_chained_ips_form_one_substream() {
        let mut d = Demultiplexer::new(FeatureSet::ip_pair()).unwrap();
        // a->b, b->c, c->d chain plus one unrelated pair.
        let window = vec![
            alert([10, 0, 0, 1], [10, 0, 0, 2]),
            alert([10, 0, 0, 2], [10, 0, 0, 3]),
            alert([10, 0, 0, 3], [10, 0, 0, 4]),
            alert([192, 168, 1, 1], [192, 168, 1, 2]),
        ];
        let subs = d.demultiplex(&window);
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].id, 0);
        assert_eq!(subs[0].indices, vec![0, 1, 2]);
        assert_eq!(subs[1].id, 1);
        assert_eq!(subs[1].indices, vec![3]);
        assert_eq!(
            subs[0].signature,
            vec!["10.0.0.1", "10.0.0.2", "10.0.0.3", "10.0.0.4"]
        );
    }

    #[test]
    fn substream_ids_persist_across_windows() {
        let mut d = Demultiplexer::new(FeatureSet::ip_pair()).unwrap();
        let w1 = vec![
            alert([10, 0, 0, 1], [10, 0, 0, 2]),
            alert([172, 16, 0, 1], [172, 16, 0, 2]),
        ];
        let subs1 = d.demultiplex(&w1);
        assert_eq!(subs1[0].id, 0);
        assert_eq!(subs1[1].id, 1);
        // Window 2 extends the first chain through a stepping stone.
        let w2 = vec![alert([10, 0, 0, 2], [10, 0, 0, 9])];
        let subs2 = d.demultiplex(&w2);
        assert_eq!(subs2.len(), 1);
        assert_eq!(subs2[0].id, 0);
    }

    #[test]
    fn merged_components_keep_the_older_id() {
        let mut d = Demultiplexer::new(FeatureSet::ip_pair()).unwrap();
        let w1 = vec![
            alert([10, 0, 0, 1], [10, 0, 0, 2]),
            alert([172, 16, 0, 1], [172, 16, 0, 2]),
        ];
        d.demultiplex(&w1);
        // This alert bridges both earlier components.
        let w2 = vec![alert([10, 0, 0, 2], [172, 16, 0, 1])];
        let subs = d.demultiplex(&w2);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].id, 0);
    }

    #[test]
    fn alert_id_feature_correlates_by_name() {
        let mut d = Demultiplexer::new(FeatureSet::empty().with(Feature::AlertId)).unwrap();
        let mut w = vec![
            alert([1, 1, 1, 1], [2, 2, 2, 2]),
            alert([3, 3, 3, 3], [4, 4, 4, 4]),
            alert([5, 5, 5, 5], [6, 6, 6, 6]),
        ];
        w[1].id = String::from("y");
        let subs = d.demultiplex(&w);
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].indices, vec![0, 2]);
        assert_eq!(subs[1].indices, vec![1]);
    }

    #[test]
    fn empty_feature_set_is_rejected_and_empty_window_yields_nothing() {
        assert_eq!(
            Demultiplexer::new(FeatureSet::empty()).unwrap_err(),
            Error::EmptyFeatureSet
        );
        let mut d = Demultiplexer::new(FeatureSet::ip_pair()).unwrap();
        assert!(d.demultiplex(&[]).is_empty());
    }
}
