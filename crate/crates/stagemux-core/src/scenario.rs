//! Synthetic corpus generation: sampled attack instances, interleaving
//! patterns, false-positive injection and false-negative elimination.
//!
//! All randomness flows through one seeded generator, so a scenario spec
//! reproduces its corpus exactly.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::net::Ipv4Addr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::alert::{Alert, AlertStream};
use crate::error::{Error, Result};
use crate::hmm::{generate_sequence, HmmTemplate};
use crate::NOISE_ATTACK_ID;

/// Base timestamp (microseconds) for rewritten corpora.
const TS_BASE: i64 = 1_000_000;
/// Spacing between consecutive alerts after a rewrite.
const TS_STEP: i64 = 1_000;

/// How the per-attack streams merge into one corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterleavePattern {
    /// Later attacks run start-to-finish inside the first attack's span.
    SequentialEmbed,
    /// Attacks overlap, each starting at a staggered offset.
    Staggered,
    /// Whole stages of later attacks embed between stages of the first.
    StageEmbed,
    /// Fixed-size blocks taken round-robin; block 1 is maximal interleave.
    BlockSystematic { block: usize },
    /// Seeded random draws weighted by remaining length, in blocks.
    Random { block: usize },
}

/// One attack entry of a scenario: a template to sample from or a fixed
/// labeled fixture to copy, how many instances, and the address pool.
#[derive(Debug, Clone)]
pub struct AttackSpec {
    pub source: AttackSource,
    pub instances: usize,
    /// Alerts per sampled instance; ignored for fixtures.
    pub length: usize,
    /// Flat address pool chunked across instances; empty selects
    /// auto-assigned disjoint 10.x.y.0/24 pools.
    pub ip_pool: Vec<Ipv4Addr>,
}

#[derive(Debug, Clone)]
pub enum AttackSource {
    Template(HmmTemplate),
    /// A pre-labeled single-attack stream; instances get their IPs
    /// remapped so the demultiplexer can tell them apart.
    Fixture {
        template_id: String,
        stream: AlertStream,
    },
}

impl AttackSource {
    pub fn template_id(&self) -> &str {
        match self {
            AttackSource::Template(t) => t.id(),
            AttackSource::Fixture { template_id, .. } => template_id,
        }
    }
}

/// Full recipe for one synthetic corpus.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub attacks: Vec<AttackSpec>,
    pub pattern: InterleavePattern,
    /// False discovery rate: injected noise / (noise + true alerts).
    pub fdr: f64,
    /// Fraction of true alerts removed after injection.
    pub fnr: f64,
    pub seed: u64,
}

/// Which template generated which interleaved instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceInfo {
    pub instance_id: String,
    pub template_id: String,
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&value) {
        return Err(Error::RateOutOfRange { name, value });
    }
    Ok(())
}

fn restamp(stream: &mut AlertStream) {
    let alerts = core::mem::take(stream);
    let mut rewritten = Vec::with_capacity(alerts.len());
    for (idx, mut alert) in alerts.into_alerts().into_iter().enumerate() {
        alert.ts = TS_BASE + idx as i64 * TS_STEP;
        rewritten.push(alert);
    }
    *stream = AlertStream::new(rewritten);
}

/// Samples one attack instance from a template.
///
/// The instance follows a stepping-stone chain through the pool: stage
/// `s` alerts flow from `pool[s]` to `pool[s + 1]`, so the whole instance
/// correlates into one substream while staying disjoint from instances
/// on other pools. Truth labels carry the instance id and the hidden
/// stage of every alert; severity is the one-based stage.
pub fn synthesize_attack<R: Rng + ?Sized>(
    template: &HmmTemplate,
    length: usize,
    instance_id: &str,
    ip_pool: &[Ipv4Addr],
    rng: &mut R,
) -> Result<AlertStream> {
    if template.is_modified() {
        return Err(Error::ModifiedTemplate {
            template: String::from(template.id()),
        });
    }
    let needed = template.n_states() + 1;
    if ip_pool.len() < needed {
        return Err(Error::InsufficientIpPool {
            needed,
            available: ip_pool.len(),
        });
    }
    let (symbols, states) = generate_sequence(template, length, rng);
    let vocab = template.vocab();
    let mut alerts = Vec::with_capacity(length);
    for (step, (&symbol, &stage)) in symbols.iter().zip(&states).enumerate() {
        let id = vocab
            .get(symbol)
            .cloned()
            .unwrap_or_else(|| format!("sym{symbol}"));
        alerts.push(Alert {
            ts: step as i64 * TS_STEP,
            id,
            src_ip: ip_pool[stage],
            src_port: 33000 + stage as u16,
            dst_ip: ip_pool[stage + 1],
            dst_port: 80,
            priority: 1,
            severity: Some(stage as u32 + 1),
            truth_attack: Some(String::from(instance_id)),
            truth_stage: Some(stage),
        });
    }
    Ok(AlertStream::new(alerts))
}

/// Rewrites addresses consistently: the distinct IPs of the stream map
/// onto the pool in first-appearance order, preserving the correlation
/// topology while moving the attack to fresh hosts.
pub fn remap_ips(stream: &mut AlertStream, pool: &[Ipv4Addr]) -> Result<()> {
    let mut mapping: Vec<(Ipv4Addr, Ipv4Addr)> = Vec::new();
    let translate = |ip: Ipv4Addr, mapping: &mut Vec<(Ipv4Addr, Ipv4Addr)>| -> Result<Ipv4Addr> {
        if let Some(&(_, to)) = mapping.iter().find(|&&(from, _)| from == ip) {
            return Ok(to);
        }
        let next = mapping.len();
        let to = *pool.get(next).ok_or(Error::InsufficientIpPool {
            needed: next + 1,
            available: pool.len(),
        })?;
        mapping.push((ip, to));
        Ok(to)
    };
    let alerts = core::mem::take(stream).into_alerts();
    let mut rewritten = Vec::with_capacity(alerts.len());
    for mut alert in alerts {
        alert.src_ip = translate(alert.src_ip, &mut mapping)?;
        alert.dst_ip = translate(alert.dst_ip, &mut mapping)?;
        rewritten.push(alert);
    }
    *stream = AlertStream::new(rewritten);
    Ok(())
}

/// Merges per-attack streams into one corpus following the pattern, then
/// rewrites timestamps to a uniform increasing grid. Every input stream
/// survives as a subsequence of the output.
pub fn interleave<R: Rng + ?Sized>(
    streams: Vec<AlertStream>,
    pattern: &InterleavePattern,
    rng: &mut R,
) -> Result<AlertStream> {
    if streams.is_empty() {
        return Err(Error::NoStreams);
    }
    let order = merge_order(&streams, pattern, rng)?;
    let mut iters: Vec<_> = streams
        .into_iter()
        .map(|s| s.into_alerts().into_iter())
        .collect();
    let mut merged = Vec::with_capacity(order.len());
    for stream_idx in order {
        merged.push(iters[stream_idx].next().expect("order covers each stream"));
    }
    let mut out = AlertStream::new(merged);
    restamp(&mut out);
    Ok(out)
}

/// Computes the sequence of source-stream picks for the merge.
fn merge_order<R: Rng + ?Sized>(
    streams: &[AlertStream],
    pattern: &InterleavePattern,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let lens: Vec<usize> = streams.iter().map(AlertStream::len).collect();
    let total: usize = lens.iter().sum();
    let n = streams.len();
    let mut order = Vec::with_capacity(total);
    match pattern {
        InterleavePattern::SequentialEmbed => {
            // Streams 1.. sit whole at evenly spaced cuts of stream 0.
            let base = lens[0];
            let mut consumed = 0;
            for (i, &len) in lens.iter().enumerate().skip(1) {
                let cut = base * i / n;
                order.extend(core::iter::repeat_n(0, cut - consumed));
                order.extend(core::iter::repeat_n(i, len));
                consumed = cut;
            }
            order.extend(core::iter::repeat_n(0, base - consumed));
        }
        InterleavePattern::Staggered => {
            let max_len = lens.iter().copied().max().unwrap_or(0);
            let stagger = usize::max(1, max_len / (2 * usize::max(1, n - 1)));
            let mut slots: Vec<(usize, usize)> = Vec::with_capacity(total);
            for (i, &len) in lens.iter().enumerate() {
                for j in 0..len {
                    slots.push((i * stagger + j, i));
                }
            }
            slots.sort();
            order.extend(slots.into_iter().map(|(_, i)| i));
        }
        InterleavePattern::StageEmbed => {
            // Whole truth-stage segments of streams 1.. embed at evenly
            // spaced cuts of stream 0.
            let mut segments: Vec<(usize, usize)> = Vec::new();
            for (i, stream) in streams.iter().enumerate().skip(1) {
                let alerts = stream.alerts();
                let mut start = 0;
                for idx in 1..=alerts.len() {
                    if idx == alerts.len() || alerts[idx].truth_stage != alerts[start].truth_stage {
                        segments.push((i, idx - start));
                        start = idx;
                    }
                }
            }
            let base = lens[0];
            let groups = segments.len();
            let mut consumed = 0;
            for (g, (i, seg_len)) in segments.into_iter().enumerate() {
                let cut = base * (g + 1) / (groups + 1);
                order.extend(core::iter::repeat_n(0, cut - consumed));
                order.extend(core::iter::repeat_n(i, seg_len));
                consumed = cut;
            }
            order.extend(core::iter::repeat_n(0, base - consumed));
        }
        InterleavePattern::BlockSystematic { block } => {
            if *block == 0 {
                return Err(Error::ParameterOutOfRange {
                    name: "block",
                    value: 0.0,
                });
            }
            let mut remaining = lens.clone();
            while remaining.iter().any(|&r| r > 0) {
                for (i, rem) in remaining.iter_mut().enumerate() {
                    let take = usize::min(*block, *rem);
                    order.extend(core::iter::repeat_n(i, take));
                    *rem -= take;
                }
            }
        }
        InterleavePattern::Random { block } => {
            if *block == 0 {
                return Err(Error::ParameterOutOfRange {
                    name: "block",
                    value: 0.0,
                });
            }
            let mut remaining = lens.clone();
            let mut left = total;
            while left > 0 {
                let mut pick = rng.gen_range(0..left);
                let mut chosen = 0;
                for (i, &rem) in remaining.iter().enumerate() {
                    if pick < rem {
                        chosen = i;
                        break;
                    }
                    pick -= rem;
                }
                let take = usize::min(*block, remaining[chosen]);
                order.extend(core::iter::repeat_n(chosen, take));
                remaining[chosen] -= take;
                left -= take;
            }
        }
    }
    debug_assert_eq!(order.len(), total);
    Ok(order)
}

/// Inserts noise alerts at uniformly random positions until they make up
/// `fdr` of the corpus. Noise symbols draw uniformly from `symbol_pool`
/// and noise endpoints draw from the addresses already in the stream, so
/// some noise lands inside attack substreams. Returns the injected count.
pub fn inject_false_positives<R: Rng + ?Sized>(
    stream: &mut AlertStream,
    fdr: f64,
    symbol_pool: &[String],
    rng: &mut R,
) -> Result<usize> {
    check_rate("fdr", fdr)?;
    let n_tp = stream.len();
    let n_fp = crate::math::round(fdr * n_tp as f64 / (1.0 - fdr)) as usize;
    if n_fp == 0 {
        return Ok(0);
    }
    if symbol_pool.is_empty() {
        return Err(Error::BadDimensions(String::from(
            "false-positive injection needs a non-empty symbol pool",
        )));
    }
    let mut hosts: Vec<Ipv4Addr> = Vec::new();
    for alert in stream.alerts() {
        if !hosts.contains(&alert.src_ip) {
            hosts.push(alert.src_ip);
        }
        if !hosts.contains(&alert.dst_ip) {
            hosts.push(alert.dst_ip);
        }
    }
    if hosts.is_empty() {
        hosts.push(Ipv4Addr::new(198, 51, 100, 1));
    }

    let total = n_tp + n_fp;
    let mut slots = rand::seq::index::sample(rng, total, n_fp).into_vec();
    slots.sort_unstable();
    let mut is_noise = alloc::vec![false; total];
    for slot in slots {
        is_noise[slot] = true;
    }

    let mut truth = core::mem::take(stream).into_alerts().into_iter();
    let mut merged = Vec::with_capacity(total);
    for noise_here in is_noise {
        if noise_here {
            let id = symbol_pool[rng.gen_range(0..symbol_pool.len())].clone();
            let src_ip = hosts[rng.gen_range(0..hosts.len())];
            let dst_ip = hosts[rng.gen_range(0..hosts.len())];
            merged.push(Alert {
                ts: 0,
                id,
                src_ip,
                src_port: 40000,
                dst_ip,
                dst_port: 80,
                priority: 1,
                severity: Some(1),
                truth_attack: Some(String::from(NOISE_ATTACK_ID)),
                truth_stage: None,
            });
        } else {
            merged.push(truth.next().expect("slot count matches alert count"));
        }
    }
    *stream = AlertStream::new(merged);
    restamp(stream);
    Ok(n_fp)
}

/// Removes `floor(fnr * true_alerts)` uniformly chosen true alerts.
/// Noise alerts are never removed; survivor order is preserved.
pub fn eliminate_false_negatives<R: Rng + ?Sized>(
    stream: &mut AlertStream,
    fnr: f64,
    rng: &mut R,
) -> Result<usize> {
    check_rate("fnr", fnr)?;
    let truth_positions: Vec<usize> = stream
        .alerts()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.truth_attack.as_deref() != Some(NOISE_ATTACK_ID))
        .map(|(idx, _)| idx)
        .collect();
    // Floor with a tiny slack so exact products like 0.3 * 1000 do not
    // land one short of the intended count.
    let n_out = (fnr * truth_positions.len() as f64 + 1e-9) as usize;
    if n_out == 0 {
        return Ok(0);
    }
    let picks = rand::seq::index::sample(rng, truth_positions.len(), n_out).into_vec();
    let mut drop = alloc::vec![false; stream.len()];
    for pick in picks {
        drop[truth_positions[pick]] = true;
    }
    let alerts = core::mem::take(stream).into_alerts();
    let mut kept = Vec::with_capacity(alerts.len() - n_out);
    for (idx, alert) in alerts.into_iter().enumerate() {
        if !drop[idx] {
            kept.push(alert);
        }
    }
    *stream = AlertStream::new(kept);
    restamp(stream);
    Ok(n_out)
}

/// Distinct alert ids every attack in the scenario can produce; noise
/// symbols draw from this pool so some noise looks related.
pub fn scenario_symbol_pool(spec: &ScenarioSpec) -> Vec<String> {
    let mut pool: BTreeSet<String> = BTreeSet::new();
    for attack in &spec.attacks {
        match &attack.source {
            AttackSource::Template(t) => {
                if t.vocab().is_empty() {
                    pool.extend((0..t.n_symbols()).map(|s| format!("sym{s}")));
                } else {
                    pool.extend(t.vocab().iter().cloned());
                }
            }
            AttackSource::Fixture { stream, .. } => {
                pool.extend(stream.alerts().iter().map(|a| a.id.clone()));
            }
        }
    }
    pool.into_iter().collect()
}

fn instance_pool(attack: &AttackSpec, attack_idx: usize, instance: usize) -> Result<Vec<Ipv4Addr>> {
    let needed = match &attack.source {
        AttackSource::Template(t) => t.n_states() + 1,
        AttackSource::Fixture { stream, .. } => {
            let mut distinct: Vec<Ipv4Addr> = Vec::new();
            for a in stream.alerts() {
                if !distinct.contains(&a.src_ip) {
                    distinct.push(a.src_ip);
                }
                if !distinct.contains(&a.dst_ip) {
                    distinct.push(a.dst_ip);
                }
            }
            distinct.len()
        }
    };
    if attack.ip_pool.is_empty() {
        // Disjoint /24-style pools per (attack, instance).
        let a = (attack_idx % 200) as u8 + 1;
        let b = (instance % 250) as u8;
        return Ok((0..needed)
            .map(|h| Ipv4Addr::new(10, a, b, (h % 250) as u8 + 1))
            .collect());
    }
    let start = instance * needed;
    if attack.ip_pool.len() < start + needed {
        return Err(Error::InsufficientIpPool {
            needed: start + needed,
            available: attack.ip_pool.len(),
        });
    }
    Ok(attack.ip_pool[start..start + needed].to_vec())
}

/// Builds the full corpus for a scenario: sample or copy every instance,
/// interleave, inject noise, eliminate false negatives. Returns the
/// corpus and the instance-to-template mapping the evaluator needs.
pub fn synthesize_corpus(spec: &ScenarioSpec) -> Result<(AlertStream, Vec<InstanceInfo>)> {
    if spec.attacks.is_empty() {
        return Err(Error::NoStreams);
    }
    check_rate("fdr", spec.fdr)?;
    check_rate("fnr", spec.fnr)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut streams = Vec::new();
    let mut infos = Vec::new();
    for (k, attack) in spec.attacks.iter().enumerate() {
        for m in 0..attack.instances {
            let instance_id = format!("{}#{m}", attack.source.template_id());
            let pool = instance_pool(attack, k, m)?;
            let stream = match &attack.source {
                AttackSource::Template(t) => {
                    synthesize_attack(t, attack.length, &instance_id, &pool, &mut rng)?
                }
                AttackSource::Fixture { stream, .. } => {
                    let mut copy = stream.clone();
                    remap_ips(&mut copy, &pool)?;
                    let relabeled = copy
                        .into_alerts()
                        .into_iter()
                        .map(|mut a| {
                            a.truth_attack = Some(instance_id.clone());
                            a
                        })
                        .collect();
                    AlertStream::new(relabeled)
                }
            };
            infos.push(InstanceInfo {
                instance_id,
                template_id: attack.source.template_id().to_string(),
            });
            streams.push(stream);
        }
    }
    let mut corpus = interleave(streams, &spec.pattern, &mut rng)?;
    let pool = scenario_symbol_pool(spec);
    inject_false_positives(&mut corpus, spec.fdr, &pool, &mut rng)?;
    eliminate_false_negatives(&mut corpus, spec.fnr, &mut rng)?;
    Ok((corpus, infos))
}

/// Draws independent sub-seeds from a base seed, for experiment sweeps.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut rng = ChaCha12Rng::seed_from_u64(base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::TrainConfig;
    use alloc::vec;

    fn template(id: &str, names: [&str; 4]) -> HmmTemplate {
        let labeled = vec![
            (0, 0),
            (1, 0),
            (0, 0),
            (2, 1),
            (2, 1),
            (3, 1),
            (3, 1),
            (3, 1),
        ];
        let cfg = TrainConfig {
            n_states: 2,
            n_symbols: 4,
            smoothing: 0.0,
        };
        let mut t = crate::hmm::train_supervised(id, &labeled, &cfg).unwrap();
        t.set_vocab(names.iter().map(|s| String::from(*s)).collect())
            .unwrap();
        t
    }

    fn ids_and_stages(stream: &AlertStream, instance: &str) -> Vec<(String, Option<usize>)> {
        stream
            .alerts()
            .iter()
            .filter(|a| a.truth_attack.as_deref() == Some(instance))
            .map(|a| (a.id.clone(), a.truth_stage))
            .collect()
    }

    #[test]
    fn synthesized_attack_is_labeled_and_chains_hosts() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let pool = vec![
            Ipv4Addr::new(10, 1, 0, 1),
            Ipv4Addr::new(10, 1, 0, 2),
            Ipv4Addr::new(10, 1, 0, 3),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let s = synthesize_attack(&t, 50, "atk#0", &pool, &mut rng).unwrap();
        assert_eq!(s.len(), 50);
        for a in s.alerts() {
            let stage = a.truth_stage.unwrap();
            assert_eq!(a.src_ip, pool[stage]);
            assert_eq!(a.dst_ip, pool[stage + 1]);
            assert_eq!(a.truth_attack.as_deref(), Some("atk#0"));
            assert_eq!(a.severity, Some(stage as u32 + 1));
        }
        // Too small a pool is an error.
        let err = synthesize_attack(&t, 10, "x", &pool[..2], &mut rng).unwrap_err();
        assert_eq!(
            err,
            Error::InsufficientIpPool {
                needed: 3,
                available: 2
            }
        );
    }

    #[test]
    fn block_one_alternates_two_equal_streams() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let pool1 = vec![
            Ipv4Addr::new(10, 1, 0, 1),
            Ipv4Addr::new(10, 1, 0, 2),
            Ipv4Addr::new(10, 1, 0, 3),
        ];
        let pool2 = vec![
            Ipv4Addr::new(10, 2, 0, 1),
            Ipv4Addr::new(10, 2, 0, 2),
            Ipv4Addr::new(10, 2, 0, 3),
        ];
        let s1 = synthesize_attack(&t, 6, "x#0", &pool1, &mut rng).unwrap();
        let s2 = synthesize_attack(&t, 6, "y#0", &pool2, &mut rng).unwrap();
        let merged = interleave(
            vec![s1, s2],
            &InterleavePattern::BlockSystematic { block: 1 },
            &mut rng,
        )
        .unwrap();
        let owners: Vec<&str> = merged
            .alerts()
            .iter()
            .map(|a| a.truth_attack.as_deref().unwrap())
            .collect();
        assert_eq!(
            owners,
            vec![
                "x#0", "y#0", "x#0", "y#0", "x#0", "y#0", "x#0", "y#0", "x#0", "y#0", "x#0", "y#0"
            ]
        );
        // Timestamps ascend uniformly after the rewrite.
        let ts: Vec<i64> = merged.alerts().iter().map(|a| a.ts).collect();
        for w in ts.windows(2) {
            assert_eq!(w[1] - w[0], 1000);
        }
    }

    #[test]
    fn every_pattern_preserves_per_instance_order() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let patterns = [
            InterleavePattern::SequentialEmbed,
            InterleavePattern::Staggered,
            InterleavePattern::StageEmbed,
            InterleavePattern::BlockSystematic { block: 3 },
            InterleavePattern::Random { block: 2 },
        ];
        for pattern in patterns {
            let mut rng = ChaCha12Rng::seed_from_u64(11);
            let pool1 = vec![
                Ipv4Addr::new(10, 1, 0, 1),
                Ipv4Addr::new(10, 1, 0, 2),
                Ipv4Addr::new(10, 1, 0, 3),
            ];
            let pool2 = vec![
                Ipv4Addr::new(10, 2, 0, 1),
                Ipv4Addr::new(10, 2, 0, 2),
                Ipv4Addr::new(10, 2, 0, 3),
            ];
            let s1 = synthesize_attack(&t, 40, "x#0", &pool1, &mut rng).unwrap();
            let s2 = synthesize_attack(&t, 25, "y#0", &pool2, &mut rng).unwrap();
            let before1 = ids_and_stages(&s1, "x#0");
            let before2 = ids_and_stages(&s2, "y#0");
            let merged = interleave(vec![s1, s2], &pattern, &mut rng).unwrap();
            assert_eq!(merged.len(), 65, "{pattern:?}");
            assert_eq!(ids_and_stages(&merged, "x#0"), before1, "{pattern:?}");
            assert_eq!(ids_and_stages(&merged, "y#0"), before2, "{pattern:?}");
        }
    }

    #[test]
    fn sequential_embed_nests_the_second_attack() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let pool = vec![
            Ipv4Addr::new(10, 1, 0, 1),
            Ipv4Addr::new(10, 1, 0, 2),
            Ipv4Addr::new(10, 1, 0, 3),
        ];
        let s1 = synthesize_attack(&t, 30, "x#0", &pool, &mut rng).unwrap();
        let s2 = synthesize_attack(&t, 10, "y#0", &pool, &mut rng).unwrap();
        let merged =
            interleave(vec![s1, s2], &InterleavePattern::SequentialEmbed, &mut rng).unwrap();
        let owners: Vec<&str> = merged
            .alerts()
            .iter()
            .map(|a| a.truth_attack.as_deref().unwrap())
            .collect();
        // First half of x, then all of y, then the rest of x.
        assert!(owners[..15].iter().all(|&o| o == "x#0"));
        assert!(owners[15..25].iter().all(|&o| o == "y#0"));
        assert!(owners[25..].iter().all(|&o| o == "x#0"));
    }

    #[test]
    fn false_positive_counts_match_the_rate() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let pool = vec![
            Ipv4Addr::new(10, 1, 0, 1),
            Ipv4Addr::new(10, 1, 0, 2),
            Ipv4Addr::new(10, 1, 0, 3),
        ];
        let mut s = synthesize_attack(&t, 1000, "x#0", &pool, &mut rng).unwrap();
        let names = vec![String::from("a"), String::from("zz")];
        let before = ids_and_stages(&s, "x#0");
        let injected = inject_false_positives(&mut s, 0.5, &names, &mut rng).unwrap();
        assert_eq!(injected, 1000);
        assert_eq!(s.len(), 2000);
        let noise = s
            .alerts()
            .iter()
            .filter(|a| a.truth_attack.as_deref() == Some(NOISE_ATTACK_ID))
            .count();
        assert_eq!(noise, 1000);
        // True alerts keep their relative order.
        assert_eq!(ids_and_stages(&s, "x#0"), before);

        // fdr 0.2 on 1000 true alerts means 250 injected.
        let mut s = synthesize_attack(&t, 1000, "x#0", &pool, &mut rng).unwrap();
        let injected = inject_false_positives(&mut s, 0.2, &names, &mut rng).unwrap();
        assert_eq!(injected, 250);
        // fdr 0 is a no-op.
        let mut s2 = s.clone();
        assert_eq!(
            inject_false_positives(&mut s2, 0.0, &names, &mut rng).unwrap(),
            0
        );
        assert_eq!(s2, s);
    }

    #[test]
    fn false_negative_elimination_spares_noise() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let pool = vec![
            Ipv4Addr::new(10, 1, 0, 1),
            Ipv4Addr::new(10, 1, 0, 2),
            Ipv4Addr::new(10, 1, 0, 3),
        ];
        let mut s = synthesize_attack(&t, 500, "x#0", &pool, &mut rng).unwrap();
        let names = vec![String::from("zz")];
        inject_false_positives(&mut s, 0.2, &names, &mut rng).unwrap();
        let noise_before = s.len() - 500;
        let removed = eliminate_false_negatives(&mut s, 0.1, &mut rng).unwrap();
        assert_eq!(removed, 50);
        let noise_after = s
            .alerts()
            .iter()
            .filter(|a| a.truth_attack.as_deref() == Some(NOISE_ATTACK_ID))
            .count();
        assert_eq!(noise_after, noise_before);
        assert_eq!(s.len(), 500 - 50 + noise_before);
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let spec = ScenarioSpec {
            attacks: vec![AttackSpec {
                source: AttackSource::Template(t),
                instances: 2,
                length: 80,
                ip_pool: Vec::new(),
            }],
            pattern: InterleavePattern::Random { block: 4 },
            fdr: 0.25,
            fnr: 0.1,
            seed: 99,
        };
        let (c1, i1) = synthesize_corpus(&spec).unwrap();
        let (c2, i2) = synthesize_corpus(&spec).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(i1, i2);
        assert_eq!(i1.len(), 2);
        assert_eq!(i1[0].instance_id, "atk#0");
        assert_eq!(i1[1].instance_id, "atk#1");
        // Different seeds change the corpus.
        let spec2 = ScenarioSpec { seed: 100, ..spec };
        let (c3, _) = synthesize_corpus(&spec2).unwrap();
        assert_ne!(c1, c3);
    }

    #[test]
    fn instances_get_disjoint_auto_pools() {
        let t = template("atk", ["a", "b", "c", "d"]);
        let spec = ScenarioSpec {
            attacks: vec![AttackSpec {
                source: AttackSource::Template(t),
                instances: 2,
                length: 40,
                ip_pool: Vec::new(),
            }],
            pattern: InterleavePattern::BlockSystematic { block: 1 },
            fdr: 0.0,
            fnr: 0.0,
            seed: 1,
        };
        let (corpus, _) = synthesize_corpus(&spec).unwrap();
        let mut first: BTreeSet<Ipv4Addr> = BTreeSet::new();
        let mut second: BTreeSet<Ipv4Addr> = BTreeSet::new();
        for a in corpus.alerts() {
            match a.truth_attack.as_deref() {
                Some("atk#0") => {
                    first.insert(a.src_ip);
                    first.insert(a.dst_ip);
                }
                Some("atk#1") => {
                    second.insert(a.src_ip);
                    second.insert(a.dst_ip);
                }
                _ => {}
            }
        }
        assert!(first.is_disjoint(&second));
    }
}
