//! Log-space forward scoring, Viterbi decoding and posterior smoothing.

use alloc::vec;
use alloc::vec::Vec;

use super::{HmmTemplate, Obs};
use crate::error::Result;
use crate::math::{ln_prob, log_sum_exp_slice};

/// Decoded window under one template: the most likely state path plus the
/// smoothed per-state posteriors used for risk scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePosterior {
    /// Most likely hidden state per observation, zero-based.
    pub path: Vec<usize>,
    /// Log-probability of that single path.
    pub path_log_prob: f64,
    /// Log-probability of the whole observation sequence.
    pub seq_log_prob: f64,
    /// Smoothed state distribution per observation; each row sums to one.
    pub gamma: Vec<Vec<f64>>,
}

/// Log of cached transition and initial probabilities.
struct LogParams {
    n: usize,
    pi: Vec<f64>,
    a: Vec<f64>,
}

impl LogParams {
    fn new(tmpl: &HmmTemplate) -> Self {
        let n = tmpl.n_states();
        LogParams {
            n,
            pi: (0..n).map(|i| ln_prob(tmpl.pi_at(i))).collect(),
            a: (0..n * n)
                .map(|k| ln_prob(tmpl.a_at(k / n, k % n)))
                .collect(),
        }
    }

    #[inline]
    fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
}

fn forward_table(tmpl: &HmmTemplate, lp: &LogParams, obs: &[Obs]) -> Vec<f64> {
    let n = lp.n;
    let t_len = obs.len();
    let mut alpha = vec![f64::NEG_INFINITY; t_len * n];
    for (i, cell) in alpha[..n].iter_mut().enumerate() {
        *cell = lp.pi[i] + tmpl.log_emission(i, obs[0]);
    }
    let mut terms = vec![f64::NEG_INFINITY; n];
    for t in 1..t_len {
        for j in 0..n {
            for (i, term) in terms.iter_mut().enumerate() {
                *term = alpha[(t - 1) * n + i] + lp.a(i, j);
            }
            alpha[t * n + j] = log_sum_exp_slice(&terms) + tmpl.log_emission(j, obs[t]);
        }
    }
    alpha
}

fn backward_table(tmpl: &HmmTemplate, lp: &LogParams, obs: &[Obs]) -> Vec<f64> {
    let n = lp.n;
    let t_len = obs.len();
    let mut beta = vec![f64::NEG_INFINITY; t_len * n];
    for i in 0..n {
        beta[(t_len - 1) * n + i] = 0.0;
    }
    let mut terms = vec![f64::NEG_INFINITY; n];
    for t in (0..t_len - 1).rev() {
        for i in 0..n {
            for (j, term) in terms.iter_mut().enumerate() {
                *term = lp.a(i, j) + tmpl.log_emission(j, obs[t + 1]) + beta[(t + 1) * n + j];
            }
            beta[t * n + i] = log_sum_exp_slice(&terms);
        }
    }
    beta
}

/// Log-probability of the observation sequence under the template.
/// An empty sequence scores zero (probability one).
pub fn forward_log_prob(tmpl: &HmmTemplate, obs: &[Obs]) -> Result<f64> {
    tmpl.validate_obs(obs)?;
    if obs.is_empty() {
        return Ok(0.0);
    }
    let lp = LogParams::new(tmpl);
    let alpha = forward_table(tmpl, &lp, obs);
    let last = &alpha[(obs.len() - 1) * lp.n..];
    Ok(log_sum_exp_slice(last))
}

/// Runs Viterbi decoding plus forward-backward smoothing over one window.
///
/// Ties in any argmax resolve to the lowest state index. When the whole
/// sequence has probability zero the posteriors fall back to uniform rows
/// so downstream risk scores stay finite.
pub fn viterbi_decode(tmpl: &HmmTemplate, obs: &[Obs]) -> Result<StatePosterior> {
    tmpl.validate_obs(obs)?;
    let n = tmpl.n_states();
    let t_len = obs.len();
    if t_len == 0 {
        return Ok(StatePosterior {
            path: Vec::new(),
            path_log_prob: 0.0,
            seq_log_prob: 0.0,
            gamma: Vec::new(),
        });
    }
    let lp = LogParams::new(tmpl);

    let mut delta = vec![f64::NEG_INFINITY; t_len * n];
    let mut psi = vec![0usize; t_len * n];
    for (i, cell) in delta[..n].iter_mut().enumerate() {
        *cell = lp.pi[i] + tmpl.log_emission(i, obs[0]);
    }
    for t in 1..t_len {
        for j in 0..n {
            let mut best_i = 0;
            let mut best = delta[(t - 1) * n] + lp.a(0, j);
            for i in 1..n {
                let cand = delta[(t - 1) * n + i] + lp.a(i, j);
                if cand > best {
                    best = cand;
                    best_i = i;
                }
            }
            delta[t * n + j] = best + tmpl.log_emission(j, obs[t]);
            psi[t * n + j] = best_i;
        }
    }
    let mut last = 0;
    let mut path_log_prob = delta[(t_len - 1) * n];
    for i in 1..n {
        if delta[(t_len - 1) * n + i] > path_log_prob {
            path_log_prob = delta[(t_len - 1) * n + i];
            last = i;
        }
    }
    let mut path = vec![0usize; t_len];
    path[t_len - 1] = last;
    for t in (1..t_len).rev() {
        path[t - 1] = psi[t * n + path[t]];
    }

    let alpha = forward_table(tmpl, &lp, obs);
    let beta = backward_table(tmpl, &lp, obs);
    let seq_log_prob = log_sum_exp_slice(&alpha[(t_len - 1) * n..]);
    let mut gamma = Vec::with_capacity(t_len);
    let mut joint = vec![f64::NEG_INFINITY; n];
    for t in 0..t_len {
        for (i, j) in joint.iter_mut().enumerate() {
            *j = alpha[t * n + i] + beta[t * n + i];
        }
        let norm = log_sum_exp_slice(&joint);
        let row: Vec<f64> = if norm == f64::NEG_INFINITY {
            vec![1.0 / n as f64; n]
        } else {
            joint.iter().map(|&x| crate::math::exp(x - norm)).collect()
        };
        gamma.push(row);
    }

    Ok(StatePosterior {
        path,
        path_log_prob,
        seq_log_prob,
        gamma,
    })
}
