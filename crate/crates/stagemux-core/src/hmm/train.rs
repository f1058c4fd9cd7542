//! Count-based supervised estimation from stage-labeled alert sequences.

use alloc::string::String;
use alloc::vec;

use super::HmmTemplate;
use crate::error::{Error, Result};
use crate::math::PROB_FLOOR;

/// Shape and smoothing for supervised training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_states: usize,
    pub n_symbols: usize,
    /// Additive smoothing applied to every admissible count cell.
    pub smoothing: f64,
}

/// Estimates a left-right template from an ordered `(symbol, stage)` list.
///
/// Transition counts come from consecutive label pairs; backward jumps are
/// structural zeros and get dropped. The initial vector concentrates on
/// state 0, with the floor probability on the other states so a window that
/// starts mid-attack can still be decoded after a per-window reset. Zero
/// emission entries are raised to the floor at build time for the same
/// reason; transition zeros are kept (they encode the stage order).
pub fn train_supervised(
    id: impl Into<String>,
    labeled: &[(usize, usize)],
    cfg: &TrainConfig,
) -> Result<HmmTemplate> {
    let n = cfg.n_states;
    let m = cfg.n_symbols;
    if n == 0 || m == 0 {
        return Err(Error::BadDimensions(String::from(
            "need at least one state and one symbol",
        )));
    }
    if labeled.is_empty() {
        return Err(Error::EmptyTrainingInput);
    }
    if cfg.smoothing.is_nan() || cfg.smoothing < 0.0 {
        return Err(Error::ParameterOutOfRange {
            name: "smoothing",
            value: cfg.smoothing,
        });
    }

    let mut trans = vec![0.0f64; n * n];
    let mut emit = vec![0.0f64; n * m];
    for (idx, &(symbol, stage)) in labeled.iter().enumerate() {
        if stage >= n {
            return Err(Error::StageOutOfRange { stage, n_states: n });
        }
        if symbol >= m {
            return Err(Error::SymbolOutOfRange { symbol, limit: m });
        }
        emit[stage * m + symbol] += 1.0;
        if idx + 1 < labeled.len() {
            let next = labeled[idx + 1].1;
            if next >= n {
                return Err(Error::StageOutOfRange {
                    stage: next,
                    n_states: n,
                });
            }
            trans[stage * n + next] += 1.0;
        }
    }

    let alpha = cfg.smoothing;
    let mut b = vec![0.0f64; n * m];
    for i in 0..n {
        let raw: f64 = emit[i * m..(i + 1) * m].iter().sum();
        if raw == 0.0 && alpha == 0.0 {
            return Err(Error::EmptyState { state: i });
        }
        let total = raw + alpha * m as f64;
        for s in 0..m {
            b[i * m + s] = (emit[i * m + s] + alpha) / total;
        }
        floor_and_renormalize(&mut b[i * m..(i + 1) * m]);
    }

    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        // Left-right structure: mass may only stay or move forward.
        let allowed = n - i;
        let raw: f64 = trans[i * n + i..(i + 1) * n].iter().sum();
        let total = raw + alpha * allowed as f64;
        if total == 0.0 {
            // Terminal stage with no outgoing counts: make it absorbing.
            a[i * n + i] = 1.0;
            continue;
        }
        for j in i..n {
            a[i * n + j] = (trans[i * n + j] + alpha) / total;
        }
    }

    let mut pi = vec![PROB_FLOOR; n];
    pi[0] = 1.0 - (n - 1) as f64 * PROB_FLOOR;

    HmmTemplate::new(id, pi, a, b, m, true)
}

/// Raises zero entries to the floor and rescales the row to sum one.
fn floor_and_renormalize(row: &mut [f64]) {
    let mut sum = 0.0;
    for v in row.iter_mut() {
        if *v < PROB_FLOOR {
            *v = PROB_FLOOR;
        }
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}
