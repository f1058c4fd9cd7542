//! Sampling alert sequences from a template, with the hidden state trace.

use alloc::vec::Vec;

use rand::Rng;

use super::HmmTemplate;

/// Samples `length` observations and returns `(symbols, states)`.
///
/// Zero length draws nothing from the generator. Emission draws use the
/// full emission row, so a modified template may emit its unrelated
/// symbol with probability `epsilon1`.
pub fn generate_sequence<R: Rng + ?Sized>(
    tmpl: &HmmTemplate,
    length: usize,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let mut symbols = Vec::with_capacity(length);
    let mut states = Vec::with_capacity(length);
    if length == 0 {
        return (symbols, states);
    }
    let n = tmpl.n_states();
    let mut state = sample_index(rng, (0..n).map(|i| tmpl.pi_at(i)));
    for step in 0..length {
        if step > 0 {
            state = sample_index(rng, (0..n).map(|j| tmpl.a_at(state, j)));
        }
        let symbol = sample_index(rng, (0..tmpl.b_cols()).map(|s| tmpl.b_at(state, s)));
        states.push(state);
        symbols.push(symbol);
    }
    (symbols, states)
}

/// Draws an index proportional to the given weights. The weights sum to
/// one up to rounding; any residual lands on the last positive entry.
fn sample_index<R: Rng + ?Sized>(rng: &mut R, weights: impl Iterator<Item = f64>) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut acc = 0.0;
    let mut last_positive = 0;
    let mut chosen = None;
    for (idx, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = idx;
        }
        acc += w;
        if chosen.is_none() && u < acc {
            chosen = Some(idx);
        }
    }
    chosen.unwrap_or(last_positive)
}
