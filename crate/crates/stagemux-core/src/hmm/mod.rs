//! Discrete hidden Markov model templates, one per attack type.
//!
//! States are zero-based internally; state 0 is the benign "no progress"
//! state every attack starts from. Symbols are zero-based indices into
//! the template vocabulary. An epsilon-modified template carries one
//! extra emission column for the catch-all "unrelated" symbol.

mod decode;
mod generate;
mod train;

pub use decode::{forward_log_prob, viterbi_decode, StatePosterior};
pub use generate::generate_sequence;
pub use train::{train_supervised, TrainConfig};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln_prob, PROB_FLOOR, ROW_SUM_TOL};

/// Upper bound (exclusive) for the unrelated-emission probability.
pub const EPSILON1_LIMIT: f64 = 1e-3;
/// Upper bound (exclusive) for the return-to-start transition probability.
pub const EPSILON2_LIMIT: f64 = 0.1;

/// An observation after mapping an alert into one template's symbol space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obs {
    /// Column index into the emission matrix.
    Sym(usize),
    /// Alert outside the template vocabulary, scored at the emission floor.
    Floor,
}

impl Obs {
    /// Wraps plain symbol indices, mainly for tests and oracles.
    pub fn seq(symbols: &[usize]) -> Vec<Obs> {
        symbols.iter().map(|&s| Obs::Sym(s)).collect()
    }
}

/// A trained attack-type model: initial vector `pi`, transition matrix
/// `a` (row-major N x N) and emission matrix `b` (row-major N x b_cols).
#[derive(Debug, Clone, PartialEq)]
pub struct HmmTemplate {
    id: String,
    n_states: usize,
    n_symbols: usize,
    b_cols: usize,
    pi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    vocab: Vec<String>,
    epsilon1: f64,
    epsilon2: f64,
    left_right: bool,
}

impl HmmTemplate {
    /// Builds an unmodified template (no unrelated column, epsilons zero).
    pub fn new(
        id: impl Into<String>,
        pi: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        n_symbols: usize,
        left_right: bool,
    ) -> Result<Self> {
        Self::from_parts(id, pi, a, b, n_symbols, Vec::new(), 0.0, 0.0, left_right)
    }

    /// Builds a template from raw parts, including an already modified one.
    /// The emission matrix decides the shape: `n_states * n_symbols` entries
    /// for a plain template, one extra column for a modified one.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        id: impl Into<String>,
        pi: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        n_symbols: usize,
        vocab: Vec<String>,
        epsilon1: f64,
        epsilon2: f64,
        left_right: bool,
    ) -> Result<Self> {
        let n_states = pi.len();
        if n_states == 0 || n_symbols == 0 {
            return Err(Error::BadDimensions(String::from(
                "need at least one state and one symbol",
            )));
        }
        if a.len() != n_states * n_states {
            return Err(Error::BadDimensions(alloc::format!(
                "transition matrix has {} entries, expected {}",
                a.len(),
                n_states * n_states
            )));
        }
        let b_cols = if b.len() == n_states * n_symbols {
            n_symbols
        } else if b.len() == n_states * (n_symbols + 1) {
            n_symbols + 1
        } else {
            return Err(Error::BadDimensions(alloc::format!(
                "emission matrix has {} entries, expected {} or {}",
                b.len(),
                n_states * n_symbols,
                n_states * (n_symbols + 1)
            )));
        };
        if !vocab.is_empty() && vocab.len() != n_symbols {
            return Err(Error::BadDimensions(alloc::format!(
                "vocabulary has {} names for {} symbols",
                vocab.len(),
                n_symbols
            )));
        }
        let tmpl = HmmTemplate {
            id: id.into(),
            n_states,
            n_symbols,
            b_cols,
            pi,
            a,
            b,
            vocab,
            epsilon1,
            epsilon2,
            left_right,
        };
        tmpl.validate()?;
        Ok(tmpl)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Count of related symbols, excluding any unrelated column.
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    /// Emission column count: `n_symbols`, plus one once modified.
    pub fn b_cols(&self) -> usize {
        self.b_cols
    }

    /// Column index of the unrelated symbol; only meaningful once modified.
    pub fn unrelated_symbol(&self) -> usize {
        self.n_symbols
    }

    pub fn is_modified(&self) -> bool {
        self.b_cols == self.n_symbols + 1
    }

    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    pub fn epsilon2(&self) -> f64 {
        self.epsilon2
    }

    pub fn left_right(&self) -> bool {
        self.left_right
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn a_matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn b_matrix(&self) -> &[f64] {
        &self.b
    }

    /// Symbol names, one per related symbol; empty for unnamed templates.
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn set_vocab(&mut self, vocab: Vec<String>) -> Result<()> {
        if vocab.len() != self.n_symbols {
            return Err(Error::BadDimensions(alloc::format!(
                "vocabulary has {} names for {} symbols",
                vocab.len(),
                self.n_symbols
            )));
        }
        self.vocab = vocab;
        Ok(())
    }

    #[inline]
    pub fn pi_at(&self, i: usize) -> f64 {
        self.pi[i]
    }

    #[inline]
    pub fn a_at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n_states + j]
    }

    #[inline]
    pub fn b_at(&self, i: usize, symbol: usize) -> f64 {
        self.b[i * self.b_cols + symbol]
    }

    #[inline]
    pub(crate) fn log_emission(&self, state: usize, obs: Obs) -> f64 {
        match obs {
            Obs::Sym(s) => ln_prob(self.b_at(state, s)),
            Obs::Floor => ln_prob(PROB_FLOOR),
        }
    }

    /// Name-to-symbol lookup over the vocabulary.
    pub fn symbol_lookup(&self) -> BTreeMap<&str, usize> {
        self.vocab
            .iter()
            .enumerate()
            .map(|(idx, name)| (name.as_str(), idx))
            .collect()
    }

    /// Checks every observation fits the emission matrix.
    pub fn validate_obs(&self, obs: &[Obs]) -> Result<()> {
        for o in obs {
            if let Obs::Sym(s) = *o {
                if s >= self.b_cols {
                    return Err(Error::SymbolOutOfRange {
                        symbol: s,
                        limit: self.b_cols,
                    });
                }
            }
        }
        Ok(())
    }

    /// Applies the two-part epsilon modification and returns the new template.
    ///
    /// The emission matrix gains an unrelated column: state 0 emits it with
    /// probability `epsilon1` (its other entries rescale by `1 - epsilon1`),
    /// every other state emits it with probability zero. Every transition row
    /// except the first moves `epsilon2` of its mass onto a return to state 0.
    pub fn apply_epsilon_modification(&self, epsilon1: f64, epsilon2: f64) -> Result<HmmTemplate> {
        if self.is_modified() {
            return Err(Error::AlreadyModified {
                template: self.id.clone(),
            });
        }
        check_epsilons(epsilon1, epsilon2)?;

        let n = self.n_states;
        let m = self.n_symbols;
        let mut b = Vec::with_capacity(n * (m + 1));
        for i in 0..n {
            for s in 0..m {
                let v = self.b_at(i, s);
                b.push(if i == 0 { v * (1.0 - epsilon1) } else { v });
            }
            b.push(if i == 0 { epsilon1 } else { 0.0 });
        }

        let mut a = self.a.clone();
        for i in 1..n {
            let row = &mut a[i * n..(i + 1) * n];
            let rest: f64 = row[1..].iter().sum();
            if rest <= 0.0 {
                return Err(Error::BadDimensions(alloc::format!(
                    "transition row {i} has no mass outside the return column"
                )));
            }
            let scale = (1.0 - epsilon2) / rest;
            for v in row[1..].iter_mut() {
                *v *= scale;
            }
            row[0] = epsilon2;
        }

        HmmTemplate::from_parts(
            self.id.clone(),
            self.pi.clone(),
            a,
            b,
            m,
            self.vocab.clone(),
            epsilon1,
            epsilon2,
            self.left_right,
        )
    }

    fn validate(&self) -> Result<()> {
        check_epsilons(self.epsilon1, self.epsilon2)?;
        if !self.is_modified() && (self.epsilon1 != 0.0 || self.epsilon2 != 0.0) {
            return Err(Error::BadDimensions(String::from(
                "unmodified template carries nonzero epsilons",
            )));
        }
        check_row("pi", 0, &self.pi)?;
        for i in 0..self.n_states {
            check_row("A", i, &self.a[i * self.n_states..(i + 1) * self.n_states])?;
            check_row("B", i, &self.b[i * self.b_cols..(i + 1) * self.b_cols])?;
        }
        if self.left_right {
            for i in 1..self.n_states {
                for j in 0..i {
                    let v = self.a_at(i, j);
                    let allowed = j == 0 && (v == 0.0 || (v - self.epsilon2).abs() <= 1e-12);
                    if v != 0.0 && !allowed {
                        return Err(Error::BackwardTransition {
                            from: i,
                            to: j,
                            value: v,
                        });
                    }
                }
            }
        }
        if self.is_modified() {
            let unrelated = self.n_symbols;
            if (self.b_at(0, unrelated) - self.epsilon1).abs() > 1e-12 {
                return Err(Error::InvalidProbability {
                    what: "B",
                    row: 0,
                    col: unrelated,
                    value: self.b_at(0, unrelated),
                });
            }
            for i in 1..self.n_states {
                if self.b_at(i, unrelated) != 0.0 {
                    return Err(Error::InvalidProbability {
                        what: "B",
                        row: i,
                        col: unrelated,
                        value: self.b_at(i, unrelated),
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_epsilons(epsilon1: f64, epsilon2: f64) -> Result<()> {
    if !(0.0..EPSILON1_LIMIT).contains(&epsilon1) {
        return Err(Error::ParameterOutOfRange {
            name: "epsilon1",
            value: epsilon1,
        });
    }
    if !(0.0..EPSILON2_LIMIT).contains(&epsilon2) {
        return Err(Error::ParameterOutOfRange {
            name: "epsilon2",
            value: epsilon2,
        });
    }
    Ok(())
}

fn check_row(what: &'static str, row: usize, values: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for (col, &v) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidProbability {
                what,
                row,
                col,
                value: v,
            });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::NotStochastic { what, row, sum });
    }
    Ok(())
}
