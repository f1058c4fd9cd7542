//! Work counters for comparing the two pipelines' computational cost.

/// Counts of the dynamic-programming passes and demultiplexer steps a run
/// performed. `*_symbols` accumulate the observation lengths processed so
/// per-run average lengths can be recovered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComplexityCounters {
    pub windows: u64,
    pub forward_runs: u64,
    pub forward_symbols: u64,
    pub viterbi_runs: u64,
    pub viterbi_symbols: u64,
    /// Demultiplexer work: alerts scanned times correlation features.
    pub demux_steps: u64,
}

impl ComplexityCounters {
    pub fn record_forward(&mut self, length: usize) {
        self.forward_runs += 1;
        self.forward_symbols += length as u64;
    }

    pub fn record_viterbi(&mut self, length: usize) {
        self.viterbi_runs += 1;
        self.viterbi_symbols += length as u64;
    }

    pub fn record_demux(&mut self, alerts: usize, features: usize) {
        self.demux_steps += (alerts * features) as u64;
    }

    pub fn merge(&mut self, other: &ComplexityCounters) {
        self.windows += other.windows;
        self.forward_runs += other.forward_runs;
        self.forward_symbols += other.forward_symbols;
        self.viterbi_runs += other.viterbi_runs;
        self.viterbi_symbols += other.viterbi_symbols;
        self.demux_steps += other.demux_steps;
    }
}
