//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors produced by template construction, training and detection.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A stochastic vector or matrix row does not sum to one.
    NotStochastic {
        what: &'static str,
        row: usize,
        sum: f64,
    },
    /// A probability entry lies outside `[0, 1]`.
    InvalidProbability {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    /// A left-right template has mass on a disallowed backward transition.
    BackwardTransition { from: usize, to: usize, value: f64 },
    /// Model dimensions are zero or inconsistent with the data given.
    BadDimensions(String),
    /// An observation symbol is outside the template's emission columns.
    SymbolOutOfRange { symbol: usize, limit: usize },
    /// A stage label is outside `0..n_states`.
    StageOutOfRange { stage: usize, n_states: usize },
    /// Training saw no observations for a state and smoothing is zero.
    EmptyState { state: usize },
    /// Training input is empty.
    EmptyTrainingInput,
    /// A tuning parameter is outside its documented range.
    ParameterOutOfRange { name: &'static str, value: f64 },
    /// The epsilon modification was requested on an already modified template.
    AlreadyModified { template: String },
    /// An operation required an epsilon-modified template and got a plain one.
    NotModified { template: String },
    /// An operation required an unmodified template and got a modified one.
    ModifiedTemplate { template: String },
    /// The demultiplexer feature set is empty.
    EmptyFeatureSet,
    /// An IP pool is too small for the distinct addresses it must cover.
    InsufficientIpPool { needed: usize, available: usize },
    /// An alert carries no truth stage where training requires one.
    MissingStageLabel { alert_index: usize },
    /// An alert id has no entry in the symbol map.
    UnknownAlertId(String),
    /// An instance-to-template mapping names a template the trace lacks.
    UnknownTemplate(String),
    /// The corpus labels an instance the instance mapping does not cover.
    UnmappedInstance(String),
    /// A rate parameter (FDR or FNR) is outside `[0, 0.5]`.
    RateOutOfRange { name: &'static str, value: f64 },
    /// Window length must be at least one.
    ZeroWindow,
    /// The scenario has no attack streams to interleave.
    NoStreams,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotStochastic { what, row, sum } => {
                write!(f, "{what} row {row} sums to {sum}, expected 1")
            }
            Error::InvalidProbability {
                what,
                row,
                col,
                value,
            } => {
                write!(f, "{what}[{row}][{col}] = {value} is not a probability")
            }
            Error::BackwardTransition { from, to, value } => {
                write!(
                    f,
                    "left-right template has backward transition {from}->{to} = {value}"
                )
            }
            Error::BadDimensions(msg) => write!(f, "bad dimensions: {msg}"),
            Error::SymbolOutOfRange { symbol, limit } => {
                write!(f, "symbol {symbol} out of range (limit {limit})")
            }
            Error::StageOutOfRange { stage, n_states } => {
                write!(f, "stage {stage} out of range for {n_states} states")
            }
            Error::EmptyState { state } => {
                write!(
                    f,
                    "state {state} has no observations; merge stages or use smoothing > 0"
                )
            }
            Error::EmptyTrainingInput => write!(f, "training input is empty"),
            Error::ParameterOutOfRange { name, value } => {
                write!(f, "parameter {name} = {value} out of range")
            }
            Error::AlreadyModified { template } => {
                write!(f, "template {template} is already epsilon-modified")
            }
            Error::NotModified { template } => {
                write!(f, "template {template} is not epsilon-modified")
            }
            Error::ModifiedTemplate { template } => {
                write!(f, "template {template} must not be epsilon-modified here")
            }
            Error::EmptyFeatureSet => write!(f, "demultiplexer feature set is empty"),
            Error::InsufficientIpPool { needed, available } => {
                write!(f, "IP pool has {available} addresses, {needed} needed")
            }
            Error::MissingStageLabel { alert_index } => {
                write!(f, "alert {alert_index} lacks a truth stage label")
            }
            Error::UnknownAlertId(id) => {
                write!(f, "alert id {id:?} is not in the symbol map")
            }
            Error::UnknownTemplate(id) => {
                write!(f, "template {id:?} does not appear in the trace")
            }
            Error::UnmappedInstance(id) => {
                write!(f, "instance {id:?} has no template mapping")
            }
            Error::RateOutOfRange { name, value } => {
                write!(f, "rate {name} = {value} out of [0, 0.5]")
            }
            Error::ZeroWindow => write!(f, "window length must be at least 1"),
            Error::NoStreams => write!(f, "no attack streams given"),
        }
    }
}

impl core::error::Error for Error {}
