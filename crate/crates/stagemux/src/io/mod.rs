//! File formats: alert streams, template documents, detection traces,
//! scenario recipes, evaluation reports and run manifests. All formats
//! are one-based on the wire (stages, states, vocabulary keys) and
//! converted to the zero-based in-memory convention at this boundary.

pub mod alerts;
pub mod manifest;
pub mod report;
pub mod scenario;
pub mod template;
pub mod trace;
