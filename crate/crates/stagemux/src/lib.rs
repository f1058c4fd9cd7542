//! File formats and command drivers around the `stagemux-core` engine:
//! alert corpora on disk, template documents, scenario recipes, detection
//! traces and evaluation reports, plus the train/synthesize/detect/
//! evaluate/sweep commands the binary exposes.

pub mod io;
pub mod run;
