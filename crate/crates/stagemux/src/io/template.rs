//! Template files: one JSON document per template. Matrices are flat
//! row-major arrays in the linear domain; the JSON encoder emits the
//! shortest digit string that round-trips each value exactly, so no
//! precision is lost. Vocabulary keys are one-based symbol indices.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stagemux_core::HmmTemplate;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateDoc {
    pub id: String,
    pub n_states: usize,
    pub n_symbols: usize,
    pub pi: Vec<f64>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    /// One-based symbol index to alert-id name; empty when unnamed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vocab: BTreeMap<usize, String>,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub left_right: bool,
}

impl TemplateDoc {
    pub fn from_template(tmpl: &HmmTemplate) -> Self {
        let vocab = tmpl
            .vocab()
            .iter()
            .enumerate()
            .map(|(s, name)| (s + 1, name.clone()))
            .collect();
        TemplateDoc {
            id: tmpl.id().to_string(),
            n_states: tmpl.n_states(),
            n_symbols: tmpl.n_symbols(),
            pi: tmpl.pi().to_vec(),
            a: tmpl.a_matrix().to_vec(),
            b: tmpl.b_matrix().to_vec(),
            vocab,
            epsilon1: tmpl.epsilon1(),
            epsilon2: tmpl.epsilon2(),
            left_right: tmpl.left_right(),
        }
    }

    pub fn into_template(self) -> Result<HmmTemplate> {
        if self.pi.len() != self.n_states {
            bail!(
                "pi has {} entries for n_states = {}",
                self.pi.len(),
                self.n_states
            );
        }
        let vocab = if self.vocab.is_empty() {
            Vec::new()
        } else {
            let mut names = Vec::with_capacity(self.n_symbols);
            for s in 1..=self.n_symbols {
                match self.vocab.get(&s) {
                    Some(name) => names.push(name.clone()),
                    None => bail!("vocab is missing symbol {s}"),
                }
            }
            if self.vocab.len() != self.n_symbols {
                bail!(
                    "vocab has {} entries for n_symbols = {}",
                    self.vocab.len(),
                    self.n_symbols
                );
            }
            names
        };
        HmmTemplate::from_parts(
            self.id,
            self.pi,
            self.a,
            self.b,
            self.n_symbols,
            vocab,
            self.epsilon1,
            self.epsilon2,
            self.left_right,
        )
        .map_err(|e| anyhow::anyhow!("invalid template: {e}"))
    }
}

pub fn read_template(path: &Path) -> Result<HmmTemplate> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let doc: TemplateDoc =
        serde_json::from_reader(file).with_context(|| format!("parse {}", path.display()))?;
    doc.into_template()
        .with_context(|| format!("load {}", path.display()))
}

pub fn write_template(path: &Path, tmpl: &HmmTemplate) -> Result<()> {
    let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
    serde_json::to_writer_pretty(file, &TemplateDoc::from_template(tmpl))
        .with_context(|| format!("write {}", path.display()))
}
