//! Scenario files: the corpus recipe as JSON or TOML. Attack entries
//! reference template or fixture files by path, resolved relative to the
//! directory containing the scenario file.

use std::fs;
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stagemux_core::scenario::{AttackSource, AttackSpec, InterleavePattern, ScenarioSpec};

use super::alerts::read_alert_file;
use super::template::read_template;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatternDoc {
    SequentialEmbed,
    Staggered,
    StageEmbed,
    BlockSystematic { block: usize },
    Random { block: usize },
}

impl PatternDoc {
    fn into_pattern(self) -> InterleavePattern {
        match self {
            PatternDoc::SequentialEmbed => InterleavePattern::SequentialEmbed,
            PatternDoc::Staggered => InterleavePattern::Staggered,
            PatternDoc::StageEmbed => InterleavePattern::StageEmbed,
            PatternDoc::BlockSystematic { block } => InterleavePattern::BlockSystematic { block },
            PatternDoc::Random { block } => InterleavePattern::Random { block },
        }
    }
}

/// One attack entry: exactly one of `template` (sample `length` alerts
/// per instance) or `fixture` (copy a pre-labeled stream, which then
/// needs `template_id` to name its owner).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ip_pool: Vec<Ipv4Addr>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub seed: u64,
    pub pattern: PatternDoc,
    #[serde(default)]
    pub fdr: f64,
    #[serde(default)]
    pub fnr: f64,
    pub attacks: Vec<AttackDoc>,
}

impl ScenarioDoc {
    /// Resolves file references against `base_dir` and builds the
    /// in-memory scenario.
    pub fn into_spec(self, base_dir: &Path) -> Result<ScenarioSpec> {
        let mut attacks = Vec::with_capacity(self.attacks.len());
        for (idx, doc) in self.attacks.into_iter().enumerate() {
            let source = match (&doc.template, &doc.fixture) {
                (Some(path), None) => {
                    let tmpl = read_template(&base_dir.join(path))?;
                    AttackSource::Template(tmpl)
                }
                (None, Some(path)) => {
                    let template_id = doc.template_id.clone().with_context(|| {
                        format!("attack {idx}: fixture entries need a template_id")
                    })?;
                    let parsed = read_alert_file(&base_dir.join(path))?;
                    AttackSource::Fixture {
                        template_id,
                        stream: parsed.stream,
                    }
                }
                _ => bail!("attack {idx}: set exactly one of template or fixture"),
            };
            let length = match &source {
                AttackSource::Template(_) => doc
                    .length
                    .with_context(|| format!("attack {idx}: template entries need a length"))?,
                AttackSource::Fixture { .. } => 0,
            };
            attacks.push(AttackSpec {
                source,
                instances: doc.instances,
                length,
                ip_pool: doc.ip_pool,
            });
        }
        Ok(ScenarioSpec {
            attacks,
            pattern: self.pattern.into_pattern(),
            fdr: self.fdr,
            fnr: self.fnr,
            seed: self.seed,
        })
    }
}

/// Reads a scenario file, picking the format from the extension
/// (`.toml` means TOML, anything else JSON).
pub fn read_scenario_doc(path: &Path) -> Result<ScenarioDoc> {
    let text = fs::read_to_string(path).with_context(|| format!("open {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).with_context(|| format!("parse {}", path.display()))
    } else {
        serde_json::from_str(&text).with_context(|| format!("parse {}", path.display()))
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let base_dir = path.parent().unwrap_or(Path::new("."));
    read_scenario_doc(path)?
        .into_spec(base_dir)
        .with_context(|| format!("load {}", path.display()))
}
