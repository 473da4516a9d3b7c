use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use specsearch::diss::DissConfig;
use specsearch::oracle::LlmEndpointConfig;

use crate::OracleKind;

/// Files and settings of one `diss` run.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub world: PathBuf,
    pub demos: Vec<PathBuf>,
    /// Labels the oracle is seeded with; conjectures never contradict them.
    #[serde(default)]
    pub examples: Option<PathBuf>,
    /// Task description for a language-model oracle.
    #[serde(default)]
    pub prompt: Option<PathBuf>,
    /// DFA file whose energy is reported alongside the search.
    #[serde(default)]
    pub ground_truth: Option<PathBuf>,
    #[serde(default = "default_oracle")]
    pub oracle: String,
    #[serde(default)]
    pub endpoint: Option<LlmEndpointConfig>,
    #[serde(default)]
    pub diss: DissConfig,
}

fn default_oracle() -> String {
    "scripted".into()
}

impl RunConfig {
    /// Reads the file and resolves its paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut c: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut c.world);
        c.demos.iter_mut().for_each(resolve);
        for p in [&mut c.examples, &mut c.prompt, &mut c.ground_truth].into_iter().flatten() {
            resolve(p);
        }
        for p in std::iter::once(&c.world)
            .chain(&c.demos)
            .chain(c.examples.iter())
            .chain(c.prompt.iter())
            .chain(c.ground_truth.iter())
        {
            if !p.is_file() {
                bail!("{}: file not found", p.display());
            }
        }
        c.oracle_kind()?;
        Ok(c)
    }

    pub fn oracle_kind(&self) -> Result<OracleKind> {
        Ok(match self.oracle.as_str() {
            "llm" => OracleKind::Llm,
            "scripted" => OracleKind::Scripted,
            "human" => OracleKind::Human,
            other => bail!("unknown oracle {other:?}; expected llm, scripted or human"),
        })
    }
}
