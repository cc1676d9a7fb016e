use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Duration;

use patclass_core::{ProfileMode, Recipe};
use serde::{Deserialize, Serialize};

use crate::output::write_json;
use crate::CliError;

/// Everything needed to repeat a run: the arguments, the seed and the
/// resolved sampling plan. Written next to each output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub args: Vec<String>,
    pub recipe: Option<Recipe>,
    pub mode: Option<ProfileMode>,
    pub seed: Option<u64>,
    pub quotas: BTreeMap<u32, u64>,
    pub outputs: Vec<PathBuf>,
    pub runtime_secs: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, args: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            args,
            recipe: None,
            mode: None,
            seed: None,
            quotas: BTreeMap::new(),
            outputs: Vec::new(),
            runtime_secs: 0.0,
        }
    }

    pub fn finish(&mut self, runtime: Duration) {
        self.runtime_secs = runtime.as_secs_f64();
    }

    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_beside(&self, output: &Path) -> Result<PathBuf, CliError> {
        let path = Self::path_for(output);
        write_json(self, File::create(&path)?)?;
        Ok(path)
    }
}
