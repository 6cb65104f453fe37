use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

/// Echoed into every JSON document so a run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub input: Option<String>,
    pub selection: Option<Vec<usize>>,
    pub flags: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub output: Option<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new(subcommand: &str, input: Option<&Path>, output: Option<&PathBuf>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            input: input.map(|p| p.display().to_string()),
            selection: None,
            flags: BTreeMap::new(),
            seed: None,
            output: output.map(|p| p.display().to_string()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn flag(mut self, name: &str, value: impl ToString) -> Self {
        self.flags.insert(name.to_string(), value.to_string());
        self
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON to `out`, or to stdout when no path is given.
pub fn emit<T: Serialize>(manifest: &RunManifest, body: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(&Document { manifest, body })?;
    match out {
        Some(path) => fs::write(path, text + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .map_err(|e| crate::exit::input_error(format!("{e:#}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}
