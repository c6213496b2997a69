use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOOL: &str = "mch2";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to rerun a command and get the same files back.
///
/// `manifest.json` carries the wall-clock time as well; the copy embedded in
/// `report.json` leaves it out so that replayed reports compare equal byte
/// for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Every parameter of the run as `key = value` text, sorted by key.
    pub config: BTreeMap<String, String>,
    pub base_seed: u64,
    pub member_seeds: Vec<u64>,
    /// Output files, relative to the output directory.
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, base_seed: u64) -> RunManifest {
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            base_seed,
            member_seeds: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    pub fn deterministic(&self) -> RunManifest {
        RunManifest {
            wall_clock_seconds: None,
            ..self.clone()
        }
    }

    /// The config map as parseable `key = value` lines.
    pub fn config_text(&self) -> String {
        self.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn read(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.tool != TOOL {
            return Err(Error::param(format!("{} is not a {TOOL} manifest", path.display())));
        }
        Ok(m)
    }
}

/// Body of `report.json`.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub report: &'a T,
}
