use std::path::{Path, PathBuf};

use drivekit::sim::{generate_scenario, Scenario, ScenarioLine};
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, RunConfig, SEED_SCHEME};
use crate::error::{CliError, Result};
use crate::io::{read_json, read_jsonl, to_json_pretty, to_jsonl, write_bytes};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENARIO_DIR: &str = "scenarios";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub index: usize,
    pub seed: u64,
    /// Relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub master_seed: u64,
    pub seed_scheme: String,
    pub config: RunConfig,
    pub scenarios: Vec<ScenarioEntry>,
}

impl ScenarioManifest {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

pub fn scenario_file_name(index: usize) -> String {
    format!("{SCENARIO_DIR}/scenario_{index:04}.jsonl")
}

pub fn scenario_to_jsonl(s: &Scenario) -> Result<Vec<u8>> {
    to_jsonl(s.lines())
}

/// Reads a scenario file and returns it with its digest.
pub fn read_scenario(path: &Path) -> Result<(Scenario, String)> {
    let (lines, digest) = read_jsonl::<ScenarioLine>(path)?;
    let s = Scenario::from_lines(lines).map_err(|e| CliError::Parse {
        path: path.to_owned(),
        line: 0,
        message: e.to_string(),
    })?;
    Ok((s, digest))
}

/// Writes `num_scenarios` scenario files and `manifest.json` under the
/// output directory. Returns the manifest and its path.
pub fn cmd_generate(config: &RunConfig) -> Result<(ScenarioManifest, PathBuf)> {
    config.validate()?;
    let out = &config.out_dir;
    let mut scenarios = Vec::with_capacity(config.num_scenarios);
    for index in 0..config.num_scenarios {
        let seed = derive_seed(config.seed, index as u64);
        let scenario = generate_scenario(seed, &config.scenario)?;
        let file = scenario_file_name(index);
        let sha256 = write_bytes(&out.join(&file), &scenario_to_jsonl(&scenario)?)?;
        scenarios.push(ScenarioEntry { index, seed, file, sha256 });
    }
    let manifest = ScenarioManifest {
        master_seed: config.seed,
        seed_scheme: SEED_SCHEME.to_owned(),
        config: RunConfig { out_dir: PathBuf::from("."), ..config.clone() },
        scenarios,
    };
    let path = out.join(MANIFEST_FILE);
    write_bytes(&path, &to_json_pretty(&manifest)?)?;
    Ok((manifest, path))
}
