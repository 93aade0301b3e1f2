//! Run configuration: a JSON file, overridden field by field from the
//! command line.

use std::path::{Path, PathBuf};

use drivekit::metrics::{DEFAULT_EPA_ALPHA, DEFAULT_EPA_THRESHOLD, DEFAULT_GRID_RESOLUTION, DEFAULT_MISS_THRESHOLD};
use drivekit::planner::{MOTION_STEPS, PLAN_MODES, PLAN_STEPS, RESCORE_TOP_K};
use drivekit::sim::{PerceptionNoise, ScenarioConfig};
use drivekit::tracking::{DEFAULT_MATCH_DIST, DEFAULT_TRACK_THRESHOLD};
use drivekit::instances::MEMORY_FRAMES;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const OUT_DIR_ENV: &str = "DRIVEKIT_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    pub miss_threshold: f64,
    pub epa_alpha: f64,
    pub epa_threshold: f64,
    pub grid_resolution: f64,
    pub match_dist: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            miss_threshold: DEFAULT_MISS_THRESHOLD,
            epa_alpha: DEFAULT_EPA_ALPHA,
            epa_threshold: DEFAULT_EPA_THRESHOLD,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            match_dist: DEFAULT_MATCH_DIST,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerParams {
    /// Proposals per command.
    pub plan_modes: usize,
    pub plan_steps: usize,
    pub motion_steps: usize,
    pub top_k_modes: usize,
    pub track_threshold: f64,
    /// Frames a track survives without a detection.
    pub memory_frames: usize,
    pub rescore: bool,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            plan_modes: PLAN_MODES,
            plan_steps: PLAN_STEPS,
            motion_steps: MOTION_STEPS,
            top_k_modes: RESCORE_TOP_K,
            track_threshold: DEFAULT_TRACK_THRESHOLD,
            memory_frames: MEMORY_FRAMES,
            rescore: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub num_scenarios: usize,
    pub scenario: ScenarioConfig,
    pub noise: PerceptionNoise,
    pub metrics: MetricParams,
    pub planner: PlannerParams,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_scenarios: 10,
            scenario: ScenarioConfig::default(),
            noise: PerceptionNoise::default(),
            metrics: MetricParams::default(),
            planner: PlannerParams::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        // a bad config is a usage problem, not a data one
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.metrics;
        positive("miss_threshold", m.miss_threshold)?;
        positive("epa_threshold", m.epa_threshold)?;
        positive("grid_resolution", m.grid_resolution)?;
        positive("match_dist", m.match_dist)?;
        if !(m.epa_alpha >= 0.0 && m.epa_alpha.is_finite()) {
            return Err(CliError::Usage(format!("epa_alpha must be non-negative, got {}", m.epa_alpha)));
        }
        let p = &self.planner;
        for (name, v) in [
            ("plan_modes", p.plan_modes),
            ("plan_steps", p.plan_steps),
            ("motion_steps", p.motion_steps),
            ("top_k_modes", p.top_k_modes),
            ("memory_frames", p.memory_frames),
        ] {
            if v == 0 {
                return Err(CliError::Usage(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&p.track_threshold) {
            return Err(CliError::Usage(format!("track_threshold must lie in [0, 1), got {}", p.track_threshold)));
        }
        if self.scenario.num_frames < p.plan_steps + 1 {
            return Err(CliError::Usage(format!(
                "scenarios need more than plan_steps ({}) frames, got {}",
                p.plan_steps, self.scenario.num_frames
            )));
        }
        self.scenario.validate().map_err(|e| CliError::Usage(format!("scenario config: {e}")))?;
        self.noise.validate().map_err(|e| CliError::Usage(format!("noise config: {e}")))?;
        Ok(())
    }
}

/// Counter-based seed stream: output `i` of SplitMix64 started at `master`.
/// Any scenario's seed can be recomputed from the master seed and its index.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub const SEED_SCHEME: &str = "splitmix64: seed_i = mix(master + (i + 1) * 0x9E3779B97F4A7C15); \
perception seed = mix(seed_i + 0x9E3779B97F4A7C15)";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs of SplitMix64 seeded with 0
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(derive_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(derive_seed(1234567, 0), 6457827717110365317);
    }

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.planner.track_threshold, 0.2);
        assert_eq!((c.planner.plan_modes, c.planner.plan_steps, c.planner.motion_steps), (6, 6, 12));
        assert_eq!((c.planner.memory_frames, c.metrics.grid_resolution), (3, 0.5));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"seed": 9, "planner": {"rescore": false}}"#).unwrap();
        assert_eq!(partial.seed, 9);
        assert!(!partial.planner.rescore && partial.planner.plan_modes == 6);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 9}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = RunConfig::default();
        c.metrics.grid_resolution = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.noise.drop_prob = 2.0;
        assert!(matches!(c.validate(), Err(CliError::Usage(_))));
        let mut c = RunConfig::default();
        c.planner.plan_steps = 20;
        assert!(c.validate().is_err());
    }
}
