//! Per-frame planning loop: noisy perception → ID tracking → baseline
//! forecasts → proposal fan → collision-aware selection.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use drivekit::geometry::Pose2;
use drivekit::instances::{AnchorBox, InstanceMemoryQueue};
use drivekit::planner::{select_trajectory, AgentForecast, Command, PlannerConfig, SelectionDiagnostics, TrajectorySet};
use drivekit::sim::{
    baseline_forecast, generate_proposal_set, perturb_perception, BaselineKind, PerceptionNoise, Scenario,
};
use drivekit::tracking::TrackerState;
use drivekit::Trajectory;
use serde::{Deserialize, Serialize};

use crate::config::{derive_seed, PlannerParams, RunConfig};
use crate::error::{CliError, Result};
use crate::generate::{read_scenario, ScenarioManifest};
use crate::io::{read_jsonl, sha256_hex, to_json_pretty, to_jsonl, write_bytes};

pub const PLAN_DIR: &str = "plans";
pub const PLANS_MANIFEST_FILE: &str = "manifest.json";
/// Scores of the constant-velocity and constant-position forecast modes.
pub const FORECAST_SCORES: [f64; 2] = [0.7, 0.3];

/// One identified agent as the planner saw it, with its forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub track_id: u64,
    pub confidence: f64,
    pub anchor: AnchorBox,
    pub forecast: TrajectorySet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanHeader {
    pub scenario: String,
    pub scenario_sha256: String,
    pub scenario_seed: u64,
    pub perception_seed: u64,
    pub variant: String,
    pub dt: f64,
    pub planner: PlannerParams,
    pub noise: PerceptionNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFrame {
    pub index: usize,
    pub command: Command,
    pub mode_index: usize,
    pub trajectory: Trajectory,
    pub diagnostics: SelectionDiagnostics,
    pub tracks: Vec<TrackRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PlanLine {
    Header(PlanHeader),
    Frame(PlanFrame),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFile {
    pub header: PlanHeader,
    pub frames: Vec<PlanFrame>,
}

impl PlanFile {
    pub fn to_jsonl(&self) -> Result<Vec<u8>> {
        to_jsonl(
            std::iter::once(PlanLine::Header(self.header.clone()))
                .chain(self.frames.iter().cloned().map(PlanLine::Frame)),
        )
    }

    pub fn read(path: &Path) -> Result<(Self, String)> {
        let (lines, digest) = read_jsonl::<PlanLine>(path)?;
        let mut it = lines.into_iter();
        let Some(PlanLine::Header(header)) = it.next() else {
            return Err(CliError::Parse {
                path: path.to_owned(),
                line: 1,
                message: "plan file must start with a header line".into(),
            });
        };
        let mut frames = Vec::new();
        for (i, line) in it.enumerate() {
            match line {
                PlanLine::Frame(f) => frames.push(f),
                PlanLine::Header(_) => {
                    return Err(CliError::Parse {
                        path: path.to_owned(),
                        line: i + 2,
                        message: "duplicate header line".into(),
                    })
                }
            }
        }
        Ok((Self { header, frames }, digest))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFileEntry {
    pub scenario_index: usize,
    /// Relative to the plans manifest's directory.
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanVariant {
    pub name: String,
    pub rescore: bool,
    pub files: Vec<PlanFileEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlansManifest {
    pub scenarios_manifest_sha256: String,
    pub variants: Vec<PlanVariant>,
}

pub fn variant_name(rescore: bool) -> &'static str {
    if rescore {
        "rescore_on"
    } else {
        "rescore_off"
    }
}

fn forecast_for(anchor: &AnchorBox, steps: usize, dt: f64) -> Result<TrajectorySet> {
    let cv = baseline_forecast(BaselineKind::ConstantVelocity, anchor, steps, dt);
    let cp = baseline_forecast(BaselineKind::ConstantPosition, anchor, steps, dt);
    Ok(TrajectorySet::new(
        vec![cv.modes[0].clone(), cp.modes[0].clone()],
        FORECAST_SCORES.to_vec(),
    )?)
}

/// Runs the planning loop over every frame of `scenario`.
///
/// A detection of the same underlying object as a live track keeps that
/// track's ID, standing in for a propagated temporal query; everything else
/// goes through threshold ID assignment.
pub fn plan_scenario(
    scenario: &Scenario,
    perception_seed: u64,
    params: &PlannerParams,
    noise: &PerceptionNoise,
    rescore: bool,
) -> Result<Vec<PlanFrame>> {
    let dt = scenario.header.dt;
    let detections = perturb_perception(scenario, noise, perception_seed)?;
    let horizon = params.memory_frames as u64;
    let mut tracker = TrackerState::new();
    let mut memory = InstanceMemoryQueue::new(params.memory_frames);
    let mut carried: BTreeMap<u64, u64> = BTreeMap::new();
    let planner = PlannerConfig {
        ego: scenario.ego_shape(),
        top_k_modes: params.top_k_modes,
        rescore,
    };

    let mut out = Vec::with_capacity(scenario.frames.len());
    for (frame, dets) in scenario.frames.iter().zip(&detections) {
        let f = frame.index as u64;
        memory.prune(f, horizon);
        tracker.retire(f, horizon);
        carried.retain(|_, id| !memory.query(*id).is_empty());

        let instances = dets
            .iter()
            .map(|d| match d.source.and_then(|s| carried.get(&s)) {
                Some(&id) => d.instance.clone().with_track_id(id),
                None => d.instance.clone(),
            })
            .collect();
        let assigned = tracker.assign_ids(f, instances, params.track_threshold);
        for (d, inst) in dets.iter().zip(&assigned) {
            if let (Some(src), Some(id)) = (d.source, inst.track_id()) {
                carried.insert(src, id);
            }
        }
        memory.push(f, &assigned)?;

        let mut tracks = Vec::new();
        let mut agents = Vec::new();
        for inst in &assigned {
            let Some(track_id) = inst.track_id() else { continue };
            let forecast = forecast_for(&inst.anchor, params.motion_steps, dt)?;
            let state = inst.anchor.decode();
            let [x, y] = inst.anchor.position();
            agents.push(AgentForecast {
                length: state.size[0],
                width: state.size[2],
                pose: Pose2::new(x, y, state.yaw),
                modes: forecast.clone(),
            });
            tracks.push(TrackRecord {
                track_id,
                confidence: inst.confidence,
                anchor: inst.anchor,
                forecast,
            });
        }

        let proposals = generate_proposal_set(frame.ego_status.velocity, params.plan_modes, params.plan_steps, dt)?;
        let sel = select_trajectory(&proposals, frame.command, &agents, 0.0, &planner)?;
        out.push(PlanFrame {
            index: frame.index,
            command: sel.command,
            mode_index: sel.mode_index,
            trajectory: sel.trajectory,
            diagnostics: sel.diagnostics,
            tracks,
        });
    }
    Ok(out)
}

/// Plans every scenario of the manifest, once per rescore variant, and
/// writes the plan files plus `plans/manifest.json` under the output
/// directory.
pub fn cmd_plan(config: &RunConfig, scenarios_manifest: &Path, ablate_rescore: bool) -> Result<(PlansManifest, PathBuf)> {
    config.validate()?;
    let manifest_bytes = std::fs::read(scenarios_manifest).map_err(CliError::io(scenarios_manifest))?;
    let manifest = ScenarioManifest::load(scenarios_manifest)?;
    let base = scenarios_manifest.parent().unwrap_or(Path::new("."));
    let plan_root = config.out_dir.join(PLAN_DIR);
    let rescore_variants = if ablate_rescore {
        vec![true, false]
    } else {
        vec![config.planner.rescore]
    };

    let mut variants: Vec<PlanVariant> = rescore_variants
        .iter()
        .map(|&r| PlanVariant {
            name: variant_name(r).to_owned(),
            rescore: r,
            files: Vec::new(),
        })
        .collect();
    for entry in &manifest.scenarios {
        let (scenario, digest) = read_scenario(&base.join(&entry.file))?;
        if digest != entry.sha256 {
            return Err(CliError::Data(format!("{}: digest does not match the manifest", entry.file)));
        }
        let perception_seed = derive_seed(scenario.header.seed, 0);
        for variant in &mut variants {
            let frames = plan_scenario(&scenario, perception_seed, &config.planner, &config.noise, variant.rescore)?;
            let plan = PlanFile {
                header: PlanHeader {
                    scenario: entry.file.clone(),
                    scenario_sha256: digest.clone(),
                    scenario_seed: scenario.header.seed,
                    perception_seed,
                    variant: variant.name.clone(),
                    dt: scenario.header.dt,
                    planner: PlannerParams {
                        rescore: variant.rescore,
                        ..config.planner.clone()
                    },
                    noise: config.noise,
                },
                frames,
            };
            let file = format!("{}/scenario_{:04}.jsonl", variant.name, entry.index);
            let sha256 = write_bytes(&plan_root.join(&file), &plan.to_jsonl()?)?;
            variant.files.push(PlanFileEntry {
                scenario_index: entry.index,
                file,
                sha256,
            });
        }
    }

    let plans = PlansManifest {
        scenarios_manifest_sha256: sha256_hex(&manifest_bytes),
        variants,
    };
    let path = plan_root.join(PLANS_MANIFEST_FILE);
    write_bytes(&path, &to_json_pretty(&plans)?)?;
    Ok((plans, path))
}
