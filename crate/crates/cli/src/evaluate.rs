//! Open-loop evaluation of plan files against their scenarios.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use drivekit::geometry::Obb2;
use drivekit::metrics::{
    collision_rate_grid, collision_rate_obb, motion_metrics, planning_l2, sample_collisions_grid,
    sample_collisions_obb, small_obstacle_scene, turn_scene, HorizonTable, L2Mode, MotionEvalSample, MotionMetrics,
    MotionParams, PlanningEvalSample, HORIZON_STEPS,
};
use drivekit::sim::{Scenario, PERCEPTION_RADIUS};
use drivekit::tracking::{greedy_match, tracking_metrics, GtObject, TrackedObject, TrackingFrame, TrackingMetrics};
use drivekit::Trajectory;
use serde::{Deserialize, Serialize};

use crate::config::{MetricParams, RunConfig};
use crate::error::{CliError, Result};
use crate::generate::{read_scenario, ScenarioManifest};
use crate::io::{read_json, sha256_hex, to_json_pretty, write_bytes};
use crate::plan::{PlanFile, PlansManifest};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TEXT: &str = "report.txt";
/// Track and ground-truth IDs of scenario `i` are offset by `i << 32` so
/// scenarios can be scored as one sequence.
const SCENARIO_ID_SHIFT: u32 = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub metrics: MetricParams,
    pub horizons: [String; 3],
    pub horizon_steps: [usize; 3],
    pub l2_mode: L2Mode,
    pub collision_rates: String,
    pub perception_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningReport {
    pub samples: usize,
    pub l2: HorizonTable,
    pub collision_obb: HorizonTable,
    pub collision_grid: HorizonTable,
    /// Frames where every candidate collided with a forecast.
    pub all_colliding_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub name: String,
    pub rescore: bool,
    pub planning: PlanningReport,
    /// `None` when no agent had a ground-truth future.
    pub motion: Option<MotionMetrics>,
    /// `None` when no frame had a ground-truth object.
    pub tracking: Option<TrackingMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCase {
    pub scene: String,
    pub collision_obb: [bool; 3],
    pub collision_grid: [bool; 3],
    pub diverges: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub parameters: ReportParameters,
    pub scenarios: usize,
    pub variants: Vec<VariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Vec<DivergenceCase>>,
}

/// Ground-truth obstacle boxes at frame `frame + k`, in the ego frame of
/// `frame`, for `k = 1..=steps`.
fn gt_boxes(s: &Scenario, frame: usize, steps: usize) -> Result<Vec<Vec<Obb2>>> {
    let to_ego = s.frames[frame].ego_pose.inverse();
    (1..=steps)
        .map(|k| {
            s.frames[frame + k]
                .agents
                .iter()
                .map(|a| {
                    let p = to_ego.compose(&a.state.pose);
                    Ok(Obb2::new([p.x, p.y], [0.5 * a.state.length, 0.5 * a.state.width], p.yaw)?)
                })
                .collect()
        })
        .collect()
}

fn planning_samples(s: &Scenario, plan: &PlanFile, source: &str) -> Result<Vec<PlanningEvalSample>> {
    let need = HORIZON_STEPS[2] + 1;
    let steps = plan.header.planner.plan_steps;
    if steps < need {
        return Err(CliError::Data(format!(
            "{source}: plan horizon of {steps} steps is shorter than the {need} the report needs"
        )));
    }
    let mut samples = Vec::new();
    for pf in &plan.frames {
        if pf.trajectory.len() != steps {
            return Err(CliError::Data(format!(
                "{source}: frame {} has {} plan steps, header says {steps}",
                pf.index,
                pf.trajectory.len()
            )));
        }
        let Some(gt) = s.ego_future(pf.index, steps) else { continue };
        samples.push(PlanningEvalSample {
            plan: pf.trajectory.clone(),
            gt,
            ego_yaw0: 0.0,
            ego: s.ego_shape(),
            agents: gt_boxes(s, pf.index, steps)?,
        });
    }
    Ok(samples)
}

/// Ground-truth agents inside the perception disk of `frame`: id, position
/// and future (masked past the end of the scenario), all in that frame's ego
/// frame.
fn gt_agents(s: &Scenario, frame: usize, steps: usize) -> Vec<(u64, [f64; 2], Trajectory, Vec<bool>)> {
    let to_ego = s.frames[frame].ego_pose.inverse();
    s.frames[frame]
        .agents
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let here = to_ego.transform_point([a.state.pose.x, a.state.pose.y]);
            if here[0].hypot(here[1]) > PERCEPTION_RADIUS {
                return None;
            }
            let (future, mask) = (1..=steps)
                .map(|k| match s.frames.get(frame + k) {
                    Some(f) => {
                        let p = f.agents[i].state.pose;
                        (to_ego.transform_point([p.x, p.y]), true)
                    }
                    None => ([0.0, 0.0], false),
                })
                .unzip();
            Some((a.id, here, future, mask))
        })
        .collect()
}

struct VariantAccumulator {
    planning: Vec<PlanningEvalSample>,
    motion: Vec<MotionEvalSample>,
    false_positives: usize,
    tracking: Vec<TrackingFrame>,
    all_colliding: usize,
}

fn accumulate(acc: &mut VariantAccumulator, order: u64, s: &Scenario, plan: &PlanFile, source: &str, m: &MetricParams) -> Result<()> {
    if plan.frames.len() != s.frames.len() || plan.frames.iter().zip(&s.frames).any(|(p, f)| p.index != f.index) {
        return Err(CliError::Data(format!("{source}: plan frames do not line up with the scenario")));
    }
    acc.planning.extend(planning_samples(s, plan, source)?);
    let steps = plan.header.planner.motion_steps;
    let offset = order << SCENARIO_ID_SHIFT;
    for pf in &plan.frames {
        acc.all_colliding += pf.diagnostics.all_colliding as usize;
        if let Some(t) = pf.tracks.iter().find(|t| t.forecast.modes.iter().any(|m| m.len() != steps)) {
            return Err(CliError::Data(format!(
                "{source}: frame {} track {} forecast horizon differs from {steps}",
                pf.index, t.track_id
            )));
        }
        let gts = gt_agents(s, pf.index, steps);
        let gt_pos: Vec<_> = gts.iter().map(|g| g.1).collect();
        let pred_pos: Vec<_> = pf.tracks.iter().map(|t| t.anchor.position()).collect();
        let pred_conf: Vec<_> = pf.tracks.iter().map(|t| t.confidence).collect();
        let matches = greedy_match(&pred_pos, &pred_conf, &gt_pos, m.match_dist);
        let mut forecast_of = vec![None; gts.len()];
        for &(p, g, _) in &matches {
            forecast_of[g] = Some(pf.tracks[p].forecast.clone());
        }
        acc.false_positives += pf.tracks.len() - matches.len();
        for ((_, _, future, mask), prediction) in gts.iter().zip(forecast_of) {
            acc.motion.push(MotionEvalSample {
                prediction,
                gt: future.clone(),
                mask: mask.clone(),
            });
        }
        acc.tracking.push(TrackingFrame {
            frame: acc.tracking.len() as u64,
            gt: gts.iter().map(|g| GtObject { id: offset | g.0, position: g.1 }).collect(),
            pred: pf
                .tracks
                .iter()
                .map(|t| TrackedObject {
                    track_id: offset | t.track_id,
                    position: t.anchor.position(),
                    confidence: t.confidence,
                })
                .collect(),
        });
    }
    Ok(())
}

fn finish(name: &str, rescore: bool, acc: VariantAccumulator, m: &MetricParams) -> Result<VariantReport> {
    if acc.planning.is_empty() {
        return Err(CliError::Data(format!("{name}: no frame has a full planning horizon")));
    }
    let motion = match motion_metrics(
        &acc.motion,
        acc.false_positives,
        MotionParams {
            miss_threshold: m.miss_threshold,
            epa_alpha: m.epa_alpha,
            epa_threshold: m.epa_threshold,
        },
    ) {
        Ok(v) => Some(v),
        Err(drivekit::Error::EmptyGroundTruth | drivekit::Error::Empty(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let tracking = match tracking_metrics(&acc.tracking, m.match_dist) {
        Ok(v) => Some(v),
        Err(drivekit::Error::EmptyGroundTruth) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(VariantReport {
        name: name.to_owned(),
        rescore,
        planning: PlanningReport {
            samples: acc.planning.len(),
            l2: planning_l2(&acc.planning, L2Mode::AtHorizon)?,
            collision_obb: collision_rate_obb(&acc.planning)?,
            collision_grid: collision_rate_grid(&acc.planning, m.grid_resolution)?,
            all_colliding_frames: acc.all_colliding,
        },
        motion,
        tracking,
    })
}

pub fn divergence_cases(resolution: f64) -> Result<Vec<DivergenceCase>> {
    [("small_obstacle", small_obstacle_scene()), ("turn_90", turn_scene())]
        .into_iter()
        .map(|(name, scene)| {
            let collision_obb = sample_collisions_obb(&scene)?;
            let collision_grid = sample_collisions_grid(&scene, resolution)?;
            Ok(DivergenceCase {
                scene: name.to_owned(),
                diverges: collision_obb != collision_grid,
                collision_obb,
                collision_grid,
            })
        })
        .collect()
}

pub fn evaluate(config: &RunConfig, scenarios_manifest: &Path, plans_manifest: &Path, divergence: bool) -> Result<Report> {
    config.validate()?;
    let m = &config.metrics;
    let manifest_bytes = std::fs::read(scenarios_manifest).map_err(CliError::io(scenarios_manifest))?;
    let manifest = ScenarioManifest::load(scenarios_manifest)?;
    let plans: PlansManifest = read_json(plans_manifest)?;
    if plans.scenarios_manifest_sha256 != sha256_hex(&manifest_bytes) {
        return Err(CliError::Data("plans were made from a different scenario manifest".into()));
    }
    let scenario_base = scenarios_manifest.parent().unwrap_or(Path::new("."));
    let plan_base = plans_manifest.parent().unwrap_or(Path::new("."));

    let mut scenarios = Vec::with_capacity(manifest.scenarios.len());
    for entry in &manifest.scenarios {
        let (s, digest) = read_scenario(&scenario_base.join(&entry.file))?;
        if digest != entry.sha256 {
            return Err(CliError::Data(format!("{}: digest does not match the manifest", entry.file)));
        }
        scenarios.push((entry.index, s, digest));
    }

    let mut variants = Vec::with_capacity(plans.variants.len());
    for variant in &plans.variants {
        let mut acc = VariantAccumulator {
            planning: Vec::new(),
            motion: Vec::new(),
            false_positives: 0,
            tracking: Vec::new(),
            all_colliding: 0,
        };
        if variant.files.len() != scenarios.len() {
            return Err(CliError::Data(format!(
                "variant {} has {} plan files for {} scenarios",
                variant.name,
                variant.files.len(),
                scenarios.len()
            )));
        }
        for (order, (entry, (index, scenario, digest))) in variant.files.iter().zip(&scenarios).enumerate() {
            let (plan, plan_digest) = PlanFile::read(&plan_base.join(&entry.file))?;
            if plan_digest != entry.sha256 {
                return Err(CliError::Data(format!("{}: digest does not match the plans manifest", entry.file)));
            }
            if entry.scenario_index != *index || plan.header.scenario_sha256 != *digest {
                return Err(CliError::Data(format!("{}: not planned from scenario {index}", entry.file)));
            }
            accumulate(&mut acc, order as u64, scenario, &plan, &entry.file, m)?;
        }
        variants.push(finish(&variant.name, variant.rescore, acc, m)?);
    }

    Ok(Report {
        parameters: ReportParameters {
            metrics: m.clone(),
            horizons: ["1s".into(), "2s".into(), "3s".into()],
            horizon_steps: HORIZON_STEPS,
            l2_mode: L2Mode::AtHorizon,
            collision_rates: "fraction of planning samples colliding at the horizon step".into(),
            perception_radius: PERCEPTION_RADIUS,
        },
        scenarios: scenarios.len(),
        variants,
        divergence: if divergence { Some(divergence_cases(m.grid_resolution)?) } else { None },
    })
}

fn table_row(out: &mut String, label: &str, t: &HorizonTable, scale: f64) {
    let v = t.values().map(|x| x * scale);
    let _ = writeln!(out, "  {label:<16}{:>9.4}{:>9.4}{:>9.4}{:>9.4}", v[0], v[1], v[2], v[3]);
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.4}"))
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenarios: {}", report.scenarios);
    for v in &report.variants {
        let p = &v.planning;
        let _ = writeln!(out, "\n[{}] planning samples: {}, all-colliding frames: {}", v.name, p.samples, p.all_colliding_frames);
        let _ = writeln!(out, "  {:<16}{:>9}{:>9}{:>9}{:>9}", "metric", "1s", "2s", "3s", "Avg");
        table_row(&mut out, "L2 (m)", &p.l2, 1.0);
        table_row(&mut out, "Col. OBB (%)", &p.collision_obb, 100.0);
        table_row(&mut out, "Col. grid (%)", &p.collision_grid, 100.0);
        match &v.motion {
            Some(mm) => {
                let _ = writeln!(
                    out,
                    "  motion: minADE {} minFDE {} MR {} EPA {:.4} (gt {}, matched {}, fp {})",
                    fmt_opt(mm.min_ade),
                    fmt_opt(mm.min_fde),
                    fmt_opt(mm.miss_rate),
                    mm.epa,
                    mm.num_gt,
                    mm.num_matched,
                    mm.false_positives
                );
            }
            None => {
                let _ = writeln!(out, "  motion: no ground truth");
            }
        }
        match &v.tracking {
            Some(t) => {
                let _ = writeln!(
                    out,
                    "  tracking: AMOTA {:.4} AMOTP {:.4} Recall {:.4} IDS {}",
                    t.amota, t.amotp, t.recall, t.ids
                );
            }
            None => {
                let _ = writeln!(out, "  tracking: no ground truth");
            }
        }
    }
    if let Some(cases) = &report.divergence {
        let _ = writeln!(out, "\nOBB vs grid (1s/2s/3s):");
        for c in cases {
            let _ = writeln!(
                out,
                "  {:<16} obb {:?} grid {:?}{}",
                c.scene,
                c.collision_obb,
                c.collision_grid,
                if c.diverges { "  <- diverges" } else { "" }
            );
        }
    }
    out
}

/// Evaluates and writes `report.json` and `report.txt` to the output
/// directory.
pub fn cmd_evaluate(
    config: &RunConfig,
    scenarios_manifest: &Path,
    plans_manifest: &Path,
    divergence: bool,
) -> Result<(Report, String, PathBuf)> {
    let report = evaluate(config, scenarios_manifest, plans_manifest, divergence)?;
    let text = render_text(&report);
    let path = config.out_dir.join(REPORT_JSON);
    write_bytes(&path, &to_json_pretty(&report)?)?;
    write_bytes(&config.out_dir.join(REPORT_TEXT), text.as_bytes())?;
    Ok((report, text, path))
}
