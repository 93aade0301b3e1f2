//! Hierarchical planning selection.
//!
//! Proposals are first narrowed to the driving command's row, then every
//! candidate that collides with a confident agent forecast has its score
//! zeroed, and the highest remaining score wins.

use serde::{Deserialize, Serialize};

use crate::geometry::{estimate_yaws, Obb2, Pose2};
use crate::{Error, Result, Trajectory};

pub const NUM_COMMANDS: usize = 3;
pub const PLAN_MODES: usize = 6;
pub const PLAN_STEPS: usize = 6;
pub const MOTION_MODES: usize = 6;
pub const MOTION_STEPS: usize = 12;
/// Agent forecast modes consulted by the collision check.
pub const RESCORE_TOP_K: usize = 2;
/// Ego footprint: length along heading and width, meters.
pub const EGO_LENGTH: f64 = 4.084;
pub const EGO_WIDTH: f64 = 1.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Command {
    TurnLeft,
    TurnRight,
    GoStraight,
}

impl Command {
    pub const ALL: [Command; NUM_COMMANDS] = [Command::TurnLeft, Command::TurnRight, Command::GoStraight];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Nominal heading change over the planning horizon.
    pub fn nominal_heading_change(self) -> f64 {
        match self {
            Command::TurnLeft => std::f64::consts::FRAC_PI_2,
            Command::TurnRight => -std::f64::consts::FRAC_PI_2,
            Command::GoStraight => 0.0,
        }
    }
}

/// `K` trajectories with one score each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    pub modes: Vec<Trajectory>,
    pub scores: Vec<f64>,
}

impl TrajectorySet {
    pub fn new(modes: Vec<Trajectory>, scores: Vec<f64>) -> Result<Self> {
        if modes.len() != scores.len() {
            return Err(Error::Invalid(format!(
                "{} modes but {} scores",
                modes.len(),
                scores.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Invalid(format!("non-finite score {s}")));
        }
        Ok(Self { modes, scores })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Mode indices by descending score, ties by index.
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        idx
    }
}

/// Planning proposals for every command, indexed by [`Command::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanProposalSet {
    pub per_command: [TrajectorySet; NUM_COMMANDS],
}

impl PlanProposalSet {
    pub fn new(per_command: [TrajectorySet; NUM_COMMANDS]) -> Result<Self> {
        if per_command.iter().any(TrajectorySet::is_empty) {
            return Err(Error::Invalid("every command needs at least one proposal".into()));
        }
        Ok(Self { per_command })
    }
}

/// The command's row, untouched.
pub fn filter_by_command(p: &PlanProposalSet, cmd: Command) -> &TrajectorySet {
    &p.per_command[cmd.index()]
}

/// Forecast for one surrounding agent, in the planning (ego) frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentForecast {
    pub length: f64,
    pub width: f64,
    pub pose: Pose2,
    pub modes: TrajectorySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoShape {
    pub length: f64,
    pub width: f64,
}

impl Default for EgoShape {
    fn default() -> Self {
        Self {
            length: EGO_LENGTH,
            width: EGO_WIDTH,
        }
    }
}

/// Boxes swept along a trajectory, one per step, heading from the points.
pub fn boxes_along(traj: &[[f64; 2]], length: f64, width: f64, initial_yaw: f64) -> Result<Vec<Obb2>> {
    let yaws = estimate_yaws(traj, initial_yaw)?;
    traj.iter()
        .zip(yaws)
        .map(|(p, yaw)| Obb2::new(*p, [0.5 * length, 0.5 * width], yaw))
        .collect()
}

/// First planning step at which the ego collides with a top-`k` forecast
/// mode, if any. Planning step `t` is compared with forecast step `t`.
pub fn first_collision(
    plan: &[[f64; 2]],
    ego: EgoShape,
    ego_yaw0: f64,
    agents: &[AgentForecast],
    top_k_modes: usize,
) -> Result<Option<usize>> {
    if plan.is_empty() || agents.is_empty() {
        return Ok(None);
    }
    let ego_boxes = boxes_along(plan, ego.length, ego.width, ego_yaw0)?;
    let mut first: Option<usize> = None;
    for agent in agents {
        for &m in agent.modes.ranked().iter().take(top_k_modes.max(1)) {
            let mode = &agent.modes.modes[m];
            if mode.is_empty() {
                continue;
            }
            let agent_boxes = boxes_along(mode, agent.length, agent.width, agent.pose.yaw)?;
            for (t, (e, a)) in ego_boxes.iter().zip(&agent_boxes).enumerate() {
                if first.is_some_and(|f| f <= t) {
                    break;
                }
                if e.overlaps(a) {
                    first = Some(t);
                    break;
                }
            }
        }
    }
    Ok(first)
}

pub fn check_plan_collision(
    plan: &[[f64; 2]],
    ego: EgoShape,
    ego_yaw0: f64,
    agents: &[AgentForecast],
    top_k_modes: usize,
) -> Result<bool> {
    Ok(first_collision(plan, ego, ego_yaw0, agents, top_k_modes)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rescored {
    pub scores: Vec<f64>,
    pub collided: Vec<bool>,
}

/// Zeroes the score of every colliding candidate. Scores must be
/// non-negative for the zero to mean "worst".
pub fn collision_aware_rescore(
    candidates: &TrajectorySet,
    agents: &[AgentForecast],
    ego: EgoShape,
    ego_yaw0: f64,
    top_k_modes: usize,
) -> Result<Rescored> {
    if let Some(s) = candidates.scores.iter().find(|s| **s < 0.0) {
        return Err(Error::Invalid(format!("rescoring needs non-negative scores, got {s}")));
    }
    let collided = candidates
        .modes
        .iter()
        .map(|m| check_plan_collision(m, ego, ego_yaw0, agents, top_k_modes))
        .collect::<Result<Vec<_>>>()?;
    let scores = candidates
        .scores
        .iter()
        .zip(&collided)
        .map(|(&s, &c)| if c { 0.0 } else { s })
        .collect();
    Ok(Rescored { scores, collided })
}

/// Index of the largest value; lowest index wins ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub ego: EgoShape,
    pub top_k_modes: usize,
    pub rescore: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            ego: EgoShape::default(),
            top_k_modes: RESCORE_TOP_K,
            rescore: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDiagnostics {
    pub rescore_enabled: bool,
    pub original_scores: Vec<f64>,
    /// Scores after rescoring; equal to the originals when rescoring is off.
    pub rescored_scores: Vec<f64>,
    /// Per-candidate collision verdicts; empty when rescoring is off.
    pub collided: Vec<bool>,
    /// Every candidate collided and the pre-rescore argmax was used.
    pub all_colliding: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub command: Command,
    pub mode_index: usize,
    pub trajectory: Trajectory,
    pub diagnostics: SelectionDiagnostics,
}

/// Command filter, collision-aware rescore, argmax.
///
/// When every candidate collides the selection falls back to the original
/// argmax and flags `all_colliding`.
pub fn select_trajectory(
    proposals: &PlanProposalSet,
    cmd: Command,
    agents: &[AgentForecast],
    ego_yaw0: f64,
    config: &PlannerConfig,
) -> Result<Selection> {
    let row = filter_by_command(proposals, cmd);
    let original = row.scores.clone();
    let best_original = argmax(&original).ok_or(Error::Empty("proposal row"))?;

    let (rescored_scores, collided, mode_index, all_colliding) = if config.rescore {
        let r = collision_aware_rescore(row, agents, config.ego, ego_yaw0, config.top_k_modes)?;
        // argmax over collision-free candidates, so a free candidate whose
        // own score is 0 still beats zeroed colliding ones
        let free_best = (0..r.scores.len())
            .filter(|&i| !r.collided[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if r.scores[b] >= r.scores[i] => Some(b),
                _ => Some(i),
            });
        match free_best {
            Some(best) => (r.scores, r.collided, best, false),
            None => (r.scores, r.collided, best_original, true),
        }
    } else {
        (original.clone(), vec![], best_original, false)
    };

    Ok(Selection {
        command: cmd,
        mode_index,
        trajectory: row.modes[mode_index].clone(),
        diagnostics: SelectionDiagnostics {
            rescore_enabled: config.rescore,
            original_scores: original,
            rescored_scores,
            collided,
            all_colliding,
        },
    })
}
