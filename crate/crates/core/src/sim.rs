//! Deterministic kinematic scenarios standing in for a learned perception
//! and prediction stack: ground-truth generation, noisy detections, simple
//! forecasting baselines and fan-shaped plan proposals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Pose2};
use crate::instances::{AnchorBox, EgoStatus, Instance, MapPolyline, POLYLINE_POINTS};
use crate::planner::{Command, PlanProposalSet, TrajectorySet, EGO_LENGTH, EGO_WIDTH, PLAN_STEPS};
use crate::{Error, Result, Trajectory};

/// Frame period, 2 Hz.
pub const FRAME_DT: f64 = 0.5;
pub const PERCEPTION_RADIUS: f64 = 55.0;
/// Map extent around the ego, longitudinal × lateral.
pub const MAP_EXTENT: [f64; 2] = [60.0, 30.0];
pub const WHEELBASE: f64 = 2.588;
/// Lateral offset at the 3 s point that turns a drive into a turn command.
pub const COMMAND_LATERAL_THRESHOLD: f64 = 2.0;
pub const AGENT_HEIGHT: f64 = 1.6;
/// Below this turn rate an arc is integrated as a straight line.
const TURN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    ConstantVelocity,
    ConstantTurnRate,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pose: Pose2,
    pub speed: f64,
    pub turn_rate: f64,
    pub length: f64,
    pub width: f64,
    pub behavior: Behavior,
}

/// Pose after driving `t` seconds at constant speed and turn rate.
pub fn arc_pose(start: &Pose2, speed: f64, turn_rate: f64, t: f64) -> Pose2 {
    let d = speed * t;
    if turn_rate.abs() < TURN_EPS {
        let (s, c) = start.yaw.sin_cos();
        return Pose2::new(start.x + d * c, start.y + d * s, start.yaw);
    }
    let r = speed / turn_rate;
    let yaw = start.yaw + turn_rate * t;
    Pose2::new(
        start.x + r * (yaw.sin() - start.yaw.sin()),
        start.y - r * (yaw.cos() - start.yaw.cos()),
        yaw,
    )
}

impl AgentState {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::NonPositiveExtent(self.length));
        }
        if !(self.width > 0.0) {
            return Err(Error::NonPositiveExtent(self.width));
        }
        if !(self.speed >= 0.0) {
            return Err(Error::Invalid(format!("negative speed {}", self.speed)));
        }
        Ok(())
    }

    /// Closed-form state `t` seconds ahead.
    pub fn advance(&self, t: f64) -> AgentState {
        let pose = match self.behavior {
            Behavior::Stationary => self.pose,
            Behavior::ConstantVelocity => arc_pose(&self.pose, self.speed, 0.0, t),
            Behavior::ConstantTurnRate => arc_pose(&self.pose, self.speed, self.turn_rate, t),
        };
        AgentState { pose, ..*self }
    }

    /// Planar velocity in the frame of `pose` (world velocity rotated, not
    /// relative to the observer's motion).
    pub fn velocity(&self) -> [f64; 2] {
        if self.behavior == Behavior::Stationary {
            return [0.0, 0.0];
        }
        let (s, c) = self.pose.yaw.sin_cos();
        [self.speed * c, self.speed * s]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub points: Trajectory,
    pub yaws: Vec<f64>,
}

/// Positions and headings at `dt, 2 dt, …, steps·dt`.
pub fn rollout_agent(s: &AgentState, steps: usize, dt: f64) -> Result<Rollout> {
    if !(dt > 0.0) {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    let (points, yaws) = (1..=steps)
        .map(|k| {
            let p = s.advance(k as f64 * dt).pose;
            ([p.x, p.y], normalize_angle(p.yaw))
        })
        .unzip();
    Ok(Rollout { points, yaws })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub num_frames: usize,
    pub num_agents: usize,
    pub num_map_lines: usize,
    pub spawn_radius: f64,
    /// Agents never spawn closer than this to the ego.
    pub min_spawn_distance: f64,
    pub ego_speed: [f64; 2],
    pub agent_speed: [f64; 2],
    pub max_turn_rate: f64,
    /// Relative weights of constant-velocity, constant-turn-rate and
    /// stationary agents.
    pub behavior_mix: [f64; 3],
    /// Frames between ego turn-rate changes.
    pub ego_segment_frames: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_frames: 16,
            num_agents: 8,
            num_map_lines: 6,
            spawn_radius: PERCEPTION_RADIUS,
            min_spawn_distance: 4.0,
            ego_speed: [2.0, 10.0],
            agent_speed: [1.0, 8.0],
            max_turn_rate: 0.3,
            behavior_mix: [0.4, 0.3, 0.3],
            ego_segment_frames: 4,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if self.num_frames < PLAN_STEPS + 1 {
            return bad(format!("need at least {} frames, got {}", PLAN_STEPS + 1, self.num_frames));
        }
        if !(self.spawn_radius > 0.0 && self.spawn_radius <= PERCEPTION_RADIUS) {
            return bad(format!("spawn radius must be in (0, {PERCEPTION_RADIUS}], got {}", self.spawn_radius));
        }
        if !(self.min_spawn_distance >= 0.0 && self.min_spawn_distance < self.spawn_radius) {
            return bad(format!("min spawn distance {} outside [0, radius)", self.min_spawn_distance));
        }
        for (name, [lo, hi]) in [("ego_speed", self.ego_speed), ("agent_speed", self.agent_speed)] {
            if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("{name} range [{lo}, {hi}] invalid"));
            }
        }
        if !(self.ego_speed[0] > 0.0) {
            return bad("ego speed must stay positive".into());
        }
        if !(self.max_turn_rate >= 0.0 && self.max_turn_rate.is_finite()) {
            return bad(format!("max turn rate {} invalid", self.max_turn_rate));
        }
        if self.behavior_mix.iter().any(|w| !(*w >= 0.0)) || self.behavior_mix.iter().sum::<f64>() <= 0.0 {
            return bad(format!("behavior mix {:?} invalid", self.behavior_mix));
        }
        if self.ego_segment_frames == 0 {
            return bad("ego segment length must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: u64,
    pub state: AgentState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioHeader {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub dt: f64,
    pub ego_length: f64,
    pub ego_width: f64,
    /// World frame, which coincides with the ego frame at frame 0.
    pub map: Vec<MapPolyline>,
}

/// One frame; poses are in the world frame. The ego status describes the
/// motion over the following `dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFrame {
    pub index: usize,
    pub timestamp: f64,
    pub ego_pose: Pose2,
    pub ego_status: EgoStatus,
    pub command: Command,
    pub agents: Vec<AgentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub header: ScenarioHeader,
    pub frames: Vec<ScenarioFrame>,
}

/// One line of the scenario JSONL format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScenarioLine {
    Header(ScenarioHeader),
    Frame(ScenarioFrame),
}

impl Scenario {
    pub fn lines(&self) -> impl Iterator<Item = ScenarioLine> + '_ {
        std::iter::once(ScenarioLine::Header(self.header.clone()))
            .chain(self.frames.iter().cloned().map(ScenarioLine::Frame))
    }

    pub fn from_lines(lines: impl IntoIterator<Item = ScenarioLine>) -> Result<Self> {
        let mut it = lines.into_iter();
        let Some(ScenarioLine::Header(header)) = it.next() else {
            return Err(Error::Invalid("scenario must start with a header line".into()));
        };
        let mut frames = Vec::new();
        for line in it {
            match line {
                ScenarioLine::Frame(f) if f.index == frames.len() => frames.push(f),
                ScenarioLine::Frame(f) => {
                    return Err(Error::Invalid(format!("frame {} out of order, expected {}", f.index, frames.len())))
                }
                ScenarioLine::Header(_) => return Err(Error::Invalid("duplicate header line".into())),
            }
        }
        Ok(Self { header, frames })
    }

    pub fn ego_shape(&self) -> crate::planner::EgoShape {
        crate::planner::EgoShape {
            length: self.header.ego_length,
            width: self.header.ego_width,
        }
    }

    /// Ego positions of the next `steps` frames in the ego frame of `frame`,
    /// or `None` past the end of the scenario.
    pub fn ego_future(&self, frame: usize, steps: usize) -> Option<Trajectory> {
        let here = self.frames.get(frame)?.ego_pose.inverse();
        (1..=steps)
            .map(|k| {
                let p = self.frames.get(frame + k)?.ego_pose;
                Some(here.transform_point([p.x, p.y]))
            })
            .collect()
    }
}

/// Uniform point in the annulus `[r_min, r_max]`.
fn sample_annulus(rng: &mut impl Rng, r_min: f64, r_max: f64) -> [f64; 2] {
    let r = (rng.random_range(r_min * r_min..=r_max * r_max)).sqrt();
    let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    [r * a.cos(), r * a.sin()]
}

fn command_for(here: &Pose2, ahead: &Pose2) -> Command {
    let lateral = here.inverse().transform_point([ahead.x, ahead.y])[1];
    if lateral > COMMAND_LATERAL_THRESHOLD {
        Command::TurnLeft
    } else if lateral < -COMMAND_LATERAL_THRESHOLD {
        Command::TurnRight
    } else {
        Command::GoStraight
    }
}

fn generate_map(rng: &mut impl Rng, n: usize) -> Vec<MapPolyline> {
    let [lon, lat] = MAP_EXTENT;
    (0..n)
        .map(|_| {
            let y0 = rng.random_range(-0.4 * lat..0.4 * lat);
            let bend = rng.random_range(-0.05 * lat..0.05 * lat);
            let pts = (0..POLYLINE_POINTS)
                .map(|i| {
                    let u = i as f64 / (POLYLINE_POINTS - 1) as f64;
                    [lon * (u - 0.5), y0 + bend * (2.0 * u - 1.0).powi(2)]
                })
                .collect();
            MapPolyline::new(pts).expect("20 points")
        })
        .collect()
}

pub fn generate_scenario(seed: u64, config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = FRAME_DT;
    let map = generate_map(&mut rng, config.num_map_lines);

    // ego: constant speed, piecewise-constant turn rate; simulated past the
    // last frame so every frame has a 3 s look-ahead for its command
    let ego_speed = rng.random_range(config.ego_speed[0]..=config.ego_speed[1]);
    let total = config.num_frames + PLAN_STEPS;
    let mut turn_rates = Vec::with_capacity(total);
    while turn_rates.len() < total {
        let omega = match rng.random_range(0..4) {
            0 => config.max_turn_rate,
            1 => -config.max_turn_rate,
            _ => 0.0,
        };
        turn_rates.extend(std::iter::repeat_n(omega, config.ego_segment_frames));
    }
    turn_rates.truncate(total);
    let mut poses = vec![Pose2::identity()];
    for &omega in &turn_rates[..total - 1] {
        let last = poses.last().expect("non-empty");
        poses.push(arc_pose(last, ego_speed, omega, dt));
    }

    let weights = config.behavior_mix;
    let weight_sum: f64 = weights.iter().sum();
    let agents: Vec<AgentRecord> = (0..config.num_agents as u64)
        .map(|id| {
            let [x, y] = sample_annulus(&mut rng, config.min_spawn_distance, config.spawn_radius);
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let pick = rng.random_range(0.0..weight_sum);
            let behavior = if pick < weights[0] {
                Behavior::ConstantVelocity
            } else if pick < weights[0] + weights[1] {
                Behavior::ConstantTurnRate
            } else {
                Behavior::Stationary
            };
            let speed = rng.random_range(config.agent_speed[0]..=config.agent_speed[1]);
            let turn_rate = rng.random_range(-1.0..=1.0) * config.max_turn_rate;
            let length = rng.random_range(3.5..5.0);
            let width = rng.random_range(1.6..2.1);
            let state = AgentState {
                pose: Pose2::new(x, y, yaw),
                speed: if behavior == Behavior::Stationary { 0.0 } else { speed },
                turn_rate: if behavior == Behavior::ConstantTurnRate { turn_rate } else { 0.0 },
                length,
                width,
                behavior,
            };
            AgentRecord { id, state }
        })
        .collect();

    let frames = (0..config.num_frames)
        .map(|f| {
            let omega = turn_rates[f];
            let t = f as f64 * dt;
            ScenarioFrame {
                index: f,
                timestamp: t,
                ego_pose: poses[f],
                ego_status: EgoStatus {
                    velocity: ego_speed,
                    acceleration: 0.0,
                    angular_velocity: omega,
                    steering_angle: (WHEELBASE * omega / ego_speed).atan(),
                },
                command: command_for(&poses[f], &poses[f + PLAN_STEPS]),
                agents: agents
                    .iter()
                    .map(|a| AgentRecord { id: a.id, state: a.state.advance(t) })
                    .collect(),
            }
        })
        .collect();

    Ok(Scenario {
        header: ScenarioHeader {
            seed,
            config: config.clone(),
            dt,
            ego_length: EGO_LENGTH,
            ego_width: EGO_WIDTH,
            map,
        },
        frames,
    })
}

/// An agent state expressed as an anchor in the ego frame `ego`.
pub fn agent_anchor(state: &AgentState, ego: &Pose2) -> AnchorBox {
    let to_ego = ego.inverse();
    let rel = to_ego.compose(&state.pose);
    let v = to_ego.transform_vector(state.velocity());
    AnchorBox::encode(
        [rel.x, rel.y, 0.5 * AGENT_HEIGHT],
        [state.length, AGENT_HEIGHT, state.width],
        rel.yaw,
        [v[0], v[1], 0.0],
    )
    .expect("validated dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    ConstantPosition,
    ConstantVelocity,
}

/// Single-mode forecast of `steps` future positions in the anchor's frame.
pub fn baseline_forecast(kind: BaselineKind, current: &AnchorBox, steps: usize, dt: f64) -> TrajectorySet {
    let [x, y] = current.position();
    let (vx, vy) = match kind {
        BaselineKind::ConstantPosition => (0.0, 0.0),
        BaselineKind::ConstantVelocity => (current.vx, current.vy),
    };
    let mode = (1..=steps)
        .map(|k| {
            let t = k as f64 * dt;
            [x + vx * t, y + vy * t]
        })
        .collect();
    TrajectorySet::new(vec![mode], vec![1.0]).expect("one mode, one score")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptionNoise {
    pub sigma_pos: f64,
    pub sigma_yaw: f64,
    pub drop_prob: f64,
    /// Mean number of false positives per frame.
    pub fp_rate: f64,
}

impl Default for PerceptionNoise {
    fn default() -> Self {
        Self {
            sigma_pos: 0.2,
            sigma_yaw: 0.05,
            drop_prob: 0.05,
            fp_rate: 1.0,
        }
    }
}

impl PerceptionNoise {
    pub const NONE: PerceptionNoise = PerceptionNoise {
        sigma_pos: 0.0,
        sigma_yaw: 0.0,
        drop_prob: 0.0,
        fp_rate: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_prob) {
            return Err(Error::InvalidProbability(self.drop_prob));
        }
        for v in [self.sigma_pos, self.sigma_yaw, self.fp_rate] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("noise parameter {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// A perceived instance and the ground-truth agent it came from, `None` for
/// false positives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub instance: Instance,
    pub source: Option<u64>,
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("validated sigma")
}

/// Noisy per-frame detections in each frame's ego frame.
///
/// Position, velocity (both σ_pos per axis) and yaw noise are Gaussian.
/// Confidence falls with the position error `e` as `0.5 + 0.5 exp(-e²/2σ²)`;
/// false positives are spread uniformly over the perception disk with
/// confidence in `[0, 0.4)`.
pub fn perturb_perception(scenario: &Scenario, noise: &PerceptionNoise, seed: u64) -> Result<Vec<Vec<Detection>>> {
    noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos_noise = normal(noise.sigma_pos);
    let yaw_noise = normal(noise.sigma_yaw);
    let fp_count = (noise.fp_rate > 0.0).then(|| Poisson::new(noise.fp_rate).expect("positive rate"));
    let mut out = Vec::with_capacity(scenario.frames.len());
    for frame in &scenario.frames {
        let mut dets = Vec::new();
        for agent in &frame.agents {
            if rng.random::<f64>() < noise.drop_prob {
                continue;
            }
            let a = agent_anchor(&agent.state, &frame.ego_pose);
            let (ex, ey) = (pos_noise.sample(&mut rng), pos_noise.sample(&mut rng));
            let (evx, evy) = (pos_noise.sample(&mut rng), pos_noise.sample(&mut rng));
            let yaw = a.yaw() + yaw_noise.sample(&mut rng);
            let anchor = AnchorBox {
                x: a.x + ex,
                y: a.y + ey,
                sin_yaw: yaw.sin(),
                cos_yaw: yaw.cos(),
                vx: a.vx + evx,
                vy: a.vy + evy,
                ..a
            };
            let confidence = if noise.sigma_pos > 0.0 {
                let e2 = ex * ex + ey * ey;
                0.5 + 0.5 * (-e2 / (2.0 * noise.sigma_pos * noise.sigma_pos)).exp()
            } else {
                1.0
            };
            dets.push(Detection {
                instance: Instance::new(anchor, confidence),
                source: Some(agent.id),
            });
        }
        let n_fp = fp_count.map_or(0, |d| d.sample(&mut rng) as usize);
        for _ in 0..n_fp {
            let [x, y] = sample_annulus(&mut rng, 0.0, PERCEPTION_RADIUS);
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let confidence = rng.random_range(0.0..0.4);
            let anchor = AnchorBox::encode([x, y, 0.5 * AGENT_HEIGHT], [4.5, AGENT_HEIGHT, 1.9], yaw, [0.0; 3])
                .expect("positive size");
            dets.push(Detection {
                instance: Instance::new(anchor, confidence),
                source: None,
            });
        }
        out.push(dets);
    }
    Ok(out)
}

fn fan_spread(cmd: Command) -> f64 {
    match cmd {
        Command::GoStraight => std::f64::consts::FRAC_PI_6,
        Command::TurnLeft | Command::TurnRight => std::f64::consts::FRAC_PI_4,
    }
}

/// Terminal heading changes of the `k` fan members, evenly spaced over
/// `nominal ± spread`.
pub fn fan_headings(cmd: Command, k: usize) -> Vec<f64> {
    let nominal = cmd.nominal_heading_change();
    if k == 1 {
        return vec![nominal];
    }
    let spread = fan_spread(cmd);
    (0..k)
        .map(|i| nominal + spread * (2.0 * i as f64 / (k - 1) as f64 - 1.0))
        .collect()
}

/// `k` constant-turn-rate arcs from the ego origin, heading +x, at `speed`.
/// Scores follow a Gaussian prior on the heading offset from the command's
/// nominal change and sum to one.
pub fn generate_plan_proposals(speed: f64, cmd: Command, k: usize, steps: usize, dt: f64) -> Result<TrajectorySet> {
    if k == 0 {
        return Err(Error::Empty("plan modes"));
    }
    if !(dt > 0.0) || !(speed >= 0.0) {
        return Err(Error::Invalid(format!("speed {speed} / dt {dt} invalid")));
    }
    let horizon = steps as f64 * dt;
    let nominal = cmd.nominal_heading_change();
    let width = 0.5 * fan_spread(cmd);
    let mut modes = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    for heading in fan_headings(cmd, k) {
        let omega = if horizon > 0.0 { heading / horizon } else { 0.0 };
        let start = Pose2::identity();
        modes.push(
            (1..=steps)
                .map(|j| {
                    let p = arc_pose(&start, speed, omega, j as f64 * dt);
                    [p.x, p.y]
                })
                .collect(),
        );
        let z = (heading - nominal) / width;
        scores.push((-0.5 * z * z).exp());
    }
    let total: f64 = scores.iter().sum();
    scores.iter_mut().for_each(|s| *s /= total);
    TrajectorySet::new(modes, scores)
}

/// Proposals for all three commands.
pub fn generate_proposal_set(speed: f64, k: usize, steps: usize, dt: f64) -> Result<PlanProposalSet> {
    let [a, b, c] = Command::ALL;
    PlanProposalSet::new([
        generate_plan_proposals(speed, a, k, steps, dt)?,
        generate_plan_proposals(speed, b, k, steps, dt)?,
        generate_plan_proposals(speed, c, k, steps, dt)?,
    ])
}
