//! Anchor encodings for agents and map elements, fixed keypoints, the ego
//! instance and the per-track instance memory queue.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geometry::{Obb2, Pose2};
use crate::{Error, Result};

/// Default number of points per map polyline.
pub const POLYLINE_POINTS: usize = 20;

/// Default number of frames kept per track in the memory queue.
pub const MEMORY_FRAMES: usize = 3;

/// Track id reserved for the ego instance in the memory queue.
pub const EGO_TRACK_ID: u64 = u64::MAX;

/// Encoded agent box: `{x, y, z, ln w, ln h, ln l, sin yaw, cos yaw, vx, vy, vz}`.
///
/// Size convention: `w` is the extent along the box heading (local x), `l`
/// the lateral extent (local y) and `h` the vertical extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorBox {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub ln_w: f64,
    pub ln_h: f64,
    pub ln_l: f64,
    pub sin_yaw: f64,
    pub cos_yaw: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

/// Decoded, physical form of an [`AnchorBox`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxState {
    pub center: [f64; 3],
    /// `(w, h, l)` in meters.
    pub size: [f64; 3],
    pub yaw: f64,
    pub velocity: [f64; 3],
}

impl BoxState {
    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.center[0], self.center[1], self.yaw)
    }

    /// BEV rectangle of the box.
    pub fn footprint(&self) -> Obb2 {
        Obb2 {
            center: [self.center[0], self.center[1]],
            half_extents: [0.5 * self.size[0], 0.5 * self.size[2]],
            yaw: crate::geometry::normalize_angle(self.yaw),
        }
    }
}

impl AnchorBox {
    pub const DIM: usize = 11;

    /// Encodes a physical box. Sizes are `(w, h, l)`.
    pub fn encode(center: [f64; 3], size: [f64; 3], yaw: f64, velocity: [f64; 3]) -> Result<Self> {
        if let Some(&bad) = size.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::NonPositiveExtent(bad));
        }
        let (s, c) = yaw.sin_cos();
        Ok(Self {
            x: center[0],
            y: center[1],
            z: center[2],
            ln_w: size[0].ln(),
            ln_h: size[1].ln(),
            ln_l: size[2].ln(),
            sin_yaw: s,
            cos_yaw: c,
            vx: velocity[0],
            vy: velocity[1],
            vz: velocity[2],
        })
    }

    pub fn decode(&self) -> BoxState {
        BoxState {
            center: [self.x, self.y, self.z],
            size: [self.ln_w.exp(), self.ln_h.exp(), self.ln_l.exp()],
            yaw: self.sin_yaw.atan2(self.cos_yaw),
            velocity: [self.vx, self.vy, self.vz],
        }
    }

    pub fn yaw(&self) -> f64 {
        self.sin_yaw.atan2(self.cos_yaw)
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.x, self.y, self.z, self.ln_w, self.ln_h, self.ln_l, self.sin_yaw, self.cos_yaw,
            self.vx, self.vy, self.vz,
        ]
    }

    pub fn from_array(a: [f64; 11]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
            ln_w: a[3],
            ln_h: a[4],
            ln_l: a[5],
            sin_yaw: a[6],
            cos_yaw: a[7],
            vx: a[8],
            vy: a[9],
            vz: a[10],
        }
    }

    /// Anchor at `center` with [`default_anchor_params`] for everything else.
    pub fn at_location(center: [f64; 3]) -> Self {
        let d = default_anchor_params();
        let mut a = [0.0; 11];
        a[..3].copy_from_slice(&center);
        a[3..].copy_from_slice(&d);
        Self::from_array(a)
    }

    /// Seven fixed keypoints in the anchor's parent frame: the centre followed
    /// by the centres of the ±x, ±y and ±z faces.
    pub fn keypoints(&self) -> [[f64; 3]; 7] {
        let st = self.decode();
        let half = [0.5 * st.size[0], 0.5 * st.size[2], 0.5 * st.size[1]];
        let local = [
            [0.0, 0.0, 0.0],
            [half[0], 0.0, 0.0],
            [-half[0], 0.0, 0.0],
            [0.0, half[1], 0.0],
            [0.0, -half[1], 0.0],
            [0.0, 0.0, half[2]],
            [0.0, 0.0, -half[2]],
        ];
        let (s, c) = (self.sin_yaw, self.cos_yaw);
        local.map(|[lx, ly, lz]| [self.x + c * lx - s * ly, self.y + s * lx + c * ly, self.z + lz])
    }

    /// Re-expresses the anchor through the planar rigid transform `pose`
    /// (position, heading and velocity; z components untouched).
    pub fn transformed(&self, pose: &Pose2) -> Self {
        let [x, y] = pose.transform_point([self.x, self.y]);
        let [vx, vy] = pose.transform_vector([self.vx, self.vy]);
        let (s, c) = pose.yaw.sin_cos();
        Self {
            x,
            y,
            vx,
            vy,
            sin_yaw: s * self.cos_yaw + c * self.sin_yaw,
            cos_yaw: c * self.cos_yaw - s * self.sin_yaw,
            ..*self
        }
    }
}

/// Encodes a box; free-function alias of [`AnchorBox::encode`].
pub fn encode_anchor(center: [f64; 3], size: [f64; 3], yaw: f64, velocity: [f64; 3]) -> Result<AnchorBox> {
    AnchorBox::encode(center, size, yaw, velocity)
}

/// Non-location anchor initialisation `(ln w, ln h, ln l, sin, cos, vx, vy, vz)`.
pub const fn default_anchor_params() -> [f64; 8] {
    [1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]
}

pub fn generate_keypoints(anchor: &AnchorBox) -> [[f64; 3]; 7] {
    anchor.keypoints()
}

/// Ego anchor in the current ego frame.
///
/// The ego sits at the origin with zero heading. Its velocity comes from the
/// previous frame's predicted speed; `None` (first frame) means standing still.
pub fn init_ego_anchor(size: [f64; 3], prev_predicted_velocity: Option<f64>) -> Result<AnchorBox> {
    let v = prev_predicted_velocity.unwrap_or(0.0);
    AnchorBox::encode([0.0; 3], size, 0.0, [v, 0.0, 0.0])
}

/// Ordered points of one static map element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MapPolyline {
    points: Vec<[f64; 2]>,
}

impl MapPolyline {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid(format!(
                "a polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Resamples to `n` points equally spaced by arc length.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("cannot resample to {n} points")));
        }
        let mut cum = vec![0.0];
        for w in self.points.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + crate::geometry::dist(w[0], w[1]));
        }
        let total = *cum.last().unwrap();
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        for i in 0..n {
            let s = total * i as f64 / (n - 1) as f64;
            while seg + 2 < cum.len() && cum[seg + 1] < s {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let t = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (self.points[seg], self.points[seg + 1]);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        Self::new(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoStatus {
    /// m/s
    pub velocity: f64,
    /// m/s²
    pub acceleration: f64,
    /// rad/s
    pub angular_velocity: f64,
    /// rad
    pub steering_angle: f64,
}

/// One agent or ego instance: geometric anchor, confidence, an optional
/// identity and an opaque feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub anchor: AnchorBox,
    pub confidence: f64,
    track_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

impl Instance {
    pub fn new(anchor: AnchorBox, confidence: f64) -> Self {
        Self {
            anchor,
            confidence,
            track_id: None,
            embedding: None,
        }
    }

    pub fn with_track_id(mut self, id: u64) -> Self {
        self.track_id = Some(id);
        self
    }

    pub fn track_id(&self) -> Option<u64> {
        self.track_id
    }

    /// Binds an identity. Fails if the instance already carries a different one.
    pub fn assign_track_id(&mut self, id: u64) -> Result<()> {
        match self.track_id {
            Some(existing) if existing != id => Err(Error::Invalid(format!(
                "instance already bound to track {existing}"
            ))),
            _ => {
                self.track_id = Some(id);
                Ok(())
            }
        }
    }
}

/// Agent-level instance set: detected agents followed by the ego instance.
pub fn concat_agents(detected: &[Instance], ego: &Instance) -> Vec<Instance> {
    let mut out = Vec::with_capacity(detected.len() + 1);
    out.extend_from_slice(detected);
    out.push(ego.clone());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEntry {
    pub frame: u64,
    pub instance: Instance,
}

/// Per-track ring buffers holding each identified instance's last `H` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMemoryQueue {
    capacity: usize,
    tracks: BTreeMap<u64, VecDeque<MemoryEntry>>,
}

impl Default for InstanceMemoryQueue {
    fn default() -> Self {
        Self::new(MEMORY_FRAMES)
    }
}

impl InstanceMemoryQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "memory queue capacity must be positive");
        Self {
            capacity,
            tracks: BTreeMap::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Most recent frame stored in any ring.
    pub fn latest_frame(&self) -> Option<u64> {
        self.tracks.values().filter_map(|r| r.back()).map(|e| e.frame).max()
    }

    /// Appends identified instances for `frame`; instances without a track id
    /// are skipped.
    pub fn push(&mut self, frame: u64, instances: &[Instance]) -> Result<()> {
        if let Some(latest) = self.latest_frame() {
            if frame <= latest {
                return Err(Error::FrameRegression { frame, latest });
            }
        }
        for inst in instances {
            let Some(id) = inst.track_id() else { continue };
            let ring = self.tracks.entry(id).or_default();
            if ring.back().is_some_and(|e| e.frame == frame) {
                // duplicate id within one frame: keep the latest
                ring.pop_back();
            }
            ring.push_back(MemoryEntry {
                frame,
                instance: inst.clone(),
            });
            while ring.len() > self.capacity {
                ring.pop_front();
            }
        }
        Ok(())
    }

    /// History of one track, oldest first.
    pub fn query(&self, track_id: u64) -> Vec<&MemoryEntry> {
        self.tracks
            .get(&track_id)
            .map(|r| r.iter().collect())
            .unwrap_or_default()
    }

    pub fn track_ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.tracks.keys().copied()
    }

    /// Drops tracks whose newest entry is older than `frame - max_age`.
    pub fn prune(&mut self, frame: u64, max_age: u64) {
        self.tracks
            .retain(|_, r| r.back().is_some_and(|e| e.frame + max_age >= frame));
    }
}
