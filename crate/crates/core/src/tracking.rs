//! Threshold ID assignment, ego-motion compensated propagation, and
//! recall-averaged tracking metrics.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::geometry::{dist, Pose2};
use crate::instances::Instance;
use crate::{Error, Result};

/// Confidence an unidentified instance must exceed to receive an ID.
pub const DEFAULT_TRACK_THRESHOLD: f64 = 0.2;
/// Centre-distance gate for evaluation matching, meters.
pub const DEFAULT_MATCH_DIST: f64 = 2.0;
pub const NUM_RECALL_THRESHOLDS: usize = 40;
/// Recall targets below this value are not part of the sweep.
pub const MIN_RECALL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveTrack {
    pub instance: Instance,
    pub last_frame: u64,
}

/// ID bookkeeping for one stream. IDs are handed out in increasing order and
/// never reused.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackerState {
    next_id: u64,
    active: BTreeMap<u64, ActiveTrack>,
}

impl TrackerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn active(&self) -> &BTreeMap<u64, ActiveTrack> {
        &self.active
    }

    /// Keeps existing IDs and locks instances whose confidence exceeds
    /// `threshold` onto fresh ones. Everything else stays unidentified.
    pub fn assign_ids(&mut self, frame: u64, mut instances: Vec<Instance>, threshold: f64) -> Vec<Instance> {
        for inst in &mut instances {
            let id = match inst.track_id() {
                Some(id) => {
                    self.next_id = self.next_id.max(id.saturating_add(1));
                    id
                }
                None if inst.confidence > threshold => {
                    let id = self.next_id;
                    self.next_id += 1;
                    inst.assign_track_id(id).expect("fresh instance has no id");
                    id
                }
                None => continue,
            };
            self.active.insert(
                id,
                ActiveTrack {
                    instance: inst.clone(),
                    last_frame: frame,
                },
            );
        }
        instances
    }

    /// Forgets tracks not seen within `max_age` frames of `frame`.
    pub fn retire(&mut self, frame: u64, max_age: u64) {
        self.active.retain(|_, t| t.last_frame + max_age >= frame);
    }
}

/// Advances every instance by its own velocity over `dt` and re-expresses it
/// in the current ego frame. `ego_motion` is the previous ego pose as seen
/// from the current ego frame.
pub fn propagate_instances(instances: &[Instance], ego_motion: &Pose2, dt: f64) -> Vec<Instance> {
    instances
        .iter()
        .map(|inst| {
            let mut out = inst.clone();
            let a = &mut out.anchor;
            a.x += a.vx * dt;
            a.y += a.vy * dt;
            a.z += a.vz * dt;
            *a = a.transformed(ego_motion);
            out
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtObject {
    pub id: u64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedObject {
    pub track_id: u64,
    pub position: [f64; 2],
    pub confidence: f64,
}

/// One frame of tracking evaluation input (one JSON line on disk).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingFrame {
    pub frame: u64,
    pub gt: Vec<GtObject>,
    pub pred: Vec<TrackedObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub amota: f64,
    pub amotp: f64,
    /// Recall with every prediction kept.
    pub recall: f64,
    /// Identity switches with every prediction kept.
    pub ids: usize,
    pub num_gt: usize,
    pub match_dist: f64,
    pub recall_targets: Vec<f64>,
    /// MOTAR per recall target; 0 where the target is unreachable.
    pub motar: Vec<f64>,
}

/// `linspace(MIN_RECALL, 1, NUM_RECALL_THRESHOLDS)`.
pub fn recall_targets() -> Vec<f64> {
    let n = NUM_RECALL_THRESHOLDS;
    let step = (1.0 - MIN_RECALL) / (n - 1) as f64;
    (0..n)
        .map(|j| if j + 1 == n { 1.0 } else { MIN_RECALL + j as f64 * step })
        .collect()
}

/// Greedy centre-distance matching: predictions in descending confidence
/// (ties by index) each take the nearest unmatched target within `max_dist`.
/// Returns `(pred index, target index, distance)` in match order.
pub fn greedy_match(
    pred_positions: &[[f64; 2]],
    pred_confidences: &[f64],
    targets: &[[f64; 2]],
    max_dist: f64,
) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..pred_positions.len()).collect();
    order.sort_by(|&a, &b| pred_confidences[b].total_cmp(&pred_confidences[a]));
    let mut taken = vec![false; targets.len()];
    let mut out = Vec::new();
    for p in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, t) in targets.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let d = dist(pred_positions[p], *t);
            if d <= max_dist && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((g, d));
            }
        }
        if let Some((g, d)) = best {
            taken[g] = true;
            out.push((p, g, d));
        }
    }
    out
}

#[derive(Debug, Default)]
struct Accumulation {
    tp: usize,
    fp: usize,
    ids: usize,
    dist_sum: f64,
    matched_confidences: Vec<f64>,
}

fn accumulate(frames: &[TrackingFrame], min_conf: Option<f64>, match_dist: f64) -> Accumulation {
    let mut acc = Accumulation::default();
    let mut last_pred_for_gt: HashMap<u64, u64> = HashMap::new();
    for f in frames {
        let kept: Vec<&TrackedObject> = f
            .pred
            .iter()
            .filter(|p| min_conf.is_none_or(|t| p.confidence >= t))
            .collect();
        let pos: Vec<[f64; 2]> = kept.iter().map(|p| p.position).collect();
        let conf: Vec<f64> = kept.iter().map(|p| p.confidence).collect();
        let gts: Vec<[f64; 2]> = f.gt.iter().map(|g| g.position).collect();
        let matches = greedy_match(&pos, &conf, &gts, match_dist);
        for &(p, g, d) in &matches {
            let (pid, gid) = (kept[p].track_id, f.gt[g].id);
            if let Some(prev) = last_pred_for_gt.insert(gid, pid) {
                if prev != pid {
                    acc.ids += 1;
                }
            }
            acc.dist_sum += d;
            acc.matched_confidences.push(kept[p].confidence);
        }
        acc.tp += matches.len();
        acc.fp += kept.len() - matches.len();
    }
    acc
}

/// AMOTA, AMOTP, recall and identity switches.
///
/// For each recall target `r` the confidence threshold is the highest one
/// whose recall reaches `r`; MOTAR there is `max(0, 1 - (IDS + FP) / TP)`,
/// and MOTP the mean matched distance. Unreachable targets score MOTAR 0 and
/// MOTP `match_dist`. AMOTA and AMOTP average over all targets.
pub fn tracking_metrics(frames: &[TrackingFrame], match_dist: f64) -> Result<TrackingMetrics> {
    if let Some(first) = frames.first() {
        for (i, f) in frames.iter().enumerate() {
            if f.frame != first.frame + i as u64 {
                return Err(Error::Invalid(format!(
                    "tracking frames must be contiguous; expected frame {}, found {}",
                    first.frame + i as u64,
                    f.frame
                )));
            }
        }
    }
    let num_gt: usize = frames.iter().map(|f| f.gt.len()).sum();
    if num_gt == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let total = num_gt as f64;

    let full = accumulate(frames, None, match_dist);
    let mut confs = full.matched_confidences.clone();
    confs.sort_by(|a, b| b.total_cmp(a));

    let targets = recall_targets();
    let mut motar = Vec::with_capacity(targets.len());
    let mut motp = Vec::with_capacity(targets.len());
    for &r in &targets {
        let needed = (1..=confs.len()).find(|&n| n as f64 / total >= r);
        match needed {
            Some(n) => {
                let acc = accumulate(frames, Some(confs[n - 1]), match_dist);
                let tp = acc.tp as f64;
                motar.push((1.0 - (acc.ids + acc.fp) as f64 / tp).max(0.0));
                motp.push(acc.dist_sum / tp);
            }
            None => {
                motar.push(0.0);
                motp.push(match_dist);
            }
        }
    }
    let n = targets.len() as f64;
    Ok(TrackingMetrics {
        amota: motar.iter().sum::<f64>() / n,
        amotp: motp.iter().sum::<f64>() / n,
        recall: full.tp as f64 / total,
        ids: full.ids,
        num_gt,
        match_dist,
        recall_targets: targets,
        motar,
    })
}
