//! K-Means anchor initialisation and sinusoidal mode-query encoding.
//!
//! Anchor box locations, anchor polylines and planning/motion intention
//! points are all cluster centres of a training corpus. Seeding is k-means++
//! driven by an explicit seed so every run is reproducible.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instances::{AnchorBox, MapPolyline};
use crate::{Error, Result};

/// Number of anchor boxes used by the full-size model.
pub const NUM_ANCHOR_BOXES: usize = 900;
/// Number of anchor polylines used by the full-size model.
pub const NUM_ANCHOR_POLYLINES: usize = 100;
/// Modes for motion prediction and for planning.
pub const NUM_MODES: usize = 6;
pub const DEFAULT_PE_TEMPERATURE: f64 = 10_000.0;
pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    /// Sum of squared distances to the assigned centroids.
    pub objective: f64,
    /// Objective after the initial assignment and after every Lloyd step.
    pub history: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<_>>())
        .collect::<HashSet<_>>()
        .len()
}

/// Nearest centroid per point (lowest index wins ties) and the objective.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut total = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centroids.iter().enumerate() {
                let d = sq_dist(p, c);
                if d < best.1 {
                    best = (j, d);
                }
            }
            total += best.1;
            best.0
        })
        .collect();
    (labels, total)
}

fn kmeans_pp_seed(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &d) in d2.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            acc += d;
            pick = Some(i);
            if acc > target {
                break;
            }
        }
        // k <= distinct points guarantees some positive distance remains
        let pick = pick.expect("no unseeded point left");
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Lloyd's algorithm with k-means++ seeding.
///
/// Runs until the assignment stops changing or `max_iters` updates have been
/// made. Empty clusters keep their previous centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, max_iters: usize) -> Result<KMeansResult> {
    if points.is_empty() {
        return Err(Error::Empty("k-means input"));
    }
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::Invalid(format!(
            "mixed point dimensions {dim} and {}",
            p.len()
        )));
    }
    let distinct = count_distinct(points);
    if k > distinct {
        return Err(Error::KTooLarge { k, distinct });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp_seed(points, k, &mut rng);
    let (mut assignment, mut objective) = assign(points, &centroids);
    let mut history = vec![objective];
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &j) in points.iter().zip(&assignment) {
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                let n = counts[j] as f64;
                centroids[j] = sums[j].iter().map(|s| s / n).collect();
            }
        }
        let (next, obj) = assign(points, &centroids);
        history.push(obj);
        objective = obj;
        if next == assignment {
            break;
        }
        assignment = next;
    }

    Ok(KMeansResult {
        centroids,
        assignment,
        objective,
        history,
        iterations,
    })
}

/// Anchor boxes whose locations are cluster centres of ground-truth box
/// centres; every other component takes the default initialisation.
pub fn cluster_anchor_boxes(gt_centers: &[[f64; 3]], num_anchors: usize, seed: u64) -> Result<Vec<AnchorBox>> {
    let pts: Vec<Vec<f64>> = gt_centers.iter().map(|c| c.to_vec()).collect();
    let res = kmeans(&pts, num_anchors, seed, DEFAULT_MAX_ITERS)?;
    Ok(res
        .centroids
        .iter()
        .map(|c| AnchorBox::at_location([c[0], c[1], c[2]]))
        .collect())
}

/// Clusters polylines as flat `2 * N_p` vectors and reshapes the centres.
pub fn cluster_polylines(gt: &[MapPolyline], num_anchors: usize, seed: u64) -> Result<Vec<MapPolyline>> {
    let Some(first) = gt.first() else {
        return Err(Error::Empty("polyline corpus"));
    };
    let np = first.len();
    if let Some(bad) = gt.iter().find(|p| p.len() != np) {
        return Err(Error::RaggedPolylines {
            expected: np,
            found: bad.len(),
        });
    }
    let flat: Vec<Vec<f64>> = gt
        .iter()
        .map(|p| p.points().iter().flat_map(|q| *q).collect())
        .collect();
    let res = kmeans(&flat, num_anchors, seed, DEFAULT_MAX_ITERS)?;
    res.centroids
        .iter()
        .map(|c| MapPolyline::new(c.chunks_exact(2).map(|xy| [xy[0], xy[1]]).collect()))
        .collect()
}

/// Sinusoidal encoding of a BEV point.
///
/// The first half of the output encodes x, the second half y. Within each
/// half, pair `i` is `(sin(v / T^(2i/half)), cos(v / T^(2i/half)))`.
pub fn sinusoidal_pe(point: [f64; 2], dim: usize, temperature: f64) -> Result<Vec<f64>> {
    if dim == 0 || dim % 4 != 0 {
        return Err(Error::BadDimension(dim));
    }
    let half = dim / 2;
    let mut out = Vec::with_capacity(dim);
    for v in point {
        for i in 0..half / 2 {
            let freq = temperature.powf((2 * i) as f64 / half as f64);
            let (s, c) = (v / freq).sin_cos();
            out.push(s);
            out.push(c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeQuery {
    pub intention_point: [f64; 2],
    pub encoding: Vec<f64>,
}

/// Clusters trajectory endpoints into `k` intention points and encodes them.
pub fn build_mode_queries(endpoints: &[[f64; 2]], k: usize, dim: usize, seed: u64) -> Result<Vec<ModeQuery>> {
    if dim == 0 || dim % 4 != 0 {
        return Err(Error::BadDimension(dim));
    }
    let pts: Vec<Vec<f64>> = endpoints.iter().map(|p| p.to_vec()).collect();
    let res = kmeans(&pts, k, seed, DEFAULT_MAX_ITERS)?;
    res.centroids
        .iter()
        .map(|c| {
            let p = [c[0], c[1]];
            Ok(ModeQuery {
                intention_point: p,
                encoding: sinusoidal_pe(p, dim, DEFAULT_PE_TEMPERATURE)?,
            })
        })
        .collect()
}

/// On-disk anchor file: `{"boxes": [[11 floats]...], "polylines": [[[x, y]...]...]}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    #[serde(default)]
    pub boxes: Vec<[f64; 11]>,
    #[serde(default)]
    pub polylines: Vec<MapPolyline>,
}

impl AnchorSet {
    pub fn anchor_boxes(&self) -> Vec<AnchorBox> {
        self.boxes.iter().copied().map(AnchorBox::from_array).collect()
    }
}
