use std::path::Path;

use drivekit::anchor_init::{kmeans, AnchorSet, DEFAULT_MAX_ITERS};
use drivekit::instances::{AnchorBox, MapPolyline};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::{read_json, to_json_pretty, write_bytes};

/// Clustering input: ground-truth box centres and/or map polylines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Corpus {
    pub centers: Vec<[f64; 3]>,
    pub polylines: Vec<MapPolyline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub box_objective: Option<f64>,
    pub polyline_objective: Option<f64>,
    pub iterations: [usize; 2],
    pub sha256: String,
}

pub fn cluster_corpus(corpus: &Corpus, k_boxes: usize, k_polylines: usize, seed: u64) -> Result<(AnchorSet, [Option<f64>; 2], [usize; 2])> {
    let mut anchors = AnchorSet::default();
    let mut objectives = [None, None];
    let mut iterations = [0, 0];
    if !corpus.centers.is_empty() && k_boxes > 0 {
        let pts: Vec<Vec<f64>> = corpus.centers.iter().map(|c| c.to_vec()).collect();
        let res = kmeans(&pts, k_boxes, seed, DEFAULT_MAX_ITERS)?;
        anchors.boxes = res
            .centroids
            .iter()
            .map(|c| AnchorBox::at_location([c[0], c[1], c[2]]).to_array())
            .collect();
        objectives[0] = Some(res.objective);
        iterations[0] = res.iterations;
    }
    if let Some(first) = corpus.polylines.first().filter(|_| k_polylines > 0) {
        let n = first.len();
        if let Some(bad) = corpus.polylines.iter().find(|p| p.len() != n) {
            return Err(drivekit::Error::RaggedPolylines { expected: n, found: bad.len() }.into());
        }
        let flat: Vec<Vec<f64>> = corpus
            .polylines
            .iter()
            .map(|p| p.points().iter().flat_map(|q| *q).collect())
            .collect();
        let res = kmeans(&flat, k_polylines, seed, DEFAULT_MAX_ITERS)?;
        anchors.polylines = res
            .centroids
            .iter()
            .map(|c| MapPolyline::new(c.chunks_exact(2).map(|xy| [xy[0], xy[1]]).collect()))
            .collect::<drivekit::Result<_>>()?;
        objectives[1] = Some(res.objective);
        iterations[1] = res.iterations;
    }
    if objectives == [None, None] {
        return Err(CliError::Data("corpus has nothing to cluster for the requested k".into()));
    }
    Ok((anchors, objectives, iterations))
}

pub fn cmd_cluster(corpus_path: &Path, out: &Path, k_boxes: usize, k_polylines: usize, seed: u64) -> Result<ClusterSummary> {
    let corpus: Corpus = read_json(corpus_path)?;
    let (anchors, objectives, iterations) = cluster_corpus(&corpus, k_boxes, k_polylines, seed)?;
    let sha256 = write_bytes(out, &to_json_pretty(&anchors)?)?;
    Ok(ClusterSummary {
        box_objective: objectives[0],
        polyline_objective: objectives[1],
        iterations,
        sha256,
    })
}
