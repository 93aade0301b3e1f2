//! Hungarian assignment, focal and L1 losses, winner-takes-all mode
//! selection and the weighted multi-task total.
//!
//! These are value computations only: there is no autodiff and no training
//! loop, just the arithmetic a trainer would evaluate.

use serde::{Deserialize, Serialize};

use crate::geometry::dist;
use crate::instances::AnchorBox;
use crate::{Error, Result};

pub const FOCAL_ALPHA: f64 = 0.25;
pub const FOCAL_GAMMA: f64 = 2.0;

/// Rows are predictions, columns ground truths.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::Invalid("cost matrix rows differ in length".into()));
            }
            if let Some(v) = r.iter().find(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("non-finite cost {v}")));
            }
            data.extend_from_slice(r);
        }
        let n = rows.len();
        Ok(Self {
            rows: if cols == 0 { 0 } else { n },
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new((0..rows).map(|r| (0..cols).map(|c| f(r, c)).collect()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Matched column per row, `None` for unmatched rows.
    pub row_to_col: Vec<Option<usize>>,
    pub total_cost: f64,
}

impl Assignment {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.row_to_col
            .iter()
            .enumerate()
            .filter_map(|(r, c)| c.map(|c| (r, c)))
    }
}

/// Minimum-cost assignment covering `min(rows, cols)` pairs.
///
/// Shortest augmenting path with dual potentials, O(n²m). Tall matrices are
/// solved transposed.
pub fn hungarian(cost: &CostMatrix) -> Assignment {
    let (n, m) = (cost.rows(), cost.cols());
    if n == 0 || m == 0 {
        return Assignment {
            row_to_col: vec![None; n],
            total_cost: 0.0,
        };
    }
    let transposed = n > m;
    let (n, m) = if transposed { (m, n) } else { (n, m) };
    let at = |i: usize, j: usize| if transposed { cost.get(j, i) } else { cost.get(i, j) };

    // 1-based arrays; index 0 is the virtual column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![None; cost.rows()];
    for j in 1..=m {
        if p[j] != 0 {
            let (r, c) = if transposed { (j - 1, p[j] - 1) } else { (p[j] - 1, j - 1) };
            row_to_col[r] = Some(c);
        }
    }
    let total_cost = row_to_col
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost.get(r, c)))
        .sum();
    Assignment {
        row_to_col,
        total_cost,
    }
}

/// Binary focal loss on a probability.
pub fn focal_loss(p: f64, is_positive: bool, alpha: f64, gamma: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(if is_positive {
        -alpha * (1.0 - p).powf(gamma) * p.ln()
    } else {
        -(1.0 - alpha) * p.powf(gamma) * (1.0 - p).ln()
    })
}

/// Mean absolute difference.
pub fn l1_loss(pred: &[f64], target: &[f64]) -> f64 {
    assert_eq!(pred.len(), target.len(), "l1 operands differ in length");
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(target).map(|(a, b)| (a - b).abs()).sum::<f64>() / pred.len() as f64
}

/// Mean displacement between `mode` and `gt` over valid steps, with the
/// number of steps used. `mask` defaults to all-valid.
pub fn masked_ade(mode: &[[f64; 2]], gt: &[[f64; 2]], mask: Option<&[bool]>) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0;
    for (t, g) in gt.iter().enumerate() {
        if mask.is_some_and(|m| !m[t]) {
            continue;
        }
        sum += dist(mode[t], *g);
        n += 1;
    }
    (if n > 0 { sum / n as f64 } else { f64::NAN }, n)
}

/// Index and ADE of the mode closest to the ground truth; lowest index wins
/// ties.
pub fn wta_select(modes: &[Vec<[f64; 2]>], gt: &[[f64; 2]], mask: Option<&[bool]>) -> Result<(usize, f64)> {
    if modes.is_empty() {
        return Err(Error::Empty("mode set"));
    }
    if let Some(m) = mask {
        if m.len() != gt.len() {
            return Err(Error::Invalid(format!(
                "mask length {} differs from ground truth length {}",
                m.len(),
                gt.len()
            )));
        }
    }
    if let Some(short) = modes.iter().find(|m| m.len() < gt.len()) {
        return Err(Error::Invalid(format!(
            "mode horizon {} is shorter than ground truth horizon {}",
            short.len(),
            gt.len()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, mode) in modes.iter().enumerate() {
        let (ade, n) = masked_ade(mode, gt, mask);
        if n == 0 {
            return Err(Error::NoSupervision);
        }
        if best.is_none_or(|(_, b)| ade < b) {
            best = Some((k, ade));
        }
    }
    Ok(best.expect("non-empty mode set"))
}

/// Classification and regression terms of one multi-modal prediction.
///
/// The winning mode is the positive for a focal loss on mode scores, every
/// other mode a negative; the regression term is the L1 between the winning
/// mode and ground truth over valid steps (both coordinates).
pub fn multimodal_loss(
    modes: &[Vec<[f64; 2]>],
    scores: &[f64],
    gt: &[[f64; 2]],
    mask: Option<&[bool]>,
    alpha: f64,
    gamma: f64,
) -> Result<(f64, f64)> {
    if scores.len() != modes.len() {
        return Err(Error::Invalid("one score per mode required".into()));
    }
    let (win, _) = wta_select(modes, gt, mask)?;
    let mut cls = 0.0;
    for (k, &s) in scores.iter().enumerate() {
        cls += focal_loss(s, k == win, alpha, gamma)?;
    }
    cls /= scores.len() as f64;
    let (mut pred, mut target) = (vec![], vec![]);
    for (t, g) in gt.iter().enumerate() {
        if mask.is_some_and(|m| !m[t]) {
            continue;
        }
        pred.extend_from_slice(&modes[win][t]);
        target.extend_from_slice(g);
    }
    Ok((cls, l1_loss(&pred, &target)))
}

/// Anchor components entering the detection regression: everything but z.
fn regression_terms(a: &AnchorBox) -> [f64; 10] {
    [a.x, a.y, a.ln_w, a.ln_h, a.ln_l, a.sin_yaw, a.cos_yaw, a.vx, a.vy, a.vz]
}

/// Detection matching cost: `w_cls * positive focal cost + w_reg * mean L1`
/// over the ten planar regression terms.
pub fn detection_cost_matrix(
    pred: &[AnchorBox],
    pred_confidence: &[f64],
    gt: &[AnchorBox],
    weights: &LossWeights,
) -> Result<CostMatrix> {
    if pred.len() != pred_confidence.len() {
        return Err(Error::Invalid("one confidence per prediction required".into()));
    }
    let mut rows = Vec::with_capacity(pred.len());
    for (a, &p) in pred.iter().zip(pred_confidence) {
        let cls = focal_loss(p, true, FOCAL_ALPHA, FOCAL_GAMMA)?;
        let ra = regression_terms(a);
        rows.push(
            gt.iter()
                .map(|g| weights.det_cls * cls + weights.det_reg * l1_loss(&ra, &regression_terms(g)))
                .collect(),
        );
    }
    CostMatrix::new(rows)
}

/// Unweighted detection loss terms after Hungarian matching: mean focal over
/// all predictions (matched ones positive) and mean L1 over matched pairs.
pub fn detection_loss(
    pred: &[AnchorBox],
    pred_confidence: &[f64],
    gt: &[AnchorBox],
    weights: &LossWeights,
) -> Result<(f64, f64, Assignment)> {
    let cost = detection_cost_matrix(pred, pred_confidence, gt, weights)?;
    let asg = hungarian(&cost);
    let mut cls = 0.0;
    for (r, &p) in pred_confidence.iter().enumerate() {
        cls += focal_loss(p, asg.row_to_col[r].is_some(), FOCAL_ALPHA, FOCAL_GAMMA)?;
    }
    let cls = if pred.is_empty() { 0.0 } else { cls / pred.len() as f64 };
    let pairs: Vec<_> = asg.pairs().collect();
    let reg = if pairs.is_empty() {
        0.0
    } else {
        pairs
            .iter()
            .map(|&(r, c)| l1_loss(&regression_terms(&pred[r]), &regression_terms(&gt[c])))
            .sum::<f64>()
            / pairs.len() as f64
    };
    Ok((cls, reg, asg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub det_cls: f64,
    pub det_reg: f64,
    pub map_cls: f64,
    pub map_reg: f64,
    pub depth: f64,
    pub motion_cls: f64,
    pub motion_reg: f64,
    pub plan_cls: f64,
    pub plan_reg: f64,
    pub plan_status: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            det_cls: 2.0,
            det_reg: 0.25,
            map_cls: 1.0,
            map_reg: 10.0,
            depth: 0.2,
            motion_cls: 0.2,
            motion_reg: 0.2,
            plan_cls: 0.5,
            plan_reg: 1.0,
            plan_status: 1.0,
        }
    }
}

/// Raw (unweighted) loss values per task.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossComponents {
    pub det_cls: f64,
    pub det_reg: f64,
    pub map_cls: f64,
    pub map_reg: f64,
    pub depth: f64,
    pub motion_cls: f64,
    pub motion_reg: f64,
    pub plan_cls: f64,
    pub plan_reg: f64,
    pub plan_status: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub det: f64,
    pub map: f64,
    pub motion: f64,
    pub plan: f64,
    pub depth: f64,
    pub total: f64,
}

/// `L = L_det + L_map + L_motion + L_plan + L_depth`, each task term being
/// the weighted sum of its classification and regression parts.
pub fn total_loss(c: &LossComponents, w: &LossWeights) -> LossBreakdown {
    let det = w.det_cls * c.det_cls + w.det_reg * c.det_reg;
    let map = w.map_cls * c.map_cls + w.map_reg * c.map_reg;
    let motion = w.motion_cls * c.motion_cls + w.motion_reg * c.motion_reg;
    let plan = w.plan_cls * c.plan_cls + w.plan_reg * c.plan_reg + w.plan_status * c.plan_status;
    let depth = w.depth * c.depth;
    LossBreakdown {
        det,
        map,
        motion,
        plan,
        depth,
        total: det + map + motion + plan + depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> CostMatrix {
        CostMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Exhaustive minimum over injective row→column maps.
    fn brute_force(c: &CostMatrix) -> f64 {
        fn go(c: &CostMatrix, r: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64, need: usize, taken: usize) {
            if taken == need {
                *best = best.min(acc);
                return;
            }
            if r == c.rows() {
                return;
            }
            // rows may be skipped only when there are more rows than columns
            if c.rows() - r > need - taken {
                go(c, r + 1, used, acc, best, need, taken);
            }
            for j in 0..c.cols() {
                if !used[j] {
                    used[j] = true;
                    go(c, r + 1, used, acc + c.get(r, j), best, need, taken + 1);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        let need = c.rows().min(c.cols());
        go(c, 0, &mut vec![false; c.cols()], 0.0, &mut best, need, 0);
        best
    }

    #[test]
    fn hungarian_examples() {
        let one = hungarian(&mat(&[&[3.5]]));
        assert_eq!(one.row_to_col, vec![Some(0)]);

        let two = hungarian(&mat(&[&[1.0, 2.0], &[2.0, 1.0]]));
        assert_eq!(two.row_to_col, vec![Some(0), Some(1)]);
        assert_eq!(two.total_cost, 2.0);
        assert_eq!(brute_force(&mat(&[&[1.0, 2.0], &[2.0, 1.0]])), 2.0);

        let eye = CostMatrix::from_fn(4, 4, |r, c| if r == c { 0.0 } else { 1.0 }).unwrap();
        let a = hungarian(&eye);
        assert_eq!(a.row_to_col, (0..4).map(Some).collect::<Vec<_>>());
        assert_eq!(a.total_cost, 0.0);

        let empty = hungarian(&CostMatrix::new(vec![]).unwrap());
        assert!(empty.row_to_col.is_empty());
    }

    #[test]
    fn hungarian_rectangular() {
        let wide = mat(&[&[5.0, 1.0, 9.0], &[1.0, 8.0, 9.0]]);
        let a = hungarian(&wide);
        assert_eq!(a.row_to_col, vec![Some(1), Some(0)]);
        let tall = mat(&[&[5.0, 1.0], &[1.0, 8.0], &[0.5, 0.5]]);
        let a = hungarian(&tall);
        assert_eq!(a.total_cost, brute_force(&tall));
        assert_eq!(a.pairs().count(), 2);
    }

    #[test]
    fn cost_matrix_validation() {
        assert!(CostMatrix::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(CostMatrix::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn focal_examples() {
        let near_one = focal_loss(1.0 - 1e-9, true, 0.25, 2.0).unwrap();
        assert!(near_one < 1e-20);
        let p = 0.3;
        assert!((focal_loss(p, true, 1.0, 0.0).unwrap() + p.ln()).abs() < 1e-15);
        let v = focal_loss(0.5, true, 0.25, 2.0).unwrap();
        assert!((v - 0.043322).abs() < 1e-6);
        assert!((v - 0.0625 * std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(focal_loss(0.0, true, 0.25, 2.0), Err(Error::InvalidProbability(0.0)));
        assert_eq!(focal_loss(1.0, false, 0.25, 2.0), Err(Error::InvalidProbability(1.0)));
        // negative branch mirrors the positive one
        let n = focal_loss(0.5, false, 0.25, 2.0).unwrap();
        assert!((n - 0.75 * 0.25 * std::f64::consts::LN_2).abs() < 1e-15);
    }

    fn shifted(gt: &[[f64; 2]], dx: f64, dy: f64) -> Vec<[f64; 2]> {
        gt.iter().map(|p| [p[0] + dx, p[1] + dy]).collect()
    }

    #[test]
    fn wta_examples() {
        let gt: Vec<[f64; 2]> = (1..=6).map(|t| [t as f64 * 1.5, 0.2 * t as f64]).collect();
        let modes = vec![shifted(&gt, 0.0, 2.0), gt.clone(), shifted(&gt, 1.0, 0.0)];
        assert_eq!(wta_select(&modes, &gt, None).unwrap(), (1, 0.0));

        let perm = vec![modes[2].clone(), modes[0].clone(), modes[1].clone()];
        assert_eq!(wta_select(&perm, &gt, None).unwrap().0, 2);

        let two = vec![shifted(&gt, 0.0, 0.5), shifted(&gt, 0.0, -1.0)];
        let (k, ade) = wta_select(&two, &gt, None).unwrap();
        assert_eq!(k, 0);
        assert!((ade - 0.5).abs() < 1e-12);

        let tie = vec![shifted(&gt, 0.0, 1.0), shifted(&gt, 0.0, -1.0)];
        assert_eq!(wta_select(&tie, &gt, None).unwrap().0, 0);

        let none = vec![false; 6];
        assert_eq!(wta_select(&modes, &gt, Some(&none)), Err(Error::NoSupervision));
        assert!(wta_select(&modes, &gt, Some(&[true])).is_err());
    }

    #[test]
    fn wta_respects_mask() {
        let gt = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let a = vec![[0.0, 0.0], [1.0, 0.0], [9.0, 0.0]];
        let b = vec![[0.0, 0.5], [1.0, 0.5], [2.0, 0.5]];
        let modes = vec![a, b];
        assert_eq!(wta_select(&modes, &gt, None).unwrap().0, 1);
        assert_eq!(wta_select(&modes, &gt, Some(&[true, true, false])).unwrap().0, 0);
    }

    #[test]
    fn multimodal_loss_uses_winner() {
        let gt = vec![[1.0, 0.0], [2.0, 0.0]];
        let modes = vec![vec![[1.0, 1.0], [2.0, 1.0]], vec![[1.0, 0.5], [2.0, 0.5]]];
        let (cls, reg) = multimodal_loss(&modes, &[0.5, 0.5], &gt, None, 0.25, 2.0).unwrap();
        // winner is mode 1: L1 over (x, y) pairs = (0 + 0.5 + 0 + 0.5) / 4
        assert!((reg - 0.25).abs() < 1e-15);
        let expected = (focal_loss(0.5, false, 0.25, 2.0).unwrap() + focal_loss(0.5, true, 0.25, 2.0).unwrap()) / 2.0;
        assert!((cls - expected).abs() < 1e-15);
    }

    #[test]
    fn detection_matching_pairs_nearby_boxes() {
        let gt = vec![
            AnchorBox::encode([10.0, 0.0, 0.0], [4.0, 1.6, 1.8], 0.0, [0.0; 3]).unwrap(),
            AnchorBox::encode([-5.0, 3.0, 0.0], [4.0, 1.6, 1.8], 1.0, [0.0; 3]).unwrap(),
        ];
        let pred = vec![
            AnchorBox::encode([-5.2, 3.1, 0.0], [4.1, 1.6, 1.8], 1.0, [0.0; 3]).unwrap(),
            AnchorBox::encode([30.0, 30.0, 0.0], [1.0; 3], 0.0, [0.0; 3]).unwrap(),
            AnchorBox::encode([10.1, 0.0, 0.0], [4.0, 1.6, 1.8], 0.05, [0.0; 3]).unwrap(),
        ];
        let w = LossWeights::default();
        let (cls, reg, asg) = detection_loss(&pred, &[0.8, 0.3, 0.7], &gt, &w).unwrap();
        assert_eq!(asg.row_to_col, vec![Some(1), None, Some(0)]);
        assert!(cls > 0.0 && reg > 0.0 && reg < 0.1);
    }

    #[test]
    fn total_loss_examples() {
        let w = LossWeights::default();
        assert_eq!(total_loss(&LossComponents::default(), &w).total, 0.0);
        let det = LossComponents { det_cls: 1.0, ..Default::default() };
        assert_eq!(total_loss(&det, &w).total, 2.0);
        let map = LossComponents { map_reg: 0.5, ..Default::default() };
        assert_eq!(total_loss(&map, &w).total, 5.0);
        let all = LossComponents {
            det_cls: 0.3, det_reg: 1.7, map_cls: 0.2, map_reg: 0.05, depth: 2.5,
            motion_cls: 0.9, motion_reg: 3.1, plan_cls: 0.4, plan_reg: 0.8, plan_status: 0.6,
        };
        let b = total_loss(&all, &w);
        assert!((b.det + b.map + b.motion + b.plan + b.depth - b.total).abs() <= 1e-12);
    }

    fn matrix_strategy() -> impl Strategy<Value = CostMatrix> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(0.0..10.0f64, c), r)
                .prop_map(|rows| CostMatrix::new(rows).unwrap())
        })
    }

    proptest! {
        #[test]
        fn hungarian_is_optimal(c in matrix_strategy()) {
            let a = hungarian(&c);
            prop_assert_eq!(a.pairs().count(), c.rows().min(c.cols()));
            prop_assert!((a.total_cost - brute_force(&c)).abs() < 1e-9);
        }

        #[test]
        fn hungarian_row_shift_invariant(c in matrix_strategy(), row in 0usize..6, shift in -5.0..5.0f64) {
            prop_assume!(c.rows() <= c.cols());
            let row = row % c.rows();
            let shifted = CostMatrix::from_fn(c.rows(), c.cols(), |r, j| c.get(r, j) + if r == row { shift } else { 0.0 }).unwrap();
            let (a, b) = (hungarian(&c), hungarian(&shifted));
            prop_assert!((b.total_cost - a.total_cost - shift).abs() < 1e-9);
        }

        #[test]
        fn focal_decreasing_for_positives(p in 0.001..0.998f64, dp in 1e-4..1e-3f64) {
            let a = focal_loss(p, true, 0.25, 2.0).unwrap();
            let b = focal_loss(p + dp, true, 0.25, 2.0).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn wta_rigid_invariant(
            offsets in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 2..6),
            tx in -20.0..20.0f64, ty in -20.0..20.0f64, yaw in -3.1..3.1f64,
        ) {
            let gt: Vec<[f64; 2]> = (1..=6).map(|t| [t as f64, 0.1 * (t * t) as f64]).collect();
            let modes: Vec<Vec<[f64; 2]>> = offsets.iter()
                .enumerate()
                .map(|(k, &(dx, dy))| gt.iter().enumerate().map(|(t, p)| [p[0] + dx * (t + k) as f64 * 0.1, p[1] + dy]).collect())
                .collect();
            let pose = crate::geometry::Pose2::new(tx, ty, yaw);
            let tf = |v: &[[f64; 2]]| v.iter().map(|&p| pose.transform_point(p)).collect::<Vec<_>>();
            let (k0, a0) = wta_select(&modes, &gt, None).unwrap();
            let moved: Vec<_> = modes.iter().map(|m| tf(m)).collect();
            let (k1, a1) = wta_select(&moved, &tf(&gt), None).unwrap();
            // near-ties can legitimately flip under rounding
            let mut ades: Vec<f64> = modes.iter().map(|m| masked_ade(m, &gt, None).0).collect();
            ades.sort_by(f64::total_cmp);
            if ades[1] - ades[0] > 1e-9 {
                prop_assert_eq!(k0, k1);
            }
            prop_assert!((a0 - a1).abs() < 1e-9);
        }
    }
}
