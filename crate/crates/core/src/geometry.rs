//! Planar poses, oriented boxes, yaw estimation and pinhole projection.
//!
//! Everything is in meters and radians. Planar quantities live in the BEV
//! plane of an ego or world frame (x forward, y left).

use std::f64::consts::PI;

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Consecutive trajectory points closer than this are treated as stationary
/// when estimating yaw.
pub const STATIONARY_EPS: f64 = 1e-3;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Smallest signed difference `a - b`, wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub const fn identity() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            yaw: 0.0,
        }
    }

    pub fn translation(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0)
    }

    pub fn rotation(yaw: f64) -> Self {
        Self::new(0.0, 0.0, yaw)
    }

    /// Returns `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        Pose2::new(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.yaw + other.yaw,
        )
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.yaw.sin_cos();
        Pose2::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            -self.yaw,
        )
    }

    pub fn transform_point(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        [self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]]
    }

    /// Rotates a free vector (velocity, offset); translation is ignored.
    pub fn transform_vector(&self, v: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }

    /// Expresses `other` (given in the same parent frame as `self`) in the
    /// local frame of `self`.
    pub fn relative(&self, other: &Pose2) -> Pose2 {
        self.inverse().compose(other)
    }
}

/// Oriented rectangle in the BEV plane.
///
/// `half_extents[0]` runs along the heading, `half_extents[1]` across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb2 {
    pub center: [f64; 2],
    pub half_extents: [f64; 2],
    pub yaw: f64,
}

impl Obb2 {
    pub fn new(center: [f64; 2], half_extents: [f64; 2], yaw: f64) -> Result<Self> {
        for &h in &half_extents {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::NonPositiveExtent(h));
            }
        }
        Ok(Self {
            center,
            half_extents,
            yaw: normalize_angle(yaw),
        })
    }

    /// Box of full `length` (along heading) and `width`, centred on `pose`.
    pub fn from_pose(pose: &Pose2, length: f64, width: f64) -> Result<Self> {
        Self::new([pose.x, pose.y], [0.5 * length, 0.5 * width], pose.yaw)
    }

    /// Unit vectors of the box's local x and y axes.
    pub fn axes(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.yaw.sin_cos();
        [[c, s], [-s, c]]
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        let [ax, ay] = self.axes();
        let [hx, hy] = self.half_extents;
        let [cx, cy] = self.center;
        let mut out = [[0.0; 2]; 4];
        for (k, (sx, sy)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            out[k] = [
                cx + sx * hx * ax[0] + sy * hy * ay[0],
                cy + sx * hx * ax[1] + sy * hy * ay[1],
            ];
        }
        out
    }

    /// Closed-set point membership.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        let [ax, ay] = self.axes();
        dot(d, ax).abs() <= self.half_extents[0] && dot(d, ay).abs() <= self.half_extents[1]
    }

    /// The same box grown by `margin` on every side.
    pub fn dilated(&self, margin: f64) -> Obb2 {
        Obb2 {
            center: self.center,
            half_extents: [self.half_extents[0] + margin, self.half_extents[1] + margin],
            yaw: self.yaw,
        }
    }

    fn projected_radius(&self, axis: [f64; 2]) -> f64 {
        let [ax, ay] = self.axes();
        self.half_extents[0] * dot(ax, axis).abs() + self.half_extents[1] * dot(ay, axis).abs()
    }

    /// Separating-axis test over the four edge normals. Touching boxes overlap.
    pub fn overlaps(&self, other: &Obb2) -> bool {
        let d = [
            other.center[0] - self.center[0],
            other.center[1] - self.center[1],
        ];
        let [a0, a1] = self.axes();
        let [b0, b1] = other.axes();
        [a0, a1, b0, b1].into_iter().all(|axis| {
            dot(d, axis).abs() <= self.projected_radius(axis) + other.projected_radius(axis)
        })
    }

    /// Axis-aligned bounds as `(min, max)`.
    pub fn aabb(&self) -> ([f64; 2], [f64; 2]) {
        let r = [
            self.projected_radius([1.0, 0.0]),
            self.projected_radius([0.0, 1.0]),
        ];
        (
            [self.center[0] - r[0], self.center[1] - r[1]],
            [self.center[0] + r[0], self.center[1] + r[1]],
        )
    }

    pub fn transformed(&self, pose: &Pose2) -> Obb2 {
        Obb2 {
            center: pose.transform_point(self.center),
            half_extents: self.half_extents,
            yaw: normalize_angle(self.yaw + pose.yaw),
        }
    }
}

/// Free-function form of [`Obb2::overlaps`].
pub fn obb_overlap(a: &Obb2, b: &Obb2) -> bool {
    a.overlaps(b)
}

#[inline]
pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Heading at every trajectory point from forward differences.
///
/// Step `t` takes the direction towards point `t + 1`; the last point reuses
/// the previous heading. Steps shorter than [`STATIONARY_EPS`] reuse the
/// previous heading, with `initial_yaw` standing in before the first step.
pub fn estimate_yaws(traj: &[[f64; 2]], initial_yaw: f64) -> Result<Vec<f64>> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut yaws = Vec::with_capacity(traj.len());
    let mut prev = normalize_angle(initial_yaw);
    for w in traj.windows(2) {
        let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        if dx.hypot(dy) >= STATIONARY_EPS {
            prev = dy.atan2(dx);
        }
        yaws.push(prev);
    }
    yaws.push(prev);
    Ok(yaws)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

/// Pinhole camera with the usual optical convention: z along the optical
/// axis, x right, y down.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub intrinsics: Intrinsics,
    /// Pose of the camera in the ego frame (camera → ego).
    pub cam_to_ego: Isometry3<f64>,
}

impl Camera {
    pub fn new(intrinsics: Intrinsics, cam_to_ego: Isometry3<f64>) -> Result<Self> {
        if !(intrinsics.fx > 0.0 && intrinsics.fy > 0.0) {
            return Err(Error::Invalid(format!(
                "focal lengths must be positive, got fx={} fy={}",
                intrinsics.fx, intrinsics.fy
            )));
        }
        Ok(Self {
            intrinsics,
            cam_to_ego,
        })
    }

    /// Level camera at `position` (ego frame) looking along ego heading `yaw`.
    pub fn level(intrinsics: Intrinsics, position: [f64; 3], yaw: f64) -> Result<Self> {
        let (s, c) = yaw.sin_cos();
        // columns: camera x (right), y (down), z (forward) expressed in ego axes
        let m = Matrix3::new(s, 0.0, c, -c, 0.0, s, 0.0, -1.0, 0.0);
        let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m));
        let iso = Isometry3::from_parts(Translation3::new(position[0], position[1], position[2]), rot);
        Self::new(intrinsics, iso)
    }

    pub fn ego_to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.cam_to_ego.inverse_transform_point(&Point3::new(p[0], p[1], p[2]));
        [q.x, q.y, q.z]
    }

    /// Ego-frame point seen at pixel `(u, v)` with camera depth `depth`.
    pub fn unproject(&self, u: f64, v: f64, depth: f64) -> [f64; 3] {
        let k = &self.intrinsics;
        let pc = Point3::new((u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth);
        let p = self.cam_to_ego.transform_point(&pc);
        [p.x, p.y, p.z]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraRig {
    pub cameras: Vec<Camera>,
    pub image_width: u32,
    pub image_height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: [f64; 2],
    pub depth: f64,
    pub valid: bool,
}

impl CameraRig {
    pub fn new(cameras: Vec<Camera>, image_width: u32, image_height: u32) -> Result<Self> {
        if image_width == 0 || image_height == 0 {
            return Err(Error::Invalid("image size must be positive".into()));
        }
        Ok(Self {
            cameras,
            image_width,
            image_height,
        })
    }

    /// Projects ego-frame points into camera `camera_index`.
    ///
    /// Points behind the camera or outside the image are flagged, not dropped.
    /// Returns `None` when the camera index is out of range.
    pub fn project_points(&self, points: &[[f64; 3]], camera_index: usize) -> Option<Vec<Projection>> {
        let cam = self.cameras.get(camera_index)?;
        let k = &cam.intrinsics;
        let (w, h) = (self.image_width as f64, self.image_height as f64);
        Some(
            points
                .iter()
                .map(|&p| {
                    let [x, y, z] = cam.ego_to_camera(p);
                    let u = k.fx * x / z + k.cx;
                    let v = k.fy * y / z + k.cy;
                    let valid = z > 0.0 && (0.0..w).contains(&u) && (0.0..h).contains(&v);
                    Projection {
                        pixel: [u, v],
                        depth: z,
                        valid,
                    }
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn pose_close(a: &Pose2, b: &Pose2, tol: f64) -> bool {
        close(a.x, b.x, tol) && close(a.y, b.y, tol) && angle_diff(a.yaw, b.yaw).abs() <= tol
    }

    #[test]
    fn compose_examples() {
        let p = Pose2::new(1.5, -2.0, 0.7);
        assert_eq!(Pose2::identity().compose(&p), p);

        let t = Pose2::translation(1.0, 0.0).compose(&Pose2::translation(0.0, 1.0));
        assert_eq!(t, Pose2::new(1.0, 1.0, 0.0));

        // R(pi/2) * (1, 0) = (0, 1)
        let r = Pose2::rotation(FRAC_PI_2).compose(&Pose2::translation(1.0, 0.0));
        assert!(pose_close(&r, &Pose2::new(0.0, 1.0, FRAC_PI_2), 1e-15));
    }

    #[test]
    fn yaw_is_normalized() {
        assert!(close(Pose2::new(0.0, 0.0, 3.0 * PI).yaw, PI, 1e-12));
        assert!(close(Pose2::new(0.0, 0.0, -PI).yaw, PI, 1e-12));
        assert!(close(normalize_angle(-PI + 1e-9), -PI + 1e-9, 1e-15));
    }

    #[test]
    fn obb_examples() {
        let a = Obb2::new([0.0, 0.0], [0.5, 0.5], 0.0).unwrap();
        assert!(a.overlaps(&a));
        let far = Obb2::new([10.0, 0.0], [0.5, 0.5], 0.0).unwrap();
        assert!(!a.overlaps(&far));
        // edge contact is a collision
        let touching = Obb2::new([1.0, 0.0], [0.5, 0.5], 0.0).unwrap();
        assert!(a.overlaps(&touching));
        assert!(Obb2::new([0.0, 0.0], [0.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn obb_rotated_case_matches_monte_carlo() {
        // 2x1 box at origin vs 2x1 box at (1.4, 0) rotated pi/4.
        // Corner (-0.338, -0.707) of the rotated box sits inside the first
        // box, so the oracle below must find hits.
        let a = Obb2::new([0.0, 0.0], [1.0, 0.5], 0.0).unwrap();
        let b = Obb2::new([1.4, 0.0], [1.0, 0.5], PI / 4.0).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let hits = (0..1_000_000)
            .filter(|_| {
                let (lx, ly) = (rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5));
                let p = [b.center[0] + lx * b.axes()[0][0] + ly * b.axes()[1][0],
                         b.center[1] + lx * b.axes()[0][1] + ly * b.axes()[1][1]];
                p[0].abs() <= 1.0 && p[1].abs() <= 0.5
            })
            .count();
        assert!(hits > 0);
        assert!(a.overlaps(&b));
        assert!(obb_overlap(&b, &a));
    }

    #[test]
    fn yaw_estimation_examples() {
        let along_x: Vec<_> = (0..5).map(|i| [i as f64, 0.0]).collect();
        assert!(estimate_yaws(&along_x, 1.0).unwrap().iter().all(|&y| y == 0.0));

        let along_y: Vec<_> = (0..5).map(|i| [0.0, i as f64]).collect();
        assert!(estimate_yaws(&along_y, 0.0)
            .unwrap()
            .iter()
            .all(|&y| close(y, FRAC_PI_2, 1e-15)));

        let still = vec![[2.0, 3.0]; 4];
        assert_eq!(estimate_yaws(&still, 0.3).unwrap(), vec![0.3; 4]);

        assert_eq!(estimate_yaws(&[], 0.0), Err(Error::EmptyTrajectory));
        assert_eq!(estimate_yaws(&[[1.0, 1.0]], 0.5).unwrap(), vec![0.5]);
    }

    #[test]
    fn stationary_step_reuses_previous_heading() {
        let traj = [[0.0, 0.0], [1.0, 1.0], [1.0, 1.0 + 1e-4], [1.0, 2.0]];
        let y = estimate_yaws(&traj, 0.0).unwrap();
        assert!(close(y[0], PI / 4.0, 1e-15));
        assert_eq!(y[1], y[0]);
        assert!(close(y[2], FRAC_PI_2, 1e-15));
        assert_eq!(y[3], y[2]);
    }

    fn simple_rig() -> CameraRig {
        let k = Intrinsics {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 320.0,
        };
        let cam = Camera::new(k, Isometry3::identity()).unwrap();
        CameraRig::new(vec![cam], 640, 640).unwrap()
    }

    #[test]
    fn projection_examples() {
        let rig = simple_rig();
        // identity extrinsics: ego frame == camera frame here
        let out = rig
            .project_points(&[[0.0, 0.0, 1.0], [0.0, 0.0, -2.0], [1.0, 0.0, 4.0]], 0)
            .unwrap();
        assert_eq!(out[0].pixel, [320.0, 320.0]);
        assert!(out[0].valid);
        assert!(!out[1].valid);
        assert_eq!(out[2].pixel, [445.0, 320.0]);
        assert!(out[2].valid);
        assert!(rig.project_points(&[[0.0; 3]], 3).is_none());

        // far off to the side: in front of the camera, outside the image
        let off = rig.project_points(&[[10.0, 0.0, 1.0]], 0).unwrap();
        assert!(off[0].depth > 0.0 && !off[0].valid);
    }

    #[test]
    fn level_camera_sees_points_ahead() {
        let k = Intrinsics { fx: 800.0, fy: 800.0, cx: 800.0, cy: 450.0 };
        let cam = Camera::level(k, [1.5, 0.0, 1.6], 0.0).unwrap();
        let rig = CameraRig::new(vec![cam], 1600, 900).unwrap();
        let out = rig.project_points(&[[11.5, 0.0, 1.6], [-5.0, 0.0, 1.6], [11.5, 1.0, 1.6]], 0).unwrap();
        assert!(close(out[0].pixel[0], 800.0, 1e-9) && close(out[0].pixel[1], 450.0, 1e-9));
        assert!(close(out[0].depth, 10.0, 1e-12));
        assert!(!out[1].valid);
        // a point to the left lands left of the principal point
        assert!(out[2].pixel[0] < 800.0);
    }

    fn pose_strategy() -> impl Strategy<Value = Pose2> {
        (-50.0..50.0f64, -50.0..50.0f64, -PI..PI).prop_map(|(x, y, t)| Pose2::new(x, y, t))
    }

    fn obb_strategy() -> impl Strategy<Value = Obb2> {
        (-4.0..4.0f64, -4.0..4.0f64, 0.1..3.0f64, 0.1..2.0f64, -PI..PI)
            .prop_map(|(x, y, hx, hy, t)| Obb2::new([x, y], [hx, hy], t).unwrap())
    }

    /// Signed gap along the best separating axis; positive when disjoint.
    fn sat_margin(a: &Obb2, b: &Obb2) -> f64 {
        let d = [b.center[0] - a.center[0], b.center[1] - a.center[1]];
        let [a0, a1] = a.axes();
        let [b0, b1] = b.axes();
        [a0, a1, b0, b1]
            .into_iter()
            .map(|ax| dot(d, ax).abs() - a.projected_radius(ax) - b.projected_radius(ax))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    proptest! {
        #[test]
        fn compose_matches_sequential_transform(a in pose_strategy(), b in pose_strategy(),
                                                px in -10.0..10.0f64, py in -10.0..10.0f64) {
            let lhs = a.compose(&b).transform_point([px, py]);
            let rhs = a.transform_point(b.transform_point([px, py]));
            prop_assert!(close(lhs[0], rhs[0], 1e-12) && close(lhs[1], rhs[1], 1e-12));
        }

        #[test]
        fn compose_is_associative(a in pose_strategy(), b in pose_strategy(), c in pose_strategy()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(pose_close(&l, &r, 1e-12));
        }

        #[test]
        fn inverse_cancels(a in pose_strategy()) {
            prop_assert!(pose_close(&a.inverse().compose(&a), &Pose2::identity(), 1e-12));
            prop_assert!(pose_close(&a.compose(&a.inverse()), &Pose2::identity(), 1e-12));
        }

        #[test]
        fn overlap_is_symmetric(a in obb_strategy(), b in obb_strategy()) {
            prop_assert_eq!(a.overlaps(&b), b.overlaps(&a));
        }

        #[test]
        fn overlap_is_rigid_invariant(a in obb_strategy(), b in obb_strategy(), t in pose_strategy()) {
            prop_assume!(sat_margin(&a, &b).abs() > 1e-6);
            prop_assert_eq!(a.overlaps(&b), a.transformed(&t).overlaps(&b.transformed(&t)));
        }

        #[test]
        fn yaw_estimation_is_rotation_equivariant(
            pts in proptest::collection::vec((-20.0..20.0f64, -20.0..20.0f64), 2..10),
            theta in -PI..PI,
        ) {
            let traj: Vec<[f64; 2]> = pts.iter().map(|&(x, y)| [x, y]).collect();
            let rot = Pose2::rotation(theta);
            let rotated: Vec<[f64; 2]> = traj.iter().map(|&p| rot.transform_point(p)).collect();
            let y0 = estimate_yaws(&traj, 0.0).unwrap();
            let y1 = estimate_yaws(&rotated, theta).unwrap();
            for (t, w) in traj.windows(2).enumerate() {
                if dist(w[0], w[1]) > 10.0 * STATIONARY_EPS {
                    prop_assert!(angle_diff(y1[t], y0[t] + theta).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn unproject_then_project_round_trips(u in 0.0..1600.0f64, v in 0.0..900.0f64,
                                              depth in 0.5..80.0f64, yaw in -PI..PI) {
            let k = Intrinsics { fx: 1266.4, fy: 1266.4, cx: 816.3, cy: 491.5 };
            let cam = Camera::level(k, [1.7, 0.02, 1.5], yaw).unwrap();
            let p = cam.unproject(u, v, depth);
            let rig = CameraRig::new(vec![cam], 1600, 900).unwrap();
            let out = rig.project_points(&[p], 0).unwrap()[0];
            prop_assert!(close(out.pixel[0], u, 1e-9) && close(out.pixel[1], v, 1e-9));
            prop_assert!(out.valid);
        }
    }
}
