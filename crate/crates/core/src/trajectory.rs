//! Timestamped pose sequences, the `timestamp tx ty tz qx qy qz qw` text
//! layout, and rigid re-framing after registration.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Quaternion, Rotation3, UnitQuaternion};

use crate::error::{Error, Result};
use crate::transform::RigidTransform;

pub const QUAT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub timestamp: f64,
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

/// Time-ordered pose sequence with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub poses: Vec<Pose>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Applies `t` to every pose: positions map through the transform,
/// orientations are left-multiplied by its rotation, timestamps stay.
pub fn transform_trajectory(traj: &Trajectory, t: &RigidTransform) -> Trajectory {
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(
        *t.rotation(),
    ));
    Trajectory {
        poses: traj
            .poses
            .iter()
            .map(|p| Pose {
                timestamp: p.timestamp,
                position: t.apply(&p.position),
                orientation: rot * p.orientation,
            })
            .collect(),
    }
}

/// Parses `timestamp tx ty tz qx qy qz qw` lines. Blank and `#` lines are
/// skipped; malformed lines are reported with their line number.
pub fn parse_trajectory(text: &str) -> Result<Trajectory> {
    let mut poses: Vec<Pose> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::TrajectoryParse {
            line: lineno + 1,
            msg,
        };
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(format!("non-numeric field in {line:?}")))?;
        if values.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", values.len())));
        }
        let quat = Quaternion::new(values[7], values[4], values[5], values[6]);
        if (quat.norm() - 1.0).abs() > QUAT_NORM_TOL {
            return Err(err(format!(
                "quaternion norm {} deviates from 1 by more than {QUAT_NORM_TOL}",
                quat.norm()
            )));
        }
        if let Some(prev) = poses.last() {
            if values[0] <= prev.timestamp {
                return Err(err(format!(
                    "timestamp {} not strictly increasing (previous {})",
                    values[0], prev.timestamp
                )));
            }
        }
        poses.push(Pose {
            timestamp: values[0],
            position: Point3::new(values[1], values[2], values[3]),
            orientation: UnitQuaternion::new_normalize(quat),
        });
    }
    Ok(Trajectory { poses })
}

pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut out = String::new();
    for p in &traj.poses {
        let q = p.orientation.quaternion();
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {}",
            p.timestamp, p.position.x, p.position.y, p.position.z, q.i, q.j, q.k, q.w
        );
    }
    out
}

/// `x,y,z` CSV rows (one per pose) for top-down overlay plots.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("x,y,z\n");
    for p in &traj.poses {
        let _ = writeln!(out, "{},{},{}", p.position.x, p.position.y, p.position.z);
    }
    out
}

pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trajectory(&text)
}

pub fn save_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_trajectory(traj)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix3, Vector3};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sample_trajectory(rng: &mut StdRng, n: usize) -> Trajectory {
        let poses = (0..n)
            .map(|i| Pose {
                timestamp: i as f64 * 0.1,
                position: Point3::new(
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                ),
                orientation: UnitQuaternion::from_euler_angles(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ),
            })
            .collect();
        Trajectory { poses }
    }

    #[test]
    fn parses_pose_lines_and_skips_comments() {
        let traj = parse_trajectory("# ts x y z qx qy qz qw\n0.0 1 2 3 0 0 0 1\n0.1 4 5 6 0 0 0 1\n").unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.poses[1].position, Point3::new(4.0, 5.0, 6.0));
    }

    #[test]
    fn malformed_line_reports_its_number() {
        let err = parse_trajectory("0.0 1 2 3 0 0 0 1\n0.1 bad 5 6 0 0 0 1\n").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 2, .. }));
        let err = parse_trajectory("0.0 1 2 3 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 1, .. }));
    }

    #[test]
    fn non_increasing_timestamps_rejected() {
        let err = parse_trajectory("0.5 0 0 0 0 0 0 1\n0.5 1 1 1 0 0 0 1\n").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 2, .. }));
    }

    #[test]
    fn non_unit_quaternion_rejected() {
        let err = parse_trajectory("0.0 0 0 0 0 0 0 2\n").unwrap_err();
        assert!(matches!(err, Error::TrajectoryParse { line: 1, .. }));
    }

    #[test]
    fn identity_transform_is_a_noop() {
        let mut rng = StdRng::seed_from_u64(1);
        let traj = sample_trajectory(&mut rng, 10);
        assert_eq!(transform_trajectory(&traj, &RigidTransform::identity()), traj);
    }

    #[test]
    fn translation_shifts_positions_only() {
        let mut rng = StdRng::seed_from_u64(2);
        let traj = sample_trajectory(&mut rng, 5);
        let shift =
            RigidTransform::new(Matrix3::identity(), Vector3::new(1.0, -2.0, 0.5)).unwrap();
        let moved = transform_trajectory(&traj, &shift);
        for (a, b) in traj.poses.iter().zip(&moved.poses) {
            assert_eq!(b.position, a.position + Vector3::new(1.0, -2.0, 0.5));
            assert_eq!(b.orientation, a.orientation);
            assert_eq!(b.timestamp, a.timestamp);
        }
    }

    #[test]
    fn transform_then_inverse_restores_poses() {
        let mut rng = StdRng::seed_from_u64(3);
        let traj = sample_trajectory(&mut rng, 20);
        let t = crate::transform::tests::random_transform(&mut rng);
        let back = transform_trajectory(&transform_trajectory(&traj, &t), &t.invert());
        for (a, b) in traj.poses.iter().zip(&back.poses) {
            assert_relative_eq!(a.position, b.position, epsilon = 1e-9);
            assert!(a.orientation.angle_to(&b.orientation) < 1e-9);
        }
    }

    #[test]
    fn inter_pose_distances_preserved() {
        let mut rng = StdRng::seed_from_u64(4);
        let traj = sample_trajectory(&mut rng, 15);
        let t = crate::transform::tests::random_transform(&mut rng);
        let moved = transform_trajectory(&traj, &t);
        for i in 0..traj.len() {
            for j in (i + 1)..traj.len() {
                let d0 = (traj.poses[i].position - traj.poses[j].position).norm();
                let d1 = (moved.poses[i].position - moved.poses[j].position).norm();
                assert_relative_eq!(d0, d1, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut rng = StdRng::seed_from_u64(5);
        let traj = sample_trajectory(&mut rng, 8);
        let back = parse_trajectory(&format_trajectory(&traj)).unwrap();
        for (a, b) in traj.poses.iter().zip(&back.poses) {
            assert_eq!(a.timestamp, b.timestamp);
            assert_eq!(a.position, b.position);
            assert!(a.orientation.angle_to(&b.orientation) < 1e-12);
        }
    }

    #[test]
    fn csv_has_one_row_per_pose() {
        let mut rng = StdRng::seed_from_u64(6);
        let traj = sample_trajectory(&mut rng, 7);
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,z"));
        assert_eq!(lines.count(), 7);
    }
}
