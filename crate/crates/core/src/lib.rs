//! Evaluation of SLAM point-cloud maps against digital-twin ground truth.
//!
//! The pipeline: parse a voxel occupancy grid exported from a simulated
//! environment, convert it to a ground-truth point cloud, rigidly register
//! an estimated map to it with ICP, and report thresholded
//! nearest-neighbor error statistics. A companion visibility model checks
//! that the viewpoint driving tile streaming actually loads everything the
//! simulated sensors can see.

// Validations are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod error;
pub mod eval;
pub mod icp;
pub mod index;
pub mod io;
pub mod scene;
pub mod trajectory;
pub mod transform;
pub mod visibility;
pub mod voxel;

pub use cloud::{crop, Aabb, PointCloud};
pub use error::{Error, Result};
pub use eval::{
    compare_reports, correspondences, error_stats, evaluate, histogram, ComparisonSummary,
    CorrespondenceSet, EvaluationReport,
};
pub use icp::{estimate_rigid, icp, IcpConfig, IcpResult};
pub use index::SpatialIndex;
pub use io::{load_cloud, save_cloud, PlyFormat};
pub use scene::{load_scene, parse_scene, Camera, Scene};
pub use trajectory::{load_trajectory, transform_trajectory, Pose, Trajectory};
pub use transform::{transform_cloud, RigidTransform};
pub use visibility::{
    coverage_check, frustum_from, place_cine_camera, visible_tiles, CameraIntrinsics, CameraPose,
    CoverageReport, Frustum, TileGrid, TileIndex,
};
pub use voxel::{
    load_binvox, parse_binvox, save_binvox, voxel_to_points, write_binvox, ConversionMode,
    VoxelGrid,
};
