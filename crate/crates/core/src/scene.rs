//! Plain-text scene descriptions for coverage analysis, and serialization
//! of coverage results.
//!
//! Format, one directive per line (`#` starts a comment):
//!
//! ```text
//! bounds    <minx> <miny> <minz> <maxx> <maxy> <maxz>
//! tile_size <meters>
//! camera <cine|sensor> <px> <py> <pz> <qx> <qy> <qz> <qw> <hfov_deg> <aspect> <near> <far>
//! ```
//!
//! Exactly one cine camera and at least one sensor are required.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Quaternion, UnitQuaternion};

use crate::cloud::Aabb;
use crate::error::{Error, Result};
use crate::trajectory::QUAT_NORM_TOL;
use crate::visibility::{CameraIntrinsics, CameraPose, CoverageReport, TileGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    pub pose: CameraPose,
    pub intrinsics: CameraIntrinsics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub grid: TileGrid,
    pub cine: Camera,
    pub sensors: Vec<Camera>,
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut bounds = None;
    let mut tile_size = None;
    let mut cine = None;
    let mut sensors = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::SceneParse {
            line: lineno + 1,
            msg,
        };
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("bounds") => {
                let v = parse_floats::<6>(&mut tokens).map_err(&err)?;
                bounds = Some(
                    Aabb::new(Point3::new(v[0], v[1], v[2]), Point3::new(v[3], v[4], v[5]))
                        .map_err(|e| err(e.to_string()))?,
                );
            }
            Some("tile_size") => {
                let v = parse_floats::<1>(&mut tokens).map_err(&err)?;
                tile_size = Some(v[0]);
            }
            Some("camera") => {
                let role = tokens.next().ok_or_else(|| err("missing camera role".into()))?;
                let v = parse_floats::<11>(&mut tokens).map_err(&err)?;
                let quat = Quaternion::new(v[6], v[3], v[4], v[5]);
                if (quat.norm() - 1.0).abs() > QUAT_NORM_TOL {
                    return Err(err(format!(
                        "quaternion norm {} deviates from 1 by more than {QUAT_NORM_TOL}",
                        quat.norm()
                    )));
                }
                let camera = Camera {
                    pose: CameraPose {
                        position: Point3::new(v[0], v[1], v[2]),
                        orientation: UnitQuaternion::new_normalize(quat),
                    },
                    intrinsics: CameraIntrinsics {
                        horizontal_fov_deg: v[7],
                        aspect_ratio: v[8],
                        near: v[9],
                        far: v[10],
                    },
                };
                match role {
                    "cine" => {
                        if cine.replace(camera).is_some() {
                            return Err(err("more than one cine camera".into()));
                        }
                    }
                    "sensor" => sensors.push(camera),
                    other => return Err(err(format!("unknown camera role {other:?}"))),
                }
            }
            Some(other) => return Err(err(format!("unknown directive {other:?}"))),
            None => {}
        }
        if tokens.next().is_some() {
            return Err(err("trailing tokens".into()));
        }
    }

    let missing = |what: &str| Error::SceneParse {
        line: 0,
        msg: format!("missing {what}"),
    };
    let bounds = bounds.ok_or_else(|| missing("bounds line"))?;
    let tile_size = tile_size.ok_or_else(|| missing("tile_size line"))?;
    let cine = cine.ok_or_else(|| missing("cine camera"))?;
    if sensors.is_empty() {
        return Err(missing("at least one sensor camera"));
    }
    Ok(Scene {
        grid: TileGrid::new(bounds, tile_size)?,
        cine,
        sensors,
    })
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text)
}

fn parse_floats<const N: usize>(
    tokens: &mut std::str::SplitWhitespace,
) -> std::result::Result<[f64; N], String> {
    let mut out = [0.0f64; N];
    for slot in out.iter_mut() {
        let tok = tokens.next().ok_or_else(|| format!("expected {N} numbers"))?;
        *slot = tok.parse().map_err(|_| format!("bad number {tok:?}"))?;
    }
    Ok(out)
}

/// Key/value summary of a coverage check.
pub fn format_coverage_report(report: &CoverageReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "covered = {}", report.covered);
    let _ = writeln!(out, "sensor_visible_tiles = {}", report.sensor_visible.len());
    let _ = writeln!(out, "cine_visible_tiles = {}", report.cine_visible.len());
    let _ = writeln!(out, "missing_tiles = {}", report.missing.len());
    out
}

/// Missing tile indices as `i,j,k` CSV rows, ascending.
pub fn missing_tiles_csv(report: &CoverageReport) -> String {
    let mut out = String::from("i,j,k\n");
    for t in &report.missing {
        let _ = writeln!(out, "{},{},{}", t.i, t.j, t.k);
    }
    out
}

/// One-line `px py pz qx qy qz qw` pose encoding, matching the camera pose
/// fields of the scene format.
pub fn format_camera_pose(pose: &CameraPose) -> String {
    let q = pose.orientation.quaternion();
    format!(
        "{} {} {} {} {} {} {}\n",
        pose.position.x, pose.position.y, pose.position.z, q.i, q.j, q.k, q.w
    )
}
