//! Viewpoint-driven tile loading model: perspective frusta over a uniform
//! tile grid, visible-tile determination, sensor coverage validation, and
//! top-down cine-camera placement.
//!
//! Camera convention: local forward is +X, left is +Y, up is +Z; the
//! horizontal field of view spans the local Y axis.

use std::collections::BTreeSet;

use nalgebra::{Point3, UnitQuaternion, Vector3};

use crate::cloud::Aabb;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CameraPose {
    pub position: Point3<f64>,
    /// Rotation from camera-local to world axes.
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    /// Full horizontal field of view in degrees, in (0, 180).
    pub horizontal_fov_deg: f64,
    /// Width over height; the vertical FOV follows from
    /// `tan(v/2) = tan(h/2) / aspect`.
    pub aspect_ratio: f64,
    pub near: f64,
    pub far: f64,
}

/// One face of a frustum. Points with `normal . p + offset >= 0` are on the
/// inner side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) + self.offset
    }
}

/// Perspective viewing volume bounded by six inward-facing planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Frustum {
    planes: [Plane; 6],
}

impl Frustum {
    pub fn planes(&self) -> &[Plane; 6] {
        &self.planes
    }

    /// Point containment, boundary inclusive.
    pub fn contains_point(&self, p: &Point3<f64>) -> bool {
        self.planes.iter().all(|pl| pl.signed_distance(p) >= 0.0)
    }

    /// Six-plane rejection test. `false` guarantees the box does not
    /// intersect the frustum; `true` may be a conservative false positive.
    pub fn may_intersect_aabb(&self, aabb: &Aabb) -> bool {
        for plane in &self.planes {
            // Box vertex farthest along the plane normal.
            let v = Point3::new(
                if plane.normal.x >= 0.0 { aabb.max.x } else { aabb.min.x },
                if plane.normal.y >= 0.0 { aabb.max.y } else { aabb.min.y },
                if plane.normal.z >= 0.0 { aabb.max.z } else { aabb.min.z },
            );
            if plane.signed_distance(&v) < 0.0 {
                return false;
            }
        }
        true
    }
}

/// Builds the world-frame frustum of a perspective camera.
pub fn frustum_from(pose: &CameraPose, intr: &CameraIntrinsics) -> Result<Frustum> {
    if !(intr.horizontal_fov_deg > 0.0 && intr.horizontal_fov_deg < 180.0) {
        return Err(Error::InvalidFrustum(format!(
            "horizontal FOV {} deg must lie in (0, 180)",
            intr.horizontal_fov_deg
        )));
    }
    if !(intr.aspect_ratio > 0.0) {
        return Err(Error::InvalidFrustum(format!(
            "aspect ratio {} must be positive",
            intr.aspect_ratio
        )));
    }
    if !(intr.near > 0.0 && intr.far > intr.near) {
        return Err(Error::InvalidFrustum(format!(
            "need 0 < near < far, got near {} far {}",
            intr.near, intr.far
        )));
    }

    let h_half = (intr.horizontal_fov_deg / 2.0).to_radians();
    let v_half = (h_half.tan() / intr.aspect_ratio).atan();
    let (sh, ch) = (h_half.sin(), h_half.cos());
    let (sv, cv) = (v_half.sin(), v_half.cos());

    // Local planes for a camera at the origin looking along +X.
    let local = [
        Plane { normal: Vector3::new(1.0, 0.0, 0.0), offset: -intr.near },
        Plane { normal: Vector3::new(-1.0, 0.0, 0.0), offset: intr.far },
        Plane { normal: Vector3::new(sh, -ch, 0.0), offset: 0.0 },
        Plane { normal: Vector3::new(sh, ch, 0.0), offset: 0.0 },
        Plane { normal: Vector3::new(sv, 0.0, -cv), offset: 0.0 },
        Plane { normal: Vector3::new(sv, 0.0, cv), offset: 0.0 },
    ];

    let planes = local.map(|pl| {
        let normal = pose.orientation * pl.normal;
        Plane {
            normal,
            offset: pl.offset - normal.dot(&pose.position.coords),
        }
    });
    Ok(Frustum { planes })
}

/// Index of one tile in a [`TileGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TileIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Uniform decomposition of a world-frame box into cubical tiles. Boundary
/// tiles are clipped so the grid covers exactly the analysis region.
#[derive(Debug, Clone, PartialEq)]
pub struct TileGrid {
    bounds: Aabb,
    tile_size: f64,
    counts: [usize; 3],
}

impl TileGrid {
    pub fn new(bounds: Aabb, tile_size: f64) -> Result<Self> {
        if !(tile_size > 0.0) {
            return Err(Error::InvalidRegion(format!(
                "tile size {tile_size} must be positive"
            )));
        }
        let extent = bounds.extent();
        let counts = [
            ((extent[0] / tile_size).ceil() as usize).max(1),
            ((extent[1] / tile_size).ceil() as usize).max(1),
            ((extent[2] / tile_size).ceil() as usize).max(1),
        ];
        Ok(TileGrid {
            bounds,
            tile_size,
            counts,
        })
    }

    pub fn bounds(&self) -> &Aabb {
        &self.bounds
    }

    pub fn tile_size(&self) -> f64 {
        self.tile_size
    }

    /// Tiles per axis.
    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn tile_count(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    /// World-frame box of a tile, clipped to the grid bounds.
    pub fn tile_box(&self, tile: TileIndex) -> Aabb {
        let lo = |axis: usize, idx: usize| self.bounds.min[axis] + idx as f64 * self.tile_size;
        let hi = |axis: usize, idx: usize| {
            (self.bounds.min[axis] + (idx + 1) as f64 * self.tile_size).min(self.bounds.max[axis])
        };
        Aabb {
            min: Point3::new(lo(0, tile.i), lo(1, tile.j), lo(2, tile.k)),
            max: Point3::new(hi(0, tile.i), hi(1, tile.j), hi(2, tile.k)),
        }
    }

    /// Tile containing `p`, or `None` outside the grid bounds. Points on
    /// interior tile boundaries belong to the higher-indexed tile; points on
    /// the outer max face belong to the last tile.
    pub fn tile_of(&self, p: &Point3<f64>) -> Option<TileIndex> {
        if !self.bounds.contains(p) {
            return None;
        }
        let idx = |axis: usize| -> usize {
            let rel = (p[axis] - self.bounds.min[axis]) / self.tile_size;
            (rel.floor() as usize).min(self.counts[axis] - 1)
        };
        Some(TileIndex {
            i: idx(0),
            j: idx(1),
            k: idx(2),
        })
    }

    pub fn all_tiles(&self) -> impl Iterator<Item = TileIndex> + '_ {
        (0..self.counts[0]).flat_map(move |i| {
            (0..self.counts[1]).flat_map(move |j| {
                (0..self.counts[2]).map(move |k| TileIndex { i, j, k })
            })
        })
    }
}

/// Tiles whose box passes the six-plane test against the frustum. The test
/// never reports a truly intersecting tile as outside; conservative false
/// positives near frustum edges are possible and only cause extra loading.
pub fn visible_tiles(frustum: &Frustum, grid: &TileGrid) -> BTreeSet<TileIndex> {
    grid.all_tiles()
        .filter(|&t| frustum.may_intersect_aabb(&grid.tile_box(t)))
        .collect()
}

/// Result of checking that every sensor-visible tile is also loaded by the
/// cine-camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub sensor_visible: BTreeSet<TileIndex>,
    pub cine_visible: BTreeSet<TileIndex>,
    /// Sensor-visible tiles the cine-camera does not load.
    pub missing: BTreeSet<TileIndex>,
    pub covered: bool,
}

/// Compares the union of sensor-visible tiles against the cine-visible set.
pub fn coverage_check(cine: &Frustum, sensors: &[Frustum], grid: &TileGrid) -> CoverageReport {
    let mut sensor_visible = BTreeSet::new();
    for sensor in sensors {
        sensor_visible.extend(visible_tiles(sensor, grid));
    }
    let cine_visible = visible_tiles(cine, grid);
    let missing: BTreeSet<TileIndex> = sensor_visible
        .difference(&cine_visible)
        .copied()
        .collect();
    let covered = missing.is_empty();
    CoverageReport {
        sensor_visible,
        cine_visible,
        missing,
        covered,
    }
}

/// Orientation looking straight down (local +X mapped to world -Z).
pub fn straight_down() -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2)
}

/// Places a straight-down cine-camera centered above the sensor-visible
/// region at the lowest covering altitude, searched by doubling followed by
/// bisection to a 1 m tolerance.
pub fn place_cine_camera(
    sensors: &[Frustum],
    grid: &TileGrid,
    intr: &CameraIntrinsics,
) -> Result<(CameraPose, CoverageReport)> {
    let mut sensor_visible = BTreeSet::new();
    for sensor in sensors {
        sensor_visible.extend(visible_tiles(sensor, grid));
    }

    let region = sensor_visible
        .iter()
        .map(|&t| grid.tile_box(t))
        .reduce(|a, b| a.merged(&b))
        .unwrap_or_else(|| {
            let c = grid.bounds().center();
            Aabb {
                min: Point3::new(c.x, c.y, grid.bounds().max.z),
                max: Point3::new(c.x, c.y, grid.bounds().max.z),
            }
        });

    let center = region.center();
    let top = region.max.z;
    let height_budget = intr.far - (region.max.z - region.min.z);
    if height_budget <= 0.0 {
        return Err(Error::CoverageUnreachable);
    }

    let pose_at = |altitude: f64| CameraPose {
        position: Point3::new(center.x, center.y, top + altitude),
        orientation: straight_down(),
    };
    let covered_at = |altitude: f64| -> Result<bool> {
        let frustum = frustum_from(&pose_at(altitude), intr)?;
        let cine_visible = visible_tiles(&frustum, grid);
        Ok(sensor_visible.is_subset(&cine_visible))
    };

    let start = intr.near.max(1.0).min(height_budget);
    let mut high = start;
    let mut low = start;
    if !covered_at(start)? {
        loop {
            if low >= height_budget {
                return Err(Error::CoverageUnreachable);
            }
            high = (low * 2.0).min(height_budget);
            if covered_at(high)? {
                break;
            }
            low = high;
        }
        while high - low > 1.0 {
            let mid = 0.5 * (low + high);
            if covered_at(mid)? {
                high = mid;
            } else {
                low = mid;
            }
        }
    }

    let pose = pose_at(high);
    let frustum = frustum_from(&pose, intr)?;
    let report = coverage_check(&frustum, sensors, grid);
    Ok((pose, report))
}
