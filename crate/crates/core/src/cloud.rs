//! Point cloud container and axis-aligned region cropping.

use nalgebra::Point3;

use crate::error::{Error, Result};

/// An ordered set of 3D points in meters, with optional per-point RGB color.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    /// Per-point color, same length as `points` when present.
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: Vec<Point3<f64>>) -> Self {
        PointCloud {
            points,
            colors: None,
        }
    }

    pub fn with_colors(points: Vec<Point3<f64>>, colors: Vec<[u8; 3]>) -> Result<Self> {
        if points.len() != colors.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: colors.len(),
            });
        }
        Ok(PointCloud {
            points,
            colors: Some(colors),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every coordinate of every point is finite.
    pub fn is_finite(&self) -> bool {
        self.points.iter().all(|p| p.coords.iter().all(|c| c.is_finite()))
    }
}

/// Axis-aligned box with inclusive bounds, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    /// Builds a box, rejecting corners with `min > max` on any axis.
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Result<Self> {
        for axis in 0..3 {
            if min[axis] > max[axis] {
                return Err(Error::InvalidRegion(format!(
                    "min {} exceeds max {} on axis {}",
                    min[axis], max[axis], axis
                )));
            }
        }
        Ok(Aabb { min, max })
    }

    /// Inclusive containment test.
    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    /// Smallest box containing both `self` and `other`.
    pub fn merged(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: Point3::new(
                self.min.x.min(other.min.x),
                self.min.y.min(other.min.y),
                self.min.z.min(other.min.z),
            ),
            max: Point3::new(
                self.max.x.max(other.max.x),
                self.max.y.max(other.max.y),
                self.max.z.max(other.max.z),
            ),
        }
    }

    pub fn extent(&self) -> [f64; 3] {
        [
            self.max.x - self.min.x,
            self.max.y - self.min.y,
            self.max.z - self.min.z,
        ]
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
            0.5 * (self.min.z + self.max.z),
        )
    }
}

/// Keeps exactly the points inside `region` (inclusive), preserving order
/// and per-point colors.
pub fn crop(cloud: &PointCloud, region: &Aabb) -> PointCloud {
    let keep: Vec<bool> = cloud.points.iter().map(|p| region.contains(p)).collect();
    filter_cloud(cloud, &keep)
}

/// Keeps the points (and colors) at positions where `keep` is true.
pub fn filter_cloud(cloud: &PointCloud, keep: &[bool]) -> PointCloud {
    let points = cloud
        .points
        .iter()
        .zip(keep)
        .filter(|(_, k)| **k)
        .map(|(p, _)| *p)
        .collect();
    let colors = cloud.colors.as_ref().map(|cs| {
        cs.iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(c, _)| *c)
            .collect()
    });
    PointCloud { points, colors }
}
