//! Rigid transforms (rotation + translation) and their application to clouds.

use std::path::Path;

use nalgebra::{Matrix3, Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Per-entry tolerance for the orthonormality and determinant checks.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// A proper rigid transform: `p -> R*p + t` with `R` orthonormal, det(R) = +1.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Validates orthonormality (`RᵀR = I` within 1e-9 per entry) and
    /// `det(R) = 1` within 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let gram = rotation.transpose() * rotation;
        let identity = Matrix3::<f64>::identity();
        for r in 0..3 {
            for c in 0..3 {
                if (gram[(r, c)] - identity[(r, c)]).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidTransform(format!(
                        "rotation is not orthonormal (RᵀR deviates by {:e} at ({r},{c}))",
                        (gram[(r, c)] - identity[(r, c)]).abs()
                    )));
                }
            }
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant is {det}, expected +1"
            )));
        }
        Ok(RigidTransform {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Bypasses validation. For matrices produced by constructions that
    /// guarantee orthonormality (SVD output, products of valid rotations).
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Inverse transform: `p -> Rᵀ*(p - t)`.
    pub fn invert(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Composition applying `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    /// Row-major rotation entries followed by the translation.
    pub fn to_array(&self) -> [f64; 12] {
        let r = &self.rotation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ]
    }

    pub fn from_array(a: &[f64; 12]) -> Result<Self> {
        let rotation = Matrix3::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]);
        let translation = Vector3::new(a[9], a[10], a[11]);
        Self::new(rotation, translation)
    }
}

/// Applies `t` to every point; colors are carried through unchanged.
pub fn transform_cloud(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| t.apply(p)).collect(),
        colors: cloud.colors.clone(),
    }
}

/// Serializes as 12 numbers: three rotation rows, then the translation.
pub fn format_transform(t: &RigidTransform) -> String {
    let a = t.to_array();
    format!(
        "{} {} {}\n{} {} {}\n{} {} {}\n{} {} {}\n",
        a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10], a[11]
    )
}

/// Parses 12 whitespace-separated numbers (row-major rotation, then translation).
pub fn parse_transform(text: &str) -> Result<RigidTransform> {
    let mut values = [0.0f64; 12];
    let mut count = 0;
    for tok in text.split_whitespace() {
        if count == 12 {
            return Err(Error::InvalidTransform(
                "expected exactly 12 numbers".into(),
            ));
        }
        values[count] = tok
            .parse()
            .map_err(|_| Error::InvalidTransform(format!("bad number {tok:?}")))?;
        count += 1;
    }
    if count != 12 {
        return Err(Error::InvalidTransform(format!(
            "expected 12 numbers, got {count}"
        )));
    }
    RigidTransform::from_array(&values)
}

pub fn write_transform(t: &RigidTransform, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_transform(t)).map_err(|e| Error::io(path, e))
}

pub fn read_transform(path: impl AsRef<Path>) -> Result<RigidTransform> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_transform(&text)
}
