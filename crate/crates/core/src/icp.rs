//! Point-to-point ICP registration.
//!
//! Each iteration transforms the source by the current estimate, pairs every
//! source point with its nearest target point, rejects pairs beyond the
//! search radius, refits a rigid transform by least squares, and stops when
//! the relative RMSE change between consecutive iterations drops below the
//! configured threshold.

use nalgebra::{Matrix3, Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::index::SpatialIndex;
use crate::transform::RigidTransform;

/// Floor for the relative-change denominator, well below any meaningful
/// RMSE in meters.
const RMSE_EPS: f64 = 1e-12;

/// Relative singular-value cutoff below which the pair configuration is
/// treated as rank-deficient (collinear or coincident points).
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IcpConfig {
    /// Correspondence rejection radius in meters.
    pub search_radius: f64,
    /// Relative RMSE change below which iteration stops.
    pub rmse_threshold: f64,
    /// Iteration cap.
    pub max_iterations: usize,
    /// Fewer surviving pairs than this at any iteration is a divergence.
    pub min_correspondences: usize,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            search_radius: 1.0,
            rmse_threshold: 1e-5,
            max_iterations: 1500,
            min_correspondences: 10,
        }
    }
}

impl IcpConfig {
    fn validate(&self) -> Result<()> {
        if !(self.search_radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "search_radius {} must be positive",
                self.search_radius
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.rmse_threshold >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rmse_threshold {} must be non-negative",
                self.rmse_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IcpResult {
    /// Source-to-target transform, all increments composed with the init.
    pub transform: RigidTransform,
    /// RMSE over accepted pairs at the final iteration, in meters.
    pub final_rmse: f64,
    pub iterations_run: usize,
    /// True when the relative-RMSE stopping rule fired, false when the
    /// iteration cap was exhausted.
    pub converged: bool,
    /// Accepted pair count at the final iteration.
    pub correspondence_count: usize,
    /// Post-refit RMSE of every iteration, `rmse_history.len() == iterations_run`.
    pub rmse_history: Vec<f64>,
}

/// Least-squares rigid transform mapping `source` onto `target` via the
/// SVD (Kabsch) construction, with the reflection case corrected so that
/// `det(R) = +1`.
pub fn estimate_rigid(
    source: &[Point3<f64>],
    target: &[Point3<f64>],
) -> Result<RigidTransform> {
    if source.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: source.len(),
            right: target.len(),
        });
    }
    if source.len() < 3 {
        return Err(Error::TooFewPairs { got: source.len() });
    }

    let n = source.len() as f64;
    let centroid_src: Vector3<f64> = source.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;
    let centroid_tgt: Vector3<f64> = target.iter().map(|p| p.coords).sum::<Vector3<f64>>() / n;

    let mut cross_cov = Matrix3::zeros();
    for (s, t) in source.iter().zip(target) {
        let sd = s.coords - centroid_src;
        let td = t.coords - centroid_tgt;
        cross_cov += sd * td.transpose();
    }

    let svd = cross_cov.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::DegenerateGeometry("SVD failed".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::DegenerateGeometry("SVD failed".into()))?;

    // Rank >= 2 is needed to pin down the rotation; collinear or coincident
    // configurations leave it underdetermined.
    let sv = svd.singular_values;
    if sv[1] <= DEGENERACY_TOL * sv[0].max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateGeometry(
            "point pairs are collinear or coincident".into(),
        ));
    }

    let v = v_t.transpose();
    let mut rotation = v * u.transpose();
    if rotation.determinant() < 0.0 {
        let flip = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        rotation = v * flip * u.transpose();
    }
    let translation = centroid_tgt - rotation * centroid_src;
    Ok(RigidTransform::from_parts_unchecked(rotation, translation))
}

/// Aligns `source` to `target` starting from the coarse `init` transform.
pub fn icp(
    source: &PointCloud,
    target: &PointCloud,
    config: &IcpConfig,
    init: &RigidTransform,
) -> Result<IcpResult> {
    config.validate()?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyCloud);
    }

    let index = SpatialIndex::build(target)?;
    let mut current = init.clone();
    let mut prev_rmse: Option<f64> = None;
    let mut history = Vec::new();
    let mut pair_count = 0usize;
    let mut converged = false;
    let mut iterations_run = 0usize;

    let mut matched_src: Vec<Point3<f64>> = Vec::with_capacity(source.len());
    let mut matched_tgt: Vec<Point3<f64>> = Vec::with_capacity(source.len());

    for iteration in 1..=config.max_iterations {
        iterations_run = iteration;
        matched_src.clear();
        matched_tgt.clear();
        for p in &source.points {
            let moved = current.apply(p);
            let (idx, dist) = index.nearest(&moved);
            if dist <= config.search_radius {
                matched_src.push(moved);
                matched_tgt.push(*index.point(idx));
            }
        }
        if matched_src.len() < config.min_correspondences {
            return Err(Error::AlignmentDiverged {
                iteration,
                minimum: config.min_correspondences,
            });
        }
        pair_count = matched_src.len();

        // An exactly-aligned pair set has the identity as its least-squares
        // optimum; skipping the refit keeps the RMSE at exactly zero.
        let pre_refit_sse: f64 = matched_src
            .iter()
            .zip(&matched_tgt)
            .map(|(s, t)| (s - t).norm_squared())
            .sum();
        let increment = if pre_refit_sse == 0.0 {
            RigidTransform::identity()
        } else {
            estimate_rigid(&matched_src, &matched_tgt)?
        };
        current = increment.compose(&current);

        let sum_sq: f64 = matched_src
            .iter()
            .zip(&matched_tgt)
            .map(|(s, t)| (increment.apply(s) - t).norm_squared())
            .sum();
        let rmse = (sum_sq / pair_count as f64).sqrt();
        history.push(rmse);

        if let Some(prev) = prev_rmse {
            let relative_change = (prev - rmse).abs() / prev.max(RMSE_EPS);
            if relative_change < config.rmse_threshold {
                converged = true;
                break;
            }
        }
        prev_rmse = Some(rmse);
    }

    Ok(IcpResult {
        transform: current,
        final_rmse: *history.last().unwrap(),
        iterations_run,
        converged,
        correspondence_count: pair_count,
        rmse_history: history,
    })
}
