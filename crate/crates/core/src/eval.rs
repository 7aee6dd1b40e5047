//! Post-alignment map evaluation: thresholded correspondences, error
//! statistics, distance histograms, and cross-experiment report comparison.

use std::fmt::Write as _;
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::index::SpatialIndex;

/// Map-to-model pairings under a distance threshold. Each map point appears
/// at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    /// `(map point index, model point index, distance in meters)`.
    pub pairs: Vec<(usize, usize, f64)>,
    /// Rejection threshold the pairs were built with, in meters.
    pub threshold: f64,
}

/// Scalar statistics plus the binned distance distribution of one
/// evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub map_point_count: usize,
    pub correspondence_count: usize,
    pub mean_error: f64,
    pub std_dev: f64,
    pub threshold: f64,
    /// `(bin lower edge in meters, count)`, bins covering `[0, threshold]`.
    pub histogram: Vec<(f64, u64)>,
}

/// Differences between two evaluation reports. Ratios are `a` relative to
/// `b`; count differences are expressed against both the smaller and the
/// larger base.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSummary {
    pub mean_delta: f64,
    pub std_dev_delta: f64,
    /// `std_a / std_b`.
    pub std_dev_ratio: f64,
    /// `(std_a / std_b)^2`.
    pub variance_ratio: f64,
    pub map_point_diff_pct_of_smaller: f64,
    pub map_point_diff_pct_of_larger: f64,
    pub correspondence_diff_pct_of_smaller: f64,
    pub correspondence_diff_pct_of_larger: f64,
}

/// Pairs every map point with its nearest model point, keeping pairs within
/// `threshold` (inclusive). Map points whose nearest model point is farther
/// away are dropped as outliers.
pub fn correspondences(
    map_cloud: &PointCloud,
    model_index: &SpatialIndex,
    threshold: f64,
) -> Result<CorrespondenceSet> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "correspondence threshold {threshold} must be positive"
        )));
    }
    if model_index.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut pairs = Vec::new();
    for (map_idx, p) in map_cloud.points.iter().enumerate() {
        let (model_idx, dist) = model_index.nearest(p);
        if dist <= threshold {
            pairs.push((map_idx, model_idx, dist));
        }
    }
    Ok(CorrespondenceSet { pairs, threshold })
}

/// Arithmetic mean and population standard deviation of the pair distances.
pub fn error_stats(corr: &CorrespondenceSet) -> Result<(f64, f64, usize)> {
    if corr.pairs.is_empty() {
        return Err(Error::EmptyCorrespondences);
    }
    let n = corr.pairs.len();
    let mean = corr.pairs.iter().map(|(_, _, d)| d).sum::<f64>() / n as f64;
    let var = corr
        .pairs
        .iter()
        .map(|(_, _, d)| (d - mean) * (d - mean))
        .sum::<f64>()
        / n as f64;
    Ok((mean, var.sqrt(), n))
}

/// Bins the pair distances over `[0, threshold]`. Distance `d` lands in bin
/// `floor(d / bin_width)`; `d == threshold` goes to the last bin.
pub fn histogram(corr: &CorrespondenceSet, bin_width: f64) -> Result<Vec<(f64, u64)>> {
    if !(bin_width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "histogram bin width {bin_width} must be positive"
        )));
    }
    let bin_count = ((corr.threshold / bin_width).ceil() as usize).max(1);
    let mut bins: Vec<(f64, u64)> = (0..bin_count)
        .map(|i| (i as f64 * bin_width, 0u64))
        .collect();
    for &(_, _, d) in &corr.pairs {
        let idx = ((d / bin_width).floor() as usize).min(bin_count - 1);
        bins[idx].1 += 1;
    }
    Ok(bins)
}

/// Runs correspondence construction, statistics, and binning in one pass.
/// An empty correspondence set yields a report with zero counts and zeroed
/// statistics rather than an error.
pub fn evaluate(
    map_cloud: &PointCloud,
    model_index: &SpatialIndex,
    threshold: f64,
    bin_width: f64,
) -> Result<EvaluationReport> {
    let corr = correspondences(map_cloud, model_index, threshold)?;
    let bins = histogram(&corr, bin_width)?;
    let (mean, std_dev, count) = match error_stats(&corr) {
        Ok(stats) => stats,
        Err(Error::EmptyCorrespondences) => (0.0, 0.0, 0),
        Err(e) => return Err(e),
    };
    Ok(EvaluationReport {
        map_point_count: map_cloud.len(),
        correspondence_count: count,
        mean_error: mean,
        std_dev,
        threshold,
        histogram: bins,
    })
}

/// Compares two reports built with the same threshold and binning.
pub fn compare_reports(a: &EvaluationReport, b: &EvaluationReport) -> Result<ComparisonSummary> {
    if a.threshold != b.threshold {
        return Err(Error::ReportMismatch(format!(
            "thresholds differ: {} vs {}",
            a.threshold, b.threshold
        )));
    }
    let edges_a: Vec<f64> = a.histogram.iter().map(|(e, _)| *e).collect();
    let edges_b: Vec<f64> = b.histogram.iter().map(|(e, _)| *e).collect();
    if edges_a != edges_b {
        return Err(Error::ReportMismatch(
            "histogram bin widths or ranges differ".into(),
        ));
    }

    let ratio = |x: f64, y: f64| if x == y { 1.0 } else { x / y };
    let pct_pair = |x: usize, y: usize| -> (f64, f64) {
        let diff = x.abs_diff(y) as f64;
        if diff == 0.0 {
            return (0.0, 0.0);
        }
        let small = x.min(y) as f64;
        let large = x.max(y) as f64;
        (100.0 * diff / small, 100.0 * diff / large)
    };
    let (map_small, map_large) = pct_pair(a.map_point_count, b.map_point_count);
    let (corr_small, corr_large) = pct_pair(a.correspondence_count, b.correspondence_count);
    let std_ratio = ratio(a.std_dev, b.std_dev);

    Ok(ComparisonSummary {
        mean_delta: (a.mean_error - b.mean_error).abs(),
        std_dev_delta: (a.std_dev - b.std_dev).abs(),
        std_dev_ratio: std_ratio,
        variance_ratio: std_ratio * std_ratio,
        map_point_diff_pct_of_smaller: map_small,
        map_point_diff_pct_of_larger: map_large,
        correspondence_diff_pct_of_smaller: corr_small,
        correspondence_diff_pct_of_larger: corr_large,
    })
}

/// Key/value scalars followed by the histogram table. Identical reports
/// serialize to identical bytes.
pub fn format_report(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "map_points = {}", report.map_point_count);
    let _ = writeln!(out, "correspondences = {}", report.correspondence_count);
    let _ = writeln!(out, "mean_error_m = {}", report.mean_error);
    let _ = writeln!(out, "std_dev_m = {}", report.std_dev);
    let _ = writeln!(out, "threshold_m = {}", report.threshold);
    let _ = writeln!(out, "histogram:");
    for (edge, count) in &report.histogram {
        let _ = writeln!(out, "{edge} {count}");
    }
    out
}

pub fn parse_report(text: &str) -> Result<EvaluationReport> {
    let mut map_points = None;
    let mut correspondence_count = None;
    let mut mean = None;
    let mut std_dev = None;
    let mut threshold = None;
    let mut histogram = Vec::new();
    let mut in_histogram = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::ReportParse {
            line: lineno + 1,
            msg: msg.to_string(),
        };
        if in_histogram {
            let mut tokens = line.split_whitespace();
            let edge: f64 = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err("bad histogram edge"))?;
            let count: u64 = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err("bad histogram count"))?;
            histogram.push((edge, count));
            continue;
        }
        if line == "histogram:" {
            in_histogram = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| err("expected key = value"))?;
        match key {
            "map_points" => map_points = Some(value.parse().map_err(|_| err("bad count"))?),
            "correspondences" => {
                correspondence_count = Some(value.parse().map_err(|_| err("bad count"))?)
            }
            "mean_error_m" => mean = Some(value.parse().map_err(|_| err("bad number"))?),
            "std_dev_m" => std_dev = Some(value.parse().map_err(|_| err("bad number"))?),
            "threshold_m" => threshold = Some(value.parse().map_err(|_| err("bad number"))?),
            _ => return Err(err(&format!("unknown key {key:?}"))),
        }
    }

    let missing = |what: &str| Error::ReportParse {
        line: 0,
        msg: format!("missing {what}"),
    };
    Ok(EvaluationReport {
        map_point_count: map_points.ok_or_else(|| missing("map_points"))?,
        correspondence_count: correspondence_count.ok_or_else(|| missing("correspondences"))?,
        mean_error: mean.ok_or_else(|| missing("mean_error_m"))?,
        std_dev: std_dev.ok_or_else(|| missing("std_dev_m"))?,
        threshold: threshold.ok_or_else(|| missing("threshold_m"))?,
        histogram,
    })
}

/// Histogram as `bin_lower_m,count` CSV rows with a header line.
pub fn histogram_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("bin_lower_m,count\n");
    for (edge, count) in &report.histogram {
        let _ = writeln!(out, "{edge},{count}");
    }
    out
}

pub fn write_report(report: &EvaluationReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_report(report)).map_err(|e| Error::io(path, e))
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvaluationReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_report(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::Point3;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_cloud(rng: &mut StdRng, n: usize, span: f64) -> PointCloud {
        PointCloud::from_points(
            (0..n)
                .map(|_| {
                    Point3::new(
                        rng.random_range(-span..span),
                        rng.random_range(-span..span),
                        rng.random_range(-span..span),
                    )
                })
                .collect(),
        )
    }

    fn corr_with(distances: &[f64], threshold: f64) -> CorrespondenceSet {
        CorrespondenceSet {
            pairs: distances
                .iter()
                .enumerate()
                .map(|(i, &d)| (i, i, d))
                .collect(),
            threshold,
        }
    }

    #[test]
    fn identical_clouds_pair_with_themselves() {
        let mut rng = StdRng::seed_from_u64(1);
        let cloud = random_cloud(&mut rng, 50, 3.0);
        let index = SpatialIndex::build(&cloud).unwrap();
        let corr = correspondences(&cloud, &index, 1.0).unwrap();
        assert_eq!(corr.pairs.len(), cloud.len());
        for (i, &(map_idx, model_idx, d)) in corr.pairs.iter().enumerate() {
            assert_eq!(map_idx, i);
            assert_eq!(model_idx, i);
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn far_map_point_is_excluded() {
        let model = PointCloud::from_points(vec![Point3::origin()]);
        let index = SpatialIndex::build(&model).unwrap();
        let map = PointCloud::from_points(vec![Point3::new(2.0, 0.0, 0.0)]);
        let corr = correspondences(&map, &index, 1.0).unwrap();
        assert!(corr.pairs.is_empty());
    }

    #[test]
    fn matches_double_loop_oracle() {
        let mut rng = StdRng::seed_from_u64(2);
        let model = random_cloud(&mut rng, 1000, 3.0);
        let map = random_cloud(&mut rng, 500, 3.5);
        let index = SpatialIndex::build(&model).unwrap();
        let threshold = 1.0;
        let got = correspondences(&map, &index, threshold).unwrap();

        let mut expected = Vec::new();
        for (mi, p) in map.points.iter().enumerate() {
            let mut best_sq = f64::INFINITY;
            let mut best = usize::MAX;
            for (gi, q) in model.points.iter().enumerate() {
                let dx = p.x - q.x;
                let dy = p.y - q.y;
                let dz = p.z - q.z;
                let d_sq = dx * dx + dy * dy + dz * dz;
                if d_sq < best_sq {
                    best_sq = d_sq;
                    best = gi;
                }
            }
            let d = best_sq.sqrt();
            if d <= threshold {
                expected.push((mi, best, d));
            }
        }
        assert_eq!(got.pairs, expected);
    }

    #[test]
    fn map_indices_are_unique() {
        let mut rng = StdRng::seed_from_u64(3);
        let model = random_cloud(&mut rng, 100, 1.0);
        let map = random_cloud(&mut rng, 200, 1.0);
        let index = SpatialIndex::build(&model).unwrap();
        let corr = correspondences(&map, &index, 5.0).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &(mi, _, d) in &corr.pairs {
            assert!(seen.insert(mi));
            assert!(d >= 0.0 && d <= corr.threshold);
        }
    }

    #[test]
    fn stats_of_all_zero_distances() {
        let (mean, std, n) = error_stats(&corr_with(&[0.0, 0.0, 0.0], 1.0)).unwrap();
        assert_eq!((mean, std, n), (0.0, 0.0, 3));
    }

    #[test]
    fn stats_of_constant_distances() {
        let (mean, std, _) = error_stats(&corr_with(&[0.5, 0.5], 1.0)).unwrap();
        assert_eq!(mean, 0.5);
        assert_eq!(std, 0.0);
    }

    #[test]
    fn stats_use_population_std_dev() {
        // Hand-computed: mean 0.5, population variance 0.25.
        let (mean, std, _) = error_stats(&corr_with(&[0.0, 1.0], 1.0)).unwrap();
        assert_eq!(mean, 0.5);
        assert_eq!(std, 0.5);
    }

    #[test]
    fn stats_reject_empty_set() {
        assert!(matches!(
            error_stats(&corr_with(&[], 1.0)).unwrap_err(),
            Error::EmptyCorrespondences
        ));
    }

    #[test]
    fn mean_is_permutation_invariant() {
        let forward = corr_with(&[0.1, 0.4, 0.9, 0.3], 1.0);
        let mut reversed = forward.clone();
        reversed.pairs.reverse();
        let (m1, _, _) = error_stats(&forward).unwrap();
        let (m2, _, _) = error_stats(&reversed).unwrap();
        assert_relative_eq!(m1, m2, max_relative = 1e-12);
    }

    #[test]
    fn histogram_of_empty_set_is_all_zero_bins() {
        let bins = histogram(&corr_with(&[], 1.0), 0.25).unwrap();
        assert_eq!(bins.len(), 4);
        assert!(bins.iter().all(|&(_, c)| c == 0));
        assert_eq!(bins[3].0, 0.75);
    }

    #[test]
    fn histogram_places_boundary_distance_in_last_bin() {
        let bins = histogram(&corr_with(&[0.1, 0.1, 0.9], 1.0), 0.5).unwrap();
        assert_eq!(bins, vec![(0.0, 2), (0.5, 1)]);
        // d == threshold goes to the last bin instead of overflowing.
        let bins = histogram(&corr_with(&[1.0], 1.0), 0.5).unwrap();
        assert_eq!(bins, vec![(0.0, 0), (0.5, 1)]);
    }

    #[test]
    fn uniform_distances_fill_bins_binomially() {
        let mut rng = StdRng::seed_from_u64(4);
        let distances: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..1.0)).collect();
        let corr = corr_with(&distances, 1.0);
        let bins = histogram(&corr, 0.1).unwrap();
        assert_eq!(bins.len(), 10);
        assert_eq!(bins.iter().map(|&(_, c)| c).sum::<u64>(), 10_000);
        // 5 sigma of Binomial(10000, 0.1): sigma = sqrt(n p (1-p)) = 30.
        for &(_, count) in &bins {
            assert!((count as f64 - 1000.0).abs() < 150.0);
        }
    }

    #[test]
    fn identical_reports_compare_to_zero_deltas() {
        let report = EvaluationReport {
            map_point_count: 10,
            correspondence_count: 8,
            mean_error: 0.4,
            std_dev: 0.1,
            threshold: 1.0,
            histogram: vec![(0.0, 4), (0.5, 4)],
        };
        let summary = compare_reports(&report, &report).unwrap();
        assert_eq!(summary.mean_delta, 0.0);
        assert_eq!(summary.std_dev_delta, 0.0);
        assert_eq!(summary.std_dev_ratio, 1.0);
        assert_eq!(summary.map_point_diff_pct_of_smaller, 0.0);
        assert_eq!(summary.correspondence_diff_pct_of_larger, 0.0);
    }

    #[test]
    fn survey_report_pair_has_expected_deltas() {
        let sim = EvaluationReport {
            map_point_count: 84_029,
            correspondence_count: 36_178,
            mean_error: 0.5548,
            std_dev: 0.1885,
            threshold: 1.0,
            histogram: vec![(0.0, 36_178)],
        };
        let real = EvaluationReport {
            map_point_count: 71_918,
            correspondence_count: 27_820,
            mean_error: 0.5733,
            std_dev: 0.1998,
            threshold: 1.0,
            histogram: vec![(0.0, 27_820)],
        };
        let summary = compare_reports(&sim, &real).unwrap();
        assert_relative_eq!(summary.mean_delta, 0.0185, epsilon = 1e-12);
        assert_relative_eq!(summary.std_dev_delta, 0.0113, epsilon = 1e-12);
        assert_eq!(format!("{:.1}", summary.map_point_diff_pct_of_larger), "14.4");
        assert_eq!(format!("{:.1}", summary.map_point_diff_pct_of_smaller), "16.8");
        assert_eq!(format!("{:.1}%", 100.0 - summary.std_dev_ratio * 100.0), "5.7%");
    }

    #[test]
    fn mismatched_reports_are_rejected() {
        let mut a = EvaluationReport {
            map_point_count: 1,
            correspondence_count: 1,
            mean_error: 0.0,
            std_dev: 0.0,
            threshold: 1.0,
            histogram: vec![(0.0, 1)],
        };
        let mut b = a.clone();
        b.threshold = 2.0;
        assert!(compare_reports(&a, &b).is_err());
        b.threshold = 1.0;
        b.histogram = vec![(0.0, 1), (0.5, 0)];
        assert!(compare_reports(&a, &b).is_err());
        a.histogram = vec![(0.0, 1), (0.5, 0)];
        assert!(compare_reports(&a, &b).is_ok());
    }

    #[test]
    fn report_text_round_trips() {
        let report = EvaluationReport {
            map_point_count: 123,
            correspondence_count: 45,
            mean_error: 0.123456789,
            std_dev: 0.987654321,
            threshold: 1.5,
            histogram: vec![(0.0, 20), (0.75, 25)],
        };
        let text = format_report(&report);
        let back = parse_report(&text).unwrap();
        assert_eq!(back, report);
        // Determinism: formatting is byte-stable.
        assert_eq!(text, format_report(&back));
    }

    #[test]
    fn report_parse_errors_carry_line_numbers() {
        let err = parse_report("map_points = x\n").unwrap_err();
        assert!(matches!(err, Error::ReportParse { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn histogram_mass_equals_pair_count(
            distances in proptest::collection::vec(0.0f64..=1.0, 0..200),
            bin_width in 0.01f64..0.7,
        ) {
            let corr = corr_with(&distances, 1.0);
            let bins = histogram(&corr, bin_width).unwrap();
            prop_assert_eq!(
                bins.iter().map(|&(_, c)| c).sum::<u64>() as usize,
                corr.pairs.len()
            );
        }
    }
}
