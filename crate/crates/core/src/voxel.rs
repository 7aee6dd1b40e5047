//! binvox occupancy grids and their conversion to point clouds.
//!
//! Grids are stored in the binvox v1 cell order: x slowest, then z, then y
//! fastest, i.e. `linear = x*dy*dz + z*dy + y`.

use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Storage ordering tag for the occupancy array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CellOrder {
    /// binvox v1 order: x slowest, then z, then y fastest.
    #[default]
    XSlowZMidYFast,
}

/// Dense voxel occupancy grid with world placement metadata.
///
/// `scale` is the world edge length in meters of the longest grid axis;
/// `translate` is the world offset applied after scaling.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    dims: [usize; 3],
    occupancy: Vec<bool>,
    translate: Vector3<f64>,
    scale: f64,
    cell_order: CellOrder,
}

impl VoxelGrid {
    /// Creates an all-empty grid. Dims must be >= 1 on every axis and
    /// `scale` must be positive.
    pub fn new(dims: [usize; 3], translate: Vector3<f64>, scale: f64) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidGrid(format!(
                "dims {dims:?} must all be at least 1"
            )));
        }
        if !(scale > 0.0) {
            return Err(Error::InvalidGrid(format!("scale {scale} must be positive")));
        }
        const MAX_CELLS: usize = 1 << 31;
        let cells = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .filter(|&v| v <= MAX_CELLS)
            .ok_or_else(|| Error::InvalidGrid(format!("dims {dims:?} give too many cells")))?;
        Ok(VoxelGrid {
            dims,
            occupancy: vec![false; cells],
            translate,
            scale,
            cell_order: CellOrder::default(),
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn translate(&self) -> Vector3<f64> {
        self.translate
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn cell_order(&self) -> CellOrder {
        self.cell_order
    }

    pub fn cell_count(&self) -> usize {
        self.occupancy.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    /// Linear storage index of cell `(x, y, z)`.
    pub fn linear_index(&self, x: usize, y: usize, z: usize) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        x * self.dims[1] * self.dims[2] + z * self.dims[1] + y
    }

    /// Inverse of [`linear_index`](Self::linear_index).
    pub fn cell_at(&self, linear: usize) -> (usize, usize, usize) {
        let plane = self.dims[1] * self.dims[2];
        let x = linear / plane;
        let rem = linear % plane;
        let z = rem / self.dims[1];
        let y = rem % self.dims[1];
        (x, y, z)
    }

    pub fn occupied(&self, x: usize, y: usize, z: usize) -> bool {
        self.occupancy[self.linear_index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let idx = self.linear_index(x, y, z);
        self.occupancy[idx] = value;
    }

    /// Grid with the same metadata keeping only occupied cells that have at
    /// least one of their 6 face neighbors empty or outside the grid.
    pub fn surface_only(&self) -> VoxelGrid {
        let mut out = self.clone();
        let [dx, dy, dz] = self.dims;
        for x in 0..dx {
            for y in 0..dy {
                for z in 0..dz {
                    if !self.occupied(x, y, z) {
                        continue;
                    }
                    let interior = x > 0
                        && x + 1 < dx
                        && y > 0
                        && y + 1 < dy
                        && z > 0
                        && z + 1 < dz
                        && self.occupied(x - 1, y, z)
                        && self.occupied(x + 1, y, z)
                        && self.occupied(x, y - 1, z)
                        && self.occupied(x, y + 1, z)
                        && self.occupied(x, y, z - 1)
                        && self.occupied(x, y, z + 1);
                    if interior {
                        out.set(x, y, z, false);
                    }
                }
            }
        }
        out
    }
}

/// Coordinate frame for [`voxel_to_points`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConversionMode {
    /// Cell centers in the unit cube: `((i+0.5)/d, (j+0.5)/d, (k+0.5)/d)`
    /// with `d` the largest axis dimension.
    Normalized,
    /// Normalized coordinates scaled by the grid scale, then offset by the
    /// grid translation, landing cell centers in meters.
    World,
}

/// One point per occupied cell, emitted in storage order.
pub fn voxel_to_points(grid: &VoxelGrid, mode: ConversionMode) -> PointCloud {
    let d = grid.dims.iter().copied().max().unwrap() as f64;
    let mut points = Vec::with_capacity(grid.occupied_count());
    for (linear, &occupied) in grid.occupancy.iter().enumerate() {
        if !occupied {
            continue;
        }
        let (i, j, k) = grid.cell_at(linear);
        let n = Point3::new(
            (i as f64 + 0.5) / d,
            (j as f64 + 0.5) / d,
            (k as f64 + 0.5) / d,
        );
        points.push(match mode {
            ConversionMode::Normalized => n,
            ConversionMode::World => Point3::new(
                n.x * grid.scale + grid.translate.x,
                n.y * grid.scale + grid.translate.y,
                n.z * grid.scale + grid.translate.z,
            ),
        });
    }
    PointCloud::from_points(points)
}

/// Parses a binvox v1 byte stream.
pub fn parse_binvox(bytes: &[u8]) -> Result<VoxelGrid> {
    let mut cursor = 0usize;
    let first = read_header_line(bytes, &mut cursor)?;
    let mut parts = first.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("#binvox"), Some("1"), None) => {}
        (Some("#binvox"), Some(v), None) => {
            return Err(Error::BinvoxVersion(v.to_string()));
        }
        _ => {
            return Err(Error::BinvoxHeader(format!(
                "first line {first:?}, expected \"#binvox 1\""
            )));
        }
    }

    let mut dims: Option<[usize; 3]> = None;
    let mut translate = Vector3::zeros();
    let mut scale = 1.0f64;
    loop {
        let line = read_header_line(bytes, &mut cursor)?;
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("dim") => {
                let d = parse_three::<usize>(&mut tokens, line)?;
                if d.contains(&0) {
                    return Err(Error::BinvoxHeader(format!("zero dimension in {line:?}")));
                }
                dims = Some(d);
            }
            Some("translate") => {
                let t = parse_three::<f64>(&mut tokens, line)?;
                translate = Vector3::new(t[0], t[1], t[2]);
            }
            Some("scale") => {
                scale = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::BinvoxHeader(format!("bad scale line {line:?}")))?;
                if !(scale > 0.0) {
                    return Err(Error::BinvoxHeader(format!(
                        "scale must be positive, got {scale}"
                    )));
                }
            }
            Some("data") => break,
            Some(other) => {
                return Err(Error::BinvoxHeader(format!(
                    "unexpected header keyword {other:?}"
                )));
            }
            None => continue,
        }
        if tokens.next().is_some() {
            return Err(Error::BinvoxHeader(format!(
                "trailing tokens on line {line:?}"
            )));
        }
    }

    let dims = dims.ok_or_else(|| Error::BinvoxHeader("missing dim line".into()))?;
    let mut grid = VoxelGrid::new(dims, translate, scale)?;
    let total = grid.cell_count();

    let mut filled = 0usize;
    let mut data = bytes[cursor..].iter();
    loop {
        let Some(&value) = data.next() else {
            if filled == total {
                break;
            }
            return Err(Error::BinvoxTruncated);
        };
        if filled == total {
            // A value byte beyond the declared cell total: count the excess.
            let mut got = total;
            let mut extra_value = Some(value);
            while extra_value.is_some() {
                let Some(&count) = data.next() else {
                    return Err(Error::BinvoxTruncated);
                };
                got += count as usize;
                extra_value = data.next().copied();
            }
            return Err(Error::BinvoxCellCount {
                expected: total,
                got,
            });
        }
        if value > 1 {
            return Err(Error::InvalidGrid(format!(
                "run value {value}, expected 0 or 1"
            )));
        }
        let Some(&count) = data.next() else {
            return Err(Error::BinvoxTruncated);
        };
        if count == 0 {
            return Err(Error::BinvoxZeroCount);
        }
        let count = count as usize;
        if filled + count > total {
            return Err(Error::BinvoxCellCount {
                expected: total,
                got: filled + count,
            });
        }
        if value == 1 {
            grid.occupancy[filled..filled + count].fill(true);
        }
        filled += count;
    }
    Ok(grid)
}

/// Encodes the grid as a binvox v1 byte stream. Runs are maximal up to the
/// 255-count cap of the format.
pub fn write_binvox(grid: &VoxelGrid) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"#binvox 1\n");
    out.extend_from_slice(
        format!("dim {} {} {}\n", grid.dims[0], grid.dims[1], grid.dims[2]).as_bytes(),
    );
    out.extend_from_slice(
        format!(
            "translate {} {} {}\n",
            grid.translate.x, grid.translate.y, grid.translate.z
        )
        .as_bytes(),
    );
    out.extend_from_slice(format!("scale {}\n", grid.scale).as_bytes());
    out.extend_from_slice(b"data\n");

    let mut cells = grid.occupancy.iter();
    let Some(&first) = cells.next() else {
        return out;
    };
    let mut run_value = first;
    let mut run_len = 1usize;
    let emit = |value: bool, len: usize, out: &mut Vec<u8>| {
        let mut remaining = len;
        while remaining > 0 {
            let chunk = remaining.min(255);
            out.push(value as u8);
            out.push(chunk as u8);
            remaining -= chunk;
        }
    };
    for &cell in cells {
        if cell == run_value {
            run_len += 1;
        } else {
            emit(run_value, run_len, &mut out);
            run_value = cell;
            run_len = 1;
        }
    }
    emit(run_value, run_len, &mut out);
    out
}

pub fn load_binvox(path: impl AsRef<Path>) -> Result<VoxelGrid> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_binvox(&bytes)
}

pub fn save_binvox(grid: &VoxelGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_binvox(grid)).map_err(|e| Error::io(path, e))
}

fn read_header_line<'a>(bytes: &'a [u8], cursor: &mut usize) -> Result<&'a str> {
    let rest = &bytes[*cursor..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::BinvoxHeader("unterminated header line".into()))?;
    let line = std::str::from_utf8(&rest[..end])
        .map_err(|_| Error::BinvoxHeader("non-ASCII header bytes".into()))?;
    *cursor += end + 1;
    Ok(line.trim_end_matches('\r'))
}

fn parse_three<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace,
    line: &str,
) -> Result<[T; 3]> {
    let mut next = || -> Result<T> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::BinvoxHeader(format!("expected 3 values in {line:?}")))
    };
    Ok([next()?, next()?, next()?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binvox_bytes(header: &str, runs: &[(u8, u8)]) -> Vec<u8> {
        let mut bytes = header.as_bytes().to_vec();
        for &(v, c) in runs {
            bytes.push(v);
            bytes.push(c);
        }
        bytes
    }

    const HEADER_1: &str = "#binvox 1\ndim 1 1 1\ntranslate 0 0 0\nscale 1\ndata\n";
    const HEADER_2: &str = "#binvox 1\ndim 2 2 2\ntranslate 0 0 0\nscale 1\ndata\n";

    #[test]
    fn parses_smallest_grid() {
        let grid = parse_binvox(&binvox_bytes(HEADER_1, &[(1, 1)])).unwrap();
        assert_eq!(grid.dims(), [1, 1, 1]);
        assert_eq!(grid.occupied_count(), 1);
        assert!(grid.occupied(0, 0, 0));
    }

    #[test]
    fn rle_decodes_in_binvox_cell_order() {
        // Hand-decoded: linear cell 0 is (x=0, z=0, y=0), the remaining 7
        // stay empty.
        let grid = parse_binvox(&binvox_bytes(HEADER_2, &[(1, 1), (0, 7)])).unwrap();
        assert!(grid.occupied(0, 0, 0));
        assert_eq!(grid.occupied_count(), 1);
        for linear in 1..8 {
            let (x, y, z) = grid.cell_at(linear);
            assert!(!grid.occupied(x, y, z));
        }
    }

    #[test]
    fn linear_index_follows_x_slow_y_fast_order() {
        let grid = VoxelGrid::new([2, 3, 4], Vector3::zeros(), 1.0).unwrap();
        // linear = x*dy*dz + z*dy + y with dy=3, dz=4
        assert_eq!(grid.linear_index(0, 0, 0), 0);
        assert_eq!(grid.linear_index(0, 1, 0), 1);
        assert_eq!(grid.linear_index(0, 0, 1), 3);
        assert_eq!(grid.linear_index(1, 0, 0), 12);
        assert_eq!(grid.linear_index(1, 2, 3), 12 + 9 + 2);
        for linear in 0..24 {
            let (x, y, z) = grid.cell_at(linear);
            assert_eq!(grid.linear_index(x, y, z), linear);
        }
    }

    #[test]
    fn truncated_data_reports_unexpected_end() {
        let err = parse_binvox(&binvox_bytes(HEADER_2, &[(1, 1)])).unwrap_err();
        assert!(matches!(err, Error::BinvoxTruncated));
        assert_eq!(err.to_string(), "unexpected end of voxel data");
        // Odd byte count: a value with its count byte missing.
        let mut bytes = binvox_bytes(HEADER_2, &[(1, 1), (0, 6)]);
        bytes.push(0);
        assert!(matches!(
            parse_binvox(&bytes).unwrap_err(),
            Error::BinvoxTruncated
        ));
    }

    #[test]
    fn rejects_unsupported_version() {
        let bytes = b"#binvox 2\ndim 1 1 1\ndata\n\x01\x01";
        assert!(matches!(
            parse_binvox(bytes).unwrap_err(),
            Error::BinvoxVersion(v) if v == "2"
        ));
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(parse_binvox(b"binvox 1\ndata\n").is_err());
        assert!(parse_binvox(b"#binvox 1\ndim 2 2\ndata\n").is_err());
        assert!(parse_binvox(b"#binvox 1\nvoxels 2 2 2\ndata\n").is_err());
        // Missing dim line entirely.
        assert!(matches!(
            parse_binvox(b"#binvox 1\ndata\n").unwrap_err(),
            Error::BinvoxHeader(_)
        ));
    }

    #[test]
    fn rejects_zero_count_runs() {
        assert!(matches!(
            parse_binvox(&binvox_bytes(HEADER_2, &[(1, 0), (0, 8)])).unwrap_err(),
            Error::BinvoxZeroCount
        ));
    }

    #[test]
    fn rejects_run_totals_beyond_declared_cells() {
        let err = parse_binvox(&binvox_bytes(HEADER_2, &[(1, 9)])).unwrap_err();
        assert!(matches!(
            err,
            Error::BinvoxCellCount {
                expected: 8,
                got: 9
            }
        ));
        // Extra runs after the grid is already full.
        let err = parse_binvox(&binvox_bytes(HEADER_2, &[(1, 8), (0, 4)])).unwrap_err();
        assert!(matches!(
            err,
            Error::BinvoxCellCount {
                expected: 8,
                got: 12
            }
        ));
        // A lone value byte after a full grid is a truncation, not a
        // cell-count mismatch.
        let mut bytes = binvox_bytes(HEADER_2, &[(1, 8)]);
        bytes.push(0);
        assert!(matches!(
            parse_binvox(&bytes).unwrap_err(),
            Error::BinvoxTruncated
        ));
    }

    #[test]
    fn absurd_dimensions_rejected_before_allocation() {
        assert!(VoxelGrid::new([100_000, 100_000, 100_000], Vector3::zeros(), 1.0).is_err());
        let bytes = b"#binvox 1\ndim 100000 100000 100000\ndata\n\x01\x01";
        assert!(parse_binvox(bytes).is_err());
    }

    #[test]
    fn missing_translate_and_scale_default() {
        let grid = parse_binvox(&binvox_bytes("#binvox 1\ndim 1 1 1\ndata\n", &[(0, 1)])).unwrap();
        assert_eq!(grid.translate(), Vector3::zeros());
        assert_eq!(grid.scale(), 1.0);
    }

    #[test]
    fn writes_single_cell_grid() {
        let mut grid = VoxelGrid::new([1, 1, 1], Vector3::zeros(), 1.0).unwrap();
        grid.set(0, 0, 0, true);
        let bytes = write_binvox(&grid);
        assert_eq!(bytes, binvox_bytes(HEADER_1, &[(1, 1)]));
    }

    #[test]
    fn writes_all_empty_grid_as_one_run() {
        let grid = VoxelGrid::new([2, 2, 2], Vector3::zeros(), 1.0).unwrap();
        let bytes = write_binvox(&grid);
        assert_eq!(bytes, binvox_bytes(HEADER_2, &[(0, 8)]));
    }

    #[test]
    fn long_runs_split_at_255() {
        let grid = VoxelGrid::new([10, 10, 10], Vector3::zeros(), 2.5).unwrap();
        let bytes = write_binvox(&grid);
        let data_start = bytes.windows(5).position(|w| w == b"data\n").unwrap() + 5;
        let runs: Vec<(u8, u8)> = bytes[data_start..]
            .chunks(2)
            .map(|c| (c[0], c[1]))
            .collect();
        assert_eq!(runs, vec![(0, 255), (0, 255), (0, 255), (0, 235)]);
        assert_eq!(parse_binvox(&bytes).unwrap(), grid);
    }

    #[test]
    fn adjacent_runs_differ_unless_count_capped() {
        let mut grid = VoxelGrid::new([8, 8, 8], Vector3::new(1.0, -2.0, 3.5), 4.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, (x + y * z) % 3 == 0);
        }
        let bytes = write_binvox(&grid);
        let data_start = bytes.windows(5).position(|w| w == b"data\n").unwrap() + 5;
        let runs: Vec<(u8, u8)> = bytes[data_start..]
            .chunks(2)
            .map(|c| (c[0], c[1]))
            .collect();
        for pair in runs.windows(2) {
            assert!(pair[0].0 != pair[1].0 || pair[0].1 == 255);
        }
    }

    #[test]
    fn eq1_single_cell_normalized() {
        let mut grid = VoxelGrid::new([2, 2, 2], Vector3::zeros(), 1.0).unwrap();
        grid.set(0, 0, 0, true);
        let cloud = voxel_to_points(&grid, ConversionMode::Normalized);
        assert_eq!(cloud.points, vec![Point3::new(0.25, 0.25, 0.25)]);
    }

    #[test]
    fn eq1_identity_case() {
        let mut grid = VoxelGrid::new([1, 1, 1], Vector3::zeros(), 1.0).unwrap();
        grid.set(0, 0, 0, true);
        let cloud = voxel_to_points(&grid, ConversionMode::Normalized);
        assert_eq!(cloud.points, vec![Point3::new(0.5, 0.5, 0.5)]);
    }

    #[test]
    fn full_grid_world_mode_spans_half_cell_margins() {
        let mut grid = VoxelGrid::new([4, 4, 4], Vector3::zeros(), 4.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, true);
        }
        let cloud = voxel_to_points(&grid, ConversionMode::World);
        assert_eq!(cloud.len(), 64);
        // Brute-force min/max over every cell center.
        let mut expect_min = f64::INFINITY;
        let mut expect_max = f64::NEG_INFINITY;
        for i in 0..4 {
            let c = (i as f64 + 0.5) / 4.0 * 4.0;
            expect_min = expect_min.min(c);
            expect_max = expect_max.max(c);
        }
        for p in &cloud.points {
            for a in 0..3 {
                assert!(p[a] >= expect_min && p[a] <= expect_max);
            }
        }
        assert!(cloud.points.iter().any(|p| p.x == expect_min));
        assert!(cloud.points.iter().any(|p| p.x == expect_max));
        assert_eq!(expect_min, 0.5);
        assert_eq!(expect_max, 3.5);
    }

    #[test]
    fn conversion_matches_triple_loop_oracle() {
        let mut grid = VoxelGrid::new([5, 3, 8], Vector3::new(-1.0, 2.0, 0.25), 6.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, (x * 7 + y * 5 + z * 3) % 4 == 1);
        }
        let d = 8.0f64;
        let mut expected = Vec::new();
        for x in 0..5 {
            for z in 0..8 {
                for y in 0..3 {
                    if grid.occupied(x, y, z) {
                        expected.push(Point3::new(
                            (x as f64 + 0.5) / d,
                            (y as f64 + 0.5) / d,
                            (z as f64 + 0.5) / d,
                        ));
                    }
                }
            }
        }
        assert_eq!(voxel_to_points(&grid, ConversionMode::Normalized).points, expected);
    }

    #[test]
    fn point_count_equals_occupied_count_in_both_modes() {
        let mut grid = VoxelGrid::new([6, 6, 6], Vector3::new(3.0, 1.0, -2.0), 12.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, (x ^ y ^ z) & 1 == 0);
        }
        let n = grid.occupied_count();
        assert_eq!(voxel_to_points(&grid, ConversionMode::Normalized).len(), n);
        assert_eq!(voxel_to_points(&grid, ConversionMode::World).len(), n);

        let empty = VoxelGrid::new([4, 4, 4], Vector3::zeros(), 2.0).unwrap();
        assert!(voxel_to_points(&empty, ConversionMode::World).is_empty());
    }

    #[test]
    fn normalized_coordinates_stay_in_open_unit_interval() {
        // Non-cubic dims exercise the d = max(dims) convention.
        let mut grid = VoxelGrid::new([2, 7, 3], Vector3::zeros(), 1.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, true);
        }
        for p in &voxel_to_points(&grid, ConversionMode::Normalized).points {
            for a in 0..3 {
                assert!(p[a] > 0.0 && p[a] < 1.0);
            }
        }
    }

    #[test]
    fn surface_filter_drops_enclosed_cells() {
        let mut grid = VoxelGrid::new([3, 3, 3], Vector3::zeros(), 1.0).unwrap();
        for i in 0..grid.cell_count() {
            let (x, y, z) = grid.cell_at(i);
            grid.set(x, y, z, true);
        }
        assert_eq!(grid.occupied_count(), 27);
        let surface = grid.surface_only();
        assert_eq!(surface.occupied_count(), 26);
        assert!(!surface.occupied(1, 1, 1));
    }

    proptest! {
        #[test]
        fn binvox_round_trip(
            dx in 1usize..=8,
            dy in 1usize..=8,
            dz in 1usize..=8,
            seed in any::<u64>(),
            tx in -100.0f64..100.0,
            ty in -100.0f64..100.0,
            tz in -100.0f64..100.0,
            scale in 0.001f64..1000.0,
        ) {
            let mut grid = VoxelGrid::new([dx, dy, dz], Vector3::new(tx, ty, tz), scale).unwrap();
            let mut state = seed;
            for i in 0..grid.cell_count() {
                // xorshift fill, independent of any RNG crate
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let (x, y, z) = grid.cell_at(i);
                grid.set(x, y, z, state & 1 == 1);
            }
            let back = parse_binvox(&write_binvox(&grid)).unwrap();
            prop_assert_eq!(back, grid);
        }
    }
}
