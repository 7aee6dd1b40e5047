//! Spatial index over a point cloud for nearest-neighbor and radius queries.
//!
//! A k-d tree with a deterministic contract: equal distances are broken by
//! the lowest point index, and radius results come back ordered by index.

use nalgebra::Point3;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Node {
    /// Index into the original cloud.
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

const NO_CHILD: i32 = -1;

/// Immutable k-d tree over a copy of the indexed cloud. Queries are
/// read-only and safe to issue from multiple threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point3<f64>>,
    nodes: Vec<Node>,
    root: i32,
}

impl SpatialIndex {
    /// Builds the index. Errors on an empty cloud.
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let points = cloud.points.clone();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_recursive(&points, &mut order, 0, &mut nodes);
        Ok(SpatialIndex {
            points,
            nodes,
            root,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &Point3<f64> {
        &self.points[index]
    }

    /// Returns `(point index, euclidean distance)` of the globally nearest
    /// indexed point. Exact distance ties go to the lowest index.
    pub fn nearest(&self, query: &Point3<f64>) -> (usize, f64) {
        let mut best = Best {
            dist_sq: f64::INFINITY,
            index: u32::MAX,
        };
        self.nearest_recursive(self.root, query, &mut best);
        (best.index as usize, best.dist_sq.sqrt())
    }

    /// All indexed points within `radius` (inclusive) of `query`, as
    /// `(point index, distance)` pairs sorted by ascending point index.
    pub fn within_radius(&self, query: &Point3<f64>, radius: f64) -> Vec<(usize, f64)> {
        let mut hits = Vec::new();
        if radius >= 0.0 {
            self.radius_recursive(self.root, query, radius * radius, &mut hits);
        }
        hits.sort_unstable_by_key(|(i, _)| *i);
        hits
    }

    fn nearest_recursive(&self, node_id: i32, query: &Point3<f64>, best: &mut Best) {
        if node_id == NO_CHILD {
            return;
        }
        let node = &self.nodes[node_id as usize];
        let point = &self.points[node.point as usize];
        let dist_sq = (query - point).norm_squared();
        if dist_sq < best.dist_sq || (dist_sq == best.dist_sq && node.point < best.index) {
            best.dist_sq = dist_sq;
            best.index = node.point;
        }
        let axis = node.axis as usize;
        let diff = query[axis] - point[axis];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.nearest_recursive(near, query, best);
        // <= keeps equal-distance candidates on the far side reachable so
        // the lowest-index tie-break stays exact.
        if diff * diff <= best.dist_sq {
            self.nearest_recursive(far, query, best);
        }
    }

    fn radius_recursive(
        &self,
        node_id: i32,
        query: &Point3<f64>,
        radius_sq: f64,
        hits: &mut Vec<(usize, f64)>,
    ) {
        if node_id == NO_CHILD {
            return;
        }
        let node = &self.nodes[node_id as usize];
        let point = &self.points[node.point as usize];
        let dist_sq = (query - point).norm_squared();
        if dist_sq <= radius_sq {
            hits.push((node.point as usize, dist_sq.sqrt()));
        }
        let axis = node.axis as usize;
        let diff = query[axis] - point[axis];
        if diff < 0.0 || diff * diff <= radius_sq {
            self.radius_recursive(node.left, query, radius_sq, hits);
        }
        if diff >= 0.0 || diff * diff <= radius_sq {
            self.radius_recursive(node.right, query, radius_sq, hits);
        }
    }
}

struct Best {
    dist_sq: f64,
    index: u32,
}

fn build_recursive(
    points: &[Point3<f64>],
    order: &mut [u32],
    depth: usize,
    nodes: &mut Vec<Node>,
) -> i32 {
    if order.is_empty() {
        return NO_CHILD;
    }
    let axis = depth % 3;
    let median = order.len() / 2;
    // Total order on (coordinate, index) makes construction deterministic.
    order.select_nth_unstable_by(median, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let point = order[median];
    let id = nodes.len() as i32;
    nodes.push(Node {
        point,
        axis: axis as u8,
        left: NO_CHILD,
        right: NO_CHILD,
    });
    let (lo, rest) = order.split_at_mut(median);
    let hi = &mut rest[1..];
    let left = build_recursive(points, lo, depth + 1, nodes);
    let right = build_recursive(points, hi, depth + 1, nodes);
    nodes[id as usize].left = left;
    nodes[id as usize].right = right;
    id
}
