use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any operation in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed binvox header: {0}")]
    BinvoxHeader(String),

    #[error("unsupported binvox version {0:?}, only version 1 is accepted")]
    BinvoxVersion(String),

    #[error("unexpected end of voxel data")]
    BinvoxTruncated,

    #[error("binvox run with count 0")]
    BinvoxZeroCount,

    #[error("binvox runs cover {got} cells, header declares {expected}")]
    BinvoxCellCount { expected: usize, got: usize },

    #[error("invalid voxel grid: {0}")]
    InvalidGrid(String),

    #[error("unknown point cloud format {0:?}, expected .ply or .xyz")]
    UnknownCloudFormat(String),

    #[error("malformed PLY: {0}")]
    PlyParse(String),

    #[error("malformed XYZ line {line}: {msg}")]
    XyzParse { line: usize, msg: String },

    #[error("non-finite coordinate value")]
    NonFiniteCoordinate,

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid rigid transform: {0}")]
    InvalidTransform(String),

    #[error("matched point lists have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least 3 point pairs, got {got}")]
    TooFewPairs { got: usize },

    #[error("degenerate point configuration: {0}")]
    DegenerateGeometry(String),

    #[error("alignment diverged at iteration {iteration}: fewer than {minimum} correspondences within search radius")]
    AlignmentDiverged { iteration: usize, minimum: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty correspondence set")]
    EmptyCorrespondences,

    #[error("reports are not comparable: {0}")]
    ReportMismatch(String),

    #[error("malformed report line {line}: {msg}")]
    ReportParse { line: usize, msg: String },

    #[error("malformed trajectory line {line}: {msg}")]
    TrajectoryParse { line: usize, msg: String },

    #[error("malformed scene line {line}: {msg}")]
    SceneParse { line: usize, msg: String },

    #[error("invalid frustum: {0}")]
    InvalidFrustum(String),

    #[error("region exceeds cine-camera range")]
    CoverageUnreachable,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
