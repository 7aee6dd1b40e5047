//! `key = value` configuration files. Flags given on the command line
//! override file values.

use std::path::Path;

use twinmap::transform::parse_transform;
use twinmap::{IcpConfig, RigidTransform};

/// Values a config file may set. `None` means the file did not mention the
/// key.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub search_radius: Option<f64>,
    pub rmse_threshold: Option<f64>,
    pub max_iterations: Option<usize>,
    pub min_correspondences: Option<usize>,
    pub threshold: Option<f64>,
    pub bin_width: Option<f64>,
    pub init: Option<RigidTransform>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut config = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| format!("line {}: {msg}", lineno + 1);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected key = value".into()))?;
            fn parse_as<T: std::str::FromStr>(
                value: &str,
                key: &str,
                err: impl Fn(String) -> String,
            ) -> Result<T, String> {
                value
                    .parse()
                    .map_err(|_| err(format!("bad value {value:?} for {key}")))
            }
            match key {
                "search_radius" => config.search_radius = Some(parse_as(value, key, err)?),
                "rmse_threshold" => config.rmse_threshold = Some(parse_as(value, key, err)?),
                "max_iterations" => config.max_iterations = Some(parse_as(value, key, err)?),
                "min_correspondences" => {
                    config.min_correspondences = Some(parse_as(value, key, err)?)
                }
                "threshold" => config.threshold = Some(parse_as(value, key, err)?),
                "bin_width" => config.bin_width = Some(parse_as(value, key, err)?),
                "init" => {
                    config.init =
                        Some(parse_transform(value).map_err(|e| err(e.to_string()))?)
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    /// Folds file values into an [`IcpConfig`], starting from defaults.
    pub fn icp_config(&self) -> IcpConfig {
        let mut config = IcpConfig::default();
        if let Some(v) = self.search_radius {
            config.search_radius = v;
        }
        if let Some(v) = self.rmse_threshold {
            config.rmse_threshold = v;
        }
        if let Some(v) = self.max_iterations {
            config.max_iterations = v;
        }
        if let Some(v) = self.min_correspondences {
            config.min_correspondences = v;
        }
        config
    }
}
