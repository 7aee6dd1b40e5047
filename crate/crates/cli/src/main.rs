//! `twinmap` — file-mediated pipeline for evaluating SLAM point-cloud maps
//! against digital-twin ground truth models.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Point3;

use config::FileConfig;
use twinmap::scene::{format_camera_pose, format_coverage_report, missing_tiles_csv};
use twinmap::trajectory::trajectory_csv;
use twinmap::transform::{read_transform, write_transform};
use twinmap::{
    cloud, eval, icp, io as cloud_io, trajectory, transform, visibility, voxel, Aabb,
    ConversionMode, Error as CoreError, PointCloud, RigidTransform, SpatialIndex,
};

/// Exit codes: 0 success, 2 usage, 3 parse/data error, 4 alignment
/// diverged, 5 scene uncovered or unplaceable, 6 evaluation found no
/// correspondences.
mod exit {
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const DIVERGED: u8 = 4;
    pub const UNCOVERED: u8 = 5;
    pub const NO_CORRESPONDENCES: u8 = 6;
}

#[derive(Parser)]
#[command(
    name = "twinmap",
    version,
    about = "Evaluate SLAM point-cloud maps against digital-twin voxel ground truth"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Cell centers in the unit cube.
    Normalized,
    /// Cell centers in meters (scale and translation applied).
    World,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a binvox voxel grid to a point cloud (.ply or .xyz).
    Voxel2cloud {
        /// Input .binvox file.
        input: PathBuf,
        /// Output cloud; format chosen by extension.
        output: PathBuf,
        #[arg(long, value_enum, default_value = "world")]
        mode: Mode,
        /// Keep only occupied cells with an exposed face.
        #[arg(long)]
        surface: bool,
    },
    /// Rigidly register a source cloud onto a target cloud with ICP.
    Register {
        source: PathBuf,
        target: PathBuf,
        /// Where to write the 12-number source-to-target transform.
        #[arg(long)]
        output_transform: PathBuf,
        /// Optional per-iteration RMSE log (CSV).
        #[arg(long)]
        log: Option<PathBuf>,
        /// key = value config file; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        search_radius: Option<f64>,
        #[arg(long)]
        rmse_threshold: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        min_correspondences: Option<usize>,
        /// File with an initial coarse-alignment transform.
        #[arg(long)]
        init: Option<PathBuf>,
        /// Crop box "x0,y0,z0,x1,y1,z1" applied to both clouds before ICP;
        /// repeat for multiple regions (points in any box are kept).
        #[arg(long = "crop", value_name = "X0,Y0,Z0,X1,Y1,Z1")]
        crops: Vec<String>,
    },
    /// Compute correspondence statistics of an aligned map against a model.
    Evaluate {
        map: PathBuf,
        model: PathBuf,
        /// Transform file produced by `register`, applied to the map.
        #[arg(long)]
        transform: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Correspondence rejection threshold in meters.
        #[arg(long)]
        threshold: Option<f64>,
        /// Histogram bin width in meters.
        #[arg(long)]
        bin_width: Option<f64>,
        /// Report output path.
        #[arg(long)]
        report: PathBuf,
        /// Optional CSV with histogram bins.
        #[arg(long)]
        histogram_csv: Option<PathBuf>,
    },
    /// Check that the cine-camera loads every sensor-visible tile.
    Coverage {
        scene: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Optional CSV listing missing tile indices.
        #[arg(long)]
        missing_csv: Option<PathBuf>,
    },
    /// Place a top-down cine-camera that covers all sensor-visible tiles.
    Place {
        scene: PathBuf,
        /// Where to write the "px py pz qx qy qz qw" pose line.
        #[arg(long)]
        pose_out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-frame a trajectory with a registration transform, emitting CSV.
    Traj {
        /// Trajectory file, one "timestamp tx ty tz qx qy qz qw" per line.
        trajectory: PathBuf,
        #[arg(long)]
        transform: PathBuf,
        /// Output CSV with x,y,z columns.
        #[arg(long)]
        output: PathBuf,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err {
            CoreError::AlignmentDiverged { .. } => exit::DIVERGED,
            CoreError::CoverageUnreachable => exit::UNCOVERED,
            // Out-of-range thresholds and ICP settings are argument problems.
            CoreError::InvalidConfig(_) => exit::USAGE,
            _ => exit::PARSE,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<u8, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Voxel2cloud {
            input,
            output,
            mode,
            surface,
        } => cmd_voxel2cloud(&input, &output, mode, surface),
        Command::Register {
            source,
            target,
            output_transform,
            log,
            config,
            search_radius,
            rmse_threshold,
            max_iterations,
            min_correspondences,
            init,
            crops,
        } => cmd_register(RegisterArgs {
            source,
            target,
            output_transform,
            log,
            config,
            search_radius,
            rmse_threshold,
            max_iterations,
            min_correspondences,
            init,
            crops,
        }),
        Command::Evaluate {
            map,
            model,
            transform,
            config,
            threshold,
            bin_width,
            report,
            histogram_csv,
        } => cmd_evaluate(
            &map,
            &model,
            &transform,
            config.as_deref(),
            threshold,
            bin_width,
            &report,
            histogram_csv.as_deref(),
        ),
        Command::Coverage {
            scene,
            report,
            missing_csv,
        } => cmd_coverage(&scene, report.as_deref(), missing_csv.as_deref()),
        Command::Place {
            scene,
            pose_out,
            report,
        } => cmd_place(&scene, pose_out.as_deref(), report.as_deref()),
        Command::Traj {
            trajectory,
            transform,
            output,
        } => cmd_traj(&trajectory, &transform, &output),
    }
}

/// Output paths must not alias any input path.
fn check_distinct_paths(inputs: &[&Path], outputs: &[&Path]) -> Result<(), CliError> {
    for output in outputs {
        let abs_out = std::path::absolute(output)
            .map_err(|e| CliError::usage(format!("{}: {e}", output.display())))?;
        for input in inputs {
            let abs_in = std::path::absolute(input)
                .map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
            if abs_in == abs_out {
                return Err(CliError::usage(format!(
                    "output path {} would overwrite an input",
                    output.display()
                )));
            }
        }
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError {
        code: exit::PARSE,
        message: format!("{}: {e}", path.display()),
    })
}

fn cmd_voxel2cloud(input: &Path, output: &Path, mode: Mode, surface: bool) -> CmdResult {
    check_distinct_paths(&[input], &[output])?;
    let mut grid = voxel::load_binvox(input)?;
    if surface {
        grid = grid.surface_only();
    }
    let mode = match mode {
        Mode::Normalized => ConversionMode::Normalized,
        Mode::World => ConversionMode::World,
    };
    let points = voxel::voxel_to_points(&grid, mode);
    cloud_io::save_cloud(&points, output)?;
    println!("cells = {}", grid.occupied_count());
    println!("points = {}", points.len());
    Ok(0)
}

struct RegisterArgs {
    source: PathBuf,
    target: PathBuf,
    output_transform: PathBuf,
    log: Option<PathBuf>,
    config: Option<PathBuf>,
    search_radius: Option<f64>,
    rmse_threshold: Option<f64>,
    max_iterations: Option<usize>,
    min_correspondences: Option<usize>,
    init: Option<PathBuf>,
    crops: Vec<String>,
}

fn cmd_register(args: RegisterArgs) -> CmdResult {
    let mut outputs: Vec<&Path> = vec![&args.output_transform];
    if let Some(log) = &args.log {
        outputs.push(log);
    }
    check_distinct_paths(&[&args.source, &args.target], &outputs)?;

    let file_config = match &args.config {
        Some(path) => FileConfig::load(path).map_err(|message| CliError {
            code: exit::PARSE,
            message,
        })?,
        None => FileConfig::default(),
    };
    let mut icp_config = file_config.icp_config();
    if let Some(v) = args.search_radius {
        icp_config.search_radius = v;
    }
    if let Some(v) = args.rmse_threshold {
        icp_config.rmse_threshold = v;
    }
    if let Some(v) = args.max_iterations {
        icp_config.max_iterations = v;
    }
    if let Some(v) = args.min_correspondences {
        icp_config.min_correspondences = v;
    }
    let init = match &args.init {
        Some(path) => read_transform(path)?,
        None => file_config.init.unwrap_or_else(RigidTransform::identity),
    };

    let crops = parse_crops(&args.crops)?;
    let source = crop_union(&cloud_io::load_cloud(&args.source)?, &crops);
    let target = crop_union(&cloud_io::load_cloud(&args.target)?, &crops);

    let result = icp::icp(&source, &target, &icp_config, &init)?;

    write_transform(&result.transform, &args.output_transform)?;
    if let Some(log) = &args.log {
        let mut text = String::from("iteration,rmse_m\n");
        for (i, rmse) in result.rmse_history.iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, rmse));
        }
        write_text(log, &text)?;
    }
    println!("converged = {}", result.converged);
    println!("iterations = {}", result.iterations_run);
    println!("final_rmse_m = {}", result.final_rmse);
    println!("correspondences = {}", result.correspondence_count);
    Ok(0)
}

fn parse_crops(specs: &[String]) -> Result<Vec<Aabb>, CliError> {
    specs
        .iter()
        .map(|spec| {
            let values: Vec<f64> = spec
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::usage(format!("bad crop box {spec:?}")))?;
            if values.len() != 6 {
                return Err(CliError::usage(format!(
                    "crop box {spec:?} needs 6 comma-separated numbers"
                )));
            }
            Aabb::new(
                Point3::new(values[0], values[1], values[2]),
                Point3::new(values[3], values[4], values[5]),
            )
            .map_err(|e| CliError::usage(e.to_string()))
        })
        .collect()
}

/// Keeps points inside any of the boxes; no boxes means no cropping.
fn crop_union(cloud_in: &PointCloud, boxes: &[Aabb]) -> PointCloud {
    if boxes.is_empty() {
        return cloud_in.clone();
    }
    let keep: Vec<bool> = cloud_in
        .points
        .iter()
        .map(|p| boxes.iter().any(|b| b.contains(p)))
        .collect();
    cloud::filter_cloud(cloud_in, &keep)
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    map: &Path,
    model: &Path,
    transform_path: &Path,
    config: Option<&Path>,
    threshold: Option<f64>,
    bin_width: Option<f64>,
    report_path: &Path,
    histogram_csv_path: Option<&Path>,
) -> CmdResult {
    let mut outputs: Vec<&Path> = vec![report_path];
    if let Some(csv) = histogram_csv_path {
        outputs.push(csv);
    }
    check_distinct_paths(&[map, model, transform_path], &outputs)?;

    let file_config = match config {
        Some(path) => FileConfig::load(path).map_err(|message| CliError {
            code: exit::PARSE,
            message,
        })?,
        None => FileConfig::default(),
    };
    let threshold = threshold.or(file_config.threshold).unwrap_or(1.0);
    let bin_width = bin_width.or(file_config.bin_width).unwrap_or(0.05);

    let map_cloud = cloud_io::load_cloud(map)?;
    let model_cloud = cloud_io::load_cloud(model)?;
    let alignment = read_transform(transform_path)?;
    let aligned = transform::transform_cloud(&map_cloud, &alignment);
    let model_index = SpatialIndex::build(&model_cloud)?;

    let report = eval::evaluate(&aligned, &model_index, threshold, bin_width)?;
    eval::write_report(&report, report_path)?;
    if let Some(csv) = histogram_csv_path {
        write_text(csv, &eval::histogram_csv(&report))?;
    }
    print!("{}", eval::format_report(&report));

    if report.correspondence_count == 0 {
        eprintln!("warning: no correspondences within {threshold} m");
        return Ok(exit::NO_CORRESPONDENCES);
    }
    Ok(0)
}

fn cmd_coverage(
    scene_path: &Path,
    report_path: Option<&Path>,
    missing_csv_path: Option<&Path>,
) -> CmdResult {
    let mut outputs = Vec::new();
    outputs.extend(report_path);
    outputs.extend(missing_csv_path);
    check_distinct_paths(&[scene_path], &outputs)?;

    let scene = twinmap::load_scene(scene_path)?;
    let cine = visibility::frustum_from(&scene.cine.pose, &scene.cine.intrinsics)?;
    let sensors = scene
        .sensors
        .iter()
        .map(|c| visibility::frustum_from(&c.pose, &c.intrinsics))
        .collect::<Result<Vec<_>, _>>()?;
    let report = visibility::coverage_check(&cine, &sensors, &scene.grid);

    let text = format_coverage_report(&report);
    print!("{text}");
    if let Some(path) = report_path {
        write_text(path, &text)?;
    }
    if let Some(path) = missing_csv_path {
        write_text(path, &missing_tiles_csv(&report))?;
    }
    if report.covered {
        Ok(0)
    } else {
        eprintln!("error: {} sensor-visible tiles are not cine-visible", report.missing.len());
        Ok(exit::UNCOVERED)
    }
}

fn cmd_place(
    scene_path: &Path,
    pose_out: Option<&Path>,
    report_path: Option<&Path>,
) -> CmdResult {
    let mut outputs = Vec::new();
    outputs.extend(pose_out);
    outputs.extend(report_path);
    check_distinct_paths(&[scene_path], &outputs)?;

    let scene = twinmap::load_scene(scene_path)?;
    let sensors = scene
        .sensors
        .iter()
        .map(|c| visibility::frustum_from(&c.pose, &c.intrinsics))
        .collect::<Result<Vec<_>, _>>()?;
    let (pose, report) =
        visibility::place_cine_camera(&sensors, &scene.grid, &scene.cine.intrinsics)?;

    let pose_line = format_camera_pose(&pose);
    print!("pose = {pose_line}");
    print!("{}", format_coverage_report(&report));
    if let Some(path) = pose_out {
        write_text(path, &pose_line)?;
    }
    if let Some(path) = report_path {
        write_text(path, &format_coverage_report(&report))?;
    }
    Ok(0)
}

fn cmd_traj(trajectory_path: &Path, transform_path: &Path, output: &Path) -> CmdResult {
    check_distinct_paths(&[trajectory_path, transform_path], &[output])?;
    let traj = trajectory::load_trajectory(trajectory_path)?;
    let alignment = read_transform(transform_path)?;
    let moved = trajectory::transform_trajectory(&traj, &alignment);
    write_text(output, &trajectory_csv(&moved))?;
    println!("poses = {}", moved.len());
    Ok(0)
}
