//! Minimal library walkthrough: build a synthetic ground-truth grid,
//! perturb a copy of its cloud, register it back, and print the error
//! statistics.
//!
//! Run with `cargo run -p twinmap --example evaluate_map`.

use nalgebra::{UnitQuaternion, Vector3};
use twinmap::{
    eval, icp, transform_cloud, ConversionMode, IcpConfig, RigidTransform, SpatialIndex, VoxelGrid,
};

fn main() -> twinmap::Result<()> {
    // Ground truth: a 20x20x6 grid with a floor and one wall, 1 m cells.
    let mut grid = VoxelGrid::new([20, 20, 6], Vector3::zeros(), 20.0)?;
    for x in 0..20 {
        for y in 0..20 {
            grid.set(x, y, 0, true);
        }
    }
    for y in 5..15 {
        for z in 1..6 {
            grid.set(8, y, z, true);
        }
    }
    let model = twinmap::voxel_to_points(&grid, ConversionMode::World);

    // A "survey" of the same scene, offset by a small rigid motion.
    let offset = RigidTransform::new(
        UnitQuaternion::from_euler_angles(0.0, 0.0, 0.02)
            .to_rotation_matrix()
            .into_inner(),
        Vector3::new(0.3, -0.2, 0.05),
    )?;
    let map = transform_cloud(&model, &offset);

    let result = icp(&map, &model, &IcpConfig::default(), &RigidTransform::identity())?;
    println!(
        "registered in {} iterations (converged: {}, rmse {:.2e} m)",
        result.iterations_run, result.converged, result.final_rmse
    );

    let aligned = transform_cloud(&map, &result.transform);
    let index = SpatialIndex::build(&model)?;
    let report = eval::evaluate(&aligned, &index, 1.0, 0.05)?;
    print!("{}", eval::format_report(&report));
    Ok(())
}
