use super::kernels::Wavenumber;
use super::solver::{assemble_and_solve, evaluate_interior, BcSpec, RealCauchy};
use crate::error::Result;
use crate::geometry::{
    build_box_mesh, evaluation_grid, uniform_sensor_points, BoundaryMesh, BoxDomain, LatticeCounts,
    PointSet,
};

/// Ground truth for one reconstruction problem: real boundary Cauchy data,
/// sensor readings and reference values on the evaluation grid.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub mesh: BoundaryMesh,
    pub boundary: RealCauchy,
    pub sensors: PointSet,
    pub grid: PointSet,
    pub condition: f64,
}

pub fn generate_dataset(
    domain: BoxDomain,
    step: f64,
    k: Wavenumber,
    bc: &BcSpec,
    sensor_counts: LatticeCounts,
    grid_counts: LatticeCounts,
) -> Result<GeneratedData> {
    let mesh = build_box_mesh(domain, step)?;
    let sensors = uniform_sensor_points(&domain, sensor_counts)?;
    let grid = evaluation_grid(&domain, grid_counts)?;
    let solution = assemble_and_solve(&mesh, k, bc)?;

    let sensor_values = evaluate_interior(&mesh, &solution.cauchy, k, &sensors)?.real_parts();
    let grid_values = evaluate_interior(&mesh, &solution.cauchy, k, &grid)?.real_parts();

    Ok(GeneratedData {
        boundary: solution.cauchy.real_view(),
        sensors: PointSet::with_values(sensors.points, sensor_values)?,
        grid: PointSet::with_values(grid.points, grid_values)?,
        condition: solution.condition,
        mesh,
    })
}
