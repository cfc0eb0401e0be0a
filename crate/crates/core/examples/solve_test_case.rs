//! Solves the test-case boundary-value problem (Dirichlet 1 on x+ and z-,
//! Neumann 1 elsewhere) and evaluates the field at the 15 sensors.
//!
//! ```text
//! cargo run --release --example solve_test_case -- [k] [step]
//! ```

use bemnet::bem::{assemble_and_solve, evaluate_interior, BcSpec, Wavenumber};
use bemnet::geometry::{build_box_mesh, uniform_sensor_points, BoxDomain};

fn main() -> bemnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let k = Wavenumber::new(args.next().map_or(1.0, |s| s.parse().expect("k")))?;
    let step: f64 = args.next().map_or(0.25, |s| s.parse().expect("step"));

    let domain = BoxDomain::test_case();
    let mesh = build_box_mesh(domain, step)?;
    let solution = assemble_and_solve(&mesh, k, &BcSpec::test_case())?;
    println!(
        "k = {}, {} elements, condition estimate {:.3e}",
        k.value(),
        mesh.len(),
        solution.condition
    );

    let sensors = uniform_sensor_points(&domain, [1, 5, 3])?;
    let field = evaluate_interior(&mesh, &solution.cauchy, k, &sensors)?;
    println!("{:>6} {:>6} {:>6} {:>12} {:>12}", "x", "y", "z", "Re u", "Im u");
    for (p, u) in sensors.points.iter().zip(&field.values) {
        println!("{:>6.2} {:>6.2} {:>6.2} {:>12.6} {:>12.6}", p[0], p[1], p[2], u.re, u.im);
    }
    Ok(())
}
