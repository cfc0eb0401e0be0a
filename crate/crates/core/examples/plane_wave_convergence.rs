//! Feeds exact Cauchy data of `u = cos(k d·r)` into the interior
//! representation formula and reports the error under mesh refinement.
//!
//! ```text
//! cargo run --release --example plane_wave_convergence
//! ```

use bemnet::bem::{evaluate_interior, CauchyData, Wavenumber};
use bemnet::geometry::{build_box_mesh, dot, uniform_sensor_points, BoxDomain};
use num_complex::Complex64;

fn main() -> bemnet::Result<()> {
    let domain = BoxDomain::new(1.0, 1.0, 1.0)?;
    let k = Wavenumber::new(1.0)?;
    let d = [1.0, 0.0, 0.0];
    let targets = uniform_sensor_points(&domain, [4, 4, 4])?;
    let exact: Vec<f64> = targets.points.iter().map(|p| (k.value() * dot(&d, p)).cos()).collect();

    println!("{:>8} {:>10} {:>14}", "step", "elements", "relative RMS");
    for step in [0.5, 0.25, 0.125] {
        let mesh = build_box_mesh(domain, step)?;
        let cauchy = CauchyData {
            u: mesh
                .elements
                .iter()
                .map(|e| Complex64::new((k.value() * dot(&d, &e.centroid)).cos(), 0.0))
                .collect(),
            q: mesh
                .elements
                .iter()
                .map(|e| Complex64::new(-k.value() * dot(&d, &e.normal) * (k.value() * dot(&d, &e.centroid)).sin(), 0.0))
                .collect(),
        };
        let field = evaluate_interior(&mesh, &cauchy, k, &targets)?;
        let num: f64 = field.values.iter().zip(&exact).map(|(u, e)| (u.re - e).powi(2)).sum();
        let den: f64 = exact.iter().map(|e| e * e).sum();
        println!("{step:>8} {:>10} {:>14.3e}", mesh.len(), (num / den).sqrt());
    }
    Ok(())
}
