//! Boundary mesh of the 1 x 5 x 3 test box and the solid-angle coefficient
//! at interior, face, edge and corner points.
//!
//! ```text
//! cargo run --example mesh_and_solid_angle -- [step]
//! ```

use bemnet::geometry::{build_box_mesh, evaluation_grid, solid_angle_coeff, BoxDomain, Face};

fn main() -> bemnet::Result<()> {
    let step: f64 = std::env::args().nth(1).map_or(0.1, |s| s.parse().expect("step"));
    let domain = BoxDomain::test_case();
    let mesh = build_box_mesh(domain, step)?;
    println!("step {step}: {} elements, area {:.6}", mesh.len(), mesh.total_area());
    for face in Face::ALL {
        let n = mesh.elements.iter().filter(|e| e.face == face).count();
        println!("  {face}: {n:>5} elements, normal {:?}", face.outward_normal());
    }
    println!("normal closure Σ n dA = {:?}", mesh.normal_closure());
    println!("evaluation grid: {} points", evaluation_grid(&domain, [10, 50, 30])?.len());

    for (label, p) in [
        ("interior", [0.5, 2.5, 1.5]),
        ("face", [0.0, 2.5, 1.5]),
        ("edge", [0.0, 0.0, 1.5]),
        ("corner", [1.0, 5.0, 3.0]),
    ] {
        println!("eta at {label:<8} {p:?} = {}", solid_angle_coeff(&p, &domain)?);
    }
    Ok(())
}
