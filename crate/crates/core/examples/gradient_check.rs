//! Compares `loss_gradients` with central finite differences on every
//! parameter of a small model (2 interior points, 24 elements, width 4).
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use bemnet::bem::RealCauchy;
use bemnet::geometry::{build_box_mesh, uniform_sensor_points, BoxDomain};
use bemnet::model::{loss, GreensNetModel, Normalization};

fn main() -> bemnet::Result<()> {
    let d = BoxDomain::new(1.0, 1.0, 1.0)?;
    let mesh = build_box_mesh(d, 0.5)?;
    let n = mesh.len();
    let cauchy = RealCauchy {
        u: (0..n).map(|j| 1.0 + 0.3 * (0.9 * j as f64).cos()).collect(),
        q: (0..n).map(|j| 0.5 * (1.3 * j as f64).sin()).collect(),
    };
    let points = uniform_sensor_points(&d, [2, 1, 1])?;
    let targets = [0.7, -0.4];

    let mut model = GreensNetModel::new(4, Normalization::for_domain(&d), 9)?;
    let inputs = model.assemble_inputs(&mesh, &cauchy, &points)?;
    let (l0, grads) = model.loss_gradients(&inputs, &targets)?;
    let analytic = grads.to_flat();
    println!("loss {l0:.6e}, {} parameters", analytic.len());

    let g0 = model.g_stack.to_flat();
    let d0 = model.dgdn_stack.to_flat();
    let h = 1e-6;
    let mut worst = (0.0f64, 0);
    for i in 0..analytic.len() {
        let mut eval = |delta: f64| -> bemnet::Result<f64> {
            let (mut g, mut dd) = (g0.clone(), d0.clone());
            if i < g.len() {
                g[i] += delta;
            } else {
                dd[i - g.len()] += delta;
            }
            model.g_stack.set_flat(&g)?;
            model.dgdn_stack.set_flat(&dd)?;
            loss(&model.predict(&inputs)?, &targets)
        };
        let fd = (eval(h)? - eval(-h)?) / (2.0 * h);
        let rel = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-7);
        if rel > worst.0 {
            worst = (rel, i);
        }
    }
    println!("max relative error {:.2e} at parameter {}", worst.0, worst.1);
    Ok(())
}
