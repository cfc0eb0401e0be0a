//! Checks shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use bemnet::bem::{discrete_representation_real, generate_dataset, BcSpec, RealCauchy, Wavenumber};
use bemnet::geometry::{build_box_mesh, uniform_sensor_points, BoundaryMesh, BoxDomain, PointSet};
use bemnet::model::{assemble_inputs, predict_with, ExactKernels, GreensNetModel, Normalization};

/// Unit cube, step 0.5 (24 elements), smooth synthetic boundary data.
pub fn small_problem(points: [usize; 3]) -> (BoundaryMesh, RealCauchy, PointSet) {
    let d = BoxDomain::new(1.0, 1.0, 1.0).unwrap();
    let mesh = build_box_mesh(d, 0.5).unwrap();
    let n = mesh.len();
    let cauchy = RealCauchy {
        u: (0..n).map(|j| 1.0 + 0.3 * (0.9 * j as f64).cos()).collect(),
        q: (0..n).map(|j| 0.5 * (1.3 * j as f64).sin()).collect(),
    };
    (mesh, cauchy, uniform_sensor_points(&d, points).unwrap())
}

pub struct GradientCheck {
    pub checked: usize,
    pub max_relative_error: f64,
}

/// Central differences of the loss against `loss_gradients` on every
/// parameter of a width-4 model with two interior points and 24 elements.
pub fn loss_gradient_check() -> GradientCheck {
    let (mesh, cauchy, pts) = small_problem([2, 1, 1]);
    let mut model = GreensNetModel::new(4, Normalization::for_domain(&mesh.domain), 9).unwrap();
    let inputs = model.assemble_inputs(&mesh, &cauchy, &pts).unwrap();
    assert_eq!((inputs.n_points(), inputs.n_colloc()), (2, 24));
    let targets = [0.7, -0.4];
    let (_, grads) = model.loss_gradients(&inputs, &targets).unwrap();
    let analytic = grads.to_flat();

    let loss_at = |m: &GreensNetModel| bemnet::model::loss(&m.predict(&inputs).unwrap(), &targets).unwrap();
    let g0 = model.g_stack.to_flat();
    let d0 = model.dgdn_stack.to_flat();
    let h = 1e-6;
    let mut max_rel: f64 = 0.0;
    for i in 0..analytic.len() {
        let bump = |m: &mut GreensNetModel, delta: f64| {
            let (mut g, mut d) = (g0.clone(), d0.clone());
            if i < g.len() {
                g[i] += delta;
            } else {
                d[i - g.len()] += delta;
            }
            m.g_stack.set_flat(&g).unwrap();
            m.dgdn_stack.set_flat(&d).unwrap();
        };
        bump(&mut model, h);
        let fp = loss_at(&model);
        bump(&mut model, -h);
        let fm = loss_at(&model);
        let fd = (fp - fm) / (2.0 * h);
        let scale = fd.abs().max(analytic[i].abs()).max(1e-7);
        max_rel = max_rel.max((fd - analytic[i]).abs() / scale);
    }
    GradientCheck {
        checked: analytic.len(),
        max_relative_error: max_rel,
    }
}

/// Largest relative gap between the integration layer driven by exact
/// kernels and the one-point representation sum, on test-case data.
pub fn oracle_substitution_gap(k: f64, step: f64) -> f64 {
    let domain = BoxDomain::test_case();
    let wk = Wavenumber::new(k).unwrap();
    let data = generate_dataset(domain, step, wk, &BcSpec::test_case(), [1, 5, 3], [2, 5, 3]).unwrap();
    let norm = Normalization::for_domain(&domain);
    let stub = ExactKernels {
        k: wk,
        domain,
        normalization: norm,
    };
    let mut worst: f64 = 0.0;
    for set in [&data.sensors, &data.grid] {
        let inputs = assemble_inputs(&data.mesh, &data.boundary, set, &norm).unwrap();
        let net = predict_with(&stub, &inputs).unwrap();
        let oracle = discrete_representation_real(&data.mesh, &data.boundary, wk, set).unwrap();
        for (a, b) in net.iter().zip(&oracle) {
            worst = worst.max((a - b).abs() / b.abs().max(1e-300));
        }
    }
    worst
}

/// Relative RMS error of the representation formula fed with exact Cauchy
/// data of `cos(k x)` on the unit cube, for each step.
pub fn plane_wave_errors(k: f64, steps: &[f64]) -> Vec<f64> {
    use bemnet::bem::{evaluate_interior, CauchyData};
    use bemnet::geometry::dot;
    use num_complex::Complex64;

    let domain = BoxDomain::new(1.0, 1.0, 1.0).unwrap();
    let wk = Wavenumber::new(k).unwrap();
    let d = [1.0, 0.0, 0.0];
    let targets = uniform_sensor_points(&domain, [4, 4, 4]).unwrap();
    let exact: Vec<f64> = targets.points.iter().map(|p| (k * dot(&d, p)).cos()).collect();
    steps
        .iter()
        .map(|&step| {
            let mesh = build_box_mesh(domain, step).unwrap();
            let cauchy = CauchyData {
                u: mesh
                    .elements
                    .iter()
                    .map(|e| Complex64::new((k * dot(&d, &e.centroid)).cos(), 0.0))
                    .collect(),
                q: mesh
                    .elements
                    .iter()
                    .map(|e| Complex64::new(-k * dot(&d, &e.normal) * (k * dot(&d, &e.centroid)).sin(), 0.0))
                    .collect(),
            };
            let field = evaluate_interior(&mesh, &cauchy, wk, &targets).unwrap();
            let num: f64 = field.values.iter().zip(&exact).map(|(u, e)| (u.re - e).powi(2)).sum();
            let den: f64 = exact.iter().map(|e| e * e).sum();
            (num / den).sqrt()
        })
        .collect()
}

/// Largest deviation from 1 of the interior field for the Laplace problem
/// with `u = 1` on every face.
pub fn laplace_constant_deviation(step: f64) -> f64 {
    use bemnet::bem::{assemble_and_solve, evaluate_interior, BcKind};
    let domain = BoxDomain::test_case();
    let mesh = build_box_mesh(domain, step).unwrap();
    let k = Wavenumber::new(0.0).unwrap();
    let sol = assemble_and_solve(&mesh, k, &BcSpec::uniform(BcKind::Dirichlet, 1.0)).unwrap();
    let pts = uniform_sensor_points(&domain, [2, 10, 6]).unwrap();
    evaluate_interior(&mesh, &sol.cauchy, k, &pts)
        .unwrap()
        .values
        .iter()
        .map(|v| (v.re - 1.0).abs().max(v.im.abs()))
        .fold(0.0, f64::max)
}

/// A configuration that runs every command in well under a second.
pub fn tiny_config() -> bemnet::config::ExperimentConfig {
    bemnet::config::ExperimentConfig::from_toml_str(TINY_TOML).unwrap()
}

pub const TINY_TOML: &str = r#"
[domain]
lengths = [1.0, 1.0, 1.0]

[mesh]
step = 0.25

[sensors]
counts = [2, 2, 2]
grid = [4, 4, 4]

[training]
max_epochs = 15
patience = 5
seeds = [0, 1]
hidden_width = 4

[sweep]
wavenumbers = [0.0, 1.0, 2.0]
sensor_layouts = [[2, 2, 2]]
hidden_widths = [4]

[report]
slice_coord = 0.5
histogram_bins = 20
"#;
