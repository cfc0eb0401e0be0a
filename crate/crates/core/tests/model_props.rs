mod common;

use bemnet::bem::RealCauchy;
use bemnet::geometry::{BoundaryMesh, PointSet};
use bemnet::model::{loss, GreensNetModel, Normalization};
use bemnet::Error;
use proptest::prelude::*;

fn model_for(mesh: &BoundaryMesh, seed: u64) -> GreensNetModel {
    GreensNetModel::new(4, Normalization::for_domain(&mesh.domain), seed).unwrap()
}

#[test]
fn loss_gradients_match_finite_differences() {
    let check = common::loss_gradient_check();
    assert!(check.checked >= 100);
    assert!(check.max_relative_error < 1e-4, "max relative error {}", check.max_relative_error);
}

#[test]
fn exact_kernels_reproduce_the_representation_sum() {
    for k in [0.0, 1.0, 3.0] {
        let gap = common::oracle_substitution_gap(k, 0.5);
        assert!(gap <= 1e-12, "k = {k}: {gap}");
    }
}

#[test]
fn loss_is_literal() {
    assert_eq!(loss(&[0.1; 4], &[0.0; 4]).unwrap(), 0.05);
    assert!(matches!(loss(&[], &[]), Err(Error::EmptyBatch)));
    assert!(matches!(loss(&[1.0], &[1.0, 2.0]), Err(Error::ShapeMismatch(_))));
}

#[test]
fn collocation_order_does_not_matter() {
    let (mesh, cauchy, pts) = common::small_problem([2, 2, 1]);
    let model = model_for(&mesh, 1);
    let base = model.predict(&model.assemble_inputs(&mesh, &cauchy, &pts).unwrap()).unwrap();

    let n = mesh.len();
    let perm: Vec<usize> = (0..n).map(|j| (7 * j + 3) % n).collect();
    let mesh_p = BoundaryMesh {
        elements: perm.iter().map(|&j| mesh.elements[j]).collect(),
        ..mesh.clone()
    };
    let cauchy_p = RealCauchy {
        u: perm.iter().map(|&j| cauchy.u[j]).collect(),
        q: perm.iter().map(|&j| cauchy.q[j]).collect(),
    };
    let permuted = model.predict(&model.assemble_inputs(&mesh_p, &cauchy_p, &pts).unwrap()).unwrap();
    for (a, b) in base.iter().zip(&permuted) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn each_point_is_predicted_independently() {
    let (mesh, cauchy, pts) = common::small_problem([2, 2, 2]);
    let model = model_for(&mesh, 2);
    let all = model.predict(&model.assemble_inputs(&mesh, &cauchy, &pts).unwrap()).unwrap();
    for (i, p) in pts.points.iter().enumerate() {
        let one = model
            .predict(&model.assemble_inputs(&mesh, &cauchy, &PointSet::new(vec![*p])).unwrap())
            .unwrap();
        assert_eq!(one[0], all[i]);
    }
    let chunked = model.predict_points(&mesh, &cauchy, &pts).unwrap();
    assert_eq!(chunked, all);
}

#[test]
fn zero_stacks_predict_zero_and_have_zero_gradient_at_zero_residual() {
    let (mesh, cauchy, pts) = common::small_problem([1, 1, 2]);
    let model = GreensNetModel::zeros(4, Normalization::for_domain(&mesh.domain)).unwrap();
    let inputs = model.assemble_inputs(&mesh, &cauchy, &pts).unwrap();
    assert!(model.predict(&inputs).unwrap().iter().all(|v| *v == 0.0));
    let (l, grads) = model.loss_gradients(&inputs, &[0.0, 0.0]).unwrap();
    assert_eq!(l, 0.0);
    assert!(grads.to_flat().iter().all(|g| *g == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The integration layer is linear in the boundary data.
    #[test]
    fn prediction_is_linear_in_cauchy_data(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..50) {
        let (mesh, c1, pts) = common::small_problem([1, 2, 1]);
        let c2 = RealCauchy {
            u: c1.q.iter().map(|v| v * 1.7 - 0.2).collect(),
            q: c1.u.iter().map(|v| 0.4 - v).collect(),
        };
        let mix = RealCauchy {
            u: c1.u.iter().zip(&c2.u).map(|(x, y)| a * x + b * y).collect(),
            q: c1.q.iter().zip(&c2.q).map(|(x, y)| a * x + b * y).collect(),
        };
        let model = model_for(&mesh, seed);
        let p = |c: &RealCauchy| model.predict(&model.assemble_inputs(&mesh, c, &pts).unwrap()).unwrap();
        let (p1, p2, pm) = (p(&c1), p(&c2), p(&mix));
        for i in 0..pm.len() {
            let expect = a * p1[i] + b * p2[i];
            prop_assert!((pm[i] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn normalization_round_trips(x in 0.0f64..1.0, y in 0.0f64..5.0, z in 0.0f64..3.0) {
        let n = Normalization::for_domain(&bemnet::geometry::BoxDomain::test_case());
        let q = n.apply(&[x, y, z]);
        prop_assert!(q.iter().all(|v| (-1.0..=1.0).contains(v)));
        let back = n.invert(&q);
        prop_assert!((back[0] - x).abs() < 1e-12 && (back[1] - y).abs() < 1e-12 && (back[2] - z).abs() < 1e-12);
    }
}
