use bemnet::nn::init_stack;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar objective `0.5 Σ (w ⊙ y)` of the stack output for a fixed weight
/// pattern, so every output entry has a distinct cotangent.
fn objective(stack: &bemnet::nn::DenseStack, x: &Array2<f64>, w: &Array2<f64>) -> f64 {
    let (y, _) = stack.forward_batch(x.view()).unwrap();
    0.5 * (&y * w).sum()
}

#[test]
fn backward_matches_central_differences() {
    let mut stack = init_stack(&[6, 5, 5, 5, 1], 11).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Array2::from_shape_fn((7, 6), |_| rng.random_range(-1.0f64..1.0));
    let w = Array2::from_shape_fn((7, 1), |_| rng.random_range(-1.0f64..1.0));

    let (_, tape) = stack.forward_batch(x.view()).unwrap();
    let (grads, _) = stack.backward(&tape, (0.5 * &w).view()).unwrap();
    let analytic = grads.to_flat();
    let base = stack.to_flat();
    assert!(base.len() >= 100);

    let h = 1e-6;
    let mut checked = 0;
    for i in 0..base.len() {
        let mut p = base.clone();
        p[i] = base[i] + h;
        stack.set_flat(&p).unwrap();
        let fp = objective(&stack, &x, &w);
        p[i] = base[i] - h;
        stack.set_flat(&p).unwrap();
        let fm = objective(&stack, &x, &w);
        let fd = (fp - fm) / (2.0 * h);
        let scale = fd.abs().max(analytic[i].abs()).max(1e-6);
        assert!((fd - analytic[i]).abs() / scale < 1e-4, "coord {i}: fd {fd}, analytic {}", analytic[i]);
        checked += 1;
    }
    stack.set_flat(&base).unwrap();
    assert!(checked >= 100);
}

#[test]
fn input_cotangent_matches_central_differences() {
    let stack = init_stack(&[6, 4, 4, 4, 1], 5).unwrap();
    let x = Array2::from_shape_fn((1, 6), |(_, j)| 0.1 * j as f64 - 0.2);
    let w: Array2<f64> = Array2::from_elem((1, 1), 1.0);
    let (_, tape) = stack.forward_batch(x.view()).unwrap();
    let (_, dx) = stack.backward(&tape, (0.5 * &w).view()).unwrap();
    let h = 1e-6;
    for j in 0..6 {
        let mut xp = x.clone();
        xp[[0, j]] += h;
        let mut xm = x.clone();
        xm[[0, j]] -= h;
        let fd = (objective(&stack, &xp, &w) - objective(&stack, &xm, &w)) / (2.0 * h);
        assert!((fd - dx[[0, j]]).abs() < 1e-8, "input {j}");
    }
}
