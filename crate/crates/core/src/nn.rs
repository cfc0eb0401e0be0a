//! Dense tanh networks with explicit reverse-mode gradients and Adam.
//!
//! A [`DenseStack`] maps row-major batches: every row of the input matrix is
//! an independent sample. Hidden layers use `tanh`, the output layer is
//! affine.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseStack {
    sizes: Vec<usize>,
    /// Layer `l` maps `sizes[l]` to `sizes[l + 1]`; weights are `out x in`.
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::ShapeMismatch(format!(
            "a stack needs at least two positive layer sizes, got {sizes:?}"
        )));
    }
    Ok(())
}

impl DenseStack {
    /// Glorot-uniform weights drawn from `rng`, zero biases.
    pub fn glorot(sizes: &[usize], rng: &mut impl Rng) -> Result<Self> {
        check_sizes(sizes)?;
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || {
                rng.random_range(-limit..=limit)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        Ok(Self {
            sizes: sizes.to_vec(),
            weights: sizes
                .windows(2)
                .map(|p| Array2::zeros((p[1], p[0])))
                .collect(),
            biases: sizes.windows(2).map(|p| Array1::zeros(p[1])).collect(),
        })
    }

    /// Builds a stack from explicit per-layer parameters.
    pub fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::ShapeMismatch("weights and biases must pair up".into()));
        }
        let mut sizes = vec![weights[0].ncols()];
        for (w, b) in weights.iter().zip(&biases) {
            if w.ncols() != *sizes.last().unwrap() || w.nrows() != b.len() {
                return Err(Error::ShapeMismatch(format!(
                    "layer {}x{} with bias {} does not chain",
                    w.nrows(),
                    w.ncols(),
                    b.len()
                )));
            }
            sizes.push(w.nrows());
        }
        check_sizes(&sizes)?;
        if weights.iter().flatten().chain(biases.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite parameter".into()));
        }
        Ok(Self {
            sizes,
            weights: weights.into_iter().map(|w| w.as_standard_layout().into_owned()).collect(),
            biases,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    /// Flattened parameters: for each layer, row-major weights then biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.parameter_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                flat.len()
            )));
        }
        let mut it = flat.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            w.iter_mut().chain(b.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        out
    }

    /// Forward pass over a batch of rows.
    pub fn forward_batch(&self, input: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Tape)> {
        if input.ncols() != self.input_width() {
            return Err(Error::ShapeMismatch(format!(
                "input width {} does not match stack input {}",
                input.ncols(),
                self.input_width()
            )));
        }
        let last = self.weights.len() - 1;
        let mut activations = Vec::with_capacity(self.weights.len() + 1);
        activations.push(input.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = activations[l].dot(&w.t());
            z += b;
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            activations.push(z);
        }
        let output = activations.last().unwrap().clone();
        Ok((output, Tape { activations }))
    }

    /// Forward pass for a single input vector.
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, Tape)> {
        let x = ArrayView2::from_shape((1, input.len()), input)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        let (y, tape) = self.forward_batch(x)?;
        Ok((y.into_raw_vec_and_offset().0, tape))
    }

    /// Reverse pass: returns parameter gradients and the input cotangent.
    pub fn backward(&self, tape: &Tape, output_cotangent: ArrayView2<'_, f64>) -> Result<(StackGrads, Array2<f64>)> {
        let mut grads = StackGrads::zeros_like(self);
        let input_cot = self.backward_into(tape, output_cotangent, &mut grads, true)?;
        Ok((grads, input_cot.expect("requested")))
    }

    /// Reverse pass accumulating parameter gradients into `grads`.
    ///
    /// The input cotangent is only formed when `want_input` is set.
    pub fn backward_into(
        &self,
        tape: &Tape,
        output_cotangent: ArrayView2<'_, f64>,
        grads: &mut StackGrads,
        want_input: bool,
    ) -> Result<Option<Array2<f64>>> {
        let n_layers = self.weights.len();
        if tape.activations.len() != n_layers + 1 {
            return Err(Error::ShapeMismatch("tape was recorded on a different stack".into()));
        }
        let out = &tape.activations[n_layers];
        if output_cotangent.dim() != out.dim() {
            return Err(Error::ShapeMismatch(format!(
                "cotangent shape {:?} does not match output {:?}",
                output_cotangent.dim(),
                out.dim()
            )));
        }
        let mut delta = output_cotangent.to_owned();
        for l in (0..n_layers).rev() {
            if l < n_layers - 1 {
                // tanh' = 1 - a²
                ndarray::Zip::from(&mut delta)
                    .and(&tape.activations[l + 1])
                    .for_each(|d, &a| *d *= 1.0 - a * a);
            }
            let a_prev = &tape.activations[l];
            general_mat_mul(1.0, &delta.t(), a_prev, 1.0, &mut grads.weights[l]);
            grads.biases[l] += &delta.sum_axis(Axis(0));
            if l > 0 || want_input {
                delta = delta.dot(&self.weights[l]);
            }
        }
        Ok(want_input.then_some(delta))
    }
}

/// Layer activations recorded by a forward pass.
///
/// `activations[0]` is the input batch and `activations[l]` the output of
/// layer `l` (after `tanh` for hidden layers).
#[derive(Debug, Clone)]
pub struct Tape {
    activations: Vec<Array2<f64>>,
}

/// Gradients with the same shapes as a stack's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StackGrads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl StackGrads {
    pub fn zeros_like(stack: &DenseStack) -> Self {
        Self {
            weights: stack.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: stack.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn add_assign(&mut self, other: &StackGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            *a += b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().flatten().chain(self.biases.iter().flatten()).all(|v| *v == 0.0)
    }

    fn slices(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(2 * self.weights.len());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.as_slice().expect("standard layout"));
            out.push(b.as_slice().expect("standard layout"));
        }
        out
    }
}

/// Glorot-initialized stack from a ChaCha8 stream seeded with `seed`.
pub fn init_stack(sizes: &[usize], seed: u64) -> Result<DenseStack> {
    DenseStack::glorot(sizes, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

/// Moment estimates for one stack.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(stack: &DenseStack, config: AdamConfig) -> Self {
        let n = stack.parameter_count();
        Self {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    /// One bias-corrected Adam update of `stack` in place.
    pub fn step(&mut self, stack: &mut DenseStack, grads: &StackGrads) -> Result<()> {
        if self.m.len() != stack.parameter_count() {
            return Err(Error::ShapeMismatch("optimizer state belongs to another stack".into()));
        }
        self.t += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        let mut offset = 0;
        for (p, g) in stack.param_slices_mut().into_iter().zip(grads.slices()) {
            if p.len() != g.len() {
                return Err(Error::ShapeMismatch("gradient shape mismatch".into()));
            }
            let m = &mut self.m[offset..offset + p.len()];
            let v = &mut self.v[offset..offset + p.len()];
            for (((pi, gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *pi -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
            offset += p.len();
        }
        Ok(())
    }
}
