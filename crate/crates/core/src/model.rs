//! The BEM-structured network.
//!
//! Two independent dense stacks approximate the Green's function `Ĝ` and its
//! normal derivative `∂Ĝ/∂n` as functions of the paired coordinates
//! `(r_i, r'_j)`. A fixed integration layer then forms
//!
//! ```text
//! û_i = Σ_j [ u_j · ∂Ĝ/∂n(c_ij) - q_j · Ĝ(c_ij) ] · dΓ_j
//! ```
//!
//! The integration layer is a weighted sum over the collocation axis with
//! frozen weights (the element areas), i.e. a `1 x N_C` convolution whose
//! kernel is never trained. It is linear in the boundary data and exact for
//! any permutation of the collocation axis.

use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bem::kernels::{greens_at_distance, normal_deriv_at};
use crate::bem::{RealCauchy, Wavenumber};
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, BoundaryMesh, BoxDomain, Face, Point3, PointSet, BOUNDARY_TOL};
use crate::nn::{DenseStack, StackGrads, Tape};

/// Number of hidden layers in each stack.
pub const HIDDEN_LAYERS: usize = 3;

/// Per-axis affine map `x' = scale·x + offset` sending the box onto `[-1, 1]³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub scale: [f64; 3],
    pub offset: [f64; 3],
}

impl Normalization {
    pub fn for_domain(domain: &BoxDomain) -> Self {
        let l = domain.lengths();
        Self {
            scale: l.map(|v| 2.0 / v),
            offset: [-1.0; 3],
        }
    }

    pub fn identity() -> Self {
        Self {
            scale: [1.0; 3],
            offset: [0.0; 3],
        }
    }

    #[inline]
    pub fn apply(&self, p: &Point3) -> Point3 {
        [
            self.scale[0] * p[0] + self.offset[0],
            self.scale[1] * p[1] + self.offset[1],
            self.scale[2] * p[2] + self.offset[2],
        ]
    }

    #[inline]
    pub fn invert(&self, p: &[f64]) -> Point3 {
        [
            (p[0] - self.offset[0]) / self.scale[0],
            (p[1] - self.offset[1]) / self.scale[1],
            (p[2] - self.offset[2]) / self.scale[2],
        ]
    }
}

/// The three network inputs.
///
/// * `input1`: `(N_P, N_C, 6)` normalized `(x_i, y_i, z_i, x_j, y_j, z_j)`
/// * `input2`: `(N_P, N_C, 2)` boundary data `(u_j, q_j)`
/// * `input3`: `(N_P, N_C, 1)` element areas `dΓ_j`
///
/// `input2` and `input3` repeat the same rows for every interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInputs {
    pub input1: Array3<f64>,
    pub input2: Array3<f64>,
    pub input3: Array3<f64>,
}

impl ModelInputs {
    pub fn n_points(&self) -> usize {
        self.input1.len_of(Axis(0))
    }

    pub fn n_colloc(&self) -> usize {
        self.input1.len_of(Axis(1))
    }

    /// Rows for a subset of interior points, in the given order.
    pub fn select(&self, rows: &[usize]) -> ModelInputs {
        ModelInputs {
            input1: self.input1.select(Axis(0), rows),
            input2: self.input2.select(Axis(0), rows),
            input3: self.input3.select(Axis(0), rows),
        }
    }

    fn validate(&self) -> Result<()> {
        let (p, c, w) = self.input1.dim();
        if w != 6 || self.input2.dim() != (p, c, 2) || self.input3.dim() != (p, c, 1) {
            return Err(Error::ShapeMismatch(format!(
                "inconsistent input shapes {:?}, {:?}, {:?}",
                self.input1.dim(),
                self.input2.dim(),
                self.input3.dim()
            )));
        }
        Ok(())
    }

    /// `(u_j·dΓ_j, -q_j·dΓ_j)` for interior row `i`: the frozen integration
    /// weights applied to the two stack outputs.
    fn integration_weights(&self, i: usize) -> (Array1<f64>, Array1<f64>) {
        let bc = self.input2.index_axis(Axis(0), i);
        let area = self.input3.slice(s![i, .., 0]);
        let w_dgdn = &bc.column(0) * &area;
        let w_g = -(&bc.column(1) * &area);
        (w_dgdn, w_g)
    }
}

/// Builds the three input tensors for `interior` against every element of `mesh`.
pub fn assemble_inputs(
    mesh: &BoundaryMesh,
    cauchy: &RealCauchy,
    interior: &PointSet,
    normalization: &Normalization,
) -> Result<ModelInputs> {
    let nc = mesh.len();
    if cauchy.u.len() != nc || cauchy.q.len() != nc {
        return Err(Error::ShapeMismatch(format!(
            "boundary data has {}/{} entries, mesh has {nc} elements",
            cauchy.u.len(),
            cauchy.q.len()
        )));
    }
    let np = interior.len();
    let colloc: Vec<Point3> = mesh.elements.iter().map(|e| normalization.apply(&e.centroid)).collect();
    let mut input1 = Array3::zeros((np, nc, 6));
    let mut input2 = Array3::zeros((np, nc, 2));
    let mut input3 = Array3::zeros((np, nc, 1));
    for (i, p) in interior.points.iter().enumerate() {
        let pi = normalization.apply(p);
        for (j, (cj, e)) in colloc.iter().zip(&mesh.elements).enumerate() {
            input1
                .slice_mut(s![i, j, ..])
                .assign(&ndarray::aview1(&[pi[0], pi[1], pi[2], cj[0], cj[1], cj[2]]));
            input2[[i, j, 0]] = cauchy.u[j];
            input2[[i, j, 1]] = cauchy.q[j];
            input3[[i, j, 0]] = e.area;
        }
    }
    Ok(ModelInputs {
        input1,
        input2,
        input3,
    })
}

/// Anything that can evaluate `(Ĝ, ∂Ĝ/∂n)` on rows of paired coordinates.
pub trait KernelPair {
    fn kernels(&self, coords: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)>;
}

/// Integration layer applied to arbitrary kernel evaluators.
pub fn predict_with(kernels: &impl KernelPair, inputs: &ModelInputs) -> Result<Vec<f64>> {
    inputs.validate()?;
    (0..inputs.n_points())
        .map(|i| {
            let (g, dgdn) = kernels.kernels(inputs.input1.index_axis(Axis(0), i))?;
            let (w_dgdn, w_g) = inputs.integration_weights(i);
            Ok(integrate(&w_dgdn, &dgdn, &w_g, &g))
        })
        .collect()
}

#[inline]
fn integrate(w_dgdn: &Array1<f64>, dgdn: &Array1<f64>, w_g: &Array1<f64>, g: &Array1<f64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..g.len() {
        acc += w_dgdn[j] * dgdn[j] + w_g[j] * g[j];
    }
    acc
}

/// `(1/N) · sqrt(Σ (û - u)²)`.
pub fn loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let sse: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sse.sqrt() / predictions.len() as f64)
}

/// Root-mean-square error, offered next to [`loss`] as a conventional metric.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let sse: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / predictions.len() as f64).sqrt())
}

fn check_lengths(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensNetModel {
    pub g_stack: DenseStack,
    pub dgdn_stack: DenseStack,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub g: StackGrads,
    pub dgdn: StackGrads,
}

impl ModelGrads {
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.g.to_flat();
        v.extend(self.dgdn.to_flat());
        v
    }
}

pub fn stack_sizes(hidden_width: usize) -> Vec<usize> {
    let mut sizes = vec![6];
    sizes.extend(std::iter::repeat_n(hidden_width, HIDDEN_LAYERS));
    sizes.push(1);
    sizes
}

impl GreensNetModel {
    /// Glorot-initialized stacks drawn from one ChaCha8 stream (Ĝ first).
    pub fn new(hidden_width: usize, normalization: Normalization, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = stack_sizes(hidden_width);
        Ok(Self {
            g_stack: DenseStack::glorot(&sizes, &mut rng)?,
            dgdn_stack: DenseStack::glorot(&sizes, &mut rng)?,
            normalization,
        })
    }

    pub fn zeros(hidden_width: usize, normalization: Normalization) -> Result<Self> {
        let sizes = stack_sizes(hidden_width);
        Ok(Self {
            g_stack: DenseStack::zeros(&sizes)?,
            dgdn_stack: DenseStack::zeros(&sizes)?,
            normalization,
        })
    }

    pub fn from_stacks(g_stack: DenseStack, dgdn_stack: DenseStack, normalization: Normalization) -> Result<Self> {
        for s in [&g_stack, &dgdn_stack] {
            if s.input_width() != 6 || s.output_width() != 1 {
                return Err(Error::ShapeMismatch(format!(
                    "kernel stacks must map 6 -> 1, got {:?}",
                    s.sizes()
                )));
            }
        }
        Ok(Self {
            g_stack,
            dgdn_stack,
            normalization,
        })
    }

    pub fn hidden_width(&self) -> usize {
        self.g_stack.sizes()[1]
    }

    pub fn parameter_count(&self) -> usize {
        self.g_stack.parameter_count() + self.dgdn_stack.parameter_count()
    }

    pub fn assemble_inputs(&self, mesh: &BoundaryMesh, cauchy: &RealCauchy, interior: &PointSet) -> Result<ModelInputs> {
        assemble_inputs(mesh, cauchy, interior, &self.normalization)
    }

    pub fn predict(&self, inputs: &ModelInputs) -> Result<Vec<f64>> {
        predict_with(self, inputs)
    }

    /// Predicts at arbitrarily many points, assembling inputs in chunks.
    pub fn predict_points(&self, mesh: &BoundaryMesh, cauchy: &RealCauchy, points: &PointSet) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        const CHUNK: usize = 32;
        let chunks: Vec<Result<Vec<f64>>> = points
            .points
            .par_chunks(CHUNK)
            .map(|chunk| {
                let inputs = self.assemble_inputs(mesh, cauchy, &PointSet::new(chunk.to_vec()))?;
                self.predict(&inputs)
            })
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }

    /// Loss on `targets` and its exact gradient with respect to both stacks.
    pub fn loss_gradients(&self, inputs: &ModelInputs, targets: &[f64]) -> Result<(f64, ModelGrads)> {
        inputs.validate()?;
        let n = inputs.n_points();
        if n == 0 {
            return Err(Error::EmptyBatch);
        }
        if targets.len() != n {
            return Err(Error::ShapeMismatch(format!("{n} points but {} targets", targets.len())));
        }

        struct Row {
            g_tape: Tape,
            d_tape: Tape,
            w_g: Array1<f64>,
            w_dgdn: Array1<f64>,
        }
        let mut rows = Vec::with_capacity(n);
        let mut preds = Vec::with_capacity(n);
        for i in 0..n {
            let x = inputs.input1.index_axis(Axis(0), i);
            let (g, g_tape) = self.g_stack.forward_batch(x)?;
            let (d, d_tape) = self.dgdn_stack.forward_batch(x)?;
            let (w_dgdn, w_g) = inputs.integration_weights(i);
            preds.push(integrate(&w_dgdn, &d.column(0).to_owned(), &w_g, &g.column(0).to_owned()));
            rows.push(Row {
                g_tape,
                d_tape,
                w_g,
                w_dgdn,
            });
        }

        let value = loss(&preds, targets)?;
        let mut grads = ModelGrads {
            g: StackGrads::zeros_like(&self.g_stack),
            dgdn: StackGrads::zeros_like(&self.dgdn_stack),
        };
        let norm_res = value * n as f64;
        if norm_res == 0.0 {
            return Ok((value, grads));
        }
        for ((row, p), t) in rows.iter().zip(&preds).zip(targets) {
            // ∂e/∂û_i = (û_i - u_i) / (N · sqrt(Σ r²))
            let c = (p - t) / (n as f64 * norm_res);
            let cot_g = (&row.w_g * c).insert_axis(Axis(1));
            let cot_d = (&row.w_dgdn * c).insert_axis(Axis(1));
            self.g_stack.backward_into(&row.g_tape, cot_g.view(), &mut grads.g, false)?;
            self.dgdn_stack.backward_into(&row.d_tape, cot_d.view(), &mut grads.dgdn, false)?;
        }
        Ok((value, grads))
    }
}

impl KernelPair for GreensNetModel {
    fn kernels(&self, coords: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let (g, _) = self.g_stack.forward_batch(coords)?;
        let (d, _) = self.dgdn_stack.forward_batch(coords)?;
        Ok((column(g), column(d)))
    }
}

fn column(a: Array2<f64>) -> Array1<f64> {
    a.index_axis_move(Axis(1), 0)
}

/// Exact real-part kernels standing in for the two stacks.
///
/// Emits `Ĝ = -Re G` and `∂Ĝ/∂n = -Re ∂G/∂n'`, so that the integration layer
/// reproduces the one-point discretized representation sum
/// `Σ_j (q_j Re G_ij - u_j Re ∂G_ij/∂n) dΓ_j` exactly. Normals are recovered
/// from which box face the collocation coordinate lies on.
#[derive(Debug, Clone, Copy)]
pub struct ExactKernels {
    pub k: Wavenumber,
    pub domain: BoxDomain,
    pub normalization: Normalization,
}

impl ExactKernels {
    fn face_of(&self, p: &Point3) -> Result<Face> {
        let l = self.domain.lengths();
        let tol = 1e-9_f64.max(BOUNDARY_TOL);
        for face in Face::ALL {
            let axis = face.axis();
            let plane = if face.is_plus() { l[axis] } else { 0.0 };
            if (p[axis] - plane).abs() <= tol * l[axis].max(1.0) {
                return Ok(face);
            }
        }
        Err(Error::OutsideDomain {
            x: p[0],
            y: p[1],
            z: p[2],
        })
    }
}

impl KernelPair for ExactKernels {
    fn kernels(&self, coords: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let n = coords.nrows();
        let mut g = Array1::zeros(n);
        let mut d = Array1::zeros(n);
        for (j, row) in coords.outer_iter().enumerate() {
            let r = self.normalization.invert(&[row[0], row[1], row[2]]);
            let rp = self.normalization.invert(&[row[3], row[4], row[5]]);
            let normal = self.face_of(&rp)?.outward_normal();
            let diff = sub(&r, &rp);
            let rr = norm(&diff);
            g[j] = -greens_at_distance(self.k.value(), rr).re;
            d[j] = -normal_deriv_at(self.k.value(), rr, dot(&diff, &normal)).re;
        }
        Ok((g, d))
    }
}
