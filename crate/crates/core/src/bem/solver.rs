//! Collocation BEM for the interior Helmholtz problem with constant elements.
//!
//! With outward normals and the kernels of [`super::kernels`], the field
//! satisfies
//!
//! ```text
//! η(r) u(r) = Σ_j [ q_j S_j(r) - u_j D_j(r) ]
//! ```
//!
//! where `S_j`/`D_j` are the single/double-layer panel integrals and `η = 1/2`
//! at the collocation points, `η = 1` inside.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::Wavenumber;
use super::quadrature::{centroid_rule, panel_integrals};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, Face, PointSet};
use crate::linalg::{solve_dense, ComplexMatrix};

/// Systems whose condition estimate exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceCondition {
    pub kind: BcKind,
    pub value: f64,
}

/// One boundary condition per face, constant over the face.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSpec {
    faces: BTreeMap<Face, FaceCondition>,
}

impl BcSpec {
    pub fn uniform(kind: BcKind, value: f64) -> Self {
        Self {
            faces: Face::ALL
                .into_iter()
                .map(|f| (f, FaceCondition { kind, value }))
                .collect(),
        }
    }

    /// `u = 1` on x+ and z-, `∂u/∂n = 1` on the remaining faces.
    pub fn test_case() -> Self {
        let mut bc = Self::uniform(BcKind::Neumann, 1.0);
        bc.set(Face::XPlus, BcKind::Dirichlet, 1.0);
        bc.set(Face::ZMinus, BcKind::Dirichlet, 1.0);
        bc
    }

    pub fn set(&mut self, face: Face, kind: BcKind, value: f64) {
        self.faces.insert(face, FaceCondition { kind, value });
    }

    pub fn get(&self, face: Face) -> FaceCondition {
        self.faces[&face]
    }

    pub fn from_map(faces: BTreeMap<Face, FaceCondition>) -> Result<Self> {
        if let Some(missing) = Face::ALL.into_iter().find(|f| !faces.contains_key(f)) {
            return Err(Error::Config(format!("no boundary condition for face {missing}")));
        }
        Ok(Self { faces })
    }

    pub fn iter(&self) -> impl Iterator<Item = (Face, FaceCondition)> + '_ {
        self.faces.iter().map(|(f, c)| (*f, *c))
    }
}

/// Per-element boundary values `u_j` and normal derivatives `q_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub u: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

impl CauchyData {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn real_view(&self) -> RealCauchy {
        RealCauchy {
            u: self.u.iter().map(|v| v.re).collect(),
            q: self.q.iter().map(|v| v.re).collect(),
        }
    }
}

/// Real parts of the Cauchy data; what the network consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealCauchy {
    pub u: Vec<f64>,
    pub q: Vec<f64>,
}

impl RealCauchy {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct BemSolution {
    pub cauchy: CauchyData,
    /// 1-norm condition estimate of the collocation matrix.
    pub condition: f64,
}

/// Solves for the unknown half of the Cauchy data at every collocation point.
pub fn assemble_and_solve(mesh: &BoundaryMesh, k: Wavenumber, bc: &BcSpec) -> Result<BemSolution> {
    let n = mesh.len();
    if n == 0 {
        return Err(Error::InvalidDomain("mesh has no elements".into()));
    }
    let conditions: Vec<FaceCondition> = mesh.elements.iter().map(|e| bc.get(e.face)).collect();

    let rows: Vec<(Vec<Complex64>, Complex64)> = mesh
        .elements
        .par_iter()
        .enumerate()
        .map(|(i, target)| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let mut rhs = Complex64::new(0.0, 0.0);
            for (j, (elem, cond)) in mesh.elements.iter().zip(&conditions).enumerate() {
                let p = panel_integrals(k, &target.centroid, elem);
                let d = if i == j { p.d + 0.5 } else { p.d };
                match cond.kind {
                    BcKind::Dirichlet => {
                        row[j] = -p.s;
                        rhs -= d * cond.value;
                    }
                    BcKind::Neumann => {
                        row[j] = d;
                        rhs += p.s * cond.value;
                    }
                }
            }
            (row, rhs)
        })
        .collect();

    let mut data = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for (row, b) in rows {
        data.extend(row);
        rhs.push(b);
    }
    let matrix = ComplexMatrix::from_rows(n, data)?;
    let (x, condition) = solve_dense(matrix, &rhs, MAX_CONDITION)?;

    let mut u = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for (xj, cond) in x.into_iter().zip(&conditions) {
        let known = Complex64::new(cond.value, 0.0);
        match cond.kind {
            BcKind::Dirichlet => {
                u.push(known);
                q.push(xj);
            }
            BcKind::Neumann => {
                u.push(xj);
                q.push(known);
            }
        }
    }
    Ok(BemSolution {
        cauchy: CauchyData { u, q },
        condition,
    })
}

#[derive(Debug, Clone)]
pub struct InteriorField {
    pub values: Vec<Complex64>,
    /// True where the target is closer than half a panel side to the boundary.
    pub near_boundary: Vec<bool>,
}

impl InteriorField {
    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

fn check_cauchy_len(mesh: &BoundaryMesh, len: usize) -> Result<()> {
    if len != mesh.len() {
        return Err(Error::ShapeMismatch(format!(
            "Cauchy data has {len} entries, mesh has {} elements",
            mesh.len()
        )));
    }
    Ok(())
}

/// Field at interior points from complete Cauchy data.
pub fn evaluate_interior(
    mesh: &BoundaryMesh,
    cauchy: &CauchyData,
    k: Wavenumber,
    targets: &PointSet,
) -> Result<InteriorField> {
    check_cauchy_len(mesh, cauchy.len())?;
    targets.validate_in(&mesh.domain)?;
    let values = targets
        .points
        .par_iter()
        .map(|r| {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((elem, u), q) in mesh.elements.iter().zip(&cauchy.u).zip(&cauchy.q) {
                let p = panel_integrals(k, r, elem);
                acc += q * p.s - u * p.d;
            }
            acc
        })
        .collect();
    let near_boundary = targets
        .points
        .iter()
        .map(|p| mesh.domain.distance_to_boundary(p) < 0.5 * mesh.step)
        .collect();
    Ok(InteriorField {
        values,
        near_boundary,
    })
}

/// The discretized representation sum with one-point panel integrals and
/// real kernels, on real Cauchy data:
/// `Σ_j (q_j Re G_ij - u_j Re ∂G_ij/∂n) dΓ_j`.
///
/// This is exactly the quantity the network's integration layer computes
/// when its stacks emit the exact kernels.
pub fn discrete_representation_real(
    mesh: &BoundaryMesh,
    cauchy: &RealCauchy,
    k: Wavenumber,
    targets: &PointSet,
) -> Result<Vec<f64>> {
    check_cauchy_len(mesh, cauchy.len())?;
    targets.validate_in(&mesh.domain)?;
    Ok(targets
        .points
        .iter()
        .map(|r| {
            mesh.elements
                .iter()
                .zip(&cauchy.u)
                .zip(&cauchy.q)
                .map(|((elem, u), q)| {
                    let p = centroid_rule(k, r, elem);
                    q * p.s.re - u * p.d.re
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_mesh, uniform_sensor_points, BoxDomain};

    fn cube() -> BoxDomain {
        BoxDomain::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn laplace_constant_dirichlet_gives_zero_flux() {
        let mesh = build_box_mesh(cube(), 0.25).unwrap();
        let sol = assemble_and_solve(&mesh, Wavenumber::new(0.0).unwrap(), &BcSpec::uniform(BcKind::Dirichlet, 1.0)).unwrap();
        let max_q = sol.cauchy.q.iter().map(|q| q.norm()).fold(0.0, f64::max);
        assert!(max_q <= 0.05, "max |q| = {max_q}");
        assert!(sol.cauchy.u.iter().all(|u| *u == Complex64::new(1.0, 0.0)));

        let targets = uniform_sensor_points(&cube(), [3, 3, 3]).unwrap();
        let field = evaluate_interior(&mesh, &sol.cauchy, Wavenumber::new(0.0).unwrap(), &targets).unwrap();
        for v in &field.values {
            assert!((v.re - 1.0).abs() <= 0.02, "u = {v}");
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn imposed_components_are_exact() {
        let mesh = build_box_mesh(BoxDomain::test_case(), 0.5).unwrap();
        let bc = BcSpec::test_case();
        let sol = assemble_and_solve(&mesh, Wavenumber::new(1.0).unwrap(), &bc).unwrap();
        for (i, e) in mesh.elements.iter().enumerate() {
            let c = bc.get(e.face);
            let imposed = match c.kind {
                BcKind::Dirichlet => sol.cauchy.u[i],
                BcKind::Neumann => sol.cauchy.q[i],
            };
            assert_eq!(imposed, Complex64::new(c.value, 0.0));
        }
        assert!(sol.condition > 1.0 && sol.condition < MAX_CONDITION);
    }

    #[test]
    fn gauss_identity_for_double_layer() {
        let mesh = build_box_mesh(cube(), 0.25).unwrap();
        let k0 = Wavenumber::new(0.0).unwrap();
        let targets = uniform_sensor_points(&cube(), [2, 2, 2]).unwrap();
        for r in &targets.points {
            let sum: f64 = mesh.elements.iter().map(|e| panel_integrals(k0, r, e).d.re).sum();
            assert!((sum + 1.0).abs() < 0.02, "Σ D = {sum}");
        }
    }

    #[test]
    fn evaluate_rejects_boundary_targets() {
        let mesh = build_box_mesh(cube(), 0.5).unwrap();
        let c = CauchyData {
            u: vec![Complex64::new(0.0, 0.0); mesh.len()],
            q: vec![Complex64::new(0.0, 0.0); mesh.len()],
        };
        let bad = PointSet::new(vec![[0.0, 0.5, 0.5]]);
        assert!(matches!(
            evaluate_interior(&mesh, &c, Wavenumber::new(1.0).unwrap(), &bad),
            Err(Error::OutsideDomain { .. })
        ));
        let short = CauchyData {
            u: vec![],
            q: vec![],
        };
        let ok = PointSet::new(vec![[0.5; 3]]);
        assert!(matches!(
            evaluate_interior(&mesh, &short, Wavenumber::new(1.0).unwrap(), &ok),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn near_boundary_targets_are_flagged() {
        let mesh = build_box_mesh(cube(), 0.25).unwrap();
        let c = CauchyData {
            u: vec![Complex64::new(1.0, 0.0); mesh.len()],
            q: vec![Complex64::new(0.0, 0.0); mesh.len()],
        };
        let pts = PointSet::new(vec![[0.5; 3], [0.05, 0.5, 0.5]]);
        let f = evaluate_interior(&mesh, &c, Wavenumber::new(0.0).unwrap(), &pts).unwrap();
        assert_eq!(f.near_boundary, vec![false, true]);
    }
}
