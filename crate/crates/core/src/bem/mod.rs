//! Ground-truth forward solver: Helmholtz kernels, panel quadrature,
//! collocation assembly and interior evaluation.

mod dataset;
pub mod kernels;
pub mod quadrature;
mod solver;

pub use dataset::{generate_dataset, GeneratedData};
pub use kernels::{greens_3d, greens_normal_deriv, Wavenumber};
pub use quadrature::{centroid_rule, panel_integrals, PanelIntegrals};
pub use solver::{
    assemble_and_solve, discrete_representation_real, evaluate_interior, BcKind, BcSpec, BemSolution,
    CauchyData, FaceCondition, InteriorField, RealCauchy, MAX_CONDITION,
};
