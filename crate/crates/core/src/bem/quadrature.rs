//! Single- and double-layer integrals over constant square panels.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernels::{greens_at_distance, normal_deriv_at, Wavenumber, COINCIDENCE_TOL};
use crate::geometry::{dot, norm, sub, BoundaryElement, Point3};

/// Maximum number of 2x2 subdivision levels for near-singular targets.
pub const MAX_REFINE_DEPTH: u32 = 3;

/// A target closer than this many panel sides triggers subdivision.
pub const NEAR_FIELD_FACTOR: f64 = 2.0;

/// Panel integrals of the single-layer (`s`) and double-layer (`d`) kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelIntegrals {
    pub s: Complex64,
    pub d: Complex64,
}

/// `∫ e^{ikR}/(4πR) dA` over a square of side `side` seen from its own centre:
/// the exact static term plus the first oscillatory correction.
pub fn self_panel_single_layer(k: f64, side: f64) -> Complex64 {
    let statik = 4.0 * side * (1.0 + 2f64.sqrt()).ln();
    Complex64::new(statik, k * side * side) / (4.0 * PI)
}

pub fn panel_integrals(k: Wavenumber, target: &Point3, element: &BoundaryElement) -> PanelIntegrals {
    if norm(&sub(target, &element.centroid)) < COINCIDENCE_TOL {
        return PanelIntegrals {
            s: self_panel_single_layer(k.value(), element.side()),
            d: Complex64::new(0.0, 0.0),
        };
    }
    let (a, b) = element.face.tangent_axes();
    let mut acc = PanelIntegrals {
        s: Complex64::new(0.0, 0.0),
        d: Complex64::new(0.0, 0.0),
    };
    accumulate(
        k.value(),
        target,
        &element.centroid,
        &element.normal,
        element.side(),
        (a, b),
        0,
        &mut acc,
    );
    acc
}

/// One-point rule at the centroid, without any refinement.
pub fn centroid_rule(k: Wavenumber, target: &Point3, element: &BoundaryElement) -> PanelIntegrals {
    let diff = sub(target, &element.centroid);
    let rr = norm(&diff);
    PanelIntegrals {
        s: greens_at_distance(k.value(), rr) * element.area,
        d: normal_deriv_at(k.value(), rr, dot(&diff, &element.normal)) * element.area,
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    k: f64,
    target: &Point3,
    center: &Point3,
    normal: &Point3,
    side: f64,
    axes: (usize, usize),
    depth: u32,
    acc: &mut PanelIntegrals,
) {
    let diff = sub(target, center);
    let rr = norm(&diff);
    if rr < NEAR_FIELD_FACTOR * side && depth < MAX_REFINE_DEPTH {
        let q = 0.25 * side;
        for (da, db) in [(-q, -q), (-q, q), (q, -q), (q, q)] {
            let mut c = *center;
            c[axes.0] += da;
            c[axes.1] += db;
            accumulate(k, target, &c, normal, 0.5 * side, axes, depth + 1, acc);
        }
        return;
    }
    let area = side * side;
    acc.s += greens_at_distance(k, rr) * area;
    acc.d += normal_deriv_at(k, rr, dot(&diff, normal)) * area;
}
