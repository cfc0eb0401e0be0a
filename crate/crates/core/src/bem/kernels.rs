//! Free-space Helmholtz kernels in three dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{dot, norm, sub, Point3};

/// Points closer than this are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Helmholtz wavenumber; `k = 0` is the Laplace kernel.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub fn new(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Config(format!(
                "wavenumber must be finite and non-negative, got {k}"
            )));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `e^{ikR} / (4πR)` with `R = |r - rp|`.
pub fn greens_3d(k: Wavenumber, r: &Point3, rp: &Point3) -> Result<Complex64> {
    let rr = norm(&sub(r, rp));
    if rr < COINCIDENCE_TOL {
        return Err(Error::CoincidentPoints(rr));
    }
    Ok(greens_at_distance(k.value(), rr))
}

#[inline]
pub(crate) fn greens_at_distance(k: f64, rr: f64) -> Complex64 {
    let scale = 1.0 / (4.0 * PI * rr);
    if k == 0.0 {
        Complex64::new(scale, 0.0)
    } else {
        let (s, c) = (k * rr).sin_cos();
        Complex64::new(c * scale, s * scale)
    }
}

/// Derivative of [`greens_3d`] with respect to the source point `rp` along
/// the unit normal `n` attached to `rp`:
/// `e^{ikR} (1 - ikR) / (4πR²) · ((r - rp)·n) / R`.
///
/// With an outward normal and `r` inside the domain, the static kernel
/// integrates to `-1` over the closed boundary.
pub fn greens_normal_deriv(k: Wavenumber, r: &Point3, rp: &Point3, n: &Point3) -> Result<Complex64> {
    let diff = sub(r, rp);
    let rr = norm(&diff);
    if rr < COINCIDENCE_TOL {
        return Err(Error::CoincidentPoints(rr));
    }
    Ok(normal_deriv_at(k.value(), rr, dot(&diff, n)))
}

/// `projection` is `(r - rp)·n`.
#[inline]
pub(crate) fn normal_deriv_at(k: f64, rr: f64, projection: f64) -> Complex64 {
    let base = projection / (4.0 * PI * rr * rr * rr);
    if k == 0.0 {
        Complex64::new(base, 0.0)
    } else {
        let kr = k * rr;
        let (s, c) = kr.sin_cos();
        // e^{ikR}(1 - ikR) = (c + kR s) + i (s - kR c)
        Complex64::new(base * (c + kr * s), base * (s - kr * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k(v: f64) -> Wavenumber {
        Wavenumber::new(v).unwrap()
    }

    #[test]
    fn static_kernel_at_unit_distance() {
        let g = greens_3d(k(0.0), &[0.0; 3], &[0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(g.re, 0.0795774715459477, epsilon = 1e-15);
        assert_eq!(g.im, 0.0);
    }

    #[test]
    fn unit_wavenumber_closed_form() {
        let g = greens_3d(k(1.0), &[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(g.re, 1f64.cos() / (4.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(g.im, 1f64.sin() / (4.0 * PI), epsilon = 1e-15);
        assert!((g.re - 0.043003).abs() < 1e-5);
        assert!((g.im - 0.066959).abs() < 1e-5);
    }

    #[test]
    fn coincident_points_error() {
        assert!(matches!(
            greens_3d(k(1.0), &[0.3; 3], &[0.3; 3]),
            Err(Error::CoincidentPoints(_))
        ));
        assert!(matches!(
            greens_normal_deriv(k(1.0), &[0.3; 3], &[0.3, 0.3, 0.3 + 1e-14], &[1.0, 0.0, 0.0]),
            Err(Error::CoincidentPoints(_))
        ));
        assert!(Wavenumber::new(-1.0).is_err());
    }

    #[test]
    fn perpendicular_normal_gives_zero() {
        let d = greens_normal_deriv(k(2.0), &[1.0, 0.0, 0.0], &[0.0; 3], &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(d, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn static_normal_derivative_value() {
        // d/dn' of 1/(4π|r - r'|) with r = (2,0,0), r' = 0, n = (-1,0,0):
        // gradient w.r.t. r' is (r - r')/(4πR³) = (2,0,0)/(32π), dotted with n.
        let d = greens_normal_deriv(k(0.0), &[2.0, 0.0, 0.0], &[0.0; 3], &[-1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(d.re, -1.0 / (16.0 * PI), epsilon = 1e-15);
        assert_eq!(d.im, 0.0);
    }

    #[test]
    fn static_normal_derivative_is_homogeneous_of_degree_minus_two() {
        let n = [0.6, 0.0, 0.8];
        let a = greens_normal_deriv(k(0.0), &[0.3, -0.2, 0.5], &[0.0; 3], &n).unwrap();
        let b = greens_normal_deriv(k(0.0), &[0.6, -0.4, 1.0], &[0.0; 3], &n).unwrap();
        assert_relative_eq!(b.re, a.re / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn normal_derivative_matches_finite_difference() {
        let r = [0.7, 0.2, -0.4];
        let rp = [0.1, 0.3, 0.2];
        let n = [0.0, 0.6, 0.8];
        let h = 1e-6;
        for kv in [0.0, 1.0, 3.5] {
            let plus = [rp[0] + h * n[0], rp[1] + h * n[1], rp[2] + h * n[2]];
            let minus = [rp[0] - h * n[0], rp[1] - h * n[1], rp[2] - h * n[2]];
            let fd = (greens_3d(k(kv), &r, &plus).unwrap() - greens_3d(k(kv), &r, &minus).unwrap())
                / (2.0 * h);
            let an = greens_normal_deriv(k(kv), &r, &rp, &n).unwrap();
            assert!((fd - an).norm() < 1e-8 * an.norm().max(1e-3));
        }
    }

    #[test]
    fn reciprocity_is_exact() {
        let a = [0.1, 2.3, 0.7];
        let b = [0.9, 0.4, 2.2];
        assert_eq!(
            greens_3d(k(1.7), &a, &b).unwrap(),
            greens_3d(k(1.7), &b, &a).unwrap()
        );
    }
}
