//! Box domains, their uniform quadrilateral boundary meshes and interior
//! point lattices.
//!
//! All elements are constant (single collocation point at the centroid),
//! planar and axis-aligned. Element order is fixed: faces in the order
//! `x-, x+, y-, y+, z-, z+`, and within a face lexicographic by the two
//! in-face coordinates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

/// Tolerance used to decide whether a coordinate lies on a box face.
pub const BOUNDARY_TOL: f64 = 1e-12;

const STEP_TOL: f64 = 1e-9;

#[inline]
pub fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn distance(a: &Point3, b: &Point3) -> f64 {
    norm(&sub(a, b))
}

/// Axis-aligned box `[0, Lx] x [0, Ly] x [0, Lz]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lengths: [f64; 3],
}

impl BoxDomain {
    pub fn new(lx: f64, ly: f64, lz: f64) -> Result<Self> {
        Self::from_lengths([lx, ly, lz])
    }

    pub fn from_lengths(lengths: [f64; 3]) -> Result<Self> {
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidDomain(format!(
                "box lengths must be finite and positive, got {lengths:?}"
            )));
        }
        Ok(Self { lengths })
    }

    /// The 1 x 5 x 3 test-case box.
    pub fn test_case() -> Self {
        Self {
            lengths: [1.0, 5.0, 3.0],
        }
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn surface_area(&self) -> f64 {
        let [lx, ly, lz] = self.lengths;
        2.0 * (lx * ly + lx * lz + ly * lz)
    }

    pub fn center(&self) -> Point3 {
        self.lengths.map(|l| 0.5 * l)
    }

    /// Signed distance to the nearest face: positive inside, negative outside.
    pub fn distance_to_boundary(&self, p: &Point3) -> f64 {
        (0..3)
            .map(|d| p[d].min(self.lengths[d] - p[d]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_strictly(&self, p: &Point3) -> bool {
        self.distance_to_boundary(p) > 0.0
    }

    pub fn contains_closed(&self, p: &Point3) -> bool {
        self.distance_to_boundary(p) >= -BOUNDARY_TOL
    }
}

/// Face of the box, named by the axis and the side of its outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Face {
    XMinus,
    XPlus,
    YMinus,
    YPlus,
    ZMinus,
    ZPlus,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMinus,
        Face::XPlus,
        Face::YMinus,
        Face::YPlus,
        Face::ZMinus,
        Face::ZPlus,
    ];

    pub fn axis(self) -> usize {
        match self {
            Face::XMinus | Face::XPlus => 0,
            Face::YMinus | Face::YPlus => 1,
            Face::ZMinus | Face::ZPlus => 2,
        }
    }

    pub fn is_plus(self) -> bool {
        matches!(self, Face::XPlus | Face::YPlus | Face::ZPlus)
    }

    /// The two in-face axes, in increasing order.
    pub fn tangent_axes(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    pub fn outward_normal(self) -> Point3 {
        let mut n = [0.0; 3];
        n[self.axis()] = if self.is_plus() { 1.0 } else { -1.0 };
        n
    }

    pub fn label(self) -> &'static str {
        match self {
            Face::XMinus => "x-",
            Face::XPlus => "x+",
            Face::YMinus => "y-",
            Face::YPlus => "y+",
            Face::ZMinus => "z-",
            Face::ZPlus => "z+",
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Face {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Face::ALL
            .into_iter()
            .find(|f| f.label() == s)
            .ok_or_else(|| Error::Config(format!("unknown face label {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryElement {
    /// Collocation point.
    pub centroid: Point3,
    /// Outward unit normal.
    pub normal: Point3,
    pub area: f64,
    pub face: Face,
}

impl BoundaryElement {
    /// Side length of the square panel.
    pub fn side(&self) -> f64 {
        self.area.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub domain: BoxDomain,
    pub elements: Vec<BoundaryElement>,
    pub step: f64,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Sum of area-weighted normals; zero for a closed surface.
    pub fn normal_closure(&self) -> Point3 {
        self.elements.iter().fold([0.0; 3], |acc, e| {
            [
                acc[0] + e.area * e.normal[0],
                acc[1] + e.area * e.normal[1],
                acc[2] + e.area * e.normal[2],
            ]
        })
    }
}

fn cells_along(length: f64, step: f64, axis: char) -> Result<usize> {
    let n = (length / step).round();
    if n < 1.0 || (n * step - length).abs() > STEP_TOL {
        return Err(Error::NonConformingStep { step, length, axis });
    }
    Ok(n as usize)
}

/// Uniform mesh of square panels with side `step` covering the box surface.
pub fn build_box_mesh(domain: BoxDomain, step: f64) -> Result<BoundaryMesh> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::NonConformingStep {
            step,
            length: f64::NAN,
            axis: '?',
        });
    }
    let lengths = domain.lengths();
    let counts = [
        cells_along(lengths[0], step, 'x')?,
        cells_along(lengths[1], step, 'y')?,
        cells_along(lengths[2], step, 'z')?,
    ];

    let mut elements = Vec::new();
    for face in Face::ALL {
        let axis = face.axis();
        let (a, b) = face.tangent_axes();
        let fixed = if face.is_plus() { lengths[axis] } else { 0.0 };
        for i in 0..counts[a] {
            for j in 0..counts[b] {
                let mut c = [0.0; 3];
                c[axis] = fixed;
                c[a] = (i as f64 + 0.5) * step;
                c[b] = (j as f64 + 0.5) * step;
                elements.push(BoundaryElement {
                    centroid: c,
                    normal: face.outward_normal(),
                    area: step * step,
                    face,
                });
            }
        }
    }

    Ok(BoundaryMesh {
        domain,
        elements,
        step,
    })
}

/// Solid-angle coefficient: the inner solid angle seen from `point` divided by 4π.
///
/// Exact for boxes: 1 inside, 1/2 on a face, 1/4 on an edge, 1/8 at a corner.
pub fn solid_angle_coeff(point: &Point3, domain: &BoxDomain) -> Result<f64> {
    if !domain.contains_closed(point) {
        return Err(Error::OutsideDomain {
            x: point[0],
            y: point[1],
            z: point[2],
        });
    }
    let lengths = domain.lengths();
    let on_faces = (0..3)
        .filter(|&d| point[d].abs() <= BOUNDARY_TOL || (lengths[d] - point[d]).abs() <= BOUNDARY_TOL)
        .count();
    Ok(match on_faces {
        0 => 1.0,
        1 => 0.5,
        2 => 0.25,
        _ => 0.125,
    })
}

/// Interior points, optionally carrying a field value per point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Point3>,
    pub values: Option<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            values: None,
        }
    }

    pub fn with_values(points: Vec<Point3>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        Ok(Self {
            points,
            values: Some(values),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks strict interiority of every point.
    pub fn validate_in(&self, domain: &BoxDomain) -> Result<()> {
        if let Some(v) = &self.values {
            if v.len() != self.points.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} points but {} values",
                    self.points.len(),
                    v.len()
                )));
            }
        }
        match self.points.iter().find(|p| !domain.contains_strictly(p)) {
            Some(p) => Err(Error::OutsideDomain {
                x: p[0],
                y: p[1],
                z: p[2],
            }),
            None => Ok(()),
        }
    }

    /// Subset in the given index order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        PointSet {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            values: self
                .values
                .as_ref()
                .map(|v| indices.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Lattice counts `(nx, ny, nz)` along the three axes.
pub type LatticeCounts = [usize; 3];

fn cell_centered_lattice(domain: &BoxDomain, counts: LatticeCounts) -> Result<PointSet> {
    if counts.contains(&0) {
        return Err(Error::Config(format!(
            "lattice counts must all be >= 1, got {counts:?}"
        )));
    }
    let l = domain.lengths();
    let mut points = Vec::with_capacity(counts.iter().product());
    for i in 0..counts[0] {
        for j in 0..counts[1] {
            for k in 0..counts[2] {
                points.push([
                    (i as f64 + 0.5) * l[0] / counts[0] as f64,
                    (j as f64 + 0.5) * l[1] / counts[1] as f64,
                    (k as f64 + 0.5) * l[2] / counts[2] as f64,
                ]);
            }
        }
    }
    Ok(PointSet::new(points))
}

/// Cell-centred sensor layout: each sensor owns an equal share of the volume.
pub fn uniform_sensor_points(domain: &BoxDomain, counts: LatticeCounts) -> Result<PointSet> {
    cell_centered_lattice(domain, counts)
}

/// Cell-centred evaluation grid used as the reconstruction target.
pub fn evaluation_grid(domain: &BoxDomain, counts: LatticeCounts) -> Result<PointSet> {
    cell_centered_lattice(domain, counts)
}

/// Lattice spacing `L_d / n_d` per axis.
pub fn lattice_spacing(domain: &BoxDomain, counts: LatticeCounts) -> [f64; 3] {
    let l = domain.lengths();
    [
        l[0] / counts[0] as f64,
        l[1] / counts[1] as f64,
        l[2] / counts[2] as f64,
    ]
}
