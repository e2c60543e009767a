//! Boxes, balls and the deterministic point samplers shared by every module.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_k, hi_k]`. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Precondition(format!(
                "box corners have dimensions {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo
            .iter()
            .zip(&hi)
            .any(|(a, b)| !(a < b) || a.is_nan() || b.is_nan())
        {
            return Err(Error::Precondition(format!(
                "degenerate box {lo:?} .. {hi:?}"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// The whole space `R^dim`.
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lo: vec![f64::NEG_INFINITY; dim],
            hi: vec![f64::INFINITY; dim],
        }
    }

    /// Cube of half-width `half` around `center`.
    pub fn cube(center: &[f64], half: f64) -> Result<Self> {
        Self::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
        )
    }

    /// `[lo, hi]^dim`.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.iter().chain(&self.hi).all(|v| v.is_finite())
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.width(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Strictly inside, at least `margin` from every face.
    pub fn contains_interior(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v > *a + margin && *v < *b - margin)
    }

    /// Centers of the `res^dim` cells of a uniform grid, axis 0 slowest.
    pub fn cell_centers(&self, res: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let total = res.pow(dim as u32);
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                let mut point = vec![0.0; dim];
                for axis in (0..dim).rev() {
                    let i = rem % res;
                    rem /= res;
                    point[axis] = self.lo[axis] + (i as f64 + 0.5) * self.width(axis) / res as f64;
                }
                point
            })
            .collect()
    }

    /// The `(res + 1)^dim` nodes of a uniform grid, faces included, axis 0 slowest.
    pub fn grid_nodes(&self, res: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let res = res.max(1);
        let total = (res + 1).pow(dim as u32);
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                let mut point = vec![0.0; dim];
                for axis in (0..dim).rev() {
                    let i = rem % (res + 1);
                    rem /= res + 1;
                    point[axis] = self.lo[axis] + i as f64 * self.width(axis) / res as f64;
                }
                point
            })
            .collect()
    }

    /// Samples on the boundary: every face carries a `(per_axis + 1)^(dim - 1)` grid
    /// including its edges.
    pub fn boundary_samples(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let per_axis = per_axis.max(1);
        let mut out = Vec::new();
        for axis in 0..dim {
            for side in [self.lo[axis], self.hi[axis]] {
                let others: Vec<usize> = (0..dim).filter(|&a| a != axis).collect();
                let count = (per_axis + 1).pow(others.len() as u32);
                for flat in 0..count {
                    let mut rem = flat;
                    let mut point = vec![0.0; dim];
                    point[axis] = side;
                    for &other in others.iter().rev() {
                        let i = rem % (per_axis + 1);
                        rem /= per_axis + 1;
                        point[other] =
                            self.lo[other] + i as f64 * self.width(other) / per_axis as f64;
                    }
                    out.push(point);
                }
            }
        }
        out
    }

    /// Counter-clockwise closed loop around a planar box, starting and ending at the
    /// lower-left corner; `per_edge` segments on every edge.
    pub fn boundary_loop_2d(&self, per_edge: usize) -> Result<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return Err(Error::Precondition(
                "boundary loop needs a planar box".into(),
            ));
        }
        let (x0, x1, y0, y1) = (self.lo[0], self.hi[0], self.lo[1], self.hi[1]);
        let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]];
        let mut out = Vec::with_capacity(4 * per_edge + 1);
        for edge in corners.windows(2) {
            for k in 0..per_edge {
                let s = k as f64 / per_edge as f64;
                out.push([
                    edge[0][0] + s * (edge[1][0] - edge[0][0]),
                    edge[0][1] + s * (edge[1][1] - edge[0][1]),
                ]);
            }
        }
        out.push([x0, y0]);
        Ok(out)
    }
}

/// Integration region for degree computations: an axis box or a closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Box(AxisBox),
    Ball { center: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Box(b) => b.dim(),
            Region::Ball { center, .. } => center.len(),
        }
    }

    /// Smallest axis box enclosing the region.
    pub fn bounding_box(&self) -> Result<AxisBox> {
        match self {
            Region::Box(b) => Ok(b.clone()),
            Region::Ball { center, radius } => AxisBox::cube(center, *radius),
        }
    }

    /// Strict interior test with a safety `margin` from the boundary.
    pub fn contains_interior(&self, x: &[f64], margin: f64) -> bool {
        match self {
            Region::Box(b) => b.contains_interior(x, margin),
            Region::Ball { center, radius } => distance(x, center) < radius - margin,
        }
    }

    /// Boundary samples; `res` controls density per axis.
    pub fn boundary_samples(&self, res: usize) -> Vec<Vec<f64>> {
        match self {
            Region::Box(b) => b.boundary_samples(res),
            Region::Ball { center, radius } => sphere_points(
                center,
                *radius,
                res.pow(center.len().saturating_sub(1) as u32).max(8),
            ),
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Evenly spread points on the sphere `|x - center| = radius`.
///
/// Circles are sampled uniformly in angle, 2-spheres by a Fibonacci lattice and higher
/// spheres by normalised Gaussians from a fixed-seed generator, so the output is a pure
/// function of the arguments.
pub fn sphere_points(center: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let shift = |dir: &[f64]| -> Vec<f64> {
        center
            .iter()
            .zip(dir)
            .map(|(c, d)| c + radius * d)
            .collect()
    };
    match dim {
        1 => vec![shift(&[-1.0]), shift(&[1.0])],
        2 => (0..count)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / count as f64;
                shift(&[theta.cos(), theta.sin()])
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    shift(&[rho * phi.cos(), rho * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + dim as u64);
            (0..count)
                .map(|_| {
                    let dir = loop {
                        let g: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
                        let n = norm(&g);
                        if n > 1e-12 {
                            break g.iter().map(|v| v / n).collect::<Vec<_>>();
                        }
                    };
                    shift(&dir)
                })
                .collect()
        }
    }
}

/// Grid points of the closed ball (per-axis `res` nodes including the faces of the
/// enclosing cube), the center, and `res^(dim-1)` points of the bounding sphere.
pub fn ball_points(center: &[f64], radius: f64, res: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let res = res.max(2);
    let mut out = vec![center.to_vec()];
    let total = res.pow(dim as u32);
    for flat in 0..total {
        let mut rem = flat;
        let mut p = vec![0.0; dim];
        for axis in (0..dim).rev() {
            let i = rem % res;
            rem /= res;
            p[axis] = center[axis] - radius + 2.0 * radius * i as f64 / (res - 1) as f64;
        }
        if distance(&p, center) <= radius {
            out.push(p);
        }
    }
    out.extend(sphere_points(
        center,
        radius,
        res.pow(dim.saturating_sub(1) as u32).max(8),
    ));
    out
}

pub(crate) fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Determinant through LU with partial pivoting, with the Hadamard bound
/// (product of row norms) as scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Determinant {
    pub value: f64,
    pub scale: f64,
    /// `|value| < 1e-12 * scale`.
    pub near_zero: bool,
}

pub fn determinant(m: &DMatrix<f64>) -> Determinant {
    let value = m.clone().lu().determinant();
    let scale: f64 = m.row_iter().map(|r| r.norm()).product();
    Determinant {
        value,
        scale,
        near_zero: scale == 0.0 || value.abs() < 1e-12 * scale,
    }
}

/// Solves `m * x = rhs` by partially pivoted LU. `None` when the matrix is singular.
pub fn solve(m: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = nalgebra::DVector::from_column_slice(rhs);
    m.clone()
        .lu()
        .solve(&b)
        .map(|x| x.iter().copied().collect())
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_boundary_covers_edge_midpoints() {
        let b = AxisBox::uniform(2, -1.0, 1.0).unwrap();
        let pts = b.boundary_samples(4);
        assert_eq!(pts.len(), 4 * 5);
        assert!(pts.iter().any(|p| p[0] == 0.0 && p[1] == 1.0));
        assert!(pts.iter().all(|p| p.iter().any(|v| v.abs() == 1.0)));
    }

    #[test]
    fn loop_is_closed_and_counter_clockwise() {
        let b = AxisBox::uniform(2, -1.0, 1.0).unwrap();
        let pts = b.boundary_loop_2d(3).unwrap();
        assert_eq!(pts.first(), pts.last());
        // shoelace area positive
        let area: f64 = pts
            .windows(2)
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum();
        assert!((area / 2.0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_points_lie_on_sphere() {
        for dim in 1..=5 {
            let c = vec![0.5; dim];
            for p in sphere_points(&c, 2.0, 50) {
                assert!((distance(&p, &c) - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cell_centers_are_row_major() {
        let b = AxisBox::uniform(2, 0.0, 1.0).unwrap();
        let c = b.cell_centers(2);
        assert_eq!(
            c,
            vec![
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75]
            ]
        );
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(AxisBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(AxisBox::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn determinant_flags_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(determinant(&m).near_zero);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -2.0, 2.0, 2.0]);
        let d = determinant(&m);
        assert!((d.value - 8.0).abs() < 1e-12 && !d.near_zero);
    }
}
