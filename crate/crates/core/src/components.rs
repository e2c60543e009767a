//! Grid analysis of the sublevel sets `{x : |H(x) - y0| < r}`.
//!
//! A box is rasterised once into a [`ModulusGrid`]; sublevel sets are then labelled by
//! face-connected flood fill. From the labels come the counting function `X(r)` (how
//! many components contain at least one seed) and the gap between components.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_expr::VectorField;
use crate::geometry::{distance, norm, sphere_points, AxisBox};
use crate::winding::ZERO_TOLERANCE;

/// `|H(center) - y0|` for every cell of a uniform grid (row-major, axis 0 slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusGrid {
    pub bx: AxisBox,
    pub res: usize,
    pub y0: Vec<f64>,
    pub values: Vec<f64>,
}

impl ModulusGrid {
    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.res;
            flat /= self.res;
        }
        idx
    }

    fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.res + i)
    }

    pub fn cell_center(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.bx.lo[a] + (i as f64 + 0.5) * self.bx.width(a) / self.res as f64)
            .collect()
    }

    /// Cell containing `p`; points on the upper faces belong to the last cell.
    pub fn cell_of(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.dim() || !self.bx.contains(p) {
            return None;
        }
        let idx: Vec<usize> = p
            .iter()
            .enumerate()
            .map(|(a, v)| {
                (((v - self.bx.lo[a]) / self.bx.width(a) * self.res as f64) as usize)
                    .min(self.res - 1)
            })
            .collect();
        Some(self.ravel(&idx))
    }

    /// Face neighbours of a cell.
    pub fn neighbors(&self, flat: usize) -> Vec<usize> {
        let idx = self.unravel(flat);
        let mut out = Vec::with_capacity(2 * self.dim());
        for axis in 0..self.dim() {
            let mut n = idx.clone();
            if idx[axis] > 0 {
                n[axis] = idx[axis] - 1;
                out.push(self.ravel(&n));
            }
            if idx[axis] + 1 < self.res {
                n[axis] = idx[axis] + 1;
                out.push(self.ravel(&n));
            }
        }
        out
    }

    /// Length of a cell diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dim())
            .map(|a| (self.bx.width(a) / self.res as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Samples `|H - y0|` at the `res^m` cell centers of `bx` (m = 2 or 3, res ≥ 16).
pub fn rasterize(field: &VectorField, y0: &[f64], bx: &AxisBox, res: usize) -> Result<ModulusGrid> {
    let dim = field.input_dim();
    if !(2..=3).contains(&dim) {
        return Err(Error::DimensionTooHigh(dim));
    }
    if res < 16 {
        return Err(Error::Precondition(
            "grid resolution must be at least 16".into(),
        ));
    }
    if bx.dim() != dim || !bx.is_bounded() || y0.len() != field.output_dim() {
        return Err(Error::Precondition(
            "box or y0 dimension does not match the field".into(),
        ));
    }
    let values: Result<Vec<f64>> = bx
        .cell_centers(res)
        .par_iter()
        .map(|c| field.residual(c, y0))
        .collect();
    Ok(ModulusGrid {
        bx: bx.clone(),
        res,
        y0: y0.to_vec(),
        values: values?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLabel {
    pub seed: Vec<f64>,
    /// Component label, 0 when the seed cell lies outside the sublevel set.
    pub label: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    pub r: f64,
    pub bx: AxisBox,
    pub res: usize,
    /// Per-cell label, 0 outside the sublevel set.
    pub labels: Vec<u32>,
    pub count: u32,
    pub seed_map: Vec<SeedLabel>,
}

impl ComponentLabeling {
    /// Number of distinct components hit by at least one seed.
    pub fn seeded_components(&self) -> usize {
        let mut hit: Vec<u32> = self
            .seed_map
            .iter()
            .map(|s| s.label)
            .filter(|&l| l > 0)
            .collect();
        hit.sort_unstable();
        hit.dedup();
        hit.len()
    }
}

/// Labels the face-connected components of `{value < r}`. Labels are assigned in
/// row-major order of each component's first cell.
pub fn sublevel_components(
    grid: &ModulusGrid,
    r: f64,
    seeds: &[Vec<f64>],
) -> Result<ComponentLabeling> {
    if !(r > 0.0) {
        return Err(Error::Precondition("r must be positive".into()));
    }
    let seed_cells = seeds
        .iter()
        .map(|s| {
            grid.cell_of(s)
                .ok_or_else(|| Error::SeedOutsideBox(s.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut labels = vec![0u32; grid.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if labels[start] != 0 || grid.values[start] >= r {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(cell) = queue.pop_front() {
            for n in grid.neighbors(cell) {
                if labels[n] == 0 && grid.values[n] < r {
                    labels[n] = count;
                    queue.push_back(n);
                }
            }
        }
    }
    let seed_map = seeds
        .iter()
        .zip(seed_cells)
        .map(|(s, c)| SeedLabel {
            seed: s.clone(),
            label: labels[c],
        })
        .collect();
    Ok(ComponentLabeling {
        r,
        bx: grid.bx.clone(),
        res: grid.res,
        labels,
        count,
        seed_map,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingCurve {
    pub r_values: Vec<f64>,
    pub x_values: Vec<usize>,
    pub seeds: Vec<Vec<f64>>,
}

/// `X(r)` for every `r` in `r_list`: the number of sublevel components containing a seed.
pub fn counting_curve(
    field: &VectorField,
    y0: &[f64],
    seeds: &[Vec<f64>],
    bx: &AxisBox,
    res: usize,
    r_list: &[f64],
) -> Result<CountingCurve> {
    if r_list.is_empty() || r_list[0] <= 0.0 || r_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "r_list must be positive and increasing".into(),
        ));
    }
    let grid = rasterize(field, y0, bx, res)?;
    let x_values = r_list
        .par_iter()
        .map(|&r| sublevel_components(&grid, r, seeds).map(|l| l.seeded_components()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingCurve {
        r_values: r_list.to_vec(),
        x_values,
        seeds: seeds.to_vec(),
    })
}

/// Smallest distance between cell centers of two different components.
pub fn min_component_distance(labeling: &ComponentLabeling) -> Result<f64> {
    if labeling.count < 2 {
        return Err(Error::SingleComponent);
    }
    let grid = ModulusGrid {
        bx: labeling.bx.clone(),
        res: labeling.res,
        y0: vec![],
        values: vec![],
    };
    // the closest pair always lies on component boundaries
    let rim: Vec<(u32, Vec<f64>)> = (0..labeling.labels.len())
        .filter(|&c| {
            let l = labeling.labels[c];
            l > 0 && grid.neighbors(c).iter().any(|&n| labeling.labels[n] != l)
        })
        .map(|c| (labeling.labels[c], grid.cell_center(c)))
        .collect();
    let best = rim
        .par_iter()
        .enumerate()
        .map(|(i, (la, pa))| {
            rim[i + 1..]
                .iter()
                .filter(|(lb, _)| lb != la)
                .map(|(_, pb)| distance(pa, pb))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretenessCertificate {
    pub rho: f64,
    /// Sampled `min |H - H(x0)|` on the sphere of radius `rho`.
    pub margin: f64,
}

/// First radius in `rho_list` at which `H` looks discrete at `x0`: the sphere minimum of
/// `|H - H(x0)|` is positive, and no grid cell of the punctured ball is a local minimum
/// of the modulus below half that margin (which would signal another preimage).
///
/// Sampled, so heuristic.
pub fn discreteness_certificate(
    field: &VectorField,
    x0: &[f64],
    rho_list: &[f64],
    res: usize,
) -> Result<DiscretenessCertificate> {
    let dim = field.input_dim();
    if x0.len() != dim || !field.is_square() {
        return Err(Error::Precondition(
            "discreteness needs a square field and matching x0".into(),
        ));
    }
    if rho_list.iter().any(|&r| !(r > 0.0)) || rho_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(
            "rho_list must be positive and decreasing".into(),
        ));
    }
    let h0 = field.eval(x0)?;
    let sphere_count = match dim {
        2 => (4 * res).max(64),
        _ => res.pow(dim as u32 - 1).max(64),
    };
    for &rho in rho_list {
        let sphere = sphere_points(x0, rho, sphere_count);
        let margin = sphere
            .par_iter()
            .map(|p| field.residual(p, &h0))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if !(margin > ZERO_TOLERANCE * (1.0 + norm(&h0))) {
            continue;
        }
        let grid = rasterize(field, &h0, &AxisBox::cube(x0, rho)?, res)?;
        let exclude = (1e-3 * rho).max(grid.cell_diagonal());
        let spurious = (0..grid.len()).into_par_iter().any(|c| {
            let v = grid.values[c];
            if v >= 0.5 * margin {
                return false;
            }
            let d = distance(&grid.cell_center(c), x0);
            d > exclude && d <= rho && grid.neighbors(c).iter().all(|&n| grid.values[n] >= v)
        });
        if !spurious {
            return Ok(DiscretenessCertificate { rho, margin });
        }
    }
    Err(Error::NoRadiusFound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallVerdict {
    /// Equal endpoint values joined below the wall by a field with no sampled critical
    /// point: a configuration impossible for a local homeomorphism.
    Violation,
    Consistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighWallReport {
    /// `N`: sampled `min |H|` on the box boundary.
    pub wall_height: f64,
    /// `W`: sampled `max |H|` along the curve.
    pub curve_max: f64,
    pub endpoint_gap: f64,
    /// Every sampled curve point has a non-degenerate Jacobian.
    pub local_homeomorphism: bool,
    pub verdict: WallVerdict,
}

/// Checks a polyline (endpoints first and last) against the high-wall statement.
pub fn high_wall_check(
    field: &VectorField,
    bx: &AxisBox,
    curve: &[Vec<f64>],
) -> Result<HighWallReport> {
    let dim = field.input_dim();
    if !field.is_square() || bx.dim() != dim || !bx.is_bounded() {
        return Err(Error::Precondition(
            "high wall check needs a square field on a bounded box".into(),
        ));
    }
    let (Some(x0), Some(x1)) = (curve.first(), curve.last()) else {
        return Err(Error::Precondition(
            "curve needs at least two points".into(),
        ));
    };
    if curve.len() < 2 || x0 == x1 || !bx.contains(x0) || !bx.contains(x1) {
        return Err(Error::Precondition(
            "curve endpoints must be distinct points inside the box".into(),
        ));
    }
    let per_axis = match dim {
        2 => 1024,
        3 => 64,
        _ => 12,
    };
    let origin = vec![0.0; dim];
    let wall_height = bx
        .boundary_samples(per_axis)
        .par_iter()
        .map(|p| field.residual(p, &origin))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let mut samples = Vec::new();
    for seg in curve.windows(2) {
        for k in 0..64 {
            let s = k as f64 / 64.0;
            samples.push(
                seg[0]
                    .iter()
                    .zip(&seg[1])
                    .map(|(a, b)| a + s * (b - a))
                    .collect::<Vec<_>>(),
            );
        }
    }
    samples.push(x1.clone());
    let checks = samples
        .par_iter()
        .map(|p| Ok((norm(&field.eval(p)?), !field.jacobian_det(p)?.near_zero)))
        .collect::<Result<Vec<_>>>()?;
    let curve_max = checks.iter().map(|c| c.0).fold(0.0, f64::max);
    let local_homeomorphism = checks.iter().all(|c| c.1);
    let endpoint_gap = distance(&field.eval(x0)?, &field.eval(x1)?);
    let verdict = if endpoint_gap < 1e-10 && curve_max < wall_height && local_homeomorphism {
        WallVerdict::Violation
    } else {
        WallVerdict::Consistent
    };
    Ok(HighWallReport {
        wall_height,
        curve_max,
        endpoint_gap,
        local_homeomorphism,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::builtin;
    use crate::geometry::linspace;
    use proptest::prelude::*;

    fn shifted_square() -> VectorField {
        VectorField::parse("x1^2 - x2^2 - 0.25 ; 2*x1*x2", 2, 2).unwrap()
    }

    fn unit_box() -> AxisBox {
        AxisBox::uniform(2, -1.0, 1.0).unwrap()
    }

    fn roots() -> Vec<Vec<f64>> {
        vec![vec![0.5, 0.0], vec![-0.5, 0.0]]
    }

    #[test]
    fn rasterize_identity_is_distance() {
        let id = VectorField::parse("x1 ; x2", 2, 2).unwrap();
        let g = rasterize(&id, &[0.0, 0.0], &unit_box(), 64).unwrap();
        assert_eq!(g.len(), 64 * 64);
        for c in [0, 100, 2080, 4095] {
            assert!((g.values[c] - norm(&g.cell_center(c))).abs() < 1e-15);
        }
        assert!(matches!(
            rasterize(&id, &[0.0, 0.0], &unit_box(), 8),
            Err(Error::Precondition(_))
        ));
        let line = VectorField::parse("x1", 1, 1).unwrap();
        let seg = AxisBox::uniform(1, -1.0, 1.0).unwrap();
        assert_eq!(
            rasterize(&line, &[0.0], &seg, 32),
            Err(Error::DimensionTooHigh(1))
        );
    }

    #[test]
    fn shifted_square_minima_near_roots() {
        let g = rasterize(&shifted_square(), &[0.0, 0.0], &unit_box(), 64).unwrap();
        let (arg, _) = g
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc },
            );
        let c = g.cell_center(arg);
        assert!((c[0].abs() - 0.5).abs() < 0.05 && c[1].abs() < 0.05);
    }

    #[test]
    fn components_split_and_merge() {
        let g = rasterize(&shifted_square(), &[0.0, 0.0], &unit_box(), 128).unwrap();
        let low = sublevel_components(&g, 0.1, &roots()).unwrap();
        assert_eq!(low.count, 2);
        assert!(low.seed_map[0].label > 0 && low.seed_map[0].label != low.seed_map[1].label);
        let d = min_component_distance(&low).unwrap();
        assert!(d > 0.5 && d < 1.0);
        let high = sublevel_components(&g, 0.4, &roots()).unwrap();
        assert_eq!(high.count, 1);
        assert_eq!(high.seed_map[0].label, high.seed_map[1].label);
        assert_eq!(min_component_distance(&high), Err(Error::SingleComponent));
        assert!(matches!(
            sublevel_components(&g, 0.1, &[vec![2.0, 0.0]]),
            Err(Error::SeedOutsideBox(_))
        ));
    }

    #[test]
    fn identity_disk_and_separated_seeds() {
        let id = VectorField::parse("x1 ; x2", 2, 2).unwrap();
        let g = rasterize(&id, &[0.0, 0.0], &unit_box(), 64).unwrap();
        let l = sublevel_components(&g, 0.5, &[vec![0.0, 0.0]]).unwrap();
        assert_eq!((l.count, l.seed_map[0].label), (1, 1));
        // two zeros one unit apart
        let two = VectorField::parse("(x1 - 0.5)*(x1 + 0.5) ; x2", 2, 2).unwrap();
        let g = rasterize(
            &two,
            &[0.0, 0.0],
            &AxisBox::uniform(2, -1.5, 1.5).unwrap(),
            256,
        )
        .unwrap();
        let l = sublevel_components(&g, 0.01, &[vec![0.5, 0.0], vec![-0.5, 0.0]]).unwrap();
        assert_eq!(l.count, 2);
        assert!((min_component_distance(&l).unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn counting_curve_examples() {
        let r_list = linspace(0.05, 0.5, 20);
        let c = counting_curve(
            &shifted_square(),
            &[0.0, 0.0],
            &roots(),
            &unit_box(),
            256,
            &r_list,
        )
        .unwrap();
        for (r, x) in c.r_values.iter().zip(&c.x_values) {
            if *r < 0.24 {
                assert_eq!(*x, 2, "r = {r}");
            } else if *r > 0.26 {
                assert_eq!(*x, 1, "r = {r}");
            }
        }
        let sq = builtin("z_pow_n:2").unwrap().field;
        let c = counting_curve(
            &sq,
            &[0.0, 0.0],
            &[vec![0.0, 0.0]],
            &unit_box(),
            64,
            &r_list,
        )
        .unwrap();
        assert!(c.x_values.iter().all(|&x| x == 1));
        assert!(counting_curve(&sq, &[0.0, 0.0], &[], &unit_box(), 64, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn cubic_with_three_zeros() {
        // z^3 - z has zeros -1, 0, 1 and critical values of modulus 2/(3*sqrt(3))
        let f = VectorField::parse("x1^3 - 3*x1*x2^2 - x1 ; 3*x1^2*x2 - x2^3 - x2", 2, 2).unwrap();
        let seeds = vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]];
        let bx = AxisBox::uniform(2, -1.6, 1.6).unwrap();
        let c =
            counting_curve(&f, &[0.0, 0.0], &seeds, &bx, 256, &linspace(0.05, 1.0, 20)).unwrap();
        assert_eq!(c.x_values[0], 3);
        assert_eq!(*c.x_values.last().unwrap(), 1);
        assert!(c.x_values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn discreteness_examples() {
        let sq = builtin("z_pow_n:2").unwrap().field;
        let cert = discreteness_certificate(&sq, &[0.0, 0.0], &[0.5, 0.25], 64).unwrap();
        assert_eq!(cert.rho, 0.5);
        assert!((cert.margin - 0.25).abs() < 1e-12);
        let constant = VectorField::parse("1 + 0*x1 ; 2 + 0*x2", 2, 2).unwrap();
        assert_eq!(
            discreteness_certificate(&constant, &[0.0, 0.0], &[0.5, 0.1], 32),
            Err(Error::NoRadiusFound)
        );
        let shifted = shifted_square();
        // H(z) = H(0) only at z = 0
        assert!(discreteness_certificate(&shifted, &[0.0, 0.0], &[0.3], 64).is_ok());
        let g = crate::gallery::finite_zero_bump(1, &[vec![0.0]]).unwrap();
        let line = crate::gallery::planar_critical_line(&g).unwrap();
        assert!(discreteness_certificate(&line, &[0.0, 0.0], &[0.5, 0.25], 64).is_ok());
    }

    #[test]
    fn high_wall_cases() {
        let sq = builtin("z_pow_n:2").unwrap().field;
        let bx = AxisBox::uniform(2, -2.0, 2.0).unwrap();
        let arc: Vec<Vec<f64>> = linspace(0.0, std::f64::consts::PI, 33)
            .iter()
            .map(|t| vec![t.cos(), t.sin()])
            .collect();
        let rep = high_wall_check(&sq, &bx, &arc).unwrap();
        assert_eq!(rep.verdict, WallVerdict::Violation);
        assert!((rep.wall_height - 4.0).abs() < 1e-9 && (rep.curve_max - 1.0).abs() < 1e-9);
        let id = VectorField::parse("x1 ; x2", 2, 2).unwrap();
        assert_eq!(
            high_wall_check(&id, &bx, &arc).unwrap().verdict,
            WallVerdict::Consistent
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn counting_curve_non_increasing(a in 0.1f64..0.9, theta in 0.0f64..std::f64::consts::TAU) {
            // seeds are the three preimages of y0 = (a e^{i theta})^3 under z^3
            let seeds: Vec<Vec<f64>> = (0..3)
                .map(|k| {
                    let phi = theta + std::f64::consts::TAU * k as f64 / 3.0;
                    vec![a * phi.cos(), a * phi.sin()]
                })
                .collect();
            let y0 = [a.powi(3) * (3.0 * theta).cos(), a.powi(3) * (3.0 * theta).sin()];
            let f = builtin("z_pow_n:3").unwrap().field;
            // below |H'| times a cell diagonal a seed's own cell can miss the sublevel set
            let curve = counting_curve(&f, &y0, &seeds, &unit_box(), 48, &linspace(0.2, 1.5, 14)).unwrap();
            prop_assert!(curve.x_values.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
