//! Damped Newton polishing and grid-seeded multistart root search for square systems.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field_expr::VectorField;
use crate::geometry::{norm, solve, Region};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub max_iter: usize,
    /// Converged once the step is below `step_tol * max(1, |x|)` ...
    pub step_tol: f64,
    /// ... and the residual below `residual_tol`.
    pub residual_tol: f64,
    /// Roots closer than this are merged.
    pub dedup_radius: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            max_iter: 50,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            dedup_radius: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: Vec<f64>,
    pub residual: f64,
}

fn residual(field: &VectorField, x: &[f64], target: &[f64]) -> Option<(Vec<f64>, f64)> {
    let v = field.eval(x).ok()?;
    let r: Vec<f64> = v.iter().zip(target).map(|(a, b)| a - b).collect();
    let n = norm(&r);
    n.is_finite().then_some((r, n))
}

/// Newton iteration for `field(x) = target` from `start`, with step halving whenever a
/// full step fails to reduce the residual. Iterates leaving `escape` are abandoned.
pub fn newton_solve(
    field: &VectorField,
    target: &[f64],
    start: &[f64],
    escape: Option<&Region>,
    settings: &NewtonSettings,
) -> Option<Root> {
    let mut x = start.to_vec();
    let (mut r, mut rn) = residual(field, &x, target)?;
    for _ in 0..settings.max_iter {
        if rn == 0.0 {
            return Some(Root { x, residual: 0.0 });
        }
        let jac = field.jacobian(&x).ok()?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let step = solve(&jac, &neg)?;
        if step.iter().any(|s| !s.is_finite()) {
            return None;
        }
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + scale * s).collect();
            if let Some((tr, tn)) = residual(field, &trial, target) {
                if tn < rn || (scale == 1.0 && tn <= rn) {
                    accepted = Some((trial, tr, tn));
                    break;
                }
            }
            scale *= 0.5;
        }
        let step_len = scale * norm(&step);
        match accepted {
            Some((nx, nr, nn)) => {
                x = nx;
                r = nr;
                rn = nn;
            }
            // at the noise floor no step helps any more
            None => return (rn < settings.residual_tol).then_some(Root { x, residual: rn }),
        }
        if let Some(region) = escape {
            let bb = region.bounding_box().ok()?;
            let far = x.iter().enumerate().any(|(a, v)| {
                *v < bb.lo[a] - 4.0 * bb.width(a) || *v > bb.hi[a] + 4.0 * bb.width(a)
            });
            if far {
                return None;
            }
        }
        if step_len < settings.step_tol * norm(&x).max(1.0) && rn < settings.residual_tol {
            return Some(Root { x, residual: rn });
        }
    }
    (rn < settings.residual_tol).then_some(Root { x, residual: rn })
}

/// Seeds Newton from every cell center of a `grid_res^k` grid over the region's bounding
/// box, keeps converged roots strictly inside the region, sorts them lexicographically
/// and merges those closer than the dedup radius.
pub fn find_roots(
    field: &VectorField,
    target: &[f64],
    region: &Region,
    grid_res: usize,
    settings: &NewtonSettings,
) -> Vec<Root> {
    let Ok(bb) = region.bounding_box() else {
        return Vec::new();
    };
    let seeds = bb.cell_centers(grid_res.max(1));
    let interior_margin = 1e-12 * bb.diameter();
    let mut roots: Vec<Root> = seeds
        .par_iter()
        .filter_map(|s| newton_solve(field, target, s, Some(region), settings))
        .filter(|r| region.contains_interior(&r.x, interior_margin))
        .collect();
    roots.sort_by(|a, b| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    dedup_roots(roots, settings.dedup_radius)
}

/// Keeps the lowest-residual representative of every cluster of nearby roots.
pub fn dedup_roots(sorted: Vec<Root>, radius: f64) -> Vec<Root> {
    let mut kept: Vec<Root> = Vec::new();
    for r in sorted {
        match kept
            .iter_mut()
            .find(|k| crate::geometry::distance(&k.x, &r.x) <= radius)
        {
            Some(k) if r.residual < k.residual => *k = r,
            Some(_) => {}
            None => kept.push(r),
        }
    }
    kept
}
