//! Sampled check of the global inverse function criterion: a smooth `H: R^m -> R^m` with
//! no critical points and `|H(x)| -> infinity` is a diffeomorphism onto `R^m`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_expr::VectorField;
use crate::geometry::{distance, norm, sphere_points, AxisBox, Region};
use crate::newton::{find_roots, NewtonSettings};

/// `|det J|` below this counts as a critical point.
pub const CRITICAL_DET: f64 = 1e-8;
/// Image distance below which two samples collide.
pub const COLLISION_TOL: f64 = 1e-6;
/// Colliding samples must be at least this far apart.
pub const COLLISION_SEPARATION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HadamardVerdict {
    ConsistentWithDiffeo,
    CriticalPointFound,
    PropernessDoubtful,
    InjectivityViolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMinimum {
    pub radius: f64,
    pub min_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub image_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardReport {
    pub min_abs_det: f64,
    pub min_det_at: Vec<f64>,
    pub properness_samples: Vec<SphereMinimum>,
    pub collision: Option<Collision>,
    pub pair_samples: usize,
    pub seed: u64,
    pub verdict: HadamardVerdict,
}

fn abs_det(field: &VectorField, x: &[f64]) -> Result<f64> {
    Ok(field.jacobian_det(x)?.value.abs())
}

/// Grid minimum of `|det J|` on the nodes of `bx`, refined by compass search from the
/// eight best nodes so that isolated critical points between nodes are still found.
fn min_abs_det(field: &VectorField, bx: &AxisBox, grid_res: usize) -> Result<(f64, Vec<f64>)> {
    let nodes = bx.grid_nodes(grid_res);
    let widths: Vec<f64> = (0..bx.dim())
        .map(|a| bx.width(a) / grid_res as f64)
        .collect();
    let mut scored = nodes
        .par_iter()
        .map(|p| Ok((abs_det(field, p)?, p.clone())))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    });
    let refined = scored
        .par_iter()
        .take(8)
        .map(|(v, p)| compass_search(field, bx, p.clone(), *v, &widths))
        .collect::<Result<Vec<_>>>()?;
    Ok(refined
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |best, cand| {
            if cand.0 < best.0 {
                cand
            } else {
                best
            }
        }))
}

fn compass_search(
    field: &VectorField,
    bx: &AxisBox,
    mut x: Vec<f64>,
    mut value: f64,
    widths: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let mut step: Vec<f64> = widths.iter().map(|w| 0.5 * w).collect();
    for _ in 0..60 {
        let mut improved = false;
        for axis in 0..x.len() {
            for dir in [-1.0, 1.0] {
                let mut trial = x.clone();
                trial[axis] += dir * step[axis];
                if !bx.contains(&trial) {
                    continue;
                }
                let v = abs_det(field, &trial)?;
                if v < value {
                    (x, value, improved) = (trial, v, true);
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    Ok((value, x))
}

fn sphere_count(dim: usize) -> usize {
    match dim {
        2 => 1024,
        3 => 4096,
        _ => 8192,
    }
}

/// First colliding pair in sample order, found through a hash grid on the images.
fn find_collision(points: &[Vec<f64>], images: &[Vec<f64>]) -> Option<Collision> {
    let cell = 4.0 * COLLISION_TOL;
    let key = |h: &[f64]| -> Vec<i64> { h.iter().map(|v| (v / cell).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, h) in images.iter().enumerate() {
        buckets.entry(key(h)).or_default().push(i);
    }
    let dim = images.first()?.len();
    for (i, h) in images.iter().enumerate() {
        let base = key(h);
        let mut partners = Vec::new();
        for offset in 0..3usize.pow(dim as u32) {
            let mut k = base.clone();
            let mut rem = offset;
            for c in k.iter_mut() {
                *c += (rem % 3) as i64 - 1;
                rem /= 3;
            }
            if let Some(b) = buckets.get(&k) {
                partners.extend(b.iter().copied().filter(|&j| j > i));
            }
        }
        partners.sort_unstable();
        for j in partners {
            let gap = distance(h, &images[j]);
            if gap < COLLISION_TOL && distance(&points[i], &points[j]) > COLLISION_SEPARATION {
                return Some(Collision {
                    x: points[i].clone(),
                    x_prime: points[j].clone(),
                    image_gap: gap,
                });
            }
        }
    }
    None
}

/// Runs the three checks on `bx` (all of them, for the report) and returns the verdict
/// of the first failing one: critical point, then properness, then injectivity.
///
/// Sphere minima are taken on spheres around the box center. Properness is judged
/// doubtful unless they strictly increase and the last exceeds twice the first.
pub fn hadamard_check(
    field: &VectorField,
    bx: &AxisBox,
    grid_res: usize,
    radii: &[f64],
    pair_samples: usize,
    seed: u64,
) -> Result<HadamardReport> {
    let dim = field.input_dim();
    if !field.is_square() || bx.dim() != dim || !bx.is_bounded() {
        return Err(Error::Precondition(
            "hadamard check needs a square field on a bounded box".into(),
        ));
    }
    if grid_res == 0
        || radii.is_empty()
        || radii[0] <= 0.0
        || radii.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Precondition(
            "grid_res must be positive and radii positive and increasing".into(),
        ));
    }
    let center = bx.center();
    let max_radius = (0..dim)
        .map(|a| 0.5 * bx.width(a))
        .fold(f64::INFINITY, f64::min);
    if radii
        .last()
        .is_some_and(|&r| r > max_radius * (1.0 + 1e-12))
    {
        return Err(Error::Precondition(format!(
            "radii must not exceed {max_radius}"
        )));
    }

    let (min_abs_det, min_det_at) = min_abs_det(field, bx, grid_res)?;

    let properness_samples = radii
        .iter()
        .map(|&radius| {
            let values = sphere_points(&center, radius, sphere_count(dim))
                .par_iter()
                .map(|p| field.eval(p).map(|h| norm(&h)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SphereMinimum {
                radius,
                min_modulus: values.into_iter().fold(f64::INFINITY, f64::min),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mins: Vec<f64> = properness_samples.iter().map(|s| s.min_modulus).collect();
    let proper = mins.windows(2).all(|w| w[1] > w[0]) && mins[mins.len() - 1] > 2.0 * mins[0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..pair_samples)
        .map(|_| {
            (0..dim)
                .map(|a| rng.gen_range(bx.lo[a]..=bx.hi[a]))
                .collect()
        })
        .collect();
    let images = points
        .par_iter()
        .map(|p| field.eval(p))
        .collect::<Result<Vec<_>>>()?;
    let collision = find_collision(&points, &images);

    let verdict = if min_abs_det < CRITICAL_DET {
        HadamardVerdict::CriticalPointFound
    } else if !proper {
        HadamardVerdict::PropernessDoubtful
    } else if collision.is_some() {
        HadamardVerdict::InjectivityViolated
    } else {
        HadamardVerdict::ConsistentWithDiffeo
    };
    Ok(HadamardReport {
        min_abs_det,
        min_det_at,
        properness_samples,
        collision,
        pair_samples,
        seed,
        verdict,
    })
}

/// Number of distinct preimages in `bx` of each target, by grid-seeded Newton.
pub fn preimage_counts(
    field: &VectorField,
    bx: &AxisBox,
    targets: &[Vec<f64>],
    grid_res: usize,
) -> Vec<usize> {
    let region = Region::Box(bx.clone());
    targets
        .par_iter()
        .map(|y| find_roots(field, y, &region, grid_res, &NewtonSettings::default()).len())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::builtin;

    fn big_box() -> AxisBox {
        AxisBox::uniform(2, -6.0, 6.0).unwrap()
    }

    #[test]
    fn demo_is_consistent() {
        let f = builtin("hadamard_demo").unwrap().field;
        let rep = hadamard_check(&f, &big_box(), 64, &[1.0, 2.0, 4.0, 6.0], 2000, 0).unwrap();
        assert_eq!(rep.verdict, HadamardVerdict::ConsistentWithDiffeo);
        assert!(rep.min_abs_det >= 3.75 - 1e-9 && rep.min_abs_det < 3.76);
        assert!(rep.collision.is_none());
    }

    #[test]
    fn square_has_critical_point() {
        let f = builtin("z_pow_n:2").unwrap().field;
        let rep = hadamard_check(
            &f,
            &AxisBox::uniform(2, -1.3, 0.9).unwrap(),
            7,
            &[0.5, 1.0],
            100,
            0,
        )
        .unwrap();
        assert_eq!(rep.verdict, HadamardVerdict::CriticalPointFound);
        assert!(norm(&rep.min_det_at) < 1e-4);
    }

    #[test]
    fn exponential_is_not_proper() {
        let f = VectorField::parse("exp(x1) ; x2", 2, 2).unwrap();
        let rep = hadamard_check(&f, &big_box(), 32, &[1.0, 2.0, 4.0, 6.0], 200, 0).unwrap();
        assert_eq!(rep.verdict, HadamardVerdict::PropernessDoubtful);
    }

    #[test]
    fn folded_map_collides() {
        // (x1^2, x2) identifies x1 and -x1 but is also critical on x1 = 0; the collision
        // scan on its own still sees the fold
        let pts = vec![vec![0.5, 0.2], vec![0.1, 0.1], vec![-0.5, 0.2]];
        let f = VectorField::parse("x1^2 ; x2", 2, 2).unwrap();
        let images: Vec<Vec<f64>> = pts.iter().map(|p| f.eval(p).unwrap()).collect();
        let c = find_collision(&pts, &images).unwrap();
        assert_eq!(
            (c.x.clone(), c.x_prime.clone()),
            (pts[0].clone(), pts[2].clone())
        );
        assert!(find_collision(&pts[..2], &images[..2]).is_none());
    }

    #[test]
    fn deterministic_for_seed() {
        let f = builtin("hadamard_demo").unwrap().field;
        let a = hadamard_check(&f, &big_box(), 16, &[1.0, 6.0], 300, 7).unwrap();
        let b = hadamard_check(&f, &big_box(), 16, &[1.0, 6.0], 300, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_radii() {
        let f = builtin("hadamard_demo").unwrap().field;
        assert!(hadamard_check(&f, &big_box(), 8, &[2.0, 1.0], 10, 0).is_err());
        assert!(hadamard_check(&f, &big_box(), 8, &[7.0], 10, 0).is_err());
    }
}
