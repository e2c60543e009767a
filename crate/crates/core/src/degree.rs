//! Zero-existence certificates from the Brouwer degree.
//!
//! The degree of `H` on a region at a regular value `y` is the signed count of the
//! preimages of `y`, each weighted by the sign of `det J` there. When `H - y` does not
//! vanish on the boundary and the degree is non-zero, `H(x) = y` has a solution inside.
//! A zero degree says nothing.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_expr::VectorField;
use crate::geometry::{distance, linspace, norm, sphere_points, AxisBox, Region};
use crate::newton::{find_roots, NewtonSettings};
use crate::winding::{angle_lift, LoopSample, ZERO_TOLERANCE};

/// Minimum `|det J|` for a preimage to count as regular.
pub const REGULAR_DET: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub x: Vec<f64>,
    pub sign: i8,
    pub det: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeCertificate {
    pub target: Vec<f64>,
    pub region: Region,
    pub preimages: Vec<Preimage>,
    pub degree: i64,
    /// Sampled `min |H - target|` over the region boundary.
    pub boundary_margin: f64,
    pub grid_res: usize,
}

/// Outcome of [`certify_zero`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroVerdict {
    /// Non-zero degree: a zero exists in the interior.
    Certified(DegreeCertificate),
    /// Degree zero: existence undetermined.
    NoCertificate(DegreeCertificate),
}

impl ZeroVerdict {
    pub fn certificate(&self) -> &DegreeCertificate {
        match self {
            ZeroVerdict::Certified(c) | ZeroVerdict::NoCertificate(c) => c,
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, ZeroVerdict::Certified(_))
    }
}

fn boundary_res(dim: usize, grid_res: usize) -> usize {
    match dim {
        0..=2 => (8 * grid_res).max(256),
        3 => (2 * grid_res).max(48),
        _ => grid_res.max(8),
    }
}

fn check_square(field: &VectorField, y: &[f64], region_dim: usize) -> Result<()> {
    if !field.is_square() {
        return Err(Error::Precondition("degree needs a square field".into()));
    }
    if y.len() != field.output_dim() || region_dim != field.input_dim() {
        return Err(Error::Precondition(
            "target or region dimension does not match the field".into(),
        ));
    }
    Ok(())
}

/// Sampled `min |H - y|` over the boundary of `region`.
pub fn boundary_margin(field: &VectorField, y: &[f64], region: &Region, res: usize) -> Result<f64> {
    let samples = region.boundary_samples(res);
    let values: Result<Vec<f64>> = samples.par_iter().map(|p| field.residual(p, y)).collect();
    Ok(values?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Degree of `field` at `y` over an arbitrary region (box or ball).
pub fn degree_in_region(
    field: &VectorField,
    y: &[f64],
    region: &Region,
    grid_res: usize,
) -> Result<DegreeCertificate> {
    check_square(field, y, region.dim())?;
    if grid_res == 0 {
        return Err(Error::Precondition(
            "grid resolution must be positive".into(),
        ));
    }
    let margin = boundary_margin(field, y, region, boundary_res(region.dim(), grid_res))?;
    if !(margin > ZERO_TOLERANCE) {
        return Err(Error::BoundaryZero { margin });
    }
    let roots = find_roots(field, y, region, grid_res, &NewtonSettings::default());
    let mut preimages = Vec::with_capacity(roots.len());
    for root in roots {
        let det = field.jacobian_det(&root.x)?.value;
        if det.abs() <= REGULAR_DET {
            return Err(Error::SingularPreimage { point: root.x, det });
        }
        preimages.push(Preimage {
            sign: if det > 0.0 { 1 } else { -1 },
            x: root.x,
            det,
            residual: root.residual,
        });
    }
    Ok(DegreeCertificate {
        target: y.to_vec(),
        region: region.clone(),
        degree: preimages.iter().map(|p| p.sign as i64).sum(),
        preimages,
        boundary_margin: margin,
        grid_res,
    })
}

/// Degree at `y` over `bx`, by grid-seeded Newton and Jacobian sign counting.
pub fn preimage_degree(
    field: &VectorField,
    y: &[f64],
    bx: &AxisBox,
    grid_res: usize,
) -> Result<DegreeCertificate> {
    degree_in_region(field, y, &Region::Box(bx.clone()), grid_res)
}

/// Like [`degree_in_region`], but when `y` is not a regular value the target is moved by
/// a small fraction of the boundary margin (the degree is constant on that ball).
/// Returns the certificate for the value actually used.
pub fn degree_near(
    field: &VectorField,
    y: &[f64],
    region: &Region,
    grid_res: usize,
) -> Result<DegreeCertificate> {
    match degree_in_region(field, y, region, grid_res) {
        Err(Error::SingularPreimage { .. }) => {}
        other => return other,
    }
    let margin = boundary_margin(field, y, region, boundary_res(region.dim(), grid_res))?;
    let origin = vec![0.0; y.len()];
    let mut last = Error::SingularPreimage {
        point: y.to_vec(),
        det: 0.0,
    };
    for fraction in [1e-3, 1e-2, 5e-2] {
        for dir in sphere_points(&origin, 1.0, 7) {
            let shifted: Vec<f64> = y
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + fraction * margin * d)
                .collect();
            match degree_in_region(field, &shifted, region, grid_res) {
                Ok(cert) => return Ok(cert),
                Err(e @ Error::SingularPreimage { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

/// Certifies a zero of `field` in the interior of `bx` when the degree at 0 is non-zero.
pub fn certify_zero(field: &VectorField, bx: &AxisBox, grid_res: usize) -> Result<ZeroVerdict> {
    let cert = preimage_degree(field, &vec![0.0; field.output_dim()], bx, grid_res)?;
    Ok(if cert.degree != 0 {
        ZeroVerdict::Certified(cert)
    } else {
        ZeroVerdict::NoCertificate(cert)
    })
}

/// `r = min |H(x) - H(center)|` over the sampled boundary of `bx`. When the degree at
/// `H(center)` is non-zero, every target within `r` of `H(center)` has a preimage in `bx`.
pub fn covered_ball_radius(field: &VectorField, bx: &AxisBox) -> Result<f64> {
    if !field.is_square() || bx.dim() != field.input_dim() {
        return Err(Error::Precondition(
            "covered ball needs a square field on a matching box".into(),
        ));
    }
    let center_value = field.eval(&bx.center())?;
    let r = boundary_margin(
        field,
        &center_value,
        &Region::Box(bx.clone()),
        boundary_res(bx.dim(), 64),
    )?;
    if !(r > ZERO_TOLERANCE) {
        return Err(Error::BoundaryZero { margin: r });
    }
    Ok(r)
}

/// Doubles the loop resolution from 64 until two consecutive windings agree.
/// `sample(n)` returns the closed loop of values for resolution `n`.
fn adaptive_winding(sample: impl Fn(usize) -> Result<Vec<[f64; 2]>>) -> Result<i64> {
    let mut n = 64;
    let mut previous = None;
    while n <= 1 << 18 {
        let values = sample(n)?;
        if let Some(t) = values
            .iter()
            .position(|v| v[0].hypot(v[1]) < ZERO_TOLERANCE)
        {
            return Err(Error::ZeroOnLoop {
                t: t as f64 / (values.len() - 1) as f64,
            });
        }
        match angle_lift(&LoopSample::uniform(values)?) {
            Ok(lift) if previous == Some(lift.winding) => return Ok(lift.winding),
            Ok(lift) => previous = Some(lift.winding),
            Err(Error::UnwrapAmbiguity { .. }) => previous = None,
            Err(e) => return Err(e),
        }
        n *= 2;
    }
    Err(Error::NoConvergence { samples: 1 << 18 })
}

fn shifted_values(field: &VectorField, y: &[f64], pts: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    pts.par_iter()
        .map(|p| {
            let h = field.eval(p)?;
            Ok([h[0] - y[0], h[1] - y[1]])
        })
        .collect()
}

fn check_planar(field: &VectorField, y: &[f64]) -> Result<()> {
    if field.input_dim() != 2 || field.output_dim() != 2 || y.len() != 2 {
        return Err(Error::Precondition(
            "boundary winding needs a planar field".into(),
        ));
    }
    Ok(())
}

/// Winding number of `H - y` along the counter-clockwise boundary of a planar box.
///
/// Independent of preimage counting: it only looks at the boundary.
pub fn boundary_winding(field: &VectorField, y: &[f64], bx: &AxisBox) -> Result<i64> {
    check_planar(field, y)?;
    adaptive_winding(|per_edge| shifted_values(field, y, &bx.boundary_loop_2d(per_edge / 4)?))
}

/// Winding number of `H - y` along the circle `|x - center| = radius`.
pub fn circle_winding(field: &VectorField, y: &[f64], center: &[f64], radius: f64) -> Result<i64> {
    check_planar(field, y)?;
    if center.len() != 2 || !(radius > 0.0) {
        return Err(Error::Precondition(
            "circle needs a 2-vector center and positive radius".into(),
        ));
    }
    adaptive_winding(|n| {
        let mut pts: Vec<[f64; 2]> = sphere_points(center, radius, n)
            .into_iter()
            .map(|p| [p[0], p[1]])
            .collect();
        pts.push(pts[0]);
        shifted_values(field, y, &pts)
    })
}

/// Where a homotopy is scanned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanBoundary {
    /// A circle (or sphere, in 3 or more dimensions) that is refined on demand.
    Sphere {
        center: Vec<f64>,
        radius: f64,
        samples: usize,
    },
    /// Fixed ordered samples; consecutive entries (cyclically) count as neighbours.
    Points(Vec<Vec<f64>>),
}

impl ScanBoundary {
    fn points(&self) -> Vec<Vec<f64>> {
        match self {
            ScanBoundary::Sphere {
                center,
                radius,
                samples,
            } => sphere_points(center, *radius, *samples),
            ScanBoundary::Points(p) => p.clone(),
        }
    }

    fn refined(&self) -> Option<ScanBoundary> {
        match self {
            ScanBoundary::Sphere {
                center,
                radius,
                samples,
            } => Some(ScanBoundary::Sphere {
                center: center.clone(),
                radius: *radius,
                samples: samples * 2,
            }),
            ScanBoundary::Points(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyScan {
    pub description: String,
    pub t_samples: Vec<f64>,
    pub boundary_samples: usize,
    /// `min |F_t(p)|` over all scanned `(t, p)`.
    pub min_modulus_over_boundary: f64,
    pub argmin_t: f64,
    pub argmin_point: Vec<f64>,
    /// Half the largest change of `F` between neighbouring samples.
    pub slack: f64,
    /// The minimum clears the sampling slack, so the endpoint maps share their degree
    /// (at sample resolution).
    pub certified: bool,
}

const SCAN_REFINEMENTS: usize = 4;

/// Scans `|F_t(p)|` over `t` in `[0, 1]` and boundary points `p`.
///
/// A positive minimum that exceeds the slack certifies that `F_t` never vanishes on the
/// boundary. Otherwise the scan refines (doubling both `t` and boundary resolution, up
/// to four times) and stops early when it lands on an actual zero.
pub fn homotopy_boundary_scan<F>(
    family: F,
    boundary: &ScanBoundary,
    t_count: usize,
    description: &str,
) -> Result<HomotopyScan>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>> + Sync,
{
    if t_count < 16 {
        return Err(Error::Precondition("t_count must be at least 16".into()));
    }
    let mut intervals = t_count - 1;
    let mut boundary = boundary.clone();
    let mut last = None;
    for _ in 0..=SCAN_REFINEMENTS {
        let ts = linspace(0.0, 1.0, intervals + 1);
        let pts = boundary.points();
        if pts.len() < 2 {
            return Err(Error::Precondition(
                "boundary needs at least 2 samples".into(),
            ));
        }
        let grid: Result<Vec<Vec<Vec<f64>>>> = ts
            .par_iter()
            .map(|&t| pts.iter().map(|p| family(t, p)).collect::<Result<Vec<_>>>())
            .collect();
        let grid = grid?;
        let mut min = f64::INFINITY;
        let mut arg = (0, 0);
        let mut max_modulus: f64 = 0.0;
        let mut max_jump: f64 = 0.0;
        for (i, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let m = norm(v);
                if m < min {
                    min = m;
                    arg = (i, j);
                }
                max_modulus = max_modulus.max(m);
                max_jump = max_jump.max(distance(v, &row[(j + 1) % row.len()]));
                if let Some(next) = grid.get(i + 1) {
                    max_jump = max_jump.max(distance(v, &next[j]));
                }
            }
        }
        let slack = 0.5 * max_jump;
        let scan = HomotopyScan {
            description: description.to_string(),
            t_samples: ts.clone(),
            boundary_samples: pts.len(),
            min_modulus_over_boundary: min,
            argmin_t: ts[arg.0],
            argmin_point: pts[arg.1].clone(),
            slack,
            certified: min > slack,
        };
        let vanished = min <= 1e-12 * max_modulus.max(f64::MIN_POSITIVE);
        if scan.certified || vanished {
            return Ok(scan);
        }
        last = Some(scan);
        match boundary.refined() {
            Some(b) => boundary = b,
            None => break,
        }
        intervals *= 2;
    }
    Ok(last.expect("at least one scan level ran"))
}
