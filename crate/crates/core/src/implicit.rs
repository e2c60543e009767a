//! Solving `F(x, y) = F(x0, y0)` for `y` near `y0`, including at critical points of the
//! slice `y -> F(x0, y)` where the classical Jacobian test gives no answer.
//!
//! Two contracts are offered. *Unique* mode calibrates a radius chain `(s1, N, r1, k, s2,
//! r2)` that forces exactly one solution `g(x)` in `B(y0, s2)` for `|x - x0| <= r2`.
//! *Existence-only* mode needs only a non-zero index (or degree) of the anchor slice and
//! returns some solution per sample, without any branch choice. Scalar equations
//! (`m = 1`) fall back to sign-change bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::{boundary_winding, circle_winding, degree_near};
use crate::error::{Error, Result};
use crate::field_expr::VectorField;
use crate::geometry::{ball_points, distance, linspace, norm, sphere_points, AxisBox, Region};
use crate::newton::{find_roots, NewtonSettings};
use crate::winding::{local_index, ZERO_TOLERANCE};

/// Cap on every halving or doubling loop in [`calibrate`].
pub const CALIBRATION_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniquenessMode {
    Unique,
    ExistenceOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// Non-zero winding of the slice around the search circle or box (m = 2).
    Winding,
    /// Non-zero degree of the slice on the search region (m ≥ 3).
    Degree,
    /// Sign change of a scalar slice (m = 1).
    SignChange,
    /// Located by the grid scan although the topological certificate was zero.
    GridScan,
}

/// Where the solution `y` is looked for, in existence-only mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchRegion {
    /// `B(y0, initial_radius)`, after checking the anchor slice index.
    Anchored,
    /// A fixed box for every sample.
    Box(AxisBox),
    /// The cube around `y0` of half-width `coefficient * |x - x0|^exponent`.
    PowerBox { coefficient: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitOptions {
    pub mode: UniquenessMode,
    pub tol: f64,
    /// Sampling resolution for calibration and the uniqueness scan.
    pub res: usize,
    /// Newton seeding grid per sample.
    pub grid_res: usize,
    pub initial_radius: f64,
    pub search: SearchRegion,
    /// Radii at which the report's continuity profile is evaluated.
    pub deltas: Vec<f64>,
}

impl Default for ImplicitOptions {
    fn default() -> Self {
        Self {
            mode: UniquenessMode::Unique,
            tol: 1e-10,
            res: 16,
            grid_res: 16,
            initial_radius: 0.5,
            search: SearchRegion::Anchored,
            deltas: Vec::new(),
        }
    }
}

/// The radius/height chain that localises the implicit solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants {
    pub s1: f64,
    /// Wall height `N = min |F(x0, y) - F(x0, y0)|` over `|y - y0| = s1`.
    pub n_wall: f64,
    pub r1: f64,
    pub k: u64,
    pub s2: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
    pub certificate: CertificateKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnsolvedSample {
    pub x: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub delta: f64,
    /// `sup |g(x) - y0|` over solved samples with `|x - x0| <= delta`.
    pub sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicitReport {
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub anchor_value: Vec<f64>,
    pub mode: UniquenessMode,
    pub calibration: Option<CalibrationConstants>,
    /// Samples farther than this from `x0` are not attempted.
    pub x_radius: f64,
    pub samples: Vec<ImplicitSample>,
    pub unsolved: Vec<UnsolvedSample>,
    pub continuity_profile: Vec<ProfilePoint>,
}

/// `F` split as `R^n x R^m -> R^m`, evaluated relative to the anchor value.
struct Split<'a> {
    field: &'a VectorField,
    n: usize,
    m: usize,
    c0: Vec<f64>,
}

impl<'a> Split<'a> {
    fn new(field: &'a VectorField, x0: &[f64], y0: &[f64]) -> Result<Self> {
        let m = field.output_dim();
        if field.input_dim() <= m {
            return Err(Error::Precondition(
                "F must map R^n x R^m to R^m with n >= 1".into(),
            ));
        }
        let n = field.input_dim() - m;
        if x0.len() != n || y0.len() != m {
            return Err(Error::Precondition(format!(
                "anchor must split as {n} + {m} coordinates"
            )));
        }
        let mut s = Self {
            field,
            n,
            m,
            c0: vec![0.0; m],
        };
        s.c0 = s.raw(x0, y0)?;
        Ok(s)
    }

    fn raw(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        p.extend_from_slice(y);
        self.field.eval(&p)
    }

    fn modulus(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(distance(&self.raw(x, y)?, &self.c0))
    }

    /// Evaluates `|G|` on every `(x, y)` pair and folds with `op`.
    fn fold(
        &self,
        xs: &[Vec<f64>],
        ys: &[Vec<f64>],
        init: f64,
        op: fn(f64, f64) -> f64,
    ) -> Result<f64> {
        let values = xs
            .par_iter()
            .map(|x| {
                ys.iter()
                    .map(|y| self.modulus(x, y))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(values.into_iter().flatten().fold(init, op))
    }

    fn x_ball(&self, x0: &[f64], r: f64, res: usize) -> Vec<Vec<f64>> {
        ball_points(x0, r, res)
    }

    fn y_sphere(&self, y0: &[f64], s: f64, res: usize) -> Vec<Vec<f64>> {
        sphere_points(y0, s, res.pow(self.m as u32 - 1).max(64))
    }
}

fn slice_looks_injective(
    split: &Split,
    x0: &[f64],
    y0: &[f64],
    s: f64,
    res: usize,
) -> Result<bool> {
    let slice = split.field.slice(x0)?;
    let dets = ball_points(y0, s, res)
        .par_iter()
        .map(|y| {
            slice
                .jacobian_det(y)
                .map(|d| if d.near_zero { 0.0 } else { d.value })
        })
        .collect::<Result<Vec<_>>>()?;
    let both_signs = dets.iter().any(|&d| d > 0.0) && dets.iter().any(|&d| d < 0.0);
    let region = Region::Ball {
        center: y0.to_vec(),
        radius: s,
    };
    let roots = find_roots(&slice, &split.c0, &region, 8, &NewtonSettings::default());
    Ok(!both_signs && roots.len() <= 1)
}

fn halve_until(start: f64, what: &str, mut ok: impl FnMut(f64) -> Result<bool>) -> Result<f64> {
    let mut r = start;
    for _ in 0..CALIBRATION_STEPS {
        if ok(r)? {
            return Ok(r);
        }
        r *= 0.5;
    }
    Err(Error::CalibrationFailure(what.into()))
}

/// Builds the calibration chain at `(x0, y0)`:
///
/// * `s1` halves from `initial_radius` until the anchor slice looks injective on
///   `B(y0, s1)` and the wall `N` on `|y - y0| = s1` is positive;
/// * `r1` halves until `|G| >= N/2` on `|x - x0| <= r1, |y - y0| = s1`;
/// * `k` doubles from 2 until `|G| <= N/4` on `|x - x0| <= r1/k, |y - y0| <= s1/k`;
/// * `r2` halves from `r1/k` until `|G| > 0` on `|x - x0| <= r2, |y - y0| = s2`.
///
/// Here `G(x, y) = F(x, y) - F(x0, y0)`. Needs `m >= 2`.
pub fn calibrate(
    field: &VectorField,
    x0: &[f64],
    y0: &[f64],
    res: usize,
    initial_radius: f64,
) -> Result<CalibrationConstants> {
    let split = Split::new(field, x0, y0)?;
    if split.m < 2 {
        return Err(Error::Precondition("calibration needs m >= 2".into()));
    }
    if !(initial_radius > 0.0) || res < 2 {
        return Err(Error::Precondition(
            "initial radius and resolution must be positive".into(),
        ));
    }
    let anchor = [x0.to_vec()];
    let floor = ZERO_TOLERANCE * (1.0 + norm(&split.c0));
    let mut n_wall = 0.0;
    let s1 = halve_until(initial_radius, "s1", |s| {
        n_wall = split.fold(
            &anchor,
            &split.y_sphere(y0, s, res),
            f64::INFINITY,
            f64::min,
        )?;
        Ok(n_wall > floor && slice_looks_injective(&split, x0, y0, s, res)?)
    })?;
    let sphere1 = split.y_sphere(y0, s1, res);
    let r1 = halve_until(initial_radius, "r1", |r| {
        Ok(
            split.fold(&split.x_ball(x0, r, res), &sphere1, f64::INFINITY, f64::min)?
                >= 0.5 * n_wall,
        )
    })?;
    let mut k = 2u64;
    for step in 0..=CALIBRATION_STEPS {
        if step == CALIBRATION_STEPS {
            return Err(Error::CalibrationFailure("k".into()));
        }
        let xs = split.x_ball(x0, r1 / k as f64, res);
        let ys = ball_points(y0, s1 / k as f64, res);
        if split.fold(&xs, &ys, 0.0, f64::max)? <= 0.25 * n_wall {
            break;
        }
        k *= 2;
    }
    let s2 = s1 / k as f64;
    let sphere2 = split.y_sphere(y0, s2, res);
    let r2 = halve_until(r1 / k as f64, "r2", |r| {
        Ok(split.fold(&split.x_ball(x0, r, res), &sphere2, f64::INFINITY, f64::min)? > floor)
    })?;
    Ok(CalibrationConstants {
        s1,
        n_wall,
        r1,
        k,
        s2,
        r2,
    })
}

/// Root of `f` on `[a, b]` by bisection; `f(a)` and `f(b)` must have opposite signs.
fn bisect(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<f64> {
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            (a, fa) = (mid, fm);
        } else {
            (b, fb) = (mid, fm);
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

const SIGN_SCAN_CELLS: usize = 64;

/// Uppermost root of `f` on the bracket, found by scanning 64 equal cells for sign
/// changes and bisecting the highest one. `None` when no cell changes sign.
pub fn bisect_scan(f: impl Fn(f64) -> Result<f64>, bracket: [f64; 2]) -> Result<Option<f64>> {
    let [a, b] = bracket;
    if !(a < b) {
        return Err(Error::Precondition("bracket must satisfy a < b".into()));
    }
    let nodes = linspace(a, b, SIGN_SCAN_CELLS + 1);
    let values = nodes.iter().map(|&y| f(y)).collect::<Result<Vec<_>>>()?;
    for i in (0..SIGN_SCAN_CELLS).rev() {
        if values[i + 1] == 0.0 {
            return Ok(Some(nodes[i + 1]));
        }
        if (values[i] < 0.0) != (values[i + 1] < 0.0) && values[i] != 0.0 {
            return bisect(&f, nodes[i], nodes[i + 1]).map(Some);
        }
    }
    Ok((values[0] == 0.0).then_some(nodes[0]))
}

/// Root in `y` of the scalar equation `F(x, y) = 0` on `bracket`, for `F: R^n x R -> R`.
pub fn solve_slice_1d(field: &VectorField, x: &[f64], bracket: [f64; 2]) -> Result<Option<f64>> {
    if field.output_dim() != 1 || field.input_dim() != x.len() + 1 {
        return Err(Error::Precondition(
            "scalar slice needs F: R^n x R -> R".into(),
        ));
    }
    let slice = field.slice(x)?;
    bisect_scan(|y| Ok(slice.eval(&[y])?[0]), bracket)
}

/// `sup |g(x) - y0|` over the solved samples within each `delta` of `x0`.
pub fn continuity_profile(report: &ImplicitReport, deltas: &[f64]) -> Result<Vec<ProfilePoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let near: Vec<&ImplicitSample> = report
                .samples
                .iter()
                .filter(|s| distance(&s.x, &report.x0) <= delta * (1.0 + 1e-12))
                .collect();
            if near.len() < 3 {
                return Err(Error::InsufficientSamples {
                    delta,
                    found: near.len(),
                });
            }
            Ok(ProfilePoint {
                delta,
                sup_deviation: near
                    .iter()
                    .map(|s| distance(&s.y, &report.y0))
                    .fold(0.0, f64::max),
            })
        })
        .collect()
}

enum Outcome {
    Solved(ImplicitSample),
    Unsolved(String),
}

fn topological_certificate(
    slice: &VectorField,
    target: &[f64],
    region: &Region,
    grid_res: usize,
) -> Result<i64> {
    match (slice.input_dim(), region) {
        (2, Region::Ball { center, radius }) => circle_winding(slice, target, center, *radius),
        (2, Region::Box(bx)) => boundary_winding(slice, target, bx),
        _ => degree_near(slice, target, region, grid_res).map(|c| c.degree),
    }
}

fn solve_one(split: &Split, x: &[f64], region: &Region, opts: &ImplicitOptions) -> Result<Outcome> {
    let slice = split.field.slice(x)?;
    let settings = NewtonSettings {
        residual_tol: opts.tol,
        ..NewtonSettings::default()
    };
    let certificate = match topological_certificate(&slice, &split.c0, region, opts.grid_res) {
        Ok(d) => d,
        Err(e) if e.is_usage() => return Err(e),
        Err(_) => 0,
    };
    let roots = find_roots(&slice, &split.c0, region, opts.grid_res, &settings);
    if opts.mode == UniquenessMode::Unique {
        let scan = find_roots(
            &slice,
            &split.c0,
            region,
            opts.res.max(opts.grid_res),
            &settings,
        );
        let distinct = roots.len().max(scan.len());
        if distinct > 1 {
            return Err(Error::MultipleSolutions(distinct));
        }
    }
    let Some(root) = roots.into_iter().next() else {
        return Ok(Outcome::Unsolved(if certificate == 0 {
            "degree zero and grid scan empty".into()
        } else {
            format!("certificate {certificate} but Newton located no root")
        }));
    };
    let kind = match (certificate != 0, split.m) {
        (false, _) => CertificateKind::GridScan,
        (true, 2) => CertificateKind::Winding,
        (true, _) => CertificateKind::Degree,
    };
    Ok(Outcome::Solved(ImplicitSample {
        x: x.to_vec(),
        y: root.x,
        residual: root.residual,
        certificate: kind,
    }))
}

fn solve_scalar(split: &Split, x: &[f64], y0: f64, half: f64, tol: f64) -> Result<Outcome> {
    let slice = split.field.slice(x)?;
    let f = |y: f64| Ok(slice.eval(&[y])?[0] - split.c0[0]);
    for bracket in [[y0, y0 + half], [y0 - half, y0]] {
        if let Some(y) = bisect_scan(f, bracket)? {
            let residual = f(y)?.abs();
            if residual < tol {
                return Ok(Outcome::Solved(ImplicitSample {
                    x: x.to_vec(),
                    y: vec![y],
                    residual,
                    certificate: CertificateKind::SignChange,
                }));
            }
        }
    }
    Ok(Outcome::Unsolved("no sign change in the bracket".into()))
}

type RegionFn = Box<dyn Fn(&[f64]) -> Option<Region> + Sync>;

/// Solves `F(x, y) = F(x0, y0)` at every `x` in `x_samples`; see the module docs for the
/// two modes. Results keep the order of `x_samples`.
///
/// Fails with `NoSolutionFound` when no sample could be solved, and with
/// `MultipleSolutions` when unique mode meets a second root.
pub fn solve_implicit(
    field: &VectorField,
    x0: &[f64],
    y0: &[f64],
    x_samples: &[Vec<f64>],
    opts: &ImplicitOptions,
) -> Result<ImplicitReport> {
    let split = Split::new(field, x0, y0)?;
    if let Some(bad) = x_samples.iter().find(|x| x.len() != split.n) {
        return Err(Error::Precondition(format!(
            "sample {bad:?} does not have {} coordinates",
            split.n
        )));
    }
    if !(opts.tol > 0.0) || !(opts.initial_radius > 0.0) || opts.res < 2 || opts.grid_res == 0 {
        return Err(Error::Precondition(
            "tolerance, radius and resolutions must be positive".into(),
        ));
    }
    let mut calibration = None;
    let mut x_radius = f64::INFINITY;
    let region_for: RegionFn = if split.m == 1 {
        if opts.mode == UniquenessMode::Unique {
            return Err(Error::Precondition("unique mode needs m >= 2".into()));
        }
        Box::new(|_| None)
    } else {
        match (opts.mode, &opts.search) {
            (UniquenessMode::Unique, _) => {
                let cal = calibrate(field, x0, y0, opts.res, opts.initial_radius)?;
                x_radius = cal.r2;
                calibration = Some(cal);
                let ball = Region::Ball {
                    center: y0.to_vec(),
                    radius: cal.s2,
                };
                Box::new(move |_| Some(ball.clone()))
            }
            (UniquenessMode::ExistenceOnly, SearchRegion::Anchored) => {
                let rho = opts.initial_radius;
                let slice = field.slice(x0)?;
                let ball = Region::Ball {
                    center: y0.to_vec(),
                    radius: rho,
                };
                let anchor_certificate = if split.m == 2 {
                    let idx = local_index(&slice, y0, rho)?;
                    if idx.valid {
                        idx.winding()
                    } else {
                        0
                    }
                } else {
                    degree_near(&slice, &split.c0, &ball, opts.grid_res)?.degree
                };
                if anchor_certificate == 0 {
                    return Err(Error::Precondition("anchor slice has index zero".into()));
                }
                let sphere = split.y_sphere(y0, rho, opts.res);
                let wall = split.fold(&[x0.to_vec()], &sphere, f64::INFINITY, f64::min)?;
                x_radius = halve_until(opts.initial_radius, "x radius", |r| {
                    Ok(split.fold(
                        &split.x_ball(x0, r, opts.res),
                        &sphere,
                        f64::INFINITY,
                        f64::min,
                    )? >= 0.5 * wall)
                })?;
                Box::new(move |_| Some(ball.clone()))
            }
            (UniquenessMode::ExistenceOnly, SearchRegion::Box(bx)) => {
                if bx.dim() != split.m || !bx.is_bounded() {
                    return Err(Error::Precondition(
                        "search box must be bounded in R^m".into(),
                    ));
                }
                let region = Region::Box(bx.clone());
                Box::new(move |_| Some(region.clone()))
            }
            (
                UniquenessMode::ExistenceOnly,
                SearchRegion::PowerBox {
                    coefficient,
                    exponent,
                },
            ) => {
                let (c, e) = (*coefficient, *exponent);
                let (x0, y0) = (x0.to_vec(), y0.to_vec());
                Box::new(move |x| {
                    let half = c * distance(x, &x0).powf(e);
                    (half > 0.0).then(|| {
                        Region::Box(AxisBox::cube(&y0, half).expect("positive half-width"))
                    })
                })
            }
        }
    };

    let outcomes = x_samples
        .par_iter()
        .map(|x| -> Result<Outcome> {
            if distance(x, x0) > x_radius {
                return Ok(Outcome::Unsolved(format!(
                    "outside the certified radius {x_radius}"
                )));
            }
            if split.m == 1 {
                let half = match &opts.search {
                    SearchRegion::PowerBox {
                        coefficient,
                        exponent,
                    } => coefficient * distance(x, x0).powf(*exponent),
                    _ => opts.initial_radius,
                };
                return solve_scalar(&split, x, y0[0], half, opts.tol);
            }
            match region_for(x) {
                Some(region) => solve_one(&split, x, &region, opts),
                None => Ok(Outcome::Unsolved("empty search region".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut samples = Vec::new();
    let mut unsolved = Vec::new();
    for (x, outcome) in x_samples.iter().zip(outcomes) {
        match outcome {
            Outcome::Solved(s) if s.residual < opts.tol => samples.push(s),
            Outcome::Solved(s) => unsolved.push(UnsolvedSample {
                x: x.clone(),
                reason: format!("residual {:e} above tolerance", s.residual),
            }),
            Outcome::Unsolved(reason) => unsolved.push(UnsolvedSample {
                x: x.clone(),
                reason,
            }),
        }
    }
    if samples.is_empty() {
        return Err(Error::NoSolutionFound);
    }
    let mut report = ImplicitReport {
        x0: x0.to_vec(),
        y0: y0.to_vec(),
        anchor_value: split.c0.clone(),
        mode: opts.mode,
        calibration,
        x_radius,
        samples,
        unsolved,
        continuity_profile: Vec::new(),
    };
    report.continuity_profile = opts
        .deltas
        .iter()
        .filter_map(|&d| continuity_profile(&report, &[d]).ok())
        .flatten()
        .collect();
    Ok(report)
}

/// Sample points `x0 + r (cos a, sin a)` (or `x0 ± r` when n = 1) for every radius, with
/// `per_radius` angles.
pub fn ring_samples(x0: &[f64], radii: &[f64], per_radius: usize) -> Vec<Vec<f64>> {
    radii
        .iter()
        .flat_map(|&r| sphere_points(x0, r, per_radius.max(1)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::builtin;

    fn linear() -> VectorField {
        VectorField::parse("x2 + x1 ; x3 - 2*x1", 3, 2).unwrap()
    }

    #[test]
    fn linear_calibration() {
        let cal = calibrate(&linear(), &[0.0], &[0.0, 0.0], 16, 0.5).unwrap();
        assert!((cal.s1 - 0.5).abs() < 1e-15);
        assert!((cal.n_wall - 0.5).abs() < 1e-12);
        assert!(cal.r1 > 0.0 && cal.r1 * 5f64.sqrt() <= 0.25 + 1e-12);
        assert!(cal.k >= 2 && (cal.s2 - cal.s1 / cal.k as f64).abs() < 1e-15);
        assert!(cal.r2 <= cal.r1 / cal.k as f64);
    }

    #[test]
    fn calibration_rejects_scalar_and_constant_slices() {
        let scalar = VectorField::parse("x2 - x1", 2, 1).unwrap();
        assert!(matches!(
            calibrate(&scalar, &[0.0], &[0.0], 16, 0.5),
            Err(Error::Precondition(_))
        ));
        let flat = VectorField::parse("x1 ; x1^2", 3, 2).unwrap();
        assert!(matches!(
            calibrate(&flat, &[0.0], &[0.0, 0.0], 8, 0.5),
            Err(Error::CalibrationFailure(_))
        ));
    }

    #[test]
    fn linear_unique_solve_and_profile() {
        let xs: Vec<Vec<f64>> = linspace(-0.004, 0.004, 9)
            .into_iter()
            .map(|v| vec![v])
            .collect();
        let opts = ImplicitOptions {
            deltas: vec![0.004, 0.002],
            ..ImplicitOptions::default()
        };
        let rep = solve_implicit(&linear(), &[0.0], &[0.0, 0.0], &xs, &opts).unwrap();
        assert!(rep.unsolved.is_empty());
        for s in &rep.samples {
            assert!((s.y[0] + s.x[0]).abs() < 1e-10 && (s.y[1] - 2.0 * s.x[0]).abs() < 1e-10);
            assert_eq!(s.certificate, CertificateKind::Winding);
        }
        let prof = &rep.continuity_profile;
        assert_eq!(prof.len(), 2);
        for p in prof {
            assert!(p.sup_deviation <= 5f64.sqrt() * p.delta + 1e-12);
        }
    }

    #[test]
    fn unique_mode_independent_of_start_box() {
        let f = builtin("z_abs2").unwrap().field;
        // F(x, y) = y |y|^2 + x (1, 0): the slice at x0 = 0 is a homeomorphism with a critical point
        let ast = f.ast().unwrap();
        let src = format!(
            "{} + x1 ; {}",
            ast.exprs[0].map_vars(&|i| i + 1),
            ast.exprs[1].map_vars(&|i| i + 1)
        );
        let field = VectorField::parse(&src, 3, 2).unwrap();
        let rep = solve_implicit(
            &field,
            &[0.0],
            &[0.0, 0.0],
            &[vec![1e-4]],
            &ImplicitOptions::default(),
        )
        .unwrap();
        let g = &rep.samples[0].y;
        let s2 = rep.calibration.unwrap().s2;
        // every box contains g(1e-4) = (-(1e-4)^(1/3), 0), at about -0.37 s2
        let boxes = [
            ([-1.0, -1.0], [1.0, 1.0]),
            ([-1.0, -0.5], [0.1, 0.5]),
            ([-0.5, -0.2], [1.0, 0.9]),
            ([-0.9, -0.9], [-0.2, 0.9]),
            ([-0.6, -0.3], [-0.1, 0.1]),
        ];
        for (lo, hi) in boxes {
            let scale = |v: [f64; 2]| v.iter().map(|c| c * s2).collect::<Vec<_>>();
            let opts = ImplicitOptions {
                mode: UniquenessMode::ExistenceOnly,
                search: SearchRegion::Box(AxisBox::new(scale(lo), scale(hi)).unwrap()),
                ..ImplicitOptions::default()
            };
            let other = solve_implicit(&field, &[0.0], &[0.0, 0.0], &[vec![1e-4]], &opts).unwrap();
            assert!(distance(&other.samples[0].y, g) < 1e-8);
        }
    }

    #[test]
    fn quartic_branches_reachable() {
        let f = builtin("z2_minus_w4").unwrap().field;
        let z = [0.01, 0.0];
        // w^4 = z^2 = 1e-4 has roots ±0.1, ±0.1 i
        let mut found = Vec::new();
        for (cx, cy) in [(0.1, 0.0), (-0.1, 0.0), (0.0, 0.1), (0.0, -0.1)] {
            let opts = ImplicitOptions {
                mode: UniquenessMode::ExistenceOnly,
                search: SearchRegion::Box(AxisBox::cube(&[cx, cy], 0.05).unwrap()),
                ..ImplicitOptions::default()
            };
            let rep = solve_implicit(&f, &[0.0, 0.0], &[0.0, 0.0], &[z.to_vec()], &opts)
                .unwrap_or_else(|e| panic!("{e}"));
            let y = rep.samples[0].y.clone();
            assert!((norm(&y) - 0.1).abs() < 1e-9);
            found.push(y);
        }
        for i in 0..4 {
            for j in 0..i {
                assert!(distance(&found[i], &found[j]) > 0.1);
            }
        }
    }

    #[test]
    fn existence_mode_quartic() {
        let f = builtin("z2_minus_w4").unwrap().field;
        let xs = ring_samples(&[0.0, 0.0], &[0.1, 0.05, 0.01], 4);
        let opts = ImplicitOptions {
            mode: UniquenessMode::ExistenceOnly,
            deltas: vec![0.1, 0.05, 0.01],
            ..ImplicitOptions::default()
        };
        let rep = solve_implicit(&f, &[0.0, 0.0], &[0.0, 0.0], &xs, &opts).unwrap();
        assert_eq!(rep.samples.len(), 12);
        assert!((rep.x_radius - 0.125).abs() < 1e-15);
        for s in &rep.samples {
            assert!((norm(&s.y) - norm(&s.x).sqrt()).abs() < 1e-9);
            assert!(s.residual < 1e-10);
        }
        let sups: Vec<f64> = rep
            .continuity_profile
            .iter()
            .map(|p| p.sup_deviation)
            .collect();
        assert!(sups.windows(2).all(|w| w[1] <= w[0]));
        assert!(sups[2] < 0.12);
    }

    #[test]
    fn scalar_negative_and_positive_sides() {
        let f = builtin("circle_poly").unwrap().field;
        for x in [-0.1, -0.01] {
            assert_eq!(solve_slice_1d(&f, &[x], [-1.0, 1.0]).unwrap(), None);
        }
        for x in [0.1f64, 0.5] {
            let y = solve_slice_1d(&f, &[x], [-1.0, 1.0]).unwrap().unwrap();
            assert!((y - (2.0 * x - x * x).sqrt()).abs() < 1e-9);
        }
        let y = solve_slice_1d(&f, &[0.5], [0.0, 1.5]).unwrap().unwrap();
        assert!((y - 0.75f64.sqrt()).abs() < 1e-12);
        let id = VectorField::parse("x2 + 0*x1", 2, 1).unwrap();
        assert_eq!(solve_slice_1d(&id, &[3.0], [-1.0, 1.0]).unwrap(), Some(0.0));

        let opts = ImplicitOptions {
            mode: UniquenessMode::ExistenceOnly,
            ..ImplicitOptions::default()
        };
        let negative = [vec![-0.1], vec![-0.05], vec![-0.01]];
        assert_eq!(
            solve_implicit(&f, &[0.0], &[0.0], &negative, &opts),
            Err(Error::NoSolutionFound)
        );
    }

    #[test]
    fn profile_needs_samples() {
        let rep = ImplicitReport {
            x0: vec![0.0],
            y0: vec![0.0, 0.0],
            anchor_value: vec![0.0, 0.0],
            mode: UniquenessMode::Unique,
            calibration: None,
            x_radius: 1.0,
            samples: vec![],
            unsolved: vec![],
            continuity_profile: vec![],
        };
        assert_eq!(
            continuity_profile(&rep, &[0.1]),
            Err(Error::InsufficientSamples {
                delta: 0.1,
                found: 0
            })
        );
    }
}
