//! Named example fields and constructions of maps with prescribed critical sets.

use std::ops::{Add, Div, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_expr::{parse_field, Expr, FieldAst, Func, VectorField};
use crate::geometry::sphere_points;

/// A fact about a gallery field that the test suite checks against computed results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnownFact {
    /// Local index (magnitude) of the field at the origin.
    LocalIndexAtOrigin(u32),
    /// Local index of the anchor slice `y -> F(0, y)` at `y = 0`.
    SliceIndexAtOrigin(u32),
    CriticalSet(String),
    /// Lower bound on `|det J|` over the plane.
    MinAbsDet(f64),
    GlobalDiffeomorphism(bool),
    /// `c` such that `|F_t(x, y)| >= c |x|^3` on `|y| = 2x^2` for small `x != 0`.
    HomotopyWallCoefficient(f64),
    /// `F(x, y) = F(0, 0)` has no solution for `x < 0`.
    NoSolutionForNegativeX,
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub id: String,
    pub field: VectorField,
    pub known_facts: Vec<KnownFact>,
}

pub const GALLERY_IDS: &[&str] = &[
    "z_pow_n:<k>",
    "z_abs2",
    "circle_poly",
    "z2_minus_w4",
    "belitskii_kerner",
    "hadamard_demo",
];

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Real and imaginary parts of `(x1 + i x2)^k` as polynomial text.
pub fn complex_power_source(k: u32) -> String {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for j in 0..=k {
        let c = binomial(k, j);
        let mono = match (k - j, j) {
            (0, 0) => "1".to_string(),
            (a, 0) => format!("x1^{a}"),
            (0, b) => format!("x2^{b}"),
            (a, b) => format!("x1^{a}*x2^{b}"),
        };
        // i^j cycles through 1, i, -1, -i
        let (target, negative) = match j % 4 {
            0 => (&mut re, false),
            1 => (&mut im, false),
            2 => (&mut re, true),
            _ => (&mut im, true),
        };
        target.push((negative, format!("{c}*{mono}")));
    }
    let join = |terms: &[(bool, String)]| -> String {
        let mut s = String::new();
        for (i, (neg, t)) in terms.iter().enumerate() {
            match (i, neg) {
                (0, true) => s.push_str(&format!("-{t}")),
                (0, false) => s.push_str(t),
                (_, true) => s.push_str(&format!(" - {t}")),
                (_, false) => s.push_str(&format!(" + {t}")),
            }
        }
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    };
    format!("{} ; {}", join(&re), join(&im))
}

/// Looks up a named example field.
pub fn builtin(id: &str) -> Result<GalleryEntry> {
    let parsed = |src: &str, i: usize, o: usize| -> Result<VectorField> {
        Ok(VectorField::parse(src, i, o)?.with_label(id))
    };
    let (field, known_facts) = if let Some(k) = id.strip_prefix("z_pow_n:") {
        let k: u32 = k
            .parse()
            .ok()
            .filter(|k| (1..=64).contains(k))
            .ok_or_else(|| Error::UnknownGalleryId(id.to_string()))?;
        let critical = if k == 1 { "empty" } else { "origin" };
        (
            parsed(&complex_power_source(k), 2, 2)?,
            vec![
                KnownFact::LocalIndexAtOrigin(k),
                KnownFact::CriticalSet(critical.into()),
            ],
        )
    } else {
        match id {
            "z_abs2" => (
                parsed("x1*(x1^2 + x2^2) ; x2*(x1^2 + x2^2)", 2, 2)?,
                vec![
                    KnownFact::LocalIndexAtOrigin(1),
                    KnownFact::CriticalSet("origin".into()),
                    KnownFact::GlobalDiffeomorphism(false),
                ],
            ),
            "circle_poly" => (
                parsed("(x1 - 1)^2 + x2^2 - 1", 2, 1)?,
                vec![KnownFact::NoSolutionForNegativeX],
            ),
            "z2_minus_w4" => (
                parsed(
                    "x1^2 - x2^2 - (x3^4 - 6*x3^2*x4^2 + x4^4) ; 2*x1*x2 - (4*x3^3*x4 - 4*x3*x4^3)",
                    4,
                    2,
                )?,
                vec![KnownFact::SliceIndexAtOrigin(4)],
            ),
            "belitskii_kerner" => (
                parsed("x2^2 + x1*x2 - x1^3 ; x3^2 + x1*x3 - x1^3", 3, 2)?,
                vec![KnownFact::HomotopyWallCoefficient(0.1)],
            ),
            "hadamard_demo" => (
                parsed("2*x1 + 0.5*sin(x2) ; 2*x2 + 0.5*sin(x1)", 2, 2)?,
                vec![
                    KnownFact::MinAbsDet(3.75),
                    KnownFact::GlobalDiffeomorphism(true),
                    KnownFact::CriticalSet("empty".into()),
                ],
            ),
            _ => return Err(Error::UnknownGalleryId(id.to_string())),
        }
    };
    Ok(GalleryEntry {
        id: id.to_string(),
        field,
        known_facts,
    })
}

/// The homotopy `F_t(x, y) = (t y1^2 + x y1 - t x^3, t y2^2 + x y2 - t x^3)` joining the
/// dilation `y -> x y` (t = 0) to the Belitskii-Kerner map (t = 1).
pub fn belitskii_kerner_family(t: f64) -> Result<VectorField> {
    let src = format!("{t}*x2^2 + x1*x2 - {t}*x1^3 ; {t}*x3^2 + x1*x3 - {t}*x1^3");
    Ok(VectorField::parse(&src, 3, 2)?.with_label(format!("belitskii_kerner_t={t}")))
}

/// The same family with `t` as an extra leading input: `(t, x, y1, y2) -> F_t(x, y)`.
pub fn belitskii_kerner_homotopy() -> Result<VectorField> {
    let src = "x1*x3^2 + x2*x3 - x1*x2^3 ; x1*x4^2 + x2*x4 - x1*x2^3";
    Ok(VectorField::parse(src, 4, 2)?.with_label("belitskii_kerner_homotopy"))
}

fn check_scalar(g: &FieldAst) -> Result<()> {
    if g.output_dim != 1 {
        return Err(Error::Precondition(
            "bump function must be scalar-valued".into(),
        ));
    }
    Ok(())
}

fn check_nonnegative(g: &Expr, points: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    for p in points {
        let v = g.eval(&p)?;
        if v < 0.0 {
            return Err(Error::NegativeBump { at: p, value: v });
        }
    }
    Ok(())
}

/// `H_g(x, z) = (x^3 + g(z) x, z)` on `R x R^(n-1)`, with critical set `{0} x g^-1(0)`.
///
/// `g` is sampled on `[-2, 2]^(n-1)` and must be non-negative there. The field carries
/// the closed-form determinant `3x^2 + g(z)`.
pub fn planar_critical_line(g: &FieldAst) -> Result<VectorField> {
    check_scalar(g)?;
    let k = g.input_dim;
    let per_axis = ((4096f64).powf(1.0 / k as f64).floor() as usize).max(2);
    let total = per_axis.pow(k as u32);
    let grid = (0..total).map(|flat| {
        let mut rem = flat;
        let mut p = vec![0.0; k];
        for slot in p.iter_mut().rev() {
            *slot = -2.0 + 4.0 * (rem % per_axis) as f64 / (per_axis - 1) as f64;
            rem /= per_axis;
        }
        p
    });
    check_nonnegative(&g.exprs[0], grid)?;

    let shifted = g.exprs[0].map_vars(&|i| i + 1);
    let x = Expr::var(0);
    let mut exprs = vec![x.clone().pow(3).add(shifted.clone().mul(x.clone()))];
    exprs.extend((1..=k).map(Expr::var));
    let det = Expr::c(3.0).mul(x.pow(2)).add(shifted);
    Ok(VectorField::from_ast(FieldAst::new(k + 1, exprs)?)
        .with_analytic_det(det)
        .with_label("planar_critical_line"))
}

/// The radial field `H_g(r e) = (r^3 - 3r^2 + 3r + g(e) r^2) e` on `R^n`, whose critical
/// set is `{e on the unit sphere : g(e) = 0}`.
///
/// Evaluated in Cartesian form `(r^2 - 3r + 3 + g(x/r) r) x`; `H(0) = 0` with Jacobian `3 I`.
/// Carries the closed-form determinant
/// `(3r^2 - 6r + 3 + 2 g(e) r) (r^2 - 3r + 3 + g(e) r)^(n-1)`, defined away from 0.
pub fn spherical_critical_set(g: &FieldAst, n: usize) -> Result<VectorField> {
    check_scalar(g)?;
    if n < 2 {
        return Err(Error::Precondition(
            "spherical construction needs n >= 2".into(),
        ));
    }
    if g.input_dim != n {
        return Err(Error::Precondition(format!(
            "g has {} inputs, expected {n}",
            g.input_dim
        )));
    }
    let center = vec![0.0; n];
    check_nonnegative(&g.exprs[0], sphere_points(&center, 1.0, 2000))?;

    let r2 = (0..n)
        .map(|i| Expr::var(i).pow(2))
        .reduce(Expr::add)
        .expect("n >= 2");
    let r = Expr::call(Func::Sqrt, r2.clone());
    let e: Vec<Expr> = (0..n).map(|i| Expr::var(i).div(r.clone())).collect();
    let ge = g.exprs[0].substitute(&e);
    let radial = Expr::c(3.0)
        .mul(r2.clone())
        .sub(Expr::c(6.0).mul(r.clone()))
        .add(Expr::c(3.0))
        .add(Expr::c(2.0).mul(ge.clone()).mul(r.clone()));
    let tangential = r2
        .sub(Expr::c(3.0).mul(r.clone()))
        .add(Expr::c(3.0))
        .add(ge.mul(r));
    let det = radial.mul(tangential.pow(n as i32 - 1));
    Ok(VectorField::spherical(g.exprs[0].clone(), n)
        .with_analytic_det(det)
        .with_label("spherical_critical_set"))
}

/// `g(z) = prod_i |z - p_i|^2`: a non-negative polynomial vanishing exactly on `points`.
/// The empty product is the constant 1.
pub fn finite_zero_bump(dim: usize, points: &[Vec<f64>]) -> Result<FieldAst> {
    if dim == 0 {
        return Err(Error::Precondition(
            "bump dimension must be positive".into(),
        ));
    }
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Precondition(format!(
                "point {i} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        if points[..i].iter().any(|q| q == p) {
            return Err(Error::DuplicatePoint(i));
        }
    }
    let factor = |p: &Vec<f64>| -> Expr {
        p.iter()
            .enumerate()
            .map(|(j, c)| Expr::var(j).sub(Expr::c(*c)).pow(2))
            .reduce(Expr::add)
            .expect("dim >= 1")
    };
    let expr = points
        .iter()
        .map(factor)
        .reduce(Expr::mul)
        .unwrap_or(Expr::Const(1.0));
    FieldAst::new(dim, vec![expr])
}

/// Convenience: parse a scalar `g` for the constructions above.
pub fn bump_from_source(src: &str, dim: usize) -> Result<FieldAst> {
    parse_field(src, dim, 1)
}
