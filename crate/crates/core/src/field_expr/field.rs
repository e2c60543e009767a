use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ast::{Expr, FieldAst};
use super::scalar::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::geometry::{determinant, norm, AxisBox, Determinant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Forward-mode dual numbers through the expression tree.
    #[default]
    Automatic,
    /// A closed-form Jacobian supplied with the field; expression fields fall back to
    /// automatic mode, which is already exact on them.
    Analytic,
    /// Central differences with step `1e-6 * (1 + |x|)`.
    FiniteDifference,
}

type EvalFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Send + Sync;

/// A map given by Rust closures instead of an expression.
#[derive(Clone)]
pub struct CustomField {
    input_dim: usize,
    output_dim: usize,
    eval: Arc<EvalFn>,
    jacobian: Option<Arc<JacFn>>,
}

#[derive(Clone)]
enum Source {
    Expr(FieldAst),
    /// `H(r e) = (r^3 - 3r^2 + 3r + g(e) r^2) e` on `R^n`.
    Spherical {
        g: Expr,
        n: usize,
    },
    /// `y -> parent(prefix, y)`.
    Slice {
        parent: Arc<VectorField>,
        prefix: Vec<f64>,
    },
    Custom(CustomField),
}

/// An evaluable map `R^k -> R^m` restricted to a domain box.
#[derive(Clone)]
pub struct VectorField {
    source: Source,
    domain: AxisBox,
    mode: JacobianMode,
    analytic_det: Option<Expr>,
    label: String,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("label", &self.label)
            .field("input_dim", &self.input_dim())
            .field("output_dim", &self.output_dim())
            .field("mode", &self.mode)
            .finish()
    }
}

impl VectorField {
    pub fn from_ast(ast: FieldAst) -> Self {
        let label = ast.to_string();
        Self {
            domain: AxisBox::unbounded(ast.input_dim),
            source: Source::Expr(ast),
            mode: JacobianMode::Automatic,
            analytic_det: None,
            label,
        }
    }

    /// Parses and wraps an expression field.
    pub fn parse(src: &str, input_dim: usize, output_dim: usize) -> Result<Self> {
        Ok(Self::from_ast(super::parse_field(
            src, input_dim, output_dim,
        )?))
    }

    pub fn custom<F>(input_dim: usize, output_dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            source: Source::Custom(CustomField {
                input_dim,
                output_dim,
                eval: Arc::new(move |x| Ok(eval(x))),
                jacobian: None,
            }),
            domain: AxisBox::unbounded(input_dim),
            mode: JacobianMode::FiniteDifference,
            analytic_det: None,
            label: "custom".into(),
        }
    }

    /// Closure field with a closed-form Jacobian (analytic mode).
    pub fn custom_with_jacobian<F, J>(
        input_dim: usize,
        output_dim: usize,
        eval: F,
        jacobian: J,
    ) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        J: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let mut f = Self::custom(input_dim, output_dim, eval);
        if let Source::Custom(c) = &mut f.source {
            c.jacobian = Some(Arc::new(move |x| Ok(jacobian(x))));
        }
        f.mode = JacobianMode::Analytic;
        f
    }

    pub(crate) fn spherical(g: Expr, n: usize) -> Self {
        Self {
            source: Source::Spherical { g, n },
            domain: AxisBox::unbounded(n),
            mode: JacobianMode::Automatic,
            analytic_det: None,
            label: "spherical".into(),
        }
    }

    /// The restriction `y -> self(prefix, y)` onto the trailing coordinates.
    pub fn slice(&self, prefix: &[f64]) -> Result<Self> {
        if prefix.len() >= self.input_dim() {
            return Err(Error::Precondition(format!(
                "slice prefix of length {} leaves no free variables in a {}-input field",
                prefix.len(),
                self.input_dim()
            )));
        }
        let free = self.input_dim() - prefix.len();
        let domain = AxisBox {
            lo: self.domain.lo[prefix.len()..].to_vec(),
            hi: self.domain.hi[prefix.len()..].to_vec(),
        };
        debug_assert_eq!(domain.dim(), free);
        Ok(Self {
            label: format!("{} | x = {prefix:?}", self.label),
            source: Source::Slice {
                parent: Arc::new(self.clone()),
                prefix: prefix.to_vec(),
            },
            domain,
            mode: self.mode,
            analytic_det: None,
        })
    }

    pub fn with_domain(mut self, domain: AxisBox) -> Result<Self> {
        if domain.dim() != self.input_dim() {
            return Err(Error::Precondition(
                "domain dimension differs from input dimension".into(),
            ));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: JacobianMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn with_analytic_det(mut self, det: Expr) -> Self {
        self.analytic_det = Some(det);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &AxisBox {
        &self.domain
    }

    pub fn mode(&self) -> JacobianMode {
        self.mode
    }

    pub fn ast(&self) -> Option<&FieldAst> {
        match &self.source {
            Source::Expr(a) => Some(a),
            _ => None,
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.source {
            Source::Expr(a) => a.input_dim,
            Source::Spherical { n, .. } => *n,
            Source::Slice { parent, prefix } => parent.input_dim() - prefix.len(),
            Source::Custom(c) => c.input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match &self.source {
            Source::Expr(a) => a.output_dim,
            Source::Spherical { n, .. } => *n,
            Source::Slice { parent, .. } => parent.output_dim(),
            Source::Custom(c) => c.output_dim,
        }
    }

    pub fn is_square(&self) -> bool {
        self.input_dim() == self.output_dim()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, field expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        if !self.domain.contains(x) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        Ok(())
    }

    /// `H(x)`. Pure; equal inputs give bitwise-equal outputs.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let out = self.eval_unchecked(x)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value at {x:?}")));
        }
        Ok(out)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.source {
            Source::Expr(a) => a.eval(x),
            Source::Spherical { g, .. } => spherical_eval(g, x),
            Source::Slice { parent, prefix } => {
                let mut full = prefix.clone();
                full.extend_from_slice(x);
                parent.eval(&full)
            }
            Source::Custom(c) => (c.eval)(x),
        }
    }

    /// `|H(x) - y|`.
    pub fn residual(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let v = self.eval(x)?;
        Ok(v.iter()
            .zip(y)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    /// `m x k` Jacobian in the field's configured mode.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let jac = match (&self.source, self.mode) {
            (_, JacobianMode::FiniteDifference) => self.jacobian_fd(x)?,
            (Source::Custom(c), _) => match &c.jacobian {
                Some(j) => j(x)?,
                None => self.jacobian_fd(x)?,
            },
            (Source::Slice { parent, prefix }, _) => {
                let mut full = prefix.clone();
                full.extend_from_slice(x);
                let pj = parent.jacobian(&full)?;
                pj.columns(prefix.len(), x.len()).into_owned()
            }
            (Source::Expr(a), _) => self.jacobian_dual(x, |v| a.eval(v))?,
            (Source::Spherical { g, .. }, _) => {
                if x.iter().all(|v| *v == 0.0) {
                    // removable point: H(x) = 3x + O(|x|^2)
                    DMatrix::identity(x.len(), x.len()) * 3.0
                } else {
                    self.jacobian_dual(x, |v| spherical_eval(g, v))?
                }
            }
        };
        if jac.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite Jacobian at {x:?}")));
        }
        Ok(jac)
    }

    fn jacobian_dual(
        &self,
        x: &[f64],
        f: impl Fn(&[Dual]) -> Result<Vec<Dual>>,
    ) -> Result<DMatrix<f64>> {
        let (k, m) = (x.len(), self.output_dim());
        let mut jac = DMatrix::zeros(m, k);
        let mut vars: Vec<Dual> = x.iter().map(|v| Dual::constant(*v)).collect();
        for j in 0..k {
            vars[j].eps = 1.0;
            let out = f(&vars)?;
            for (i, d) in out.iter().enumerate() {
                jac[(i, j)] = d.eps;
            }
            vars[j].eps = 0.0;
        }
        Ok(jac)
    }

    /// Central-difference Jacobian, step `1e-6 * (1 + |x|)`.
    pub fn jacobian_fd(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let (k, m) = (x.len(), self.output_dim());
        let h = 1e-6 * (1.0 + norm(x));
        let mut jac = DMatrix::zeros(m, k);
        let mut xp = x.to_vec();
        for j in 0..k {
            xp[j] = x[j] + h;
            let fp = self.eval_unchecked(&xp)?;
            xp[j] = x[j] - h;
            let fm = self.eval_unchecked(&xp)?;
            xp[j] = x[j];
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// Determinant of the square Jacobian.
    pub fn jacobian_det(&self, x: &[f64]) -> Result<Determinant> {
        if !self.is_square() {
            return Err(Error::Precondition(
                "determinant needs a square Jacobian".into(),
            ));
        }
        Ok(determinant(&self.jacobian(x)?))
    }

    /// Closed-form determinant attached by a constructor, if any.
    pub fn analytic_det(&self, x: &[f64]) -> Option<Result<f64>> {
        self.analytic_det.as_ref().map(|e| e.eval(x))
    }
}

/// Cartesian form `H(x) = (r^2 - 3r + 3 + g(x/r) r) x`, with `H(0) = 0`.
fn spherical_eval<S: Scalar>(g: &Expr, x: &[S]) -> Result<Vec<S>> {
    let r2 = x.iter().fold(S::constant(0.0), |acc, v| acc + *v * *v);
    if r2.value() == 0.0 {
        return Ok(x.to_vec());
    }
    let r = r2.sqrt()?;
    let e: Vec<S> = x.iter().map(|v| *v / r).collect();
    let ge = g.eval(&e)?;
    let factor = r2 - S::constant(3.0) * r + S::constant(3.0) + ge * r;
    Ok(x.iter().map(|v| factor * *v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> VectorField {
        VectorField::parse("x1^2 - x2^2 ; 2*x1*x2", 2, 2).unwrap()
    }

    #[test]
    fn eval_examples() {
        let id = VectorField::parse("x1 ; x2", 2, 2).unwrap();
        assert_eq!(id.eval(&[0.3, -0.2]).unwrap(), vec![0.3, -0.2]);
        assert_eq!(sq().eval(&[1.0, 1.0]).unwrap(), vec![0.0, 2.0]);
        let circle = VectorField::parse("(x1-1)^2 + x2^2 - 1", 2, 1).unwrap();
        assert_eq!(circle.eval(&[0.0, 0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn eval_errors() {
        let f = VectorField::parse("sqrt(x1)", 1, 1).unwrap();
        assert!(matches!(f.eval(&[-1.0]), Err(Error::Numeric(_))));
        let f = VectorField::parse("1/x1", 1, 1).unwrap();
        assert!(matches!(f.eval(&[0.0]), Err(Error::Numeric(_))));
        let boxed = sq()
            .with_domain(AxisBox::uniform(2, -1.0, 1.0).unwrap())
            .unwrap();
        assert!(matches!(boxed.eval(&[2.0, 0.0]), Err(Error::Domain { .. })));
    }

    #[test]
    fn jacobian_examples() {
        let j = sq().jacobian(&[1.0, 1.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[2.0, -2.0, 2.0, 2.0]));
        assert_eq!(sq().jacobian_det(&[1.0, 1.0]).unwrap().value, 8.0);
        let id = VectorField::parse("x1 ; x2 ; x3", 3, 3).unwrap();
        assert_eq!(
            id.jacobian(&[0.1, 0.2, 0.3]).unwrap(),
            DMatrix::identity(3, 3)
        );
        assert_eq!(id.jacobian_det(&[5.0, -1.0, 2.0]).unwrap().value, 1.0);
    }

    #[test]
    fn fold_determinant() {
        let f = VectorField::parse("x1^3 + x2*x1 ; x2", 2, 2).unwrap();
        for &(x, z) in &[(0.3, -0.7), (1.2, 0.4), (-0.5, 2.0)] {
            let d = f.jacobian_det(&[x, z]).unwrap().value;
            assert!((d - (3.0 * x * x + z)).abs() < 1e-12);
        }
        let f = VectorField::parse("x1^3 + x2^2*x1 ; x2", 2, 2).unwrap();
        assert!(f.jacobian_det(&[0.0, 0.0]).unwrap().near_zero);
    }

    #[test]
    fn kinks_raise_numeric_error() {
        let f = VectorField::parse("abs(x1)", 1, 1).unwrap();
        assert!(matches!(f.jacobian(&[0.0]), Err(Error::Numeric(_))));
        assert_eq!(f.jacobian(&[-2.0]).unwrap()[(0, 0)], -1.0);
    }

    #[test]
    fn finite_difference_mode_agrees() {
        let f = VectorField::parse("sin(x1)*exp(x2) ; x1^3 - cos(x2)", 2, 2).unwrap();
        let fd = f.clone().with_mode(JacobianMode::FiniteDifference);
        let x = [0.4, -0.3];
        let (a, b) = (f.jacobian(&x).unwrap(), fd.jacobian(&x).unwrap());
        assert!((a - b).abs().max() < 1e-8);
    }

    #[test]
    fn slice_restricts_trailing_coordinates() {
        let f = VectorField::parse("x2^2 + x1*x2 ; x3 - x1", 3, 2).unwrap();
        let s = f.slice(&[0.5]).unwrap();
        assert_eq!(s.input_dim(), 2);
        assert_eq!(s.eval(&[1.0, 2.0]).unwrap(), vec![1.5, 1.5]);
        let j = s.jacobian(&[1.0, 2.0]).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[2.5, 0.0, 0.0, 1.0]));
    }
}
