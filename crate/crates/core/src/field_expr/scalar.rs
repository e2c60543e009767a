use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Number type the expression evaluator runs over: plain `f64` for values, [`Dual`] for
/// forward-mode derivatives.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn powi(self, n: i32) -> Self;
    fn abs(self) -> Result<Self>;
    fn sqrt(self) -> Result<Self>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(self) -> f64 {
        self
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }

    fn abs(self) -> Result<Self> {
        Ok(f64::abs(self))
    }

    fn sqrt(self) -> Result<Self> {
        if self < 0.0 {
            return Err(Error::Numeric(format!("sqrt of negative value {self}")));
        }
        Ok(f64::sqrt(self))
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn exp(self) -> Self {
        f64::exp(self)
    }
}

/// First-order dual number `re + eps * ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    pub fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        Dual::new(
            self.re / o.re,
            (self.eps * o.re - self.re * o.eps) / (o.re * o.re),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual::new(v, 0.0)
    }

    fn value(self) -> f64 {
        self.re
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Dual::new(1.0, 0.0),
            _ => Dual::new(self.re.powi(n), n as f64 * self.re.powi(n - 1) * self.eps),
        }
    }

    fn abs(self) -> Result<Self> {
        if self.re == 0.0 {
            return Err(Error::Numeric("abs is not differentiable at 0".into()));
        }
        Ok(Dual::new(self.re.abs(), self.re.signum() * self.eps))
    }

    fn sqrt(self) -> Result<Self> {
        if self.re <= 0.0 {
            return Err(Error::Numeric(format!(
                "sqrt is not differentiable at {}",
                self.re
            )));
        }
        let s = self.re.sqrt();
        Ok(Dual::new(s, self.eps / (2.0 * s)))
    }

    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.re.cos() * self.eps)
    }

    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -self.re.sin() * self.eps)
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, e * self.eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x * x;
        assert_eq!(y, Dual::new(27.0, 27.0));
        assert_eq!(x.powi(3), y);
    }

    #[test]
    fn dual_kinks_rejected() {
        assert!(Dual::variable(0.0).abs().is_err());
        assert!(Dual::variable(0.0).sqrt().is_err());
        assert!(Scalar::sqrt(-1.0f64).is_err());
        assert_eq!(Scalar::sqrt(0.0f64).unwrap(), 0.0);
    }
}
