//! Angle lifts, winding numbers and local indices of planar maps.
//!
//! Angles are measured in turns (one full revolution = 1.0), so winding numbers come out
//! as exact small integers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_expr::VectorField;

/// Smallest admissible `|value|` on a loop.
pub const ZERO_TOLERANCE: f64 = 1e-14;
/// Guard band around half a turn inside which a step cannot be unwrapped.
pub const UNWRAP_GUARD: f64 = 1e-9;
const MAX_SAMPLES: usize = 1 << 20;

/// A sampled closed loop in `R^2 \ {0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSample {
    params: Vec<f64>,
    values: Vec<[f64; 2]>,
}

impl LoopSample {
    /// Validates a loop: params strictly increasing from 0 to 1, one value per param,
    /// first and last values within 1e-12, every value away from the origin.
    pub fn new(params: Vec<f64>, values: Vec<[f64; 2]>) -> Result<Self> {
        if params.len() != values.len() || params.len() < 2 {
            return Err(Error::Precondition(
                "loop needs matching params and values, at least 2".into(),
            ));
        }
        if params[0] != 0.0
            || *params.last().unwrap() != 1.0
            || params.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::Precondition(
                "loop params must increase strictly from 0 to 1".into(),
            ));
        }
        let (a, b) = (values[0], *values.last().unwrap());
        if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-12 {
            return Err(Error::Precondition("loop is not closed".into()));
        }
        if let Some(k) = values
            .iter()
            .position(|v| v[0].hypot(v[1]) < ZERO_TOLERANCE)
        {
            return Err(Error::ZeroOnLoop { t: params[k] });
        }
        Ok(Self { params, values })
    }

    /// Loop through `values` at uniform parameters; the last value must repeat the first.
    pub fn uniform(values: Vec<[f64; 2]>) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::Precondition("loop needs at least 2 values".into()));
        }
        let params = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
        Self::new(params, values)
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn min_modulus(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Pointwise complex product of two loops sampled at the same parameters.
    pub fn product(&self, other: &LoopSample) -> Result<LoopSample> {
        if self.params != other.params {
            return Err(Error::Precondition(
                "loops are sampled at different parameters".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]])
            .collect();
        LoopSample::new(self.params.clone(), values)
    }
}

/// Continuous lift of a loop's angle, in turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleLift {
    pub lift_values: Vec<f64>,
    /// Lift at t = 0, in `[0, 1)`.
    pub base: f64,
    pub winding: i64,
}

/// Samples `H(x0 + rho (cos 2 pi t, sin 2 pi t)) - H(x0)` at `t = k / samples`.
pub fn sample_circle_map(
    field: &VectorField,
    center: &[f64],
    radius: f64,
    samples: usize,
) -> Result<LoopSample> {
    if field.input_dim() != 2 || field.output_dim() != 2 {
        return Err(Error::Precondition(
            "circle maps need a planar field R^2 -> R^2".into(),
        ));
    }
    if center.len() != 2 {
        return Err(Error::Precondition("center must be a 2-vector".into()));
    }
    if samples < 8 {
        return Err(Error::Precondition(
            "at least 8 samples are required".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    let h0 = field.eval(center)?;
    let mut params = Vec::with_capacity(samples + 1);
    let mut values = Vec::with_capacity(samples + 1);
    for k in 0..samples {
        let t = k as f64 / samples as f64;
        let theta = std::f64::consts::TAU * t;
        let p = [
            center[0] + radius * theta.cos(),
            center[1] + radius * theta.sin(),
        ];
        let h = field.eval(&p)?;
        let v = [h[0] - h0[0], h[1] - h0[1]];
        if v[0].hypot(v[1]) < ZERO_TOLERANCE {
            return Err(Error::ZeroOnLoop { t });
        }
        params.push(t);
        values.push(v);
    }
    params.push(1.0);
    values.push(values[0]);
    LoopSample::new(params, values)
}

fn turns(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]) / std::f64::consts::TAU
}

/// Unwraps the loop's angle. Each step is taken as the representative of the raw angle
/// difference in `(-1/2, 1/2]`; steps within 1e-9 of half a turn are rejected.
pub fn angle_lift(lp: &LoopSample) -> Result<AngleLift> {
    let mut base = turns(lp.values[0]).rem_euclid(1.0);
    if base >= 1.0 {
        base = 0.0;
    }
    let mut lift = Vec::with_capacity(lp.values.len());
    lift.push(base);
    let mut prev_raw = turns(lp.values[0]);
    let mut current = base;
    for (index, v) in lp.values.iter().enumerate().skip(1) {
        let raw = turns(*v);
        let mut step = raw - prev_raw;
        step -= step.round();
        if (step.abs() - 0.5).abs() < UNWRAP_GUARD {
            return Err(Error::UnwrapAmbiguity { index: index - 1 });
        }
        current += step;
        lift.push(current);
        prev_raw = raw;
    }
    let total = current - base;
    let winding = total.round() as i64;
    if (total - winding as f64).abs() >= 1e-9 {
        return Err(Error::Numeric(format!(
            "lift total {total} is not an integer"
        )));
    }
    Ok(AngleLift {
        lift_values: lift,
        base,
        winding,
    })
}

/// The integer `lift(1) - lift(0)`; zero exactly when the sampled loop is classified
/// null homotopic.
pub fn winding_number(lift: &AngleLift) -> i64 {
    lift.winding
}

/// Winding of `H - H(x0)` on small circles around a critical point, stored as an
/// orientation sign plus a non-negative magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub center: Vec<f64>,
    pub radius: f64,
    pub index_magnitude: u64,
    pub sign: i8,
    pub samples_used: usize,
    pub min_modulus: f64,
    pub valid: bool,
}

impl IndexResult {
    pub fn winding(&self) -> i64 {
        self.sign as i64 * self.index_magnitude as i64
    }
}

/// Local index of a planar field at `center`, on the circle of radius `radius`.
///
/// Sampling starts at 64 points and doubles until the lift is valid and the winding
/// agrees across two consecutive levels.
pub fn local_index(field: &VectorField, center: &[f64], radius: f64) -> Result<IndexResult> {
    let mut samples = 64;
    let mut previous: Option<i64> = None;
    while samples <= MAX_SAMPLES {
        let lp = sample_circle_map(field, center, radius, samples)?;
        match angle_lift(&lp) {
            Ok(lift) => {
                if previous == Some(lift.winding) {
                    let w = lift.winding;
                    return Ok(IndexResult {
                        center: center.to_vec(),
                        radius,
                        index_magnitude: w.unsigned_abs(),
                        sign: w.signum() as i8,
                        samples_used: samples,
                        min_modulus: lp.min_modulus(),
                        valid: true,
                    });
                }
                previous = Some(lift.winding);
            }
            Err(Error::UnwrapAmbiguity { .. }) => previous = None,
            Err(e) => return Err(e),
        }
        samples *= 2;
    }
    Err(Error::NoConvergence {
        samples: MAX_SAMPLES,
    })
}

/// True when the local index is 1, i.e. the field is a homeomorphism from the component
/// around the point onto a small ball.
pub fn homeomorphism_verdict(result: &IndexResult) -> Result<bool> {
    if !result.valid || !(result.min_modulus > 0.0) {
        return Err(Error::InvalidResult);
    }
    Ok(result.index_magnitude == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::builtin;

    fn identity() -> VectorField {
        VectorField::parse("x1 ; x2", 2, 2).unwrap()
    }

    #[test]
    fn identity_samples_unit_directions() {
        let lp = sample_circle_map(&identity(), &[0.0, 0.0], 1.0, 8).unwrap();
        assert_eq!(lp.values().len(), 9);
        for (k, v) in lp.values().iter().take(8).enumerate() {
            let th = std::f64::consts::TAU * k as f64 / 8.0;
            assert!((v[0] - th.cos()).abs() < 1e-15 && (v[1] - th.sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn square_traverses_twice() {
        let f = builtin("z_pow_n:2").unwrap().field;
        let lp = sample_circle_map(&f, &[0.0, 0.0], 1.0, 8).unwrap();
        for (k, v) in lp.values().iter().take(8).enumerate() {
            let th = 2.0 * std::f64::consts::TAU * k as f64 / 8.0;
            assert!((v[0] - th.cos()).abs() < 1e-12 && (v[1] - th.sin()).abs() < 1e-12);
        }
        // 8 samples of z^2 step a quarter turn each: unwrap is fine
        assert_eq!(angle_lift(&lp).unwrap().winding, 2);
    }

    #[test]
    fn non_planar_rejected() {
        let f = builtin("circle_poly").unwrap().field;
        assert!(matches!(
            sample_circle_map(&f, &[0.0, 0.0], 1.0, 8),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lift_of_power_is_linear() {
        for n in 1..=4 {
            let f = builtin(&format!("z_pow_n:{n}")).unwrap().field;
            let lp = sample_circle_map(&f, &[0.0, 0.0], 1.0, 64).unwrap();
            let lift = angle_lift(&lp).unwrap();
            for (t, l) in lp.params().iter().zip(&lift.lift_values) {
                assert!((l - (n as f64 * t + lift.base)).abs() < 1e-12);
            }
            assert_eq!(winding_number(&lift), n);
        }
    }

    #[test]
    fn constant_loop_has_zero_winding() {
        let lp = LoopSample::uniform(vec![[1.0, 0.0]; 10]).unwrap();
        let lift = angle_lift(&lp).unwrap();
        assert!(lift.lift_values.iter().all(|v| *v == 0.0));
        assert_eq!(winding_number(&lift), 0);
    }

    #[test]
    fn conjugate_winds_backwards() {
        let f = VectorField::parse("x1 ; -x2", 2, 2).unwrap();
        let lp = sample_circle_map(&f, &[0.0, 0.0], 1.0, 16).unwrap();
        assert_eq!(winding_number(&angle_lift(&lp).unwrap()), -1);
    }

    #[test]
    fn half_turn_step_is_ambiguous() {
        let lp = LoopSample::uniform(vec![[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(
            angle_lift(&lp).unwrap_err(),
            Error::UnwrapAmbiguity { index: 0 }
        );
    }

    #[test]
    fn zero_on_loop() {
        // z^2 - 1 takes its center value H(1, 0) = 0 again at (-1, 0)
        let f = VectorField::parse("x1^2 - x2^2 - 1 ; 2*x1*x2", 2, 2).unwrap();
        assert!(matches!(
            sample_circle_map(&f, &[1.0, 0.0], 2.0, 8),
            Err(Error::ZeroOnLoop { .. })
        ));
    }

    #[test]
    fn local_index_of_identity() {
        for c in [[0.0, 0.0], [3.0, -1.5]] {
            let r = local_index(&identity(), &c, 0.25).unwrap();
            assert_eq!((r.index_magnitude, r.sign), (1, 1));
            assert!(homeomorphism_verdict(&r).unwrap());
        }
    }

    #[test]
    fn verdicts() {
        let sq = local_index(&builtin("z_pow_n:2").unwrap().field, &[0.0, 0.0], 0.5).unwrap();
        assert!(!homeomorphism_verdict(&sq).unwrap());
        let cube = local_index(&builtin("z_abs2").unwrap().field, &[0.0, 0.0], 0.5).unwrap();
        assert!(homeomorphism_verdict(&cube).unwrap());
        let mut bad = cube.clone();
        bad.valid = false;
        assert_eq!(
            homeomorphism_verdict(&bad).unwrap_err(),
            Error::InvalidResult
        );
    }

    #[test]
    fn constant_field_zero_on_loop() {
        let f = VectorField::parse("1 ; 2", 2, 2).unwrap();
        assert!(matches!(
            local_index(&f, &[0.0, 0.0], 0.5),
            Err(Error::ZeroOnLoop { .. })
        ));
    }
}
