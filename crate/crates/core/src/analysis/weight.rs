//! Weight transported along characteristics.
//!
//! Radial profile, with `s = (r - r0) / sigma` and `q(s) = s^2 / (1 + s)`:
//!
//! ```text
//! phi(r) = 1                 r <= r0
//!        = exp(-q(s))        r >  r0
//! ```
//!
//! `q'(0) = 0` makes `phi` C1 at `r0`; for large `s` it decays like
//! `exp(-(r - r0) / sigma)`. Since `0 <= q' < 1` and `|q'^2 - q''| <= 2`,
//! `|phi^(l)| <= 2 sigma^-l phi` for `l = 1, 2`.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::velocity::VelocityField;

/// `phi` as a function of `s = (r - r0) / sigma`.
pub fn profile(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else {
        (-s * s / (1.0 + s)).exp()
    }
}

/// `(phi, sigma phi', sigma^2 phi'')` in the scaled variable.
pub fn profile_derivatives(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    let p = profile(s);
    let q1 = s * (s + 2.0) / ((1.0 + s) * (1.0 + s));
    let q2 = 2.0 / (1.0 + s).powi(3);
    (p, -q1 * p, (q1 * q1 - q2) * p)
}

#[derive(Debug, Clone)]
pub struct WeightFunction {
    center: Point,
    r0: f64,
    k: f64,
    sigma: f64,
    velocity: VelocityField,
}

impl WeightFunction {
    /// `sigma = k sqrt(h)`.
    pub fn new(center: Point, r0: f64, k: f64, h: f64, velocity: VelocityField) -> Result<Self> {
        if !(r0 > 0.0) || !(k > 1.0) || !(h > 0.0) {
            return Err(Error::InvalidArgument(format!("weight needs r0 > 0, K > 1, h > 0 (got {r0}, {k}, {h})")));
        }
        Ok(Self { center, r0, k, sigma: k * h.sqrt(), velocity })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn velocity(&self) -> &VelocityField {
        &self.velocity
    }

    /// Radial profile `phi(r)`.
    pub fn radial(&self, r: f64) -> f64 {
        profile((r - self.r0) / self.sigma)
    }

    /// Weight at the characteristic foot `y = X(x, t)`.
    pub fn eval_at_foot(&self, y: Point) -> f64 {
        self.radial((y[0] - self.center[0]).hypot(y[1] - self.center[1]))
    }

    /// `varpi(x, t) = phi(|X(x, t) - x0|)`.
    pub fn eval(&self, x: Point, t: f64) -> Result<f64> {
        Ok(self.eval_at_foot(self.velocity.backward_flow(x, t)?))
    }

    /// Largest `|d^l phi / dr^l| sigma^l / phi` over `samples` radii in
    /// `(r0, r0 + 12 sigma]`, estimated by central differences.
    pub fn fitted_derivative_constant(&self, order: u32, samples: usize) -> f64 {
        let d = 1e-4 * self.sigma;
        (1..=samples)
            .map(|i| {
                let r = self.r0 + 12.0 * self.sigma * i as f64 / samples as f64;
                let (m, c, p) = (self.radial(r - d), self.radial(r), self.radial(r + d));
                let deriv = match order {
                    1 => (p - m) / (2.0 * d),
                    _ => (p - 2.0 * c + m) / (d * d),
                };
                deriv.abs() * self.sigma.powi(order as i32) / c
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weight(beta: VelocityField) -> WeightFunction {
        WeightFunction::new([0.5, 0.0], 0.2, 2.0, 2.0 * std::f64::consts::PI / 80.0, beta).unwrap()
    }

    #[test]
    fn profile_shape() {
        let w = weight(VelocityField::rotation());
        assert_eq!(w.radial(0.0), 1.0);
        assert_eq!(w.radial(0.2), 1.0);
        assert!((w.radial(0.2 + w.sigma()) - (-0.5f64).exp()).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..400 {
            let r = 0.01 * i as f64;
            let v = w.radial(r);
            assert!(v > 0.0 && v <= prev);
            prev = v;
        }
        for m in 3..12 {
            let r = 0.2 + m as f64 * w.sigma();
            let ratio = w.radial(r) / w.radial(r + w.sigma());
            assert!(ratio >= 0.5f64.exp() && ratio <= 1.5f64.exp(), "m={m}: {ratio}");
        }
    }

    #[test]
    fn derivative_bounds() {
        let w = weight(VelocityField::rotation());
        assert!(w.fitted_derivative_constant(1, 200) <= 1.0 + 1e-6);
        let c2 = w.fitted_derivative_constant(2, 200);
        assert!(c2 <= 2.0 + 1e-4, "{c2}");
        // analytic form agrees with differences
        let s = 0.7;
        let (p, d1, d2) = profile_derivatives(s);
        let e = 1e-5;
        assert!(((profile(s + e) - profile(s - e)) / (2.0 * e) - d1).abs() < 1e-8);
        assert!(((profile(s + e) - 2.0 * p + profile(s - e)) / (e * e) - d2).abs() < 1e-4);
    }

    #[test]
    fn rides_the_characteristics() {
        let w = weight(VelocityField::constant([1.0, 0.0]));
        assert_eq!(w.eval([0.5 + 0.3, 0.0], 0.3).unwrap(), 1.0);
        assert_eq!(w.eval([0.55, 0.05], 0.0).unwrap(), 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for beta in [VelocityField::rotation(), VelocityField::constant([1.0, 0.5])] {
            let w = weight(beta.clone());
            let eps = 1e-6;
            for _ in 0..100 {
                let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let t = rng.gen_range(0.0..3.0);
                let f = |x: Point, t: f64| w.eval(x, t).unwrap();
                let b = beta.eval(x, t);
                let dt = (f(x, t + eps) - f(x, t - eps)) / (2.0 * eps);
                let dx = (f([x[0] + eps, x[1]], t) - f([x[0] - eps, x[1]], t)) / (2.0 * eps);
                let dy = (f([x[0], x[1] + eps], t) - f([x[0], x[1] - eps], t)) / (2.0 * eps);
                assert!((dt + b[0] * dx + b[1] * dy).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn custom_velocity_is_unsupported() {
        let w = weight(VelocityField::custom(|x, _| x, false));
        assert!(matches!(w.eval([0.0, 0.0], 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn invalid_parameters() {
        assert!(WeightFunction::new([0.0; 2], 0.0, 2.0, 0.1, VelocityField::zero()).is_err());
        assert!(WeightFunction::new([0.0; 2], 0.1, 1.0, 0.1, VelocityField::zero()).is_err());
    }
}
