//! Fractional powers `A^theta` of `A = -Delta + 1` and the heat semigroup
//! `exp(-A lambda)`.
//!
//! Two independent realizations are provided: the diagonal functional calculus
//! on the sine basis, and the semigroup integral
//!
//! ```text
//! A^theta u = 1/Gamma(-theta) * int_0^inf lambda^(-theta-1) (exp(-A lambda) - 1) u dlambda
//! ```
//!
//! discretized on log-uniform panels, with the two truncated tails of the
//! integral evaluated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::SpectralField;
use crate::scalar::{count, lit, Real};
use crate::special::gamma;

/// Exponent `theta` of `(-Delta + 1)^theta`, restricted to `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalPower<T: Real> {
    theta: T,
}

impl<T: Real> FractionalPower<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !(theta.abs() <= T::one()) {
            return Err(invalid("theta", format!("|theta| must be <= 1, got {theta}")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// Spectral symbol `(1 + mu)^theta`.
    pub fn symbol(&self, mu: T) -> T {
        (T::one() + mu).powf(self.theta)
    }

    pub fn apply(&self, field: &SpectralField<T>) -> SpectralField<T> {
        field.apply_symbol(|mu| self.symbol(mu))
    }
}

/// `c_k -> (1 + mu_k)^theta c_k`.
pub fn apply_spectral<T: Real>(field: &SpectralField<T>, theta: T) -> Result<SpectralField<T>> {
    Ok(FractionalPower::new(theta)?.apply(field))
}

/// `c_k -> exp(-(1 + mu_k) lambda) c_k`.
pub fn heat_semigroup<T: Real>(field: &SpectralField<T>, lambda: T) -> Result<SpectralField<T>> {
    if !(lambda >= T::zero()) {
        return Err(invalid("lambda", format!("heat time must be nonnegative, got {lambda}")));
    }
    Ok(field.apply_symbol(|mu| (-(T::one() + mu) * lambda).exp()))
}

/// Discretization of `int_0^inf` on `[lambda_min, lambda_max]`.
///
/// The interval is split into `nodes / 2` log-uniform panels, each carrying a
/// two-point Gauss-Legendre rule in `ln lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub nodes: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 400,
            lambda_min: 1e-8,
            lambda_max: 50.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(invalid("nodes", format!("need at least 2 nodes, got {}", self.nodes)));
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max && self.lambda_max.is_finite()) {
            return Err(invalid(
                "lambda range",
                format!("need 0 < lambda_min < lambda_max, got [{}, {}]", self.lambda_min, self.lambda_max),
            ));
        }
        Ok(())
    }

    /// Nodes `lambda_i` and weights `w_i` for `int f(lambda) dlambda / lambda`.
    pub fn log_nodes<T: Real>(&self) -> Vec<(T, T)> {
        let panels = self.nodes.div_ceil(2);
        let a = lit::<T>(self.lambda_min.ln());
        let b = lit::<T>(self.lambda_max.ln());
        let width = (b - a) / count(panels);
        let offset = width / (lit::<T>(2.0) * lit::<T>(3.0).sqrt());
        let half = width / lit(2.0);
        (0..panels)
            .flat_map(|i| {
                let mid = a + width * (count::<T>(i) + lit(0.5));
                [((mid - offset).exp(), half), ((mid + offset).exp(), half)]
            })
            .collect()
    }
}

/// `1 / Gamma(-theta)` for `theta in (0, 1)`, via `Gamma(-theta) = Gamma(1 - theta) / (-theta)`.
pub fn gamma_reciprocal<T: Real>(theta: T) -> Result<T> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(invalid("theta", format!("must lie in (0, 1), got {theta}")));
    }
    Ok(-theta / gamma(T::one() - theta))
}

/// `int_0^{lambda_min} lambda^(-theta-1) (exp(-a lambda) - 1) dlambda` as a Taylor series.
fn left_tail<T: Real>(a: T, theta: T, lambda_min: T) -> T {
    let x = a * lambda_min;
    let mut power = T::one();
    let mut sum = T::zero();
    for m in 1..200usize {
        let mm = count::<T>(m);
        power = power * (-x) / mm;
        let term = power / (mm - theta);
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum * lambda_min.powf(-theta)
}

/// Semigroup-integral realization of `(-Delta + 1)^theta`, `theta in (0, 1)`.
pub fn apply_quadrature<T: Real>(field: &SpectralField<T>, theta: T, quad: &QuadratureSpec) -> Result<SpectralField<T>> {
    quad.validate()?;
    let scale = gamma_reciprocal(theta)?;
    let lambda_min = lit::<T>(quad.lambda_min);
    let lambda_max = lit::<T>(quad.lambda_max);

    let mut acc = SpectralField::zeros(field.domain());
    for (lambda, w) in quad.log_nodes::<T>() {
        // lambda^(-theta-1) dlambda = lambda^(-theta) dln(lambda)
        let evolved = heat_semigroup(field, lambda)?;
        let diff = &evolved - field;
        acc = acc.axpy(w * lambda.powf(-theta), &diff);
    }
    // Tails: small lambda by Taylor series of exp(-A lambda) - 1, large lambda
    // where exp(-A lambda) is below exp(-lambda_max) and only the -1 survives.
    let tails = field.apply_symbol(|mu| left_tail(T::one() + mu, theta, lambda_min) - lambda_max.powf(-theta) / theta);
    Ok((&acc + &tails).scaled(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn theta_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = BoxDomain::new(1, 3.0, 16, 1).unwrap();
        let u = SpectralField::random(&d, 1.0, &mut rng);
        assert_eq!(apply_spectral(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn spectral_power_on_single_modes() {
        let d = BoxDomain::new(1, PI, 4, 1).unwrap();
        let m1 = SpectralField::single_mode(&d, &[1], 1.0).unwrap();
        assert_relative_eq!(apply_spectral(&m1, 1.0).unwrap().coeffs()[0], 2.0, epsilon = 1e-14);
        let m3 = SpectralField::single_mode(&d, &[3], 1.0).unwrap();
        assert_relative_eq!(apply_spectral(&m3, 0.5).unwrap().coeffs()[2], 10f64.sqrt(), epsilon = 1e-13);
        assert!(apply_spectral(&m3, 1.5).is_err());
    }

    #[test]
    fn heat_semigroup_on_first_mode() {
        let d = BoxDomain::new(1, PI, 2, 1).unwrap();
        let m1 = SpectralField::single_mode(&d, &[1], 1.0).unwrap();
        assert_eq!(heat_semigroup(&m1, 0.0).unwrap(), m1);
        assert_relative_eq!(heat_semigroup(&m1, 2f64.ln()).unwrap().coeffs()[0], 0.25, epsilon = 1e-14);
        assert!(heat_semigroup(&m1, -1.0).is_err());
    }

    #[test]
    fn heat_semigroup_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = BoxDomain::new(2, 5.0, 12, 1).unwrap();
        for _ in 0..10 {
            let u = SpectralField::random(&d, 0.5, &mut rng);
            for lambda in [0.01f64, 0.3, 2.0] {
                let lhs = heat_semigroup(&u, lambda).unwrap().l2_norm();
                assert!(lhs <= (-lambda).exp() * u.l2_norm() * (1.0 + 1e-14));
            }
        }
    }

    #[test]
    fn gamma_reciprocal_values() {
        // Gamma(-1/2) = -2 sqrt(pi); Gamma(-1/4) = -4 Gamma(3/4).
        assert_relative_eq!(gamma_reciprocal(0.5).unwrap(), -0.282_094_791_773_878_1, max_relative = 1e-13);
        assert_relative_eq!(gamma_reciprocal(0.25).unwrap(), -1.0 / (4.0 * 1.225_416_702_465_177_6), max_relative = 1e-13);
        assert_relative_eq!(gamma_reciprocal(0.25).unwrap(), -0.204_012_1, max_relative = 1e-6);
        let tiny = gamma_reciprocal(1e-9).unwrap();
        assert!(tiny < 0.0 && tiny > -2e-9);
        assert!(gamma_reciprocal(0.0).is_err());
        assert!(gamma_reciprocal(1.0).is_err());
    }

    #[test]
    fn quadrature_matches_spectral_quarter_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = BoxDomain::new(1, PI, 64, 1).unwrap();
        let u = SpectralField::random(&d, 0.0, &mut rng);
        let exact = apply_spectral(&u, 0.25).unwrap();
        let approx = apply_quadrature(&u, 0.25, &QuadratureSpec::default()).unwrap();
        let err = (&approx - &exact).l2_norm() / exact.l2_norm();
        assert!(err < 1e-6, "relative error {err}");
    }

    #[test]
    fn quadrature_of_zero_is_zero() {
        let d = BoxDomain::new(1, 2.0, 8, 1).unwrap();
        let z = SpectralField::zeros(&d);
        let q = QuadratureSpec {
            nodes: 10,
            lambda_min: 1e-3,
            lambda_max: 5.0,
        };
        assert!(apply_quadrature(&z, 0.6, &q).unwrap().is_zero());
    }

    #[test]
    fn invalid_quadrature_rejected() {
        let d = BoxDomain::new(1, 2.0, 8, 1).unwrap();
        let z = SpectralField::zeros(&d);
        let bad = QuadratureSpec {
            nodes: 1,
            ..QuadratureSpec::default()
        };
        assert!(apply_quadrature(&z, 0.5, &bad).is_err());
        let reversed = QuadratureSpec {
            nodes: 10,
            lambda_min: 2.0,
            lambda_max: 1.0,
        };
        assert!(apply_quadrature(&z, 0.5, &reversed).is_err());
        assert!(apply_quadrature(&z, 1.0, &QuadratureSpec::default()).is_err());
    }
}
