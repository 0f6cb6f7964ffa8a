//! Commutators of weights with fractional powers, `[phi, A^theta] u =
//! phi A^theta u - A^theta (phi u)` for `A = -Delta + 1`, and their scaling in
//! the weight's decay rate.
//!
//! Multiplication by the weight is carried out on the padded grid and
//! projected back onto the retained sine modes, so both terms live in the
//! same finite-dimensional space.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fracops::{gamma_reciprocal, FractionalPower};
use crate::grid::SpectralField;
use crate::scalar::{lit, to_f64, Real};
use crate::special::gamma;
use crate::weights::{SampledWeight, WeightSpec};

/// `P(phi g)` for a sampled weight.
fn project_product<T: Real>(weight: &SampledWeight<T>, field: &SpectralField<T>) -> SpectralField<T> {
    weight.multiply(&field.to_grid()).to_spectral()
}

fn commutator_sampled<T: Real>(weight: &SampledWeight<T>, power: &FractionalPower<T>, field: &SpectralField<T>) -> SpectralField<T> {
    let left = project_product(weight, &power.apply(field));
    let right = power.apply(&project_product(weight, field));
    &left - &right
}

/// `[phi, A^theta] u`.
pub fn commutator_apply<T: Real>(spec: &WeightSpec<T>, theta: T, field: &SpectralField<T>) -> Result<SpectralField<T>> {
    let weight = SampledWeight::new(spec, field.domain())?;
    Ok(commutator_sampled(&weight, &FractionalPower::new(theta)?, field))
}

/// `[A^theta, phi] u`, evaluated in the opposite order.
pub fn commutator_apply_reversed<T: Real>(spec: &WeightSpec<T>, theta: T, field: &SpectralField<T>) -> Result<SpectralField<T>> {
    let weight = SampledWeight::new(spec, field.domain())?;
    let power = FractionalPower::new(theta)?;
    let first = power.apply(&project_product(&weight, field));
    let second = project_product(&weight, &power.apply(field));
    Ok(&first - &second)
}

/// `eps^((1+s)/2) 2^((1+s)/2 - theta) Gamma((1+s)/2 - theta) / |Gamma(-theta)|`.
pub fn bound_constant<T: Real>(theta: T, s: T, epsilon: T) -> Result<T> {
    let half = lit::<T>(0.5);
    if !(s >= T::zero() && s < T::one()) {
        return Err(invalid("s", format!("must lie in [0, 1), got {s}")));
    }
    let a = (T::one() + s) * half;
    if !(theta > T::zero() && theta < a) {
        return Err(invalid("theta", format!("must lie in (0, {a}), got {theta}")));
    }
    if !(epsilon > T::zero()) {
        return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    let inv_gamma = gamma_reciprocal(theta)?.abs();
    Ok(epsilon.powf(a) * lit::<T>(2.0).powf(a - theta) * gamma(a - theta) * inv_gamma)
}

/// Per-epsilon worst-case commutator ratios and their log-log slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub theta: f64,
    pub s: f64,
    pub epsilon_list: Vec<f64>,
    pub ratio_list: Vec<f64>,
    pub slope: f64,
}

impl CommutatorReport {
    /// `max / min` of the ratios.
    pub fn spread(&self) -> f64 {
        let max = self.ratio_list.iter().copied().fold(f64::MIN, f64::max);
        let min = self.ratio_list.iter().copied().fold(f64::MAX, f64::min);
        max / min
    }

    /// Largest relative change of the ratios against another report on the same epsilons.
    pub fn max_relative_change(&self, other: &Self) -> f64 {
        self.ratio_list
            .iter()
            .zip(&other.ratio_list)
            .map(|(a, b)| ((a - b) / a).abs())
            .fold(0.0, f64::max)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn check_epsilons<T: Real>(epsilons: &[T]) -> Result<()> {
    if epsilons.len() < 2 {
        return Err(invalid("epsilon_list", "need at least two values"));
    }
    if epsilons.iter().any(|&e| !(e > T::zero() && e <= lit(0.2))) {
        return Err(invalid("epsilon_list", "values must lie in (0, 0.2]"));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("epsilon_list", "must be strictly decreasing"));
    }
    Ok(())
}

fn check_ensemble<T: Real>(ensemble: &[SpectralField<T>]) -> Result<()> {
    if ensemble.is_empty() || ensemble.iter().all(|u| u.is_zero()) {
        return Err(Error::DegenerateEnsemble);
    }
    if ensemble.windows(2).any(|w| w[0].domain() != w[1].domain()) {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// For each `eps`, the max over the ensemble of
/// `||[A^theta, phi_eps] u|| / ||phi_eps A^(s/2) u||` with the smooth weight at `center`.
pub fn scaling_study<T: Real>(
    theta: T,
    s: T,
    ensemble: &[SpectralField<T>],
    epsilons: &[T],
    center: &[T],
) -> Result<CommutatorReport> {
    check_epsilons(epsilons)?;
    check_ensemble(ensemble)?;
    if !(s >= T::zero() && s < T::one()) {
        return Err(invalid("s", format!("must lie in [0, 1), got {s}")));
    }
    let power = FractionalPower::new(theta)?;
    let lift = FractionalPower::new(s * lit(0.5))?;
    let domain = ensemble[0].domain();
    let mut ratios = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let weight = SampledWeight::new(&WeightSpec::smooth(eps, center)?, domain)?;
        let mut worst = T::zero();
        for u in ensemble.iter().filter(|u| !u.is_zero()) {
            let num = commutator_sampled(&weight, &power, u).l2_norm();
            let den = weight.l2_norm_sq(&lift.apply(u).to_grid()).sqrt();
            worst = worst.max(num / den);
        }
        ratios.push(to_f64(worst));
    }
    finish(theta, s, epsilons, ratios)
}

/// For each `eps`, the max over the ensemble of `||[A^theta, psi] u|| / ||phi_eps u||`
/// with the bump `psi` and the smooth weight sharing `center`.
pub fn bump_study<T: Real>(theta: T, ensemble: &[SpectralField<T>], epsilons: &[T], center: &[T]) -> Result<CommutatorReport> {
    check_epsilons(epsilons)?;
    check_ensemble(ensemble)?;
    let power = FractionalPower::new(theta)?;
    let domain = ensemble[0].domain();
    let bump = SampledWeight::new(&WeightSpec::bump(center)?, domain)?;
    let numerators: Vec<T> = ensemble
        .iter()
        .map(|u| commutator_sampled(&bump, &power, u).l2_norm())
        .collect();
    let mut ratios = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let weight = SampledWeight::new(&WeightSpec::smooth(eps, center)?, domain)?;
        let mut worst = T::zero();
        for (u, &num) in ensemble.iter().zip(&numerators).filter(|(u, _)| !u.is_zero()) {
            worst = worst.max(num / weight.l2_norm_sq(&u.to_grid()).sqrt());
        }
        ratios.push(to_f64(worst));
    }
    finish(theta, T::zero(), epsilons, ratios)
}

fn finish<T: Real>(theta: T, s: T, epsilons: &[T], ratios: Vec<f64>) -> Result<CommutatorReport> {
    let eps: Vec<f64> = epsilons.iter().map(|&e| to_f64(e)).collect();
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::DegenerateEnsemble);
    }
    Ok(CommutatorReport {
        theta: to_f64(theta),
        s: to_f64(s),
        slope: log_log_slope(&eps, &ratios),
        epsilon_list: eps,
        ratio_list: ratios,
    })
}
