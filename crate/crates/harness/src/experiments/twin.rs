use super::{center_weights, difference, record_ledger, run_trajectory, sup_energy, RunOutput};
use crate::config::{Experiment, RunConfig};
use crate::error::{HarnessError, Result};
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{random_initial_state, twin_factor_at, SampledWeight, State};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::Path;

/// Unit-norm perturbation direction, drawn from a stream independent of the initial data.
fn direction(config: &RunConfig, domain: &std::sync::Arc<fdwave_core::BoxDomain<f64>>) -> Result<State<f64>> {
    let i = &config.initial;
    let mut rng = ChaCha8Rng::seed_from_u64(i.seed ^ 0x9e37_79b9_7f4a_7c15);
    Ok(random_initial_state(domain, i.r_u, i.r_v, 1.0, config.physics.lambda0, &mut rng)?)
}

/// Trajectories from `xi_0` and `xi_0 + scale * d` for the fixed direction `d`,
/// with states kept at every ledger time.
pub fn perturbed_pair(config: &RunConfig, scale: f64) -> Result<(RunOutput, RunOutput)> {
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let base = config.initial_state(&domain)?;
    let d = direction(config, &domain)?;
    let shifted = State {
        u: base.u.axpy(scale, &d.u),
        v: base.v.axpy(scale, &d.v),
        t: base.t,
    };
    Ok((
        run_trajectory(config, &physics, base, true)?,
        run_trajectory(config, &physics, shifted, true)?,
    ))
}

/// `sup_{x0}` weighted energy norm of the difference at every common sample.
fn difference_series(a: &RunOutput, b: &RunOutput, weights: &[SampledWeight<f64>], lambda0: f64) -> Vec<(f64, f64)> {
    a.samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x.t, sup_energy(weights, &difference(x, y), lambda0)))
        .collect()
}

fn value_at(series: &[(f64, f64)], t: f64) -> f64 {
    series
        .iter()
        .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
        .map_or(f64::NAN, |s| s.1)
}

pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Twin {
        perturbation,
        compare_at,
        c_at,
        tolerance,
    } = &config.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let weights = center_weights(config, &domain)?;
    let lambda0 = config.physics.lambda0;
    let d = direction(config, &domain)?;
    let base = config.initial_state(&domain)?;
    let shifted = |scale: f64| State {
        u: base.u.axpy(scale, &d.u),
        v: base.v.axpy(scale, &d.v),
        t: base.t,
    };
    let reference = run_trajectory(config, &physics, base.clone(), true)?;
    record_ledger(out, "runs/base", &reference.ledger, report)?;
    reference.final_state()?;
    let full = run_trajectory(config, &physics, shifted(*perturbation), true)?;
    record_ledger(out, "runs/full", &full.ledger, report)?;
    full.final_state()?;
    let half = run_trajectory(config, &physics, shifted(0.5 * perturbation), true)?;
    record_ledger(out, "runs/half", &half.ledger, report)?;
    half.final_state()?;

    let d_full = difference_series(&reference, &full, &weights, lambda0);
    let d_half = difference_series(&reference, &half, &weights, lambda0);
    let (n0_full, n0_half) = (d_full[0].1, d_half[0].1);
    if !(n0_full > 0.0) {
        return Err(HarnessError::config("twin: perturbation vanishes in the weighted energy norm"));
    }
    // smallest rho with D(t) <= D(0) exp(rho t) on the first pair
    let rho = d_full
        .iter()
        .filter(|s| s.0 > 0.0)
        .map(|&(t, v)| (v / n0_full).ln() / t)
        .fold(f64::NEG_INFINITY, f64::max);
    report.fit("rho", rho);
    let envelope = d_half
        .iter()
        .map(|&(t, v)| v / (n0_half * (rho * t).exp()))
        .fold(0.0, f64::max);
    report.check(
        Criterion::at_most("envelope", envelope, 1.0 + tolerance)
            .with_detail("max over samples of D(t) / (D(0) exp(rho t)) on the half-size pair, rho fitted on the full pair"),
    );
    report.check(Criterion::holds("rho_finite", rho.is_finite(), "finite"));

    let ratio = value_at(&d_full, *compare_at) / value_at(&d_half, *compare_at);
    report.fit("ratio_at_compare", ratio);
    let linear = Criterion::within("linear_response_regime", ratio, 2.0, 8.0)
        .with_detail("halving the perturbation must roughly quarter the squared difference");
    if !linear.passed {
        report.note("perturbation too large: nonlinear regime detected");
    }
    report.check(linear);
    report.check(Criterion::within(
        "quartering",
        ratio,
        4.0 * (1.0 - tolerance),
        4.0 / (1.0 - tolerance),
    ));

    let factor = twin_factor_at(&reference.ledger, &full.ledger, *compare_at, *c_at)?;
    report.fit("twin_factor_at", factor);
    report.fit("c_at", *c_at);
    report.data = json!({
        "times": d_full.iter().map(|s| s.0).collect::<Vec<_>>(),
        "difference_full": d_full.iter().map(|s| s.1).collect::<Vec<_>>(),
        "difference_half": d_half.iter().map(|s| s.1).collect::<Vec<_>>(),
    });
    Ok(())
}
