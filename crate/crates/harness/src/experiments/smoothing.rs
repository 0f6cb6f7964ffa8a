use super::{center_weights, median, record_ledger};
use crate::config::{Experiment, RunConfig};
use crate::error::{HarnessError, Result};
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{pde_residual, EnergyLedger, FractionalPower, Integrator, Monitor, Physics, SampledWeight, State};
use serde_json::json;
use std::path::Path;

/// `sup_{x0}` of `||phi A u||^2 + ||phi A^{1/2} v||^2` (the first-order norm of
/// `xi_u`) and of `||phi A^{1/2} v||^2 + ||phi u_tt||^2` (the energy norm of `xi_{u_t}`).
fn smoothing_norms(state: &State<f64>, physics: &Physics<f64>, weights: &[SampledWeight<f64>]) -> Result<(f64, f64)> {
    let au = FractionalPower::new(1.0)?.apply(&state.u).to_grid();
    let a12v = FractionalPower::new(0.5)?.apply(&state.v).to_grid();
    let utt = pde_residual(state, physics).to_grid();
    let (mut e1, mut e) = (0.0f64, 0.0f64);
    for w in weights {
        let v_part = w.l2_norm_sq(&a12v);
        e1 = e1.max(w.l2_norm_sq(&au) + v_part);
        e = e.max(v_part + w.l2_norm_sq(&utt));
    }
    Ok((e1, e))
}

/// Largest power of two not above `dt` and fine enough to land on `2^-levels`.
fn dyadic_step(dt: f64, levels: u32) -> f64 {
    let k = ((1.0 / dt).log2().ceil() as i32).max(levels as i32 + 3);
    2f64.powi(-k)
}

pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Smoothing { levels, max_over_median } = &config.experiment else {
        unreachable!("dispatched on kind")
    };
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let weights = center_weights(config, &domain)?;
    let dt = dyadic_step(config.time.dt, *levels);
    if dt != config.time.dt {
        report.note(format!("time step snapped to the dyadic value {dt:e}"));
    }
    report.fit("dt_used", dt);
    let integrator = Integrator::new(physics.clone(), dt)?;
    let mut monitor = Monitor::new(&physics, config.monitor_config(&domain)?)?;
    let mut ledger = EnergyLedger::new(config.epsilon(), config.centers(&domain)?);

    // sample steps for t = 2^-levels, ..., 1 in increasing time
    let steps_per_unit = (1.0 / dt).round() as usize;
    let mut targets: Vec<(u32, usize)> = (0..=*levels).rev().map(|j| (j, steps_per_unit >> j)).collect();
    targets.dedup_by_key(|x| x.1);
    if targets[0].1 == 0 {
        return Err(HarnessError::config("smoothing: time step too coarse for the requested levels"));
    }
    let mut state = config.initial_state(&domain)?;
    ledger.push(monitor.evaluate(&state)?)?;
    let mut n = 0usize;
    let mut rows = Vec::new();
    let mut sample = |ledger: &mut EnergyLedger| -> Result<()> {
        for &(j, target) in &targets {
            state = integrator.advance(&state, target - n)?;
            n = target;
            ledger.push(monitor.evaluate(&state)?)?;
            let (e1, e) = smoothing_norms(&state, &physics, &weights)?;
            rows.push((j, state.t, e1, e));
        }
        Ok(())
    };
    let result = sample(&mut ledger);
    record_ledger(out, "", &ledger, report)?;
    result?;

    let weighted: Vec<f64> = rows.iter().map(|&(_, t, e1, e)| t * t * (e1 + e)).collect();
    let raw: Vec<f64> = rows.iter().map(|&(_, _, e1, e)| e1 + e).collect();
    let ratio = weighted.iter().cloned().fold(0.0, f64::max) / median(&weighted);
    report.fit("max_over_median", ratio);
    report.check(
        Criterion::at_most("t2_weighted_bounded", ratio, *max_over_median)
            .with_detail("max / median of t^2 (E1(xi_u) + E(xi_ut)) over t = 2^-j"),
    );
    let growth = raw[0] / raw[raw.len() - 1];
    report.fit("raw_growth", growth);
    report.check(
        Criterion::at_least("raw_norm_grows", growth, 10.0)
            .with_detail("norm without the t^2 factor at the smallest time over its value at t = 1"),
    );
    let e1_at_1 = rows.last().map_or(f64::NAN, |r| r.2);
    report.fit("e1_at_1", e1_at_1);
    report.check(Criterion::holds("e1_finite_at_1", e1_at_1.is_finite(), "finite"));
    report.data = json!({
        "j": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
        "t": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
        "t2_weighted": weighted,
        "raw": raw,
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::dyadic_step;

    #[test]
    fn dyadic_steps() {
        assert_eq!(dyadic_step(2f64.powi(-12), 8), 2f64.powi(-12));
        assert_eq!(dyadic_step(1e-3, 8), 2f64.powi(-11));
        assert_eq!(dyadic_step(0.1, 8), 2f64.powi(-11));
    }
}
