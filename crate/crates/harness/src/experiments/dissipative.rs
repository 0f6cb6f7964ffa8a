use super::{center_weights, ls_slope, record_ledger, run_trajectory, RunOutput};
use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{energy_constant, EnergyLedger, Nonlinearity, Physics, Quantity};
use serde_json::json;
use std::path::Path;

/// Transient fit of one run.
struct Decay {
    beta: f64,
    points: usize,
    plateau: f64,
}

/// Fits `ln(sup E - plateau)` against `t` before the tail, on points that stand
/// clear of the tail's own fluctuation.
fn fit_decay(times: &[f64], sup_e: &[f64], tail_start: usize) -> Decay {
    let tail = &sup_e[tail_start..];
    let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    let noise = tail.iter().map(|x| (x - plateau).abs()).fold(0.0, f64::max);
    let floor = (10.0 * noise).max(1e-9 * (1.0 + plateau.abs()));
    let peak = sup_e[..tail_start].iter().map(|x| x - plateau).fold(0.0, f64::max);
    // skip the initial nonlinear transient: start once the excess is 1% of its peak
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut started = false;
    for (&t, &e) in times[..tail_start].iter().zip(&sup_e[..tail_start]) {
        let r = e - plateau;
        started |= r <= 1e-2 * peak;
        if started && r > floor {
            x.push(t);
            y.push(r.ln());
        }
    }
    let beta = if x.len() >= 3 { -ls_slope(&x, &y) } else { f64::NAN };
    Decay {
        beta,
        points: x.len(),
        plateau,
    }
}

/// Decay rate of the slowest linear mode: the smallest `-Re r` over roots of
/// `r^2 + gamma sqrt(1 + mu) r + (mu + lambda0)`.
pub(crate) fn slowest_mode_rate(physics: &Physics<f64>) -> f64 {
    physics
        .domain()
        .laplacian_eigenvalues()
        .into_iter()
        .map(|mu| {
            let (a, b) = physics.mode_coefficients(mu);
            let disc = a * a - 4.0 * b;
            if disc < 0.0 {
                a / 2.0
            } else {
                (a - disc.sqrt()) / 2.0
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Fraction of (interval, center) pairs satisfying the discretized
/// `dE/dt + kappa E_3^{1/3} + kappa ||phi A^{1/4} u_t||^2 <= C (1 + ||phi g||^2)`.
fn inequality_fraction(ledger: &EnergyLedger, kappa: f64, constant: f64, g_norms: &[f64]) -> (f64, f64) {
    let (mut ok, mut total) = (0usize, 0usize);
    let mut worst = f64::NEG_INFINITY;
    for w in ledger.rows.windows(2) {
        let dt = w[1].t - w[0].t;
        for (c, &g) in g_norms.iter().enumerate() {
            let de = (w[1].get(c, Quantity::AppendixEnergy) - w[0].get(c, Quantity::AppendixEnergy)) / dt;
            let e3 = 0.5 * (w[0].get(c, Quantity::AppendixEnergy3).cbrt() + w[1].get(c, Quantity::AppendixEnergy3).cbrt());
            let dv = 0.5 * (w[0].get(c, Quantity::DampedVelocity) + w[1].get(c, Quantity::DampedVelocity));
            let lhs = de + kappa * e3 + kappa * dv;
            let rhs = constant * (1.0 + g);
            worst = worst.max(lhs - rhs);
            total += 1;
            if lhs <= rhs {
                ok += 1;
            }
        }
    }
    (ok as f64 / total.max(1) as f64, worst)
}

pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Dissipative {
        amplitudes,
        tail_fraction,
        decay_threshold,
        plateau_tolerance,
        kappa,
        constant,
        inequality_fraction: min_fraction,
    } = &config.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let base = config.initial_state(&domain)?;
    let forced = !physics.source().is_zero();
    let delta = config.weights.delta.unwrap_or(physics.delta_max() / 2.0);
    let kappa = kappa.unwrap_or(delta);
    let constant = constant.unwrap_or_else(|| energy_constant(&physics));
    let source_grid = physics.source().to_grid();
    let g_norms: Vec<f64> = center_weights(config, &domain)?
        .iter()
        .map(|w| w.l2_norm_sq(&source_grid))
        .collect();
    report.fit("kappa", kappa);
    report.fit("constant", constant);

    let mut runs: Vec<(f64, RunOutput)> = Vec::new();
    for &a in amplitudes {
        let run = run_trajectory(config, &physics, base.scaled(a), false)?;
        record_ledger(out, &format!("runs/amp_{a}"), &run.ledger, report)?;
        run.final_state()?;
        runs.push((a, run));
    }

    let mut per_run = Vec::new();
    let mut plateaus = Vec::new();
    for (a, run) in &runs {
        let ledger = &run.ledger;
        let times = ledger.times();
        let n = times.len();
        let tail_start = ((1.0 - tail_fraction) * (n - 1) as f64).floor() as usize;
        let quadratic: Vec<f64> = ledger.rows.iter().map(|r| r.energy.quadratic()).collect();
        let tail = &quadratic[tail_start..];
        let plateau = tail.iter().sum::<f64>() / tail.len() as f64;
        plateaus.push(plateau);
        let decay = fit_decay(&times, &ledger.sup_series(Quantity::AppendixEnergy), tail_start);
        report.fit(format!("beta_amp{a}"), decay.beta);
        report.fit(format!("plateau_amp{a}"), plateau);
        report.fit(format!("appendix_plateau_amp{a}"), decay.plateau);
        report.check(
            Criterion::positive(format!("beta_positive_amp{a}"), decay.beta)
                .with_detail(format!("fit of ln(sup E - plateau) on {} points", decay.points)),
        );
        if !forced {
            let e0 = quadratic[0];
            let rel = if e0 > 0.0 { plateau / e0 } else { plateau };
            report.check(
                Criterion::at_most(format!("decay_amp{a}"), rel, *decay_threshold)
                    .with_detail("tail mean of the quadratic energy over its initial value"),
            );
        }
        let (fraction, worst) = inequality_fraction(ledger, kappa, constant, &g_norms);
        report.fit(format!("inequality_worst_excess_amp{a}"), worst);
        report.check(
            Criterion::at_least(format!("differential_inequality_amp{a}"), fraction, *min_fraction)
                .with_detail("fraction of ledger intervals and centers satisfying the discretized inequality"),
        );
        per_run.push(json!({
            "amplitude": a,
            "beta": decay.beta,
            "fit_points": decay.points,
            "plateau": plateau,
            "inequality_fraction": fraction,
        }));
    }

    if forced {
        let hi = plateaus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = plateaus.iter().cloned().fold(f64::INFINITY, f64::min);
        let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
        report.check(
            Criterion::at_most("plateau_spread", spread, *plateau_tolerance)
                .with_detail("(max - min) / max of the tail quadratic energy across amplitudes"),
        );
    }
    if !forced && physics.nonlinearity() == Nonlinearity::Zero {
        let rate = 2.0 * slowest_mode_rate(&physics);
        report.fit("slowest_mode_energy_rate", rate);
        for (a, _) in &runs {
            let beta = report.fitted[&format!("beta_amp{a}")];
            report.check(
                Criterion::at_most(format!("beta_vs_slowest_mode_amp{a}"), (beta / rate - 1.0).abs(), 0.2)
                    .with_detail("relative deviation from twice the slowest modal decay rate"),
            );
        }
    }
    report.data = json!({ "runs": per_run });
    Ok(())
}
