use super::{difference, record_ledger, run_experiment, run_trajectory};
use crate::config::{Experiment, RunConfig, SweepAxis};
use crate::error::{HarnessError, Result};
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{BoxDomain, Physics, State};
use serde_json::json;
use std::path::Path;

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Epsilon => "epsilon",
        SweepAxis::Gamma => "gamma",
        SweepAxis::Dt => "dt",
        SweepAxis::N => "n",
        SweepAxis::Seed => "seed",
    }
}

pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Sweep { axis, values, inner } = &config.experiment else {
        unreachable!("dispatched on kind")
    };
    match axis {
        SweepAxis::Dt => dt_sweep(config, values, out, report),
        SweepAxis::N => n_sweep(config, values, out, report),
        SweepAxis::Epsilon | SweepAxis::Gamma | SweepAxis::Seed => children(config, *axis, values, inner.as_deref(), out, report),
    }
}

fn norm(s: &State<f64>, lambda0: f64) -> f64 {
    s.energy_norm_sq(lambda0).sqrt()
}

/// Same data at decreasing time steps; consecutive triples give the observed order.
fn dt_sweep(config: &RunConfig, values: &[f64], out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let mut dts = values.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let initial = config.initial_state(&domain)?;
    let mut finals = Vec::new();
    for &dt in &dts {
        let mut child = config.clone();
        child.time.dt = dt;
        child.time.sample_every = child.time.sample_every.max(dt);
        child.validate()?;
        let run = run_trajectory(&child, &physics, initial.clone(), false)?;
        record_ledger(out, &format!("runs/dt_{dt}"), &run.ledger, report)?;
        finals.push(run.final_state()?.clone());
    }
    let lambda0 = config.physics.lambda0;
    let mut orders = Vec::new();
    for i in 0..dts.len().saturating_sub(2) {
        let e01 = norm(&difference(&finals[i], &finals[i + 1]), lambda0);
        let e12 = norm(&difference(&finals[i + 1], &finals[i + 2]), lambda0);
        let order = (e01 / e12).ln() / (dts[i] / dts[i + 1]).ln();
        report.fit(format!("order_{}", dts[i + 1]), order);
        report.check(Criterion::within(format!("richardson_order_{}", dts[i + 1]), order, 1.7, 2.3));
        orders.push(order);
    }
    if orders.is_empty() {
        report.note("fewer than three time steps: no order estimate");
    }
    report.data = json!({ "dt": dts, "orders": orders });
    Ok(())
}

/// Same data truncated to each resolution; errors against the finest run must decrease.
fn n_sweep(config: &RunConfig, values: &[f64], out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let mut modes: Vec<usize> = Vec::new();
    for &v in values {
        if !(v >= 1.0 && v.fract() == 0.0) {
            return Err(HarnessError::config(format!("sweep: N values must be positive integers, got {v}")));
        }
        modes.push(v as usize);
    }
    modes.sort_unstable();
    modes.dedup();
    let finest = *modes.last().expect("validated non-empty");
    let mut fine_config = config.clone();
    fine_config.domain.modes = finest;
    let fine = fine_config.domain()?;
    let source = fine_config.source(&fine)?;
    let initial = fine_config.initial_state(&fine)?;
    let mut finals = Vec::new();
    for &n in &modes {
        let mut child = config.clone();
        child.domain.modes = n;
        let d = BoxDomain::new(config.domain.dim, config.domain.length, n, config.domain.pad_factor)?;
        let p = &config.physics;
        let physics = Physics::new(p.gamma, p.lambda0, p.nonlinearity, source.resample(&d)?)?;
        let start = State::new(initial.u.resample(&d)?, initial.v.resample(&d)?, 0.0)?;
        let run = run_trajectory(&child, &physics, start, false)?;
        record_ledger(out, &format!("runs/n_{n}"), &run.ledger, report)?;
        let last = run.final_state()?;
        finals.push(State::new(last.u.resample(&fine)?, last.v.resample(&fine)?, last.t)?);
    }
    let reference = finals.last().expect("non-empty");
    let errors: Vec<f64> = finals[..finals.len() - 1]
        .iter()
        .map(|s| norm(&difference(s, reference), config.physics.lambda0))
        .collect();
    for (n, e) in modes.iter().zip(&errors) {
        report.fit(format!("error_n{n}"), *e);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    report.check(Criterion::holds(
        "spectral_convergence",
        decreasing,
        "errors against the finest resolution strictly decrease",
    ));
    report.data = json!({ "modes": modes, "errors": errors });
    Ok(())
}

/// Child configuration for one sweep value.
fn child_config(config: &RunConfig, axis: SweepAxis, value: f64, inner: Option<&Experiment>) -> Result<RunConfig> {
    let mut child = config.clone();
    child.experiment = inner.cloned().expect("validated: gamma and seed need an inner experiment");
    match axis {
        SweepAxis::Gamma => child.physics.gamma = value,
        SweepAxis::Seed => {
            if !(value >= 0.0 && value.fract() == 0.0) {
                return Err(HarnessError::config(format!("sweep: seeds must be nonnegative integers, got {value}")));
            }
            child.initial.seed = value as u64;
        }
        _ => unreachable!("refinement axes run in place"),
    }
    Ok(child)
}

/// Independent child experiments, each in its own directory. The epsilon axis
/// is a single commutator study over all values.
fn children(
    config: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    inner: Option<&Experiment>,
    out: &Path,
    report: &mut ExperimentReport,
) -> Result<()> {
    let name = axis_name(axis);
    let mut jobs: Vec<(String, RunConfig)> = Vec::new();
    if axis == SweepAxis::Epsilon {
        let mut child = config.clone();
        let mut e = match inner {
            Some(e @ Experiment::CommutatorStudy { .. }) => e.clone(),
            _ => Experiment::default_for("commutator-study").expect("default exists"),
        };
        if let Experiment::CommutatorStudy { epsilons, .. } = &mut e {
            *epsilons = values.to_vec();
        }
        child.experiment = e;
        jobs.push(("epsilon".into(), child));
    } else {
        for &value in values {
            jobs.push((format!("{name}_{value}"), child_config(config, axis, value, inner)?));
        }
    }

    let mut summaries = Vec::new();
    let mut patterns: Vec<Vec<(String, bool)>> = Vec::new();
    for (label, child) in jobs {
        let rel = format!("children/{label}");
        let result = run_experiment(&child, &out.join(&rel));
        let (passed, error) = match &result {
            Ok(r) => (r.passed, String::new()),
            Err(e) => (false, e.to_string()),
        };
        if let Ok(r) = &result {
            patterns.push(r.criteria.iter().map(|c| (c.name.clone(), c.passed)).collect());
            for (k, v) in &r.fitted {
                report.fit(format!("{label}/{k}"), *v);
            }
        }
        report.check(Criterion::holds(format!("child_{label}"), passed, "child passes").with_detail(error.clone()));
        summaries.push(json!({
            "label": label,
            "dir": rel,
            "passed": passed,
            "error": if error.is_empty() { serde_json::Value::Null } else { json!(error) },
        }));
    }
    if axis == SweepAxis::Seed {
        let identical = patterns.len() == values.len() && patterns.windows(2).all(|w| w[0] == w[1]);
        report.check(Criterion::holds(
            "pattern_identical",
            identical,
            "per-criterion pass/fail identical across seeds",
        ));
    }
    report.data = json!({ "axis": name, "values": values, "children": summaries });
    Ok(())
}
