//! One module per experiment kind. Each fills an [`ExperimentReport`] and
//! writes its ledgers below the output directory.

mod checks;
mod dissipative;
mod regularity;
mod simulate;
mod smoothing;
mod sweep;
mod twin;

use crate::config::{Experiment, RunConfig};
use crate::error::{HarnessError, Result};
use crate::output::{write_json, write_ledger, write_report};
use crate::report::ExperimentReport;
use fdwave_core::{simulate as simulate_core, BoxDomain, EnergyLedger, Integrator, Monitor, Physics, SampledWeight, State, WeightSpec};
use std::path::Path;
use std::sync::Arc;

pub use twin::perturbed_pair;

/// Ledger and sampled states of one trajectory.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub ledger: EnergyLedger,
    /// States at the ledger times, when requested.
    pub samples: Vec<State<f64>>,
    /// Final state, or the last good time of a diverged run.
    pub outcome: std::result::Result<State<f64>, f64>,
}

impl RunOutput {
    pub fn final_state(&self) -> Result<&State<f64>> {
        self.outcome
            .as_ref()
            .map_err(|&last_good_time| HarnessError::Diverged { last_good_time })
    }
}

/// Integrates `initial` under `physics` with the time and weight settings of `config`.
/// Divergence is not an error here: the partial ledger is kept in the output.
pub fn run_trajectory(config: &RunConfig, physics: &Physics<f64>, initial: State<f64>, keep_samples: bool) -> Result<RunOutput> {
    let domain = physics.domain();
    let mut monitor = Monitor::new(physics, config.monitor_config(domain)?)?;
    let mut ledger = EnergyLedger::new(config.epsilon(), config.centers(domain)?);
    let integrator = Integrator::new(physics.clone(), config.time.dt)?;
    let mut samples = Vec::new();
    let result = simulate_core(&integrator, &mut monitor, initial, config.schedule()?, &mut ledger, |s| {
        if keep_samples {
            samples.push(s.clone());
        }
    });
    let outcome = match result {
        Ok(s) => Ok(s),
        Err(fdwave_core::Error::Diverged { last_good_time }) => Err(last_good_time),
        Err(e) => return Err(e.into()),
    };
    Ok(RunOutput { ledger, samples, outcome })
}

/// Runs the experiment of `config`, writing `config.json`, `report.json` and
/// ledgers below `out`. A diverged run still leaves its report and partial
/// ledgers behind before the error is returned.
pub fn run_experiment(config: &RunConfig, out: &Path) -> Result<ExperimentReport> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    write_json(&out.join("config.json"), config)?;
    let mut report = ExperimentReport::new(config.experiment.name(), &config.hash());
    let result = match &config.experiment {
        Experiment::Simulate {} => simulate::run(config, out, &mut report),
        Experiment::Dissipative { .. } => dissipative::run(config, out, &mut report),
        Experiment::Regularity { .. } => regularity::run(config, out, &mut report),
        Experiment::Twin { .. } => twin::run(config, out, &mut report),
        Experiment::Smoothing { .. } => smoothing::run(config, out, &mut report),
        Experiment::Sweep { .. } => sweep::run(config, out, &mut report),
        Experiment::FracopsVerify { .. } => checks::fracops_verify(config, &mut report),
        Experiment::CommutatorStudy { .. } => checks::commutator_study(config, &mut report),
        Experiment::Gronwall { .. } => checks::gronwall(config, out, &mut report),
    };
    match result {
        Ok(()) => {
            write_report(out, &report)?;
            Ok(report)
        }
        Err(HarnessError::Diverged { last_good_time }) => {
            report.passed = false;
            report.note(format!("run diverged; last good time t = {last_good_time}"));
            write_report(out, &report)?;
            Err(HarnessError::Diverged { last_good_time })
        }
        Err(e) => Err(e),
    }
}

/// Writes a ledger into `out/rel` and records its path in the report.
fn record_ledger(out: &Path, rel: &str, ledger: &EnergyLedger, report: &mut ExperimentReport) -> Result<()> {
    write_ledger(&out.join(rel), ledger)?;
    let path = if rel.is_empty() {
        "ledger.csv".to_string()
    } else {
        format!("{rel}/ledger.csv")
    };
    report.ledgers.push(path);
    Ok(())
}

/// Smooth weights at every lattice center of `config`.
fn center_weights(config: &RunConfig, domain: &Arc<BoxDomain<f64>>) -> Result<Vec<SampledWeight<f64>>> {
    config
        .centers(domain)?
        .iter()
        .map(|c| Ok(SampledWeight::new(&WeightSpec::smooth(config.epsilon(), c)?, domain)?))
        .collect()
}

/// `sup_{x0}` of the weighted energy norm of `(u, v)`.
fn sup_energy(weights: &[SampledWeight<f64>], state: &State<f64>, lambda0: f64) -> f64 {
    weights
        .iter()
        .map(|w| w.energy(&state.u, &state.v, lambda0).total())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `y` against `x`.
fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Difference of two states on the same domain, at the time of `a`.
fn difference(a: &State<f64>, b: &State<f64>) -> State<f64> {
    State {
        u: &a.u - &b.u,
        v: &a.v - &b.v,
        t: a.t,
    }
}
