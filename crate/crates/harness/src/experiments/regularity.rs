use super::{record_ledger, run_trajectory};
use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{window_integrals, WindowIntegrals};
use serde_json::json;
use std::path::Path;

/// Window integrals ending at `start + window`, `start + 2 window`, ... up to `t_end`.
pub(crate) fn consecutive_windows(
    ledger: &fdwave_core::EnergyLedger,
    start: f64,
    window: f64,
    t_end: f64,
) -> Result<Vec<WindowIntegrals>> {
    let mut out = Vec::new();
    let mut j = 1usize;
    while start + j as f64 * window <= t_end + 1e-9 * window {
        out.push(window_integrals(ledger, start + j as f64 * window, window)?);
        j += 1;
    }
    Ok(out)
}

/// `max / first`; zero when every window vanishes.
fn growth(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        0.0
    } else {
        max / values[0]
    }
}

pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Regularity {
        window,
        start,
        growth_factor,
    } = &config.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let run = run_trajectory(config, &physics, config.initial_state(&domain)?, false)?;
    record_ledger(out, "", &run.ledger, report)?;
    let last = run.final_state()?;
    let windows = consecutive_windows(&run.ledger, *start, *window, last.t)?;
    let columns: [(&str, Vec<f64>); 3] = [
        ("l12", windows.iter().map(|w| w.l12).collect()),
        ("h32", windows.iter().map(|w| w.h32).collect()),
        ("utt", windows.iter().map(|w| w.utt).collect()),
    ];
    for (name, values) in &columns {
        report.fit(format!("{name}_first_window"), values[0]);
        report.fit(format!("{name}_sup_windows"), values.iter().cloned().fold(0.0, f64::max));
        report.check(
            Criterion::at_most(format!("{name}_no_growth"), growth(values), *growth_factor)
                .with_detail("sup over windows divided by the first window"),
        );
    }
    report.data = json!({
        "window_ends": windows.iter().map(|w| w.end).collect::<Vec<_>>(),
        "l12": columns[0].1,
        "h32": columns[1].1,
        "utt": columns[2].1,
    });
    Ok(())
}
