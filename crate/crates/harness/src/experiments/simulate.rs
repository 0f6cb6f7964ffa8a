use super::{record_ledger, run_trajectory};
use crate::config::{RunConfig, SourceConfig};
use crate::error::Result;
use crate::output::write_snapshot;
use crate::report::{Criterion, ExperimentReport};
use std::path::Path;

/// A single trajectory. With `g = 0` the unweighted energy must not grow
/// between ledger rows by more than `1e-6 E(0)`.
pub(super) fn run(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let domain = config.domain()?;
    let physics = config.physics(&domain)?;
    let initial = config.initial_state(&domain)?;
    if config.output.snapshots {
        write_snapshot(out, "initial", &initial, config)?;
    }
    let run = run_trajectory(config, &physics, initial, false)?;
    record_ledger(out, "", &run.ledger, report)?;
    let last = run.final_state()?;
    if config.output.snapshots {
        write_snapshot(out, "final", last, config)?;
    }

    let rows = &run.ledger.rows;
    let e0 = rows[0].energy.total();
    report.fit("energy_initial", e0);
    report.fit("energy_final", rows.last().map_or(e0, |r| r.energy.total()));
    report.fit("max_abs_u", rows.iter().map(|r| r.max_abs_u).fold(0.0, f64::max));
    report.fit("t_final", last.t);
    report.check(Criterion::holds("completed", true, "no divergence"));

    if matches!(config.physics.source, SourceConfig::Zero) {
        let scale = e0.abs().max(rows[0].energy.quadratic());
        let worst = rows
            .windows(2)
            .map(|w| w[1].energy.total() - w[0].energy.total())
            .fold(0.0, f64::max);
        let rel = if scale > 0.0 { worst / scale } else { worst };
        report.check(
            Criterion::at_most("energy_nonincreasing", rel, 1e-6).with_detail("largest increase between rows relative to E(0)"),
        );
    }
    Ok(())
}
