//! Time loop joining the integrator and the ledger monitor.

use crate::dynamics::{Integrator, State};
use crate::error::{invalid, Result};
use crate::functionals::{EnergyLedger, Monitor};
use crate::scalar::Real;

/// Number of steps and sampling cadence, both in integrator steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub steps: usize,
    pub sample_every: usize,
}

impl Schedule {
    /// Rounds `t_end / dt` and `cadence / dt` to whole steps.
    pub fn from_times(dt: f64, t_end: f64, cadence: f64) -> Result<Self> {
        if !(dt > 0.0 && t_end >= 0.0 && cadence > 0.0) {
            return Err(invalid("schedule", format!("need dt > 0, t_end >= 0, cadence > 0 (got {dt}, {t_end}, {cadence})")));
        }
        let steps = (t_end / dt).round() as usize;
        let sample_every = ((cadence / dt).round() as usize).max(1);
        Ok(Self { steps, sample_every })
    }

    /// Step indices at which a row is recorded; always includes 0 and `steps`.
    pub fn is_sample(&self, n: usize) -> bool {
        n % self.sample_every == 0 || n == self.steps
    }
}

/// Runs `schedule.steps` steps from `initial`, appending a ledger row and
/// calling `on_sample` at every sample. On divergence the ledger keeps the
/// rows recorded so far and the error carries the last good time.
pub fn simulate<T: Real>(
    integrator: &Integrator<T>,
    monitor: &mut Monitor<T>,
    initial: State<T>,
    schedule: Schedule,
    ledger: &mut EnergyLedger,
    mut on_sample: impl FnMut(&State<T>),
) -> Result<State<T>> {
    let mut state = initial;
    for n in 0..=schedule.steps {
        if n > 0 {
            state = integrator.step(&state)?;
        }
        if schedule.is_sample(n) {
            ledger.push(monitor.evaluate(&state)?)?;
            on_sample(&state);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Nonlinearity, Physics};
    use crate::functionals::MonitorConfig;
    use crate::grid::BoxDomain;

    #[test]
    fn zero_data_stays_zero() {
        let d = BoxDomain::<f64>::new(1, 20.0, 32, 3).unwrap();
        let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::default()).unwrap();
        let cfg = MonitorConfig {
            epsilon: 0.1,
            centers: vec![vec![10.0]],
            delta: None,
            lyapunov_n: None,
        };
        let mut monitor = Monitor::new(&p, cfg).unwrap();
        let mut ledger = EnergyLedger::new(0.1, vec![vec![10.0]]);
        let schedule = Schedule::from_times(1e-2, 1.0, 0.1).unwrap();
        let mut seen = 0;
        let end = simulate(
            &Integrator::new(p, 1e-2).unwrap(),
            &mut monitor,
            State::zeros(&d),
            schedule,
            &mut ledger,
            |s| {
                assert!(s.u.is_zero() && s.v.is_zero());
                seen += 1;
            },
        )
        .unwrap();
        assert_eq!(seen, 11);
        assert_eq!(ledger.rows.len(), 11);
        assert!((end.t - 1.0).abs() < 1e-12);
        assert!(ledger.rows.iter().all(|r| r.energy.quadratic() == 0.0));
    }

    #[test]
    fn schedule_rounding() {
        let s = Schedule::from_times(1e-3, 2.0, 0.05).unwrap();
        assert_eq!((s.steps, s.sample_every), (2000, 50));
        assert!(s.is_sample(0) && s.is_sample(50) && !s.is_sample(49) && s.is_sample(2000));
        assert!(Schedule::from_times(0.0, 1.0, 0.1).is_err());
    }
}
