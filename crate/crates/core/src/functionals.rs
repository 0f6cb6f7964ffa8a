//! Monitored functionals: energies, the truncated cubic multiplier, the
//! appendix energy, and the per-center integrands whose time windows carry
//! the extra-regularity estimates.

use serde::{Deserialize, Serialize};

use crate::dynamics::{pde_residual, Physics, State};
use crate::error::{invalid, Error, Result};
use crate::grid::{AxisClosedGrid, GridField, SpectralField};
use crate::scalar::{lit, to_f64, Real};
use crate::weights::{SampledWeight, WeightSpec};

/// `C^1` truncation of `r^3`: cubic on `[-n, n]`, continued linearly.
pub fn psi_n<T: Real>(r: T, n: T) -> T {
    if r.abs() <= n {
        r * r * r
    } else {
        let n2 = n * n;
        lit::<T>(3.0) * n2 * r - lit::<T>(2.0) * n2 * n * r.signum()
    }
}

pub fn psi_n_prime<T: Real>(r: T, n: T) -> T {
    let m = r.abs().min(n);
    lit::<T>(3.0) * m * m
}

/// Companion of [`psi_n`] with `Psi_n'^2 = psi_n'`.
pub fn big_psi_n<T: Real>(r: T, n: T) -> T {
    let s3 = lit::<T>(3.0).sqrt();
    let half = lit::<T>(0.5);
    let a = r.abs();
    if a <= n {
        s3 * half * r * r
    } else {
        s3 * n * a - s3 * half * n * n
    }
}

pub fn big_psi_n_prime<T: Real>(r: T, n: T) -> T {
    lit::<T>(3.0).sqrt() * r.abs().min(n) * r.signum()
}

/// Cutoff level of the truncated cubic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation<T> {
    n: T,
}

impl<T: Real> Truncation<T> {
    pub fn new(n: T) -> Result<Self> {
        if !(n > T::zero()) {
            return Err(invalid("n", format!("must be positive, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn psi(&self, r: T) -> T {
        psi_n(r, self.n)
    }
}

/// Additive constant of the appendix energy: `2 C_F L^d + 8 / lambda0`, where
/// `F(u) >= -(lambda0 / 8) u^2 - C_F`.
pub fn energy_constant<T: Real>(physics: &Physics<T>) -> T {
    let lambda0 = to_f64(physics.lambda0());
    let c_f = physics.nonlinearity().potential_lower_constant(lambda0);
    let volume = physics.domain().length().powi(physics.domain().dim() as i32);
    lit::<T>(2.0 * c_f) * volume + lit::<T>(8.0) / physics.lambda0()
}

/// Terms of `E = 1/2 ||v||^2 + 1/2 ||grad u||^2 + 1/2 lambda0 ||u||^2 + int F(u) - (g, u)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnweightedEnergy<T> {
    pub kinetic: T,
    pub gradient: T,
    pub potential: T,
    pub nonlinear: T,
    pub forcing: T,
}

impl<T: Real> UnweightedEnergy<T> {
    pub fn total(&self) -> T {
        self.kinetic + self.gradient + self.potential + self.nonlinear + self.forcing
    }

    /// Quadratic part `1/2 ||xi||^2`.
    pub fn quadratic(&self) -> T {
        self.kinetic + self.gradient + self.potential
    }
}

pub fn unweighted_energy<T: Real>(state: &State<T>, physics: &Physics<T>) -> UnweightedEnergy<T> {
    let half = lit::<T>(0.5);
    let nl = physics.nonlinearity();
    UnweightedEnergy {
        kinetic: half * state.v.l2_norm_sq(),
        gradient: half * state.u.gradient_norm_sq(),
        potential: half * physics.lambda0() * state.u.l2_norm_sq(),
        nonlinear: state.u.to_grid().map(|x| nl.potential(x)).integral(),
        forcing: -physics.source().inner(&state.u),
    }
}

/// `gamma ||A^{1/4} v||^2`, the rate at which the damping removes energy.
pub fn dissipation_rate<T: Real>(state: &State<T>, physics: &Physics<T>) -> T {
    let bns = state.domain().basis_norm_sq();
    let sum: T = state
        .domain()
        .laplacian_eigenvalues()
        .into_iter()
        .zip(state.v.coeffs())
        .map(|(mu, &c)| (T::one() + mu).sqrt() * c * c)
        .sum();
    physics.gamma() * bns * sum
}

/// Grid data shared by every center when evaluating one ledger row.
struct RowContext<T: Real> {
    u: GridField<T>,
    v: GridField<T>,
    du: Vec<AxisClosedGrid<T>>,
    potential: GridField<T>,
    source: GridField<T>,
    a14_u: GridField<T>,
    a14_v: GridField<T>,
    a12_u: GridField<T>,
    a34_u: GridField<T>,
    utt: GridField<T>,
}

impl<T: Real> RowContext<T> {
    fn new(state: &State<T>, physics: &Physics<T>) -> Self {
        let dim = state.domain().dim();
        let power = |f: &SpectralField<T>, theta: f64| f.apply_symbol(|mu| (T::one() + mu).powf(lit(theta))).to_grid();
        let u = state.u.to_grid();
        let nl = physics.nonlinearity();
        Self {
            potential: u.map(|x| nl.potential(x)),
            v: state.v.to_grid(),
            du: (0..dim).map(|axis| state.u.derivative_closed(axis)).collect(),
            source: physics.source().to_grid(),
            a14_u: power(&state.u, 0.25),
            a14_v: power(&state.v, 0.25),
            a12_u: power(&state.u, 0.5),
            a34_u: power(&state.u, 0.75),
            utt: pde_residual(state, physics).to_grid(),
            u,
        }
    }

    fn energy_norm(&self, w: &SampledWeight<T>, lambda0: T) -> T {
        w.gradient_norm_sq_from(&self.du) + lambda0 * w.l2_norm_sq(&self.u) + w.l2_norm_sq(&self.v)
    }

    fn appendix_energy(&self, w: &SampledWeight<T>, delta: T, physics: &Physics<T>, constant: T) -> T {
        let two = lit::<T>(2.0);
        let ones = self.u.map(|_| T::one());
        self.energy_norm(w, physics.lambda0()) + two * w.weighted_inner(&self.potential, &ones, 2)
            - two * w.weighted_inner(&self.source, &self.u, 2)
            + two * delta * w.weighted_inner(&self.v, &self.u, 2)
            + delta * physics.gamma() * w.l2_norm_sq(&self.a14_u)
            + constant * (T::one() + w.l2_norm_sq(&self.source))
    }

    fn lyapunov(&self, w: &SampledWeight<T>, n: Option<T>, gamma: T) -> T {
        let multiplier = match n {
            Some(n) => self.u.map(|x| psi_n(x, n)),
            None => self.u.map(|x| x * x * x),
        };
        let drive = self.v.zip_map(&self.a12_u, |v, a| v + gamma * a);
        w.weighted_inner(&multiplier, &drive, 4)
    }
}

fn check_delta<T: Real>(delta: T, physics: &Physics<T>) -> Result<()> {
    let max = physics.delta_max();
    if !(delta >= T::zero() && delta <= max) {
        return Err(invalid("delta", format!("must lie in [0, {max}], got {delta}")));
    }
    Ok(())
}

/// `(phi v, phi^3 psi_n(u)) + gamma (phi A^{1/2} u, phi^3 psi_n(u))`; `n = None`
/// uses `u^3` itself.
pub fn lyapunov_psi<T: Real>(state: &State<T>, spec: &WeightSpec<T>, n: Option<T>, physics: &Physics<T>) -> Result<T> {
    if let Some(n) = n {
        Truncation::new(n)?;
    }
    let w = SampledWeight::new(spec, state.domain())?;
    Ok(RowContext::new(state, physics).lyapunov(&w, n, physics.gamma()))
}

/// The appendix energy
///
/// ```text
/// ||xi||^2_E + 2 (phi^2, F(u)) - 2 (phi g, phi u) + 2 delta (phi v, phi u)
///     + delta gamma ||phi A^{1/4} u||^2 + C_eps (1 + ||phi g||^2).
/// ```
pub fn appendix_energy<T: Real>(state: &State<T>, spec: &WeightSpec<T>, delta: T, physics: &Physics<T>) -> Result<T> {
    check_delta(delta, physics)?;
    let w = SampledWeight::new(spec, state.domain())?;
    Ok(RowContext::new(state, physics).appendix_energy(&w, delta, physics, energy_constant(physics)))
}

/// Quantities recorded per center in every ledger row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `||xi||^2` in the weighted energy space.
    EnergyNorm,
    /// Appendix energy with weight `phi_eps`.
    AppendixEnergy,
    /// Appendix energy with weight `phi_{3 eps}`.
    AppendixEnergy3,
    /// `||phi A^{1/4} u_t||^2`
    DampedVelocity,
    /// `||phi u||_{L^12}^4`
    L12Fourth,
    /// `||phi A^{3/4} u||^2`
    H32,
    /// `||A^{-1/4}(phi u_tt)||^2`
    Utt,
    /// `||phi u||_{L^10}`
    L10,
    /// `||phi u||_{L^6}`
    L6,
    /// `||u||_{L^12(B_2)}^4`
    BallL12Fourth,
    /// Truncated-cubic Lyapunov functional.
    Lyapunov,
    /// Same with the plain cube.
    LyapunovCubic,
}

impl Quantity {
    pub const ALL: [Quantity; 12] = [
        Quantity::EnergyNorm,
        Quantity::AppendixEnergy,
        Quantity::AppendixEnergy3,
        Quantity::DampedVelocity,
        Quantity::L12Fourth,
        Quantity::H32,
        Quantity::Utt,
        Quantity::L10,
        Quantity::L6,
        Quantity::BallL12Fourth,
        Quantity::Lyapunov,
        Quantity::LyapunovCubic,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&q| q == self).expect("listed")
    }

    pub fn name(self) -> &'static str {
        match self {
            Quantity::EnergyNorm => "energy_norm_sq",
            Quantity::AppendixEnergy => "appendix_energy",
            Quantity::AppendixEnergy3 => "appendix_energy_3eps",
            Quantity::DampedVelocity => "weighted_a14_ut_sq",
            Quantity::L12Fourth => "weighted_l12_u_pow4",
            Quantity::H32 => "weighted_a34_u_sq",
            Quantity::Utt => "am14_weighted_utt_sq",
            Quantity::L10 => "weighted_l10_u",
            Quantity::L6 => "weighted_l6_u",
            Quantity::BallL12Fourth => "ball2_l12_u_pow4",
            Quantity::Lyapunov => "lyapunov_psi",
            Quantity::LyapunovCubic => "lyapunov_cubic",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Quantity::EnergyNorm => "||phi grad u||^2 + lambda0 ||phi u||^2 + ||phi u_t||^2",
            Quantity::AppendixEnergy => "appendix energy with weight phi_eps",
            Quantity::AppendixEnergy3 => "appendix energy with weight phi_{3 eps}",
            Quantity::DampedVelocity => "||phi A^{1/4} u_t||^2",
            Quantity::L12Fourth => "||phi u||_{L^12}^4",
            Quantity::H32 => "||phi A^{3/4} u||^2",
            Quantity::Utt => "||A^{-1/4}(phi u_tt)||^2",
            Quantity::L10 => "||phi u||_{L^10}",
            Quantity::L6 => "||phi u||_{L^6}",
            Quantity::BallL12Fourth => "||u||_{L^12(B_2(x0))}^4",
            Quantity::Lyapunov => "(phi u_t + gamma phi A^{1/2} u, phi^3 psi_n(u))",
            Quantity::LyapunovCubic => "(phi u_t + gamma phi A^{1/2} u, phi^3 u^3)",
        }
    }

    /// `sup` aggregate; the Lyapunov functionals are signed and have none.
    pub fn has_sup(self) -> bool {
        !matches!(self, Quantity::Lyapunov | Quantity::LyapunovCubic)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub energy: UnweightedEnergy<f64>,
    pub dissipation: f64,
    pub max_abs_u: f64,
    /// `centers[c][q.index()]`
    pub centers: Vec<[f64; 12]>,
}

impl LedgerRow {
    pub fn get(&self, center: usize, q: Quantity) -> f64 {
        self.centers[center][q.index()]
    }

    pub fn sup(&self, q: Quantity) -> f64 {
        self.centers.iter().map(|c| c[q.index()]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Settings of the per-row monitor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorConfig {
    pub epsilon: f64,
    pub centers: Vec<Vec<f64>>,
    /// `delta` of the appendix energy; `None` uses `delta_max / 2`.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Cutoff of the truncated cubic; `None` uses 10 times the running max of `|u|`.
    #[serde(default)]
    pub lyapunov_n: Option<f64>,
}

/// Evaluates ledger rows for a fixed physics and center set.
#[derive(Clone, Debug)]
pub struct Monitor<T: Real> {
    physics: Physics<T>,
    config: MonitorConfig,
    delta: T,
    constant: T,
    weights: Vec<SampledWeight<T>>,
    weights3: Vec<SampledWeight<T>>,
    balls: Vec<Vec<bool>>,
    running_max: T,
}

impl<T: Real> Monitor<T> {
    pub fn new(physics: &Physics<T>, config: MonitorConfig) -> Result<Self> {
        if config.centers.is_empty() {
            return Err(Error::EmptyCenters);
        }
        let d = physics.domain();
        let delta = match config.delta {
            Some(x) => lit::<T>(x),
            None => physics.delta_max() / lit(2.0),
        };
        check_delta(delta, physics)?;
        if let Some(n) = config.lyapunov_n {
            Truncation::new(n)?;
        }
        let eps = lit::<T>(config.epsilon);
        let mut weights = Vec::new();
        let mut weights3 = Vec::new();
        let mut balls = Vec::new();
        for c in &config.centers {
            let center: Vec<T> = c.iter().map(|&x| lit(x)).collect();
            weights.push(SampledWeight::new(&WeightSpec::smooth(eps, &center)?, d)?);
            weights3.push(SampledWeight::new(&WeightSpec::smooth(lit::<T>(3.0) * eps, &center)?, d)?);
            let mask = (0..d.num_grid())
                .map(|flat| {
                    let x = d.grid_point(flat);
                    center.iter().zip(&x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() < lit(4.0)
                })
                .collect();
            balls.push(mask);
        }
        Ok(Self {
            physics: physics.clone(),
            config,
            delta,
            constant: energy_constant(physics),
            weights,
            weights3,
            balls,
            running_max: T::zero(),
        })
    }

    pub fn config(&self) -> &MonitorConfig {
        &self.config
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn energy_constant(&self) -> T {
        self.constant
    }

    pub fn physics(&self) -> &Physics<T> {
        &self.physics
    }

    /// Evaluates one row; updates the running max of `|u|` used by the default cutoff.
    pub fn evaluate(&mut self, state: &State<T>) -> Result<LedgerRow> {
        let ctx = RowContext::new(state, &self.physics);
        let max_abs = ctx.u.max_abs();
        self.running_max = self.running_max.max(max_abs);
        let n = match self.config.lyapunov_n {
            Some(n) => lit::<T>(n),
            None => (lit::<T>(10.0) * self.running_max).max(T::min_positive_value()),
        };
        let d = state.domain();
        let h = d.cell_volume();
        let gamma = self.physics.gamma();
        let lambda0 = self.physics.lambda0();
        let mut centers = Vec::with_capacity(self.weights.len());
        for ((w, w3), ball) in self.weights.iter().zip(&self.weights3).zip(&self.balls) {
            let weighted_utt = w.multiply(&ctx.utt).to_spectral();
            let utt = weighted_utt.apply_symbol(|mu| (T::one() + mu).powf(lit(-0.25))).l2_norm_sq();
            let ball_sum: T = ctx
                .u
                .values()
                .iter()
                .zip(ball)
                .filter(|(_, &inside)| inside)
                .map(|(&x, _)| x.powi(12))
                .sum();
            let mut values = [0.0; 12];
            let mut set = |q: Quantity, x: T| values[q.index()] = to_f64(x);
            set(Quantity::EnergyNorm, ctx.energy_norm(w, lambda0));
            set(Quantity::AppendixEnergy, ctx.appendix_energy(w, self.delta, &self.physics, self.constant));
            set(Quantity::AppendixEnergy3, ctx.appendix_energy(w3, self.delta, &self.physics, self.constant));
            set(Quantity::DampedVelocity, w.l2_norm_sq(&ctx.a14_v));
            set(Quantity::L12Fourth, w.lp_norm(&ctx.u, 12)?.powi(4));
            set(Quantity::H32, w.l2_norm_sq(&ctx.a34_u));
            set(Quantity::Utt, utt);
            set(Quantity::L10, w.lp_norm(&ctx.u, 10)?);
            set(Quantity::L6, w.lp_norm(&ctx.u, 6)?);
            set(Quantity::BallL12Fourth, (ball_sum * h).powf(lit(1.0 / 3.0)));
            set(Quantity::Lyapunov, ctx.lyapunov(w, Some(n), gamma));
            set(Quantity::LyapunovCubic, ctx.lyapunov(w, None, gamma));
            centers.push(values);
        }
        let e = unweighted_energy(state, &self.physics);
        Ok(LedgerRow {
            t: to_f64(state.t),
            energy: UnweightedEnergy {
                kinetic: to_f64(e.kinetic),
                gradient: to_f64(e.gradient),
                potential: to_f64(e.potential),
                nonlinear: to_f64(e.nonlinear),
                forcing: to_f64(e.forcing),
            },
            dissipation: to_f64(dissipation_rate(state, &self.physics)),
            max_abs_u: to_f64(max_abs),
            centers,
        })
    }
}

/// One column of the ledger manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub unit: String,
    pub description: String,
}

/// Description of the CSV columns and of the centers they refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerManifest {
    pub columns: Vec<ColumnSpec>,
    pub epsilon: f64,
    pub centers: Vec<Vec<f64>>,
}

const SCALAR_COLUMNS: [(&str, &str, &str); 9] = [
    ("t", "time", "simulation time"),
    ("energy_kinetic", "energy", "1/2 ||u_t||^2"),
    ("energy_gradient", "energy", "1/2 ||grad u||^2"),
    ("energy_potential", "energy", "1/2 lambda0 ||u||^2"),
    ("energy_nonlinear", "energy", "int F(u)"),
    ("energy_forcing", "energy", "-(g, u)"),
    ("energy_total", "energy", "sum of the energy terms"),
    ("dissipation", "energy/time", "gamma ||A^{1/4} u_t||^2"),
    ("max_abs_u", "1", "max |u| on the grid"),
];

/// Time series of ledger rows for one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub epsilon: f64,
    pub centers: Vec<Vec<f64>>,
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn new(epsilon: f64, centers: Vec<Vec<f64>>) -> Self {
        Self {
            epsilon,
            centers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: LedgerRow) -> Result<()> {
        if row.centers.len() != self.centers.len() {
            return Err(Error::MismatchedCenters);
        }
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(invalid("t", format!("ledger times must increase: {} after {}", row.t, last.t)));
            }
        }
        let finite = row.t.is_finite()
            && row.dissipation.is_finite()
            && row.energy.total().is_finite()
            && row.centers.iter().flatten().all(|x| x.is_finite());
        if !finite {
            return Err(invalid("row", format!("non-finite entry at t = {}", row.t)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Values of `q` at one center over time.
    pub fn series(&self, center: usize, q: Quantity) -> Vec<f64> {
        self.rows.iter().map(|r| r.get(center, q)).collect()
    }

    pub fn sup_series(&self, q: Quantity) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup(q)).collect()
    }

    pub fn manifest(&self) -> LedgerManifest {
        let mut columns: Vec<ColumnSpec> = SCALAR_COLUMNS
            .iter()
            .map(|(n, u, d)| ColumnSpec {
                name: n.to_string(),
                unit: u.to_string(),
                description: d.to_string(),
            })
            .collect();
        for q in Quantity::ALL.iter().filter(|q| q.has_sup()) {
            columns.push(ColumnSpec {
                name: format!("sup_{}", q.name()),
                unit: "1".into(),
                description: format!("sup over centers of {}", q.description()),
            });
        }
        for c in 0..self.centers.len() {
            for q in Quantity::ALL {
                columns.push(ColumnSpec {
                    name: format!("{}@c{c}", q.name()),
                    unit: "1".into(),
                    description: format!("{} at center {c}", q.description()),
                });
            }
        }
        LedgerManifest {
            columns,
            epsilon: self.epsilon,
            centers: self.centers.clone(),
        }
    }

    /// Values of one row in manifest column order.
    pub fn row_values(&self, i: usize) -> Vec<f64> {
        let r = &self.rows[i];
        let e = &r.energy;
        let mut out = vec![r.t, e.kinetic, e.gradient, e.potential, e.nonlinear, e.forcing, e.total(), r.dissipation, r.max_abs_u];
        out.extend(Quantity::ALL.iter().filter(|q| q.has_sup()).map(|&q| r.sup(q)));
        for c in &r.centers {
            out.extend_from_slice(c);
        }
        out
    }
}

/// Trapezoidal `int_a^b` of a sampled series, interpolating linearly at the ends.
pub fn integrate_trapezoid(times: &[f64], values: &[f64], a: f64, b: f64) -> Result<f64> {
    let tol = 1e-9 * (1.0 + b.abs());
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(Error::InsufficientCoverage { start: a, end: b });
    };
    if a > b || first > a + tol || last < b - tol {
        return Err(Error::InsufficientCoverage { start: a, end: b });
    }
    let interp = |t: f64| -> f64 {
        let j = times.partition_point(|&s| s <= t).clamp(1, times.len().max(2) - 1);
        if times.len() == 1 {
            return values[0];
        }
        let (t0, t1) = (times[j - 1], times[j]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        values[j - 1] * (1.0 - w) + values[j] * w
    };
    let mut nodes = vec![(a, interp(a))];
    for (&t, &v) in times.iter().zip(values) {
        if t > a && t < b {
            nodes.push((t, v));
        }
    }
    nodes.push((b, interp(b)));
    Ok(nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// Sup over centers of the window integrals ending at `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WindowIntegrals {
    pub start: f64,
    pub end: f64,
    /// `int ||phi u||_{L^12}^4`
    pub l12: f64,
    /// `int ||phi A^{3/4} u||^2`
    pub h32: f64,
    /// `int ||A^{-1/4}(phi u_tt)||^2`
    pub utt: f64,
}

pub fn window_integrals(ledger: &EnergyLedger, t: f64, window: f64) -> Result<WindowIntegrals> {
    if !(window > 0.0) {
        return Err(invalid("window", format!("must be positive, got {window}")));
    }
    let start = (t - window).max(0.0);
    let times = ledger.times();
    let sup = |q: Quantity| -> Result<f64> {
        let mut best: f64 = 0.0;
        for c in 0..ledger.centers.len() {
            best = best.max(integrate_trapezoid(&times, &ledger.series(c, q), start, t)?);
        }
        Ok(best)
    };
    Ok(WindowIntegrals {
        start,
        end: t,
        l12: sup(Quantity::L12Fourth)?,
        h32: sup(Quantity::H32)?,
        utt: sup(Quantity::Utt)?,
    })
}

/// `sup_{x0} exp(C int_0^T (1 + ||u1||^4_{L^12(B_2)} + ||u2||^4_{L^12(B_2)}))`.
pub fn twin_factor_at(first: &EnergyLedger, second: &EnergyLedger, horizon: f64, c: f64) -> Result<f64> {
    if first.centers != second.centers {
        return Err(Error::MismatchedCenters);
    }
    let (t1, t2) = (first.times(), second.times());
    let mut best = f64::NEG_INFINITY;
    for center in 0..first.centers.len() {
        let i1 = integrate_trapezoid(&t1, &first.series(center, Quantity::BallL12Fourth), 0.0, horizon)?;
        let i2 = integrate_trapezoid(&t2, &second.series(center, Quantity::BallL12Fourth), 0.0, horizon)?;
        best = best.max(c * (horizon + i1 + i2));
    }
    Ok(best.exp())
}

/// Keeps every `k`-th row of a ledger.
pub fn thin_ledger(ledger: &EnergyLedger, k: usize) -> EnergyLedger {
    EnergyLedger {
        epsilon: ledger.epsilon,
        centers: ledger.centers.clone(),
        rows: ledger.rows.iter().step_by(k.max(1)).cloned().collect(),
    }
}

/// `n + 1` equally spaced times from `t0` to `t1`.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Nonlinearity;
    use crate::grid::BoxDomain;
    use approx::assert_relative_eq;

    #[test]
    fn truncated_cubic_values() {
        assert_eq!(psi_n(1.0, 2.0), 1.0);
        assert_eq!(psi_n(3.0, 2.0), 20.0);
        assert_eq!(psi_n(-3.0, 2.0), -20.0);
        for n in [1.0f64, 2.0, 10.0] {
            for r in [0.5 * n, n, 2.0 * n] {
                assert_relative_eq!(big_psi_n_prime(r, n).powi(2), psi_n_prime(r, n), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn truncated_cubic_properties() {
        for n in [1.0f64, 2.0, 10.0] {
            let cn = 3.0 * n * n;
            for i in -4000..=4000 {
                let r = i as f64 * n / 1000.0;
                let p = psi_n(r, n);
                assert!(p.abs() <= cn * r.abs() + 1e-9 * n.powi(3));
                assert!(psi_n_prime(r, n) >= 0.0);
                assert!(big_psi_n(r, n).powi(2) <= p * r * (1.0 + 1e-12) + 1e-12);
                assert_eq!(psi_n(-r, n), -p);
                assert_eq!(big_psi_n(-r, n), big_psi_n(r, n));
            }
            // C^1 across the joints
            for r in [n, -n] {
                let h = 1e-7 * n;
                assert_relative_eq!(psi_n(r + h, n) - psi_n(r, n), psi_n(r, n) - psi_n(r - h, n), max_relative = 1e-5);
                assert_relative_eq!(big_psi_n(r + h, n) - big_psi_n(r, n), big_psi_n(r, n) - big_psi_n(r - h, n), max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn trapezoid_on_constants_and_lines() {
        let t = uniform_times(0.0, 3.0, 30);
        let c = vec![2.5; t.len()];
        assert_relative_eq!(integrate_trapezoid(&t, &c, 1.0, 2.0).unwrap(), 2.5, epsilon = 1e-12);
        let lin: Vec<f64> = t.iter().map(|x| 3.0 * x).collect();
        assert_relative_eq!(integrate_trapezoid(&t, &lin, 0.25, 1.55).unwrap(), 1.5 * (1.55f64.powi(2) - 0.0625), epsilon = 1e-12);
        assert!(integrate_trapezoid(&t, &c, 2.0, 4.0).is_err());
    }

    #[test]
    fn energies_of_zero_state() {
        let d = BoxDomain::new(1, 10.0, 16, 3).unwrap();
        let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::default()).unwrap();
        let s = State::zeros(&d);
        assert_eq!(unweighted_energy(&s, &p).total(), 0.0);
        let w = WeightSpec::smooth(0.1, &[5.0]).unwrap();
        assert_eq!(lyapunov_psi(&s, &w, Some(1.0), &p).unwrap(), 0.0);
        assert_relative_eq!(appendix_energy(&s, &w, 0.0, &p).unwrap(), energy_constant(&p));
        assert!(appendix_energy(&s, &w, 0.5, &p).is_err());
    }
}
