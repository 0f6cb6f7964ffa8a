//! Time integration of
//!
//! ```text
//! u_tt + gamma A^{1/2} u_t - Delta u + lambda0 u + f(u) = g,    A = -Delta + 1,
//! ```
//!
//! by Strang splitting: the linear part is advanced exactly mode by mode
//! (a damped oscillator with constant forcing), the nonlinearity by a kick
//! `v <- v - dt P f(u)` evaluated on the padded grid.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{BoxDomain, GridField, SpectralField};
use crate::scalar::{count, lit, Real};
use crate::special::sine_integral;

/// Grid values beyond this magnitude abort the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// `|a^2 - 4b|` below this is treated as critical damping.
const CRITICAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Nonlinearity {
    /// `u^5 + c3 u^3 + c1 u`
    Quintic {
        #[serde(default)]
        c3: f64,
        #[serde(default)]
        c1: f64,
    },
    /// `sin(u^5) / u`, extended by 0 at the origin.
    Sin5,
    Zero,
}

impl Default for Nonlinearity {
    fn default() -> Self {
        Nonlinearity::Quintic { c3: 0.0, c1: 0.0 }
    }
}

/// Nonnegative roots of `a y^2 + b y + c` (with `a > 0`).
fn nonneg_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut roots = vec![q / a];
    if q != 0.0 {
        roots.push(c / q);
    }
    roots.into_iter().filter(|&y| y >= 0.0 && y.is_finite()).collect()
}

impl Nonlinearity {
    pub fn f<T: Real>(&self, u: T) -> T {
        match *self {
            Nonlinearity::Quintic { c3, c1 } => {
                let u2 = u * u;
                u * (u2 * u2 + lit::<T>(c3) * u2 + lit::<T>(c1))
            }
            Nonlinearity::Sin5 => {
                if u.is_zero() {
                    T::zero()
                } else {
                    u.powi(5).sin() / u
                }
            }
            Nonlinearity::Zero => T::zero(),
        }
    }

    pub fn derivative<T: Real>(&self, u: T) -> T {
        match *self {
            Nonlinearity::Quintic { c3, c1 } => {
                let u2 = u * u;
                lit::<T>(5.0) * u2 * u2 + lit::<T>(3.0 * c3) * u2 + lit::<T>(c1)
            }
            Nonlinearity::Sin5 => {
                if u.is_zero() {
                    T::zero()
                } else {
                    let u5 = u.powi(5);
                    lit::<T>(5.0) * u.powi(3) * u5.cos() - u5.sin() / (u * u)
                }
            }
            Nonlinearity::Zero => T::zero(),
        }
    }

    /// Antiderivative `F(u) = int_0^u f`.
    pub fn potential<T: Real>(&self, u: T) -> T {
        match *self {
            Nonlinearity::Quintic { c3, c1 } => {
                let u2 = u * u;
                u2 * (u2 * u2 / lit(6.0) + lit::<T>(c3 / 4.0) * u2 + lit::<T>(c1 / 2.0))
            }
            // Substituting t = s^5 turns int sin(s^5)/s ds into Si(u^5)/5.
            Nonlinearity::Sin5 => sine_integral(u.powi(5)) / lit(5.0),
            Nonlinearity::Zero => T::zero(),
        }
    }

    /// `C` with `|f'(s)| <= C (1 + |s|^4)`.
    pub fn growth_constant(&self) -> f64 {
        match *self {
            // 3 |c3| s^2 <= 1.5 |c3| (1 + s^4)
            Nonlinearity::Quintic { c3, c1 } => 5.0 + 1.5 * c3.abs() + c1.abs(),
            // |5 s^3 cos| <= 5 (1 + s^4) and |sin(s^5)| / s^2 <= min(|s|^3, s^-2) <= 1
            Nonlinearity::Sin5 => 6.0,
            Nonlinearity::Zero => 0.0,
        }
    }

    /// `M` with `f(s) s >= -M`.
    pub fn dissipation_constant(&self) -> f64 {
        match *self {
            Nonlinearity::Quintic { c3, c1 } => {
                // f(s) s = y^3 + c3 y^2 + c1 y with y = s^2 >= 0.
                let cubic = |y: f64| y * (y * y + c3 * y + c1);
                let min = nonneg_quadratic_roots(3.0, 2.0 * c3, c1)
                    .into_iter()
                    .map(cubic)
                    .fold(0.0, f64::min);
                -min
            }
            Nonlinearity::Sin5 => 1.0,
            Nonlinearity::Zero => 0.0,
        }
    }

    /// `C` with `F(u) >= -(lambda0 / 8) u^2 - C`.
    pub fn potential_lower_constant(&self, lambda0: f64) -> f64 {
        let a = lambda0 / 8.0;
        match *self {
            Nonlinearity::Quintic { c3, c1 } => {
                // F(u) + a u^2 = y^3/6 + c3 y^2/4 + (c1/2 + a) y with y = u^2;
                // its derivative in y is (y^2 + c3 y + c1 + 2a) / 2.
                let g = |y: f64| y * (y * y / 6.0 + c3 * y / 4.0 + c1 / 2.0 + a);
                let min = nonneg_quadratic_roots(1.0, c3, c1 + 2.0 * a)
                    .into_iter()
                    .map(g)
                    .fold(0.0, f64::min);
                -min
            }
            Nonlinearity::Sin5 => {
                // |F| <= Si(pi)/5, so F(u) + a u^2 >= 0 once a u^2 >= Si(pi)/5.
                // F is odd; scan u <= 0 and add the Lipschitz slack of the scan.
                let cap = sine_integral(std::f64::consts::PI) / 5.0;
                let guard = (cap / a).sqrt();
                let n = 20_000;
                let step = guard / n as f64;
                let min = (0..=n)
                    .map(|i| {
                        let u = -(i as f64) * step;
                        self.potential(u) + a * u * u
                    })
                    .fold(0.0, f64::min);
                let lipschitz = 1.0 + 2.0 * a * guard;
                -min + lipschitz * step
            }
            Nonlinearity::Zero => 0.0,
        }
    }
}

/// Coefficients of the equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Physics<T: Real> {
    gamma: T,
    lambda0: T,
    nonlinearity: Nonlinearity,
    source: SpectralField<T>,
}

impl<T: Real> Physics<T> {
    pub fn new(gamma: T, lambda0: T, nonlinearity: Nonlinearity, source: SpectralField<T>) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(lambda0 > T::zero() && lambda0.is_finite()) {
            return Err(invalid("lambda0", format!("must be positive, got {lambda0}")));
        }
        Ok(Self {
            gamma,
            lambda0,
            nonlinearity,
            source,
        })
    }

    /// Unforced physics on `domain`.
    pub fn homogeneous(domain: &Arc<BoxDomain<T>>, gamma: T, lambda0: T, nonlinearity: Nonlinearity) -> Result<Self> {
        Self::new(gamma, lambda0, nonlinearity, SpectralField::zeros(domain))
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn lambda0(&self) -> T {
        self.lambda0
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.nonlinearity
    }

    pub fn source(&self) -> &SpectralField<T> {
        &self.source
    }

    pub fn domain(&self) -> &Arc<BoxDomain<T>> {
        self.source.domain()
    }

    /// Damping `a = gamma sqrt(1 + mu)` and stiffness `b = mu + lambda0` of a mode.
    pub fn mode_coefficients(&self, mu: T) -> (T, T) {
        (self.gamma * (T::one() + mu).sqrt(), mu + self.lambda0)
    }

    /// Largest admissible `delta` in the appendix energy.
    pub fn delta_max(&self) -> T {
        self.gamma.min(self.lambda0).min(T::one()) / lit(10.0)
    }

    /// `P f(u)` through the padded grid.
    pub fn nonlinear_term(&self, u: &GridField<T>) -> SpectralField<T> {
        let nl = self.nonlinearity;
        u.map(|x| nl.f(x)).to_spectral()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State<T: Real> {
    pub u: SpectralField<T>,
    pub v: SpectralField<T>,
    pub t: T,
}

impl<T: Real> State<T> {
    pub fn new(u: SpectralField<T>, v: SpectralField<T>, t: T) -> Result<Self> {
        if u.domain() != v.domain() {
            return Err(Error::DomainMismatch);
        }
        Ok(Self { u, v, t })
    }

    pub fn zeros(domain: &Arc<BoxDomain<T>>) -> Self {
        Self {
            u: SpectralField::zeros(domain),
            v: SpectralField::zeros(domain),
            t: T::zero(),
        }
    }

    pub fn domain(&self) -> &Arc<BoxDomain<T>> {
        self.u.domain()
    }

    /// Scales both components, keeping the time.
    pub fn scaled(&self, a: T) -> Self {
        Self {
            u: self.u.scaled(a),
            v: self.v.scaled(a),
            t: self.t,
        }
    }

    /// Unweighted `||grad u||^2 + lambda0 ||u||^2 + ||v||^2`.
    pub fn energy_norm_sq(&self, lambda0: T) -> T {
        self.u.gradient_norm_sq() + lambda0 * self.u.l2_norm_sq() + self.v.l2_norm_sq()
    }
}

/// Random initial data with coefficients `|k|^-r` times standard normals,
/// scaled so that the unweighted energy norm squared equals `target_energy`.
pub fn random_initial_state<T: Real, R: Rng + ?Sized>(
    domain: &Arc<BoxDomain<T>>,
    r_u: T,
    r_v: T,
    target_energy: T,
    lambda0: T,
    rng: &mut R,
) -> Result<State<T>> {
    if !(target_energy >= T::zero() && target_energy.is_finite()) {
        return Err(invalid("target_energy", format!("must be finite and >= 0, got {target_energy}")));
    }
    let raw = State {
        u: SpectralField::random(domain, r_u, rng),
        v: SpectralField::random(domain, r_v, rng),
        t: T::zero(),
    };
    let norm = raw.energy_norm_sq(lambda0);
    if norm.is_zero() {
        return Ok(raw);
    }
    Ok(raw.scaled((target_energy / norm).sqrt()))
}

/// `1 + x/6 + x^2/120 + ...`, i.e. `sinh(sqrt x)/sqrt x` for small `|x|`.
fn sinhc_series<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..12usize {
        term = term * x / count((2 * k) * (2 * k + 1));
        sum = sum + term;
    }
    sum
}

/// `1 + x/2 + x^2/24 + ...`, i.e. `cosh(sqrt x)` for small `|x|`.
fn cosh_series<T: Real>(x: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for k in 1..12usize {
        term = term * x / count((2 * k - 1) * (2 * k));
        sum = sum + term;
    }
    sum
}

/// `exp(tau [[0, 1], [-b, -a]])` as `[m00, m01, m10, m11]`.
pub fn oscillator_exponential<T: Real>(a: T, b: T, tau: T) -> [T; 4] {
    let alpha = a / lit(2.0);
    let disc = alpha * alpha - b;
    // exp(A tau) = exp(-alpha tau) (c I + s (A + alpha I))
    let (c, s) = if (a * a - lit::<T>(4.0) * b).abs() < lit(CRITICAL_TOL) {
        let e = (-alpha * tau).exp();
        (e, e * tau)
    } else {
        let x = disc * tau * tau;
        if x.abs() < lit(1e-2) {
            let e = (-alpha * tau).exp();
            (e * cosh_series(x), e * tau * sinhc_series(x))
        } else if disc < T::zero() {
            let omega = (-disc).sqrt();
            let e = (-alpha * tau).exp();
            (e * (omega * tau).cos(), e * (omega * tau).sin() / omega)
        } else {
            // nu - alpha = -b / (alpha + nu) avoids cancellation and overflow.
            let nu = disc.sqrt();
            let slow = (-b / (alpha + nu) * tau).exp();
            let fast = (-(alpha + nu) * tau).exp();
            ((slow + fast) / lit(2.0), (slow - fast) / (lit::<T>(2.0) * nu))
        }
    };
    [c + s * alpha, s, -s * b, c + s * (alpha - a)]
}

/// Exact linear flow over a fixed step, with forcing by the equilibrium shift.
#[derive(Clone, Debug)]
pub struct LinearPropagator<T: Real> {
    tau: T,
    matrices: Vec<[T; 4]>,
    equilibrium: Vec<T>,
}

impl<T: Real> LinearPropagator<T> {
    pub fn new(physics: &Physics<T>, tau: T) -> Self {
        let mus = physics.domain().laplacian_eigenvalues();
        let mut matrices = Vec::with_capacity(mus.len());
        let mut equilibrium = Vec::with_capacity(mus.len());
        for (mu, &g) in mus.into_iter().zip(physics.source().coeffs()) {
            let (a, b) = physics.mode_coefficients(mu);
            matrices.push(oscillator_exponential(a, b, tau));
            equilibrium.push(g / b);
        }
        Self {
            tau,
            matrices,
            equilibrium,
        }
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn apply(&self, state: &State<T>) -> State<T> {
        let mut u = state.u.clone();
        let mut v = state.v.clone();
        for (i, (m, &eq)) in self.matrices.iter().zip(&self.equilibrium).enumerate() {
            let x = state.u.coeffs()[i] - eq;
            let y = state.v.coeffs()[i];
            u.coeffs_mut()[i] = eq + m[0] * x + m[1] * y;
            v.coeffs_mut()[i] = m[2] * x + m[3] * y;
        }
        State {
            u,
            v,
            t: state.t + self.tau,
        }
    }
}

pub fn linear_halfstep<T: Real>(state: &State<T>, tau: T, physics: &Physics<T>) -> State<T> {
    if tau == T::zero() {
        return state.clone();
    }
    LinearPropagator::new(physics, tau).apply(state)
}

fn check_grid<T: Real>(grid: &GridField<T>, t: T) -> Result<()> {
    let max = grid.max_abs();
    if !(max <= lit(DIVERGENCE_THRESHOLD)) {
        return Err(Error::Diverged {
            last_good_time: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `v <- v - dt P f(u)`.
pub fn nonlinear_kick<T: Real>(state: &State<T>, dt: T, physics: &Physics<T>) -> Result<State<T>> {
    if physics.nonlinearity() == Nonlinearity::Zero {
        return Ok(state.clone());
    }
    let grid = state.u.to_grid();
    check_grid(&grid, state.t)?;
    let kick = physics.nonlinear_term(&grid);
    if kick.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::Diverged {
            last_good_time: state.t.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(State {
        u: state.u.clone(),
        v: state.v.axpy(-dt, &kick),
        t: state.t,
    })
}

/// Strang-split stepper with the half-step propagator cached.
#[derive(Clone, Debug)]
pub struct Integrator<T: Real> {
    physics: Physics<T>,
    dt: T,
    half: LinearPropagator<T>,
}

impl<T: Real> Integrator<T> {
    pub fn new(physics: Physics<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let half = LinearPropagator::new(&physics, dt / lit(2.0));
        Ok(Self { physics, dt, half })
    }

    pub fn physics(&self) -> &Physics<T> {
        &self.physics
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn step(&self, state: &State<T>) -> Result<State<T>> {
        let a = self.half.apply(state);
        let b = nonlinear_kick(&a, self.dt, &self.physics)?;
        let mut c = self.half.apply(&b);
        c.t = state.t + self.dt;
        Ok(c)
    }

    /// Advances `steps` times.
    pub fn advance(&self, state: &State<T>, steps: usize) -> Result<State<T>> {
        let mut s = state.clone();
        for _ in 0..steps {
            s = self.step(&s)?;
        }
        Ok(s)
    }
}

pub fn step<T: Real>(state: &State<T>, dt: T, physics: &Physics<T>) -> Result<State<T>> {
    Integrator::new(physics.clone(), dt)?.step(state)
}

/// `u_tt` read off the equation: `g - gamma A^{1/2} v + Delta u - lambda0 u - P f(u)`.
pub fn pde_residual<T: Real>(state: &State<T>, physics: &Physics<T>) -> SpectralField<T> {
    let damping = state.v.apply_symbol(|mu| physics.gamma * (T::one() + mu).sqrt());
    let stiffness = state.u.apply_symbol(|mu| mu + physics.lambda0);
    let mut r = &(physics.source() - &damping) - &stiffness;
    if physics.nonlinearity() != Nonlinearity::Zero {
        r = &r - &physics.nonlinear_term(&state.u.to_grid());
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex;

    /// Closed-form solution of `x'' + a x' + b x = 0` from its characteristic roots.
    fn oscillator_oracle(a: f64, b: f64, x0: f64, v0: f64, t: f64) -> (f64, f64) {
        let disc = Complex::new(a * a - 4.0 * b, 0.0).sqrt();
        let rp = (-a + disc) / 2.0;
        let rm = (-a - disc) / 2.0;
        if (rp - rm).norm() < 1e-7 {
            let r = -a / 2.0;
            let c2 = v0 - r * x0;
            let e = (r * t).exp();
            return ((x0 + c2 * t) * e, (r * (x0 + c2 * t) + c2) * e);
        }
        let cp = (Complex::new(v0, 0.0) - rm * x0) / (rp - rm);
        let cm = Complex::new(x0, 0.0) - cp;
        let x = cp * (rp * t).exp() + cm * (rm * t).exp();
        let v = cp * rp * (rp * t).exp() + cm * rm * (rm * t).exp();
        (x.re, v.re)
    }

    #[test]
    fn oscillator_branches_match_roots() {
        for (a, b) in [(1.0, 5.0), (6.0, 2.0), (2.0, 1.0), (2.0, 1.0 + 1e-9), (50.0, 3.0), (1e-3, 1e4)] {
            for tau in [0.0, 1e-3, 0.37, 4.0] {
                let m = oscillator_exponential(a, b, tau);
                for (x0, v0) in [(1.0, 0.0), (0.0, 1.0)] {
                    let (x, v) = oscillator_oracle(a, b, x0, v0, tau);
                    assert_relative_eq!(m[0] * x0 + m[1] * v0, x, epsilon = 1e-12);
                    assert_relative_eq!(m[2] * x0 + m[3] * v0, v, epsilon = 1e-10 * b.max(1.0));
                }
            }
        }
    }

    #[test]
    fn nonlinearity_values() {
        let q = Nonlinearity::Quintic { c3: 1.0, c1: -2.0 };
        assert_eq!(q.f(2.0), 32.0 + 8.0 - 4.0);
        assert_eq!(q.potential(2.0), 64.0 / 6.0 + 4.0 - 4.0);
        assert_eq!(Nonlinearity::Sin5.f(0.0), 0.0);
        assert_relative_eq!(Nonlinearity::Sin5.f(1.0), 1f64.sin());
        assert_eq!(Nonlinearity::Zero.f(3.0), 0.0);
        assert_relative_eq!(Nonlinearity::Sin5.potential(1.0), 0.946_083_070_367_183 / 5.0, epsilon = 1e-14);
    }

    #[test]
    fn potential_is_antiderivative() {
        for nl in [Nonlinearity::Quintic { c3: -3.0, c1: 0.5 }, Nonlinearity::Sin5] {
            for u in [-1.3f64, -0.4, 0.2, 0.9, 1.4] {
                let h = 1e-5;
                let fd = (nl.potential(u + h) - nl.potential(u - h)) / (2.0 * h);
                assert_relative_eq!(fd, nl.f(u), epsilon = 1e-7);
                let dfd = (nl.f(u + h) - nl.f(u - h)) / (2.0 * h);
                assert_relative_eq!(dfd, nl.derivative(u), epsilon = 1e-5 * (1.0 + u.abs().powi(4)));
            }
        }
    }

    #[test]
    fn structural_constants_hold_on_dense_grid() {
        let kinds = [
            Nonlinearity::Quintic { c3: 0.0, c1: 0.0 },
            Nonlinearity::Quintic { c3: -4.0, c1: 1.0 },
            Nonlinearity::Quintic { c3: 2.0, c1: -3.0 },
            Nonlinearity::Sin5,
            Nonlinearity::Zero,
        ];
        for nl in kinds {
            let growth = nl.growth_constant();
            let m = nl.dissipation_constant();
            for lambda0 in [0.5, 1.0, 4.0] {
                let c = nl.potential_lower_constant(lambda0);
                assert!(c >= 0.0);
                for i in -40_000..=40_000 {
                    let s = i as f64 * 1e-4;
                    assert!(nl.f(s) * s >= -m - 1e-12, "{nl:?} dissipativity at {s}");
                    assert!(nl.derivative(s).abs() <= growth * (1.0 + s.powi(4)) + 1e-12);
                    assert!(nl.potential(s) >= -(lambda0 / 8.0) * s * s - c - 1e-12, "{nl:?} at {s}");
                }
            }
        }
        assert_eq!(Nonlinearity::Sin5.dissipation_constant(), 1.0);
        // y^3 - 4 y^2 + y has its minimum at y = (4 + sqrt 13) / 3.
        let y = (4.0 + 13f64.sqrt()) / 3.0;
        assert_relative_eq!(
            Nonlinearity::Quintic { c3: -4.0, c1: 1.0 }.dissipation_constant(),
            -(y * y * y - 4.0 * y * y + y),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sin5_violates_one_sided_lipschitz() {
        let worst = (0..100_000)
            .map(|i| Nonlinearity::Sin5.derivative(i as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        assert!(worst < -100.0);
    }

    #[test]
    fn physics_validation() {
        let d = BoxDomain::new(1, 5.0, 8, 3).unwrap();
        assert!(Physics::homogeneous(&d, 0.0, 1.0, Nonlinearity::Zero).is_err());
        assert!(Physics::homogeneous(&d, 1.0, -1.0, Nonlinearity::Zero).is_err());
        let p = Physics::homogeneous(&d, 2.0, 0.5, Nonlinearity::Zero).unwrap();
        assert_eq!(p.delta_max(), 0.05);
    }

    #[test]
    fn nonlinearity_serde_shape() {
        let q: Nonlinearity = serde_json::from_str(r#"{"kind":"quintic","c3":1.5}"#).unwrap();
        assert_eq!(q, Nonlinearity::Quintic { c3: 1.5, c1: 0.0 });
        let s: Nonlinearity = serde_json::from_str(r#"{"kind":"sin5"}"#).unwrap();
        assert_eq!(s, Nonlinearity::Sin5);
        assert!(serde_json::from_str::<Nonlinearity>(r#"{"kind":"quintic","c2":1}"#).is_err());
    }
}
