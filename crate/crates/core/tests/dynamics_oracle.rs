use fdwave_core::{
    linear_halfstep, nonlinear_kick, pde_residual, random_initial_state, unweighted_energy, BoxDomain, Integrator, Nonlinearity,
    Physics, SpectralField, State,
};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Closed-form `x'' + a x' + b x = 0` from the characteristic roots.
fn roots_oracle(a: f64, b: f64, x0: f64, v0: f64, t: f64) -> (f64, f64) {
    let disc = Complex::new(a * a - 4.0 * b, 0.0).sqrt();
    let rp = (-a + disc) / 2.0;
    let rm = (-a - disc) / 2.0;
    let cp = (Complex::new(v0, 0.0) - rm * x0) / (rp - rm);
    let cm = Complex::new(x0, 0.0) - cp;
    let x = cp * (rp * t).exp() + cm * (rm * t).exp();
    let v = cp * rp * (rp * t).exp() + cm * rm * (rm * t).exp();
    (x.re, v.re)
}

/// Classical RK4 for the same oscillator.
fn rk4_oracle(a: f64, b: f64, x0: f64, v0: f64, t: f64, h: f64) -> (f64, f64) {
    let f = |x: f64, v: f64| (v, -a * v - b * x);
    let (mut x, mut v) = (x0, v0);
    let n = (t / h).round() as usize;
    for _ in 0..n {
        let k1 = f(x, v);
        let k2 = f(x + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
        let k3 = f(x + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
        let k4 = f(x + h * k3.0, v + h * k3.1);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (x, v)
}

fn single_mode_run(gamma: f64, mode: usize, oracle: impl Fn(f64, f64, f64) -> (f64, f64)) -> f64 {
    let d = BoxDomain::new(1, PI, 8, 3).unwrap();
    let p = Physics::homogeneous(&d, gamma, 1.0, Nonlinearity::Zero).unwrap();
    let (x0, v0) = (0.7, -0.4);
    let mut s = State::new(
        SpectralField::single_mode(&d, &[mode], x0).unwrap(),
        SpectralField::single_mode(&d, &[mode], v0).unwrap(),
        0.0,
    )
    .unwrap();
    let integ = Integrator::new(p, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        s = integ.advance(&s, 1000).unwrap();
        let (x, v) = oracle(x0, v0, k as f64);
        worst = worst.max((s.u.coeffs()[mode - 1] - x).abs()).max((s.v.coeffs()[mode - 1] - v).abs());
        let others: f64 = s.u.coeffs().iter().enumerate().filter(|(i, _)| *i != mode - 1).map(|(_, c)| c.abs()).sum();
        assert_eq!(others, 0.0);
    }
    worst
}

#[test]
fn linear_modes_match_closed_form() {
    // mode 1 on (0, pi): mu = 1, b = 2, a = gamma sqrt 2
    let under = single_mode_run(1.0, 1, |x, v, t| roots_oracle(2f64.sqrt(), 2.0, x, v, t));
    let over = single_mode_run(3.0, 1, |x, v, t| roots_oracle(3.0 * 2f64.sqrt(), 2.0, x, v, t));
    // mode 2: mu = 4, b = 5, a = gamma sqrt 5; critical at gamma = 2
    let critical = single_mode_run(2.0, 2, |x, v, t| rk4_oracle(2.0 * 5f64.sqrt(), 5.0, x, v, t, 1e-4));
    let near = 2.0 * (1.0 + 1e-7);
    let near_critical = single_mode_run(near, 2, |x, v, t| rk4_oracle(near * 5f64.sqrt(), 5.0, x, v, t, 1e-4));
    println!("max errors: under {under:e} over {over:e} critical {critical:e} near {near_critical:e}");
    for e in [under, over, critical, near_critical] {
        assert!(e < 1e-10);
    }
}

#[test]
fn zero_step_and_equilibrium() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = BoxDomain::new(1, 20.0, 64, 3).unwrap();
    let g = SpectralField::random(&d, 2.0, &mut rng);
    let p = Physics::new(1.0, 1.0, Nonlinearity::Zero, g.clone()).unwrap();
    let s = random_initial_state(&d, 1.5, 1.0, 1.0, 1.0, &mut rng).unwrap();
    let same = linear_halfstep(&s, 0.0, &p);
    assert_eq!(same.u, s.u);
    assert_eq!(same.v, s.v);
    let eq = State::new(g.apply_symbol(|mu| 1.0 / (mu + 1.0)), SpectralField::zeros(&d), 0.0).unwrap();
    let moved = Integrator::new(p.clone(), 1e-2).unwrap().advance(&eq, 100).unwrap();
    assert!((&moved.u - &eq.u).l2_norm() <= 1e-13 * eq.u.l2_norm());
    assert!(moved.v.l2_norm() <= 1e-13 * eq.u.l2_norm());
    assert!(pde_residual(&eq, &p).l2_norm() <= 1e-13 * g.l2_norm());
}

#[test]
fn kick_matches_pointwise_quintic() {
    let d = BoxDomain::new(1, 20.0, 16, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Quintic { c3: 0.0, c1: 0.0 }).unwrap();
    let u = SpectralField::single_mode(&d, &[1], 0.8).unwrap();
    let s = State::new(u.clone(), SpectralField::zeros(&d), 0.0).unwrap();
    let dt = 1e-2;
    let kicked = nonlinear_kick(&s, dt, &p).unwrap();
    assert_eq!(kicked.u, s.u);
    for (dv, x) in kicked.v.to_grid().values().iter().zip(u.to_grid().values()) {
        let (dv, x): (f64, f64) = (*dv, *x);
        assert!((dv + dt * x.powi(5)).abs() < 1e-14);
    }
    let zero = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Zero).unwrap();
    assert_eq!(nonlinear_kick(&s, dt, &zero).unwrap(), s);
    let sin5 = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Sin5).unwrap();
    assert!(nonlinear_kick(&State::zeros(&d), dt, &sin5).unwrap().v.is_zero());
}

#[test]
fn divergence_guard_trips() {
    let d = BoxDomain::new(1, 20.0, 16, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::default()).unwrap();
    let s = State::new(SpectralField::single_mode(&d, &[1], 2e6).unwrap(), SpectralField::zeros(&d), 0.5).unwrap();
    match nonlinear_kick(&s, 1e-3, &p) {
        Err(fdwave_core::Error::Diverged { last_good_time }) => assert_eq!(last_good_time, 0.5),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn quintic_energy_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = BoxDomain::new(1, 20.0, 256, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::default()).unwrap();
    let mut s = random_initial_state(&d, 1.5, 1.0, 10.0, 1.0, &mut rng).unwrap();
    let integ = Integrator::new(p.clone(), 1e-3).unwrap();
    let e0 = unweighted_energy(&s, &p).total();
    let mut prev = e0;
    let mut worst_rise: f64 = f64::NEG_INFINITY;
    for _ in 0..3000 {
        s = integ.step(&s).unwrap();
        let e = unweighted_energy(&s, &p).total();
        worst_rise = worst_rise.max(e - prev);
        prev = e;
    }
    println!("E0 {e0}, E(3) {prev}, worst per-step rise {worst_rise:e}");
    assert!(worst_rise <= 1e-6 * e0);
    assert!(prev < e0);
}

#[test]
fn strang_splitting_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = BoxDomain::new(1, 20.0, 128, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::default()).unwrap();
    let s0 = random_initial_state(&d, 1.5, 1.0, 20.0, 1.0, &mut rng).unwrap();
    let run = |dt: f64| {
        let n = (1.0 / dt).round() as usize;
        Integrator::new(p.clone(), dt).unwrap().advance(&s0, n).unwrap()
    };
    let (a, b, c) = (run(4e-3), run(2e-3), run(1e-3));
    let diff = |x: &State<f64>, y: &State<f64>| ((&x.u - &y.u).l2_norm_sq() + (&x.v - &y.v).l2_norm_sq()).sqrt();
    let order = (diff(&a, &b) / diff(&b, &c)).log2();
    println!("Richardson order {order:.3}");
    assert!((1.7..=2.3).contains(&order));
}

#[test]
fn runs_are_deterministic() {
    let build = || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = BoxDomain::new(1, 20.0, 64, 3).unwrap();
        let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Sin5).unwrap();
        let s = random_initial_state(&d, 1.5, 1.0, 5.0, 1.0, &mut rng).unwrap();
        Integrator::new(p, 1e-3).unwrap().advance(&s, 200).unwrap()
    };
    let (x, y) = (build(), build());
    assert_eq!(x.u.coeffs(), y.u.coeffs());
    assert_eq!(x.v.coeffs(), y.v.coeffs());
}

#[test]
fn residual_matches_finite_difference_of_velocity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = BoxDomain::new(1, 20.0, 48, 3).unwrap();
    let g = SpectralField::random(&d, 2.0, &mut rng);
    let p = Physics::new(1.0, 1.0, Nonlinearity::default(), g).unwrap();
    let s = random_initial_state(&d, 2.5, 2.0, 2.0, 1.0, &mut rng).unwrap();
    let h = 1e-4;
    let integ = Integrator::new(p.clone(), h).unwrap();
    let mid = integ.step(&s).unwrap();
    let end = integ.step(&mid).unwrap();
    let fd = (&end.v - &s.v).scaled(0.5 / h);
    let r = pde_residual(&mid, &p);
    let rel = (&fd - &r).l2_norm() / r.l2_norm();
    println!("finite-difference residual mismatch {rel:e}");
    assert!(rel < 1e-5);
}

#[test]
fn residual_of_linear_mode_is_exact_acceleration() {
    let d = BoxDomain::new(1, PI, 4, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Zero).unwrap();
    let (x0, v0) = (0.3, 0.9);
    let s = State::new(
        SpectralField::single_mode(&d, &[3], x0).unwrap(),
        SpectralField::single_mode(&d, &[3], v0).unwrap(),
        0.0,
    )
    .unwrap();
    // mu = 9: x'' = -sqrt(10) x' - 10 x
    let expected = -(10f64).sqrt() * v0 - 10.0 * x0;
    assert!((pde_residual(&s, &p).coeffs()[2] - expected).abs() < 1e-8);
}

#[test]
fn simulated_samples_match_every_linear_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = BoxDomain::new(1, 20.0, 64, 3).unwrap();
    let p = Physics::homogeneous(&d, 1.0, 1.0, Nonlinearity::Zero).unwrap();
    let s0 = random_initial_state(&d, 1.5, 1.0, 2.0, 1.0, &mut rng).unwrap();
    let centers = vec![vec![10.0]];
    let cfg = fdwave_core::MonitorConfig { epsilon: 0.1, centers: centers.clone(), delta: None, lyapunov_n: None };
    let mut monitor = fdwave_core::Monitor::new(&p, cfg).unwrap();
    let mut ledger = fdwave_core::EnergyLedger::new(0.1, centers);
    let schedule = fdwave_core::Schedule::from_times(1e-3, 10.0, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    fdwave_core::simulate(&Integrator::new(p, 1e-3).unwrap(), &mut monitor, s0.clone(), schedule, &mut ledger, |s| {
        for k in 0..64 {
            let mu = ((k + 1) as f64 * PI / 20.0).powi(2);
            let (x, v) = roots_oracle((1.0 + mu).sqrt(), mu + 1.0, s0.u.coeffs()[k], s0.v.coeffs()[k], s.t);
            worst = worst.max((s.u.coeffs()[k] - x).abs()).max((s.v.coeffs()[k] - v).abs());
        }
    })
    .unwrap();
    assert_eq!(ledger.rows.len(), 21);
    println!("worst sampled mode error {worst:e}");
    assert!(worst < 1e-8);
}
