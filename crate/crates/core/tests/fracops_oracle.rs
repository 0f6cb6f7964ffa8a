use fdwave_core::{apply_quadrature, apply_spectral, heat_semigroup, BoxDomain, QuadratureSpec, SampledWeight, SpectralField, WeightSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_err(u: &SpectralField<f64>, theta: f64, nodes: usize) -> f64 {
    let exact = apply_spectral(u, theta).unwrap();
    let q = QuadratureSpec {
        nodes,
        ..QuadratureSpec::default()
    };
    let approx = apply_quadrature(u, theta, &q).unwrap();
    (&approx - &exact).l2_norm() / exact.l2_norm()
}

#[test]
fn quadrature_error_shrinks_under_refinement() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = BoxDomain::new(1, std::f64::consts::PI, 64, 1).unwrap();
    for theta in [0.1, 0.25, 0.5, 0.75] {
        let u = SpectralField::random(&d, 0.0, &mut rng);
        let errs: Vec<f64> = [50, 100, 200, 400, 800].iter().map(|&n| rel_err(&u, theta, n)).collect();
        println!("theta {theta}: {errs:?}");
        assert!(errs[3] < 1e-6);
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }
}

#[test]
fn power_semigroup_law() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d = BoxDomain::new(1, 20.0, 64, 1).unwrap();
    for _ in 0..20 {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let lo = (-1.0 - a).max(-1.0);
        let hi = (1.0 - a).min(1.0);
        let b: f64 = rng.gen_range(lo..hi);
        let u = SpectralField::random(&d, 1.0, &mut rng);
        let composed = apply_spectral(&apply_spectral(&u, b).unwrap(), a).unwrap();
        let direct = apply_spectral(&u, a + b).unwrap();
        assert!((&composed - &direct).l2_norm() <= 1e-12 * direct.l2_norm());
    }
}

#[test]
fn self_adjoint_and_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let d = BoxDomain::new(2, 6.0, 16, 1).unwrap();
    for theta in [0.25f64, 0.5, 1.0] {
        let u = SpectralField::random(&d, 1.0, &mut rng);
        let v = SpectralField::random(&d, 1.0, &mut rng);
        let lhs = apply_spectral(&u, theta).unwrap().inner(&v);
        let rhs = u.inner(&apply_spectral(&v, theta).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        assert!(apply_spectral(&u, theta).unwrap().l2_norm() >= u.l2_norm());
    }
}

#[test]
fn weighted_heat_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let d = BoxDomain::new(1, 20.0, 128, 3).unwrap();
    let mut violations = 0;
    for _ in 0..20 {
        let u = SpectralField::random(&d, 1.0, &mut rng);
        for eps in [0.025f64, 0.1, 0.2] {
            let w = SampledWeight::new(&WeightSpec::smooth(eps, &[7.0]).unwrap(), &d).unwrap();
            let base = w.l2_norm_sq(&u.to_grid()).sqrt();
            for lambda in [0.1f64, 1.0, 5.0] {
                let evolved = heat_semigroup(&u, lambda).unwrap();
                if w.l2_norm_sq(&evolved.to_grid()).sqrt() > (-lambda / 2.0).exp() * base {
                    violations += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0);
}
