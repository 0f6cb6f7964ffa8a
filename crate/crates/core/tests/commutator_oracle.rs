use fdwave_core::{bump_study, commutator_apply, scaling_study, BoxDomain, SpectralField, WeightSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn ensemble(modes: usize, seed: u64) -> Vec<SpectralField<f64>> {
    let d = BoxDomain::new(1, 20.0, modes, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..10).map(|_| SpectralField::random(&d, 1.5, &mut rng)).collect()
}

fn refine(fields: &[SpectralField<f64>]) -> Vec<SpectralField<f64>> {
    let d = fields[0].domain();
    let fine = BoxDomain::new(1, d.length(), 2 * d.modes(), d.pad_factor()).unwrap();
    fields.iter().map(|u| u.resample(&fine).unwrap()).collect()
}

#[test]
fn matches_dense_matrix_commutator() {
    let n = 32;
    let d = BoxDomain::new(1, 20.0, n, 3).unwrap();
    let w = WeightSpec::smooth(0.15, &[8.0]).unwrap();
    let theta = 0.25;
    let m = d.grid_points();
    let xs: Vec<f64> = (1..=m).map(|j| j as f64 * 20.0 / (m + 1) as f64).collect();
    // Collocation matrix of multiplication by phi, built from explicit sine sums.
    let mult: Vec<Vec<f64>> = (1..=n)
        .map(|j| {
            (1..=n)
                .map(|k| {
                    xs.iter()
                        .map(|&x| (j as f64 * PI * x / 20.0).sin() * w.eval(&[x]) * (k as f64 * PI * x / 20.0).sin())
                        .sum::<f64>()
                        * 2.0
                        / (m + 1) as f64
                })
                .collect()
        })
        .collect();
    let power: Vec<f64> = (1..=n).map(|k| (1.0 + (k as f64 * PI / 20.0).powi(2)).powf(theta)).collect();
    for probe in [vec![1.0], vec![0.3, -1.2, 0.0, 2.0, 0.7]] {
        let mut c = vec![0.0; n];
        c[..probe.len()].copy_from_slice(&probe);
        let u = SpectralField::from_coeffs(&d, c.clone()).unwrap();
        let fast = commutator_apply(&w, theta, &u).unwrap();
        for j in 0..n {
            let dense: f64 = (0..n).map(|k| (mult[j][k] * power[k] - power[j] * mult[j][k]) * c[k]).sum();
            assert!((fast.coeffs()[j] - dense).abs() < 1e-8, "row {j}: {} vs {dense}", fast.coeffs()[j]);
        }
    }
}

#[test]
fn smooth_weight_scaling_and_refinement() {
    let fields = ensemble(128, 21);
    let fine = refine(&fields);
    for (s, threshold) in [(0.0, 0.4), (0.5, 0.65)] {
        let coarse = scaling_study(0.25, s, &fields, &EPSILONS, &[10.0]).unwrap();
        let refined = scaling_study(0.25, s, &fine, &EPSILONS, &[10.0]).unwrap();
        println!("s={s}: ratios {:?} slope {:.4}", coarse.ratio_list, coarse.slope);
        println!("s={s}: refined slope {:.4}, change {:.2e}", refined.slope, coarse.max_relative_change(&refined));
        assert!(coarse.slope >= threshold);
        assert!(coarse.max_relative_change(&refined) < 0.02);
    }
}

#[test]
fn bump_ratios_bounded() {
    let fields = ensemble(128, 22);
    let report = bump_study(0.25, &fields, &EPSILONS, &[10.0]).unwrap();
    println!("bump ratios {:?} spread {:.3}", report.ratio_list, report.spread());
    assert!(report.spread() <= 3.0);
    let refined = bump_study(0.25, &refine(&fields), &EPSILONS, &[10.0]).unwrap();
    assert!(report.max_relative_change(&refined) < 0.02);
}
