use crate::config::{Experiment, RunConfig};
use crate::error::Result;
use crate::output::write_json;
use crate::report::{Criterion, ExperimentReport};
use fdwave_core::{
    apply_quadrature, apply_spectral, bump_study, extinction_exponent, heat_semigroup, scaling_study, verify_against_ode, BoxDomain,
    QuadratureSpec, SampledWeight, SpectralField, WeightSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::Path;

fn rel_err(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    (a - b).l2_norm() / b.l2_norm()
}

/// Quadrature against spectral powers, the power semigroup law and the
/// weighted heat contraction.
pub(super) fn fracops_verify(config: &RunConfig, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::FracopsVerify {
        thetas,
        nodes,
        modes,
        tolerance,
        trials,
    } = &config.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let length = config.domain.length;
    let mut rng = ChaCha8Rng::seed_from_u64(config.initial.seed);

    let d = BoxDomain::new(1, length, *modes, 1)?;
    let refinements = [nodes / 4, nodes / 2, *nodes, 2 * nodes];
    let mut errors = Vec::new();
    for &theta in thetas {
        let u = SpectralField::random(&d, 0.0, &mut rng);
        let exact = apply_spectral(&u, theta)?;
        let errs = refinements
            .iter()
            .map(|&n| {
                let q = QuadratureSpec {
                    nodes: n.max(2),
                    ..QuadratureSpec::default()
                };
                Ok(rel_err(&apply_quadrature(&u, theta, &q)?, &exact))
            })
            .collect::<Result<Vec<f64>>>()?;
        report.fit(format!("quadrature_error_theta{theta}"), errs[2]);
        report.check(Criterion::at_most(format!("quadrature_theta{theta}"), errs[2], *tolerance));
        report.check(Criterion::holds(
            format!("quadrature_refines_theta{theta}"),
            errs.windows(2).all(|w| w[1] < w[0]),
            "error strictly decreases as the node count doubles",
        ));
        errors.push(json!({ "theta": theta, "nodes": refinements, "errors": errs }));
    }

    let d = BoxDomain::new(1, length, *modes, 1)?;
    let mut worst: f64 = 0.0;
    for _ in 0..*trials {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range((-1.0 - a).max(-1.0)..(1.0 - a).min(1.0));
        let u = SpectralField::random(&d, 1.0, &mut rng);
        let composed = apply_spectral(&apply_spectral(&u, b)?, a)?;
        worst = worst.max(rel_err(&composed, &apply_spectral(&u, a + b)?));
    }
    report.check(Criterion::at_most("semigroup_law", worst, 1e-12));

    let d = BoxDomain::new(1, length, 128, 3)?;
    let center = d.center();
    let mut violations = 0usize;
    let mut max_ratio: f64 = 0.0;
    for _ in 0..*trials {
        let u = SpectralField::random(&d, 1.0, &mut rng);
        for eps in [0.025, 0.1, 0.2] {
            let w = SampledWeight::new(&WeightSpec::smooth(eps, &center)?, &d)?;
            let base = w.l2_norm_sq(&u.to_grid()).sqrt();
            for lambda in [0.1, 1.0, 5.0] {
                let evolved = w.l2_norm_sq(&heat_semigroup(&u, lambda)?.to_grid()).sqrt();
                let ratio = evolved / ((-lambda / 2.0).exp() * base);
                max_ratio = max_ratio.max(ratio);
                if ratio > 1.0 {
                    violations += 1;
                }
            }
        }
    }
    report.fit("heat_max_ratio", max_ratio);
    report.check(Criterion::at_most("heat_contraction_violations", violations as f64, 0.0));
    report.data = json!({ "quadrature": errors });
    Ok(())
}

/// Slopes of the smooth-weight commutator ratios and spread of the bump ratios.
pub(super) fn commutator_study(config: &RunConfig, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::CommutatorStudy {
        theta,
        epsilons,
        ensemble,
        field_decay,
        min_slope_s0,
        min_slope_s_half,
        max_bump_spread,
    } = &config.experiment
    else {
        unreachable!("dispatched on kind")
    };
    let d = config.domain()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.initial.seed);
    let fields: Vec<_> = (0..*ensemble).map(|_| SpectralField::random(&d, *field_decay, &mut rng)).collect();
    let center = d.center();
    let s0 = scaling_study(*theta, 0.0, &fields, epsilons, &center)?;
    let s_half = scaling_study(*theta, 0.5, &fields, epsilons, &center)?;
    let bump = bump_study(*theta, &fields, epsilons, &center)?;
    report.fit("slope_s0", s0.slope);
    report.fit("slope_s_half", s_half.slope);
    report.fit("bump_spread", bump.spread());
    report.check(Criterion::at_least("slope_s0", s0.slope, *min_slope_s0));
    report.check(Criterion::at_least("slope_s_half", s_half.slope, *min_slope_s_half));
    report.check(Criterion::at_most("bump_spread", bump.spread(), *max_bump_spread));
    report.data = json!({ "s0": s0, "s_half": s_half, "bump": bump });
    Ok(())
}

/// Window recursion identities and envelope checks against RK4 solutions of
/// `Y' = -kappa Y^{1/p} + H`.
pub(super) fn gronwall(config: &RunConfig, out: &Path, report: &mut ExperimentReport) -> Result<()> {
    let Experiment::Gronwall { k_max, sets, reference } = &config.experiment else {
        unreachable!("dispatched on kind")
    };
    let mut tk1: f64 = 0.0;
    let (mut w_ok, mut tk0_ok, mut bound_ok) = (true, true, true);
    let mut max_ratio: f64 = 0.0;
    let mut summaries = Vec::new();
    for params in sets {
        let v = verify_against_ode(params, *k_max)?;
        tk1 = tk1.max(v.tk1_max_deviation);
        w_ok &= v.w_within_m;
        tk0_ok &= v.tk0_holds;
        bound_ok &= v.counterexample.is_none();
        max_ratio = max_ratio.max(v.max_ratio);
        summaries.push(json!({
            "params": params,
            "max_ratio": v.max_ratio,
            "counterexample": v.counterexample,
            "w_within_m": v.w_within_m,
            "tk1_max_deviation": v.tk1_max_deviation,
            "t_star": v.t_star,
            "ode_extinction": v.ode_extinction,
        }));
    }
    let r = verify_against_ode(reference, *k_max)?;
    tk1 = tk1.max(r.tk1_max_deviation);
    report.check(Criterion::at_most("tk1_equality", tk1, 1e-12));
    report.check(Criterion::holds("tk0_inequality", tk0_ok && r.tk0_holds, "holds on every window"));
    report.check(Criterion::holds("w_within_m", w_ok && r.w_within_m, "W(k) <= M(k) on every window"));
    report.fit("bound_max_ratio", max_ratio.max(r.max_ratio));
    report.check(
        Criterion::holds("bound_dominates_ode", bound_ok && r.counterexample.is_none(), "Y(t) <= bound at every sample")
            .with_detail(format!("largest Y / bound = {:.6}", max_ratio.max(r.max_ratio))),
    );
    let t_star = r.t_star.unwrap_or(f64::NAN);
    let exact = r.exact_extinction.unwrap_or(f64::NAN);
    report.fit("reference_t_star", t_star);
    report.fit("reference_exact_extinction", exact);
    report.check(Criterion::within("reference_t_star", t_star, 23.852 - 1e-3, 23.852 + 1e-3));
    report.check(Criterion::holds(
        "reference_extinction_below_t_star",
        exact <= t_star,
        "exact extinction <= T*",
    ));
    if reference.p > 1.0 && reference.h == 0.0 {
        report.fit("extinction_exponent", extinction_exponent(reference, 16.0)?);
    }
    write_json(&out.join("gronwall_trace.json"), &r.trace)?;
    report.data = json!({ "sets": summaries, "reference_samples": r.samples });
    Ok(())
}
