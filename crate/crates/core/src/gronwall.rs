//! Constructive iteration behind the Gronwall-type lemma for
//!
//! ```text
//! d/dt Y_s + kappa y_s^{1/p} <= H,   lambda sup Y <= sup y <= Lambda sup Y,
//! ```
//!
//! with window averages `V(k)`, `W(k)`, the bounds `M(k)` and the times `T_k`.
//! Everything here is plain `f64` scalar bookkeeping.

use crate::error::{invalid, Error, Result};
use serde::{Deserialize, Serialize};

/// Constants of the differential inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GronwallParams {
    pub kappa: f64,
    pub h: f64,
    pub p: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub big_lambda: f64,
    /// `None` uses `2^{p(p-1)} + 1`.
    #[serde(default)]
    pub l: Option<f64>,
    pub y0: f64,
}

fn one() -> f64 {
    1.0
}

impl GronwallParams {
    /// `lambda = Lambda = 1` and the default `L`.
    pub fn new(kappa: f64, h: f64, p: f64, y0: f64) -> Result<Self> {
        let params = Self {
            kappa,
            h,
            p,
            lambda: 1.0,
            big_lambda: 1.0,
            l: None,
            y0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        if !(finite(self.kappa) && self.kappa > 0.0) {
            return Err(invalid("kappa", format!("must be positive, got {}", self.kappa)));
        }
        if !(finite(self.h) && self.h >= 0.0) {
            return Err(invalid("h", format!("must be >= 0, got {}", self.h)));
        }
        if !(finite(self.p) && self.p >= 1.0) {
            return Err(invalid("p", format!("must be >= 1, got {}", self.p)));
        }
        if !(finite(self.lambda) && self.lambda > 0.0 && finite(self.big_lambda) && self.lambda <= self.big_lambda) {
            return Err(invalid(
                "lambda",
                format!("need 0 < lambda <= Lambda, got {} and {}", self.lambda, self.big_lambda),
            ));
        }
        if let Some(l) = self.l {
            if !(finite(l) && l >= 1.0) {
                return Err(invalid("l", format!("must be >= 1, got {l}")));
            }
        }
        if !(finite(self.y0) && self.y0 >= 0.0) {
            return Err(invalid("y0", format!("must be >= 0, got {}", self.y0)));
        }
        Ok(())
    }

    /// The constant `L` in force.
    pub fn l_value(&self) -> f64 {
        self.l.unwrap_or_else(|| 2f64.powf(self.p * (self.p - 1.0)) + 1.0)
    }

    fn lk(&self) -> f64 {
        self.lambda * self.kappa
    }

    /// Limit `8 (H (L + 1) / (lambda kappa))^{1/p}` of `M(k)`.
    pub fn m_limit(&self) -> f64 {
        8.0 * (self.h * (self.l_value() + 1.0) / self.lk()).powf(1.0 / self.p)
    }

    /// `T_{k+1} - T_k = 4^p (L / (lambda kappa)) M(k)^{p(p-1)}`.
    fn increment(&self, m: f64) -> f64 {
        4f64.powf(self.p) * self.l_value() / self.lk() * m.powf(self.p * (self.p - 1.0))
    }

    /// `M(k)` given `T_1`.
    fn m_at(&self, k: usize, t1: f64) -> f64 {
        let head = 2.0 * (self.y0 / (self.lk() * t1)).powf(1.0 / self.p);
        0.5f64.powi(k as i32) * head + self.m_limit()
    }

    /// ODE equilibrium `(H / kappa)^p`.
    pub fn ode_equilibrium(&self) -> f64 {
        (self.h / self.kappa).powf(self.p)
    }
}

/// The sequences built by the iteration, with optional measured window data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallTrace {
    /// `T_0 = 0, T_1, ..., T_kmax`.
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    /// `T_{k+1} - T_k` for `k < kmax`, kept separately since late increments
    /// drop below the resolution of `T_k` itself.
    pub increments: Vec<f64>,
    /// `M(0), ..., M(kmax)`.
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<Vec<f64>>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    pub l: f64,
    /// `|T_1 - 4^p (L/lambda kappa) M(0)^{p(p-1)}| / T_1` after the bootstrap.
    pub bootstrap_residual: f64,
}

impl GronwallTrace {
    pub fn k_max(&self) -> usize {
        self.increments.len()
    }

    /// Largest `|2 (L/lambda kappa)^{1/p} (T_k - T_{k-1})^{-1/p} M(k-1)^{p-1} - 1/2|`.
    pub fn tk1_max_deviation(&self, params: &GronwallParams) -> f64 {
        let p = params.p;
        let c = 2.0 * (self.l / params.lk()).powf(1.0 / p);
        self.increments
            .iter()
            .zip(&self.m)
            .map(|(&dt, &m)| (c * dt.powf(-1.0 / p) * m.powf(p - 1.0) - 0.5).abs())
            .fold(0.0, f64::max)
    }

    /// `T_{k+1} - T_{k-1} <= L (T_{k+1} - T_k)` for every interior `k`.
    pub fn tk0_holds(&self) -> bool {
        self.increments
            .windows(2)
            .all(|w| w[0] + w[1] <= self.l * w[1] * (1.0 + 1e-12))
    }

    /// All increments positive, i.e. the exact sequence is strictly increasing.
    pub fn strictly_increasing(&self) -> bool {
        self.increments.iter().all(|&d| d > 0.0)
    }

    /// `W(k) <= M(k)` on every measured window; `None` without measurements.
    pub fn w_within_m(&self) -> Option<bool> {
        self.w
            .as_ref()
            .map(|w| w.iter().zip(&self.m).all(|(&w, &m)| w <= m * (1.0 + 1e-9)))
    }
}

/// Solves the self-consistent first step: `T_1` in `M(0)` and `M(0)` in `T_1`.
fn bootstrap(params: &GronwallParams) -> Result<f64> {
    let p = params.p;
    let e = p * (p - 1.0);
    if e == 0.0 {
        return Ok(params.increment(1.0));
    }
    let closed = 2f64.powf(p + 1.0) * params.l_value().powf(1.0 / p) * params.y0.powf((p - 1.0) / p) / params.lk();
    if params.h == 0.0 {
        if params.y0 == 0.0 {
            return Err(Error::Bootstrap("Y0 = 0 with H = 0 gives T_1 = 0".into()));
        }
        return Ok(closed);
    }
    // ln T - ln rhs(T) is increasing in T
    let g = |t: f64| t.ln() - params.increment(params.m_at(0, t)).ln();
    let mut lo = closed.max(params.increment(params.m_limit()));
    if !(lo > 0.0 && lo.is_finite()) {
        return Err(Error::Bootstrap(format!("no positive lower bracket (got {lo})")));
    }
    if g(lo) >= 0.0 {
        return Ok(lo);
    }
    let mut hi = 2.0 * lo;
    let mut doublings = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Bootstrap("upper bracket not found".into()));
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Builds `T_0..T_kmax` and `M(0)..M(kmax)`.
pub fn build_trace(params: &GronwallParams, k_max: usize) -> Result<GronwallTrace> {
    params.validate()?;
    if k_max == 0 {
        return Err(invalid("k_max", "must be >= 1"));
    }
    let t1 = bootstrap(params)?;
    let m: Vec<f64> = (0..=k_max).map(|k| params.m_at(k, t1)).collect();
    let mut increments = Vec::with_capacity(k_max);
    increments.push(t1);
    increments.extend(m[1..k_max].iter().map(|&mk| params.increment(mk)));
    let mut t = Vec::with_capacity(k_max + 1);
    t.push(0.0);
    for d in &increments {
        t.push(t.last().unwrap() + d);
    }
    let residual = (t1 - params.increment(m[0])).abs() / t1;
    Ok(GronwallTrace {
        t,
        increments,
        m,
        w: None,
        v: None,
        l: params.l_value(),
        bootstrap_residual: residual,
    })
}

/// Pointwise envelope for `sup Y(t)`.
///
/// On `[T_k, T_{k+1}]` the integrated inequality averaged over `s` in
/// `[T_{k-1}, T_k]` gives `Y(t)^{1/p} <= 2 M(k-1)^p + 2 (H (t - T_{k-1}))^{1/p}`;
/// the same inequality from `s = 0` is used as well and the smaller value returned.
pub fn decay_bound(trace: &GronwallTrace, params: &GronwallParams, t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    let p = params.p;
    let lift = |x: f64| x.powf(p);
    let from_start = lift(2.0 * params.y0.powf(1.0 / p) + 2.0 * (params.h * t).powf(1.0 / p));
    let end = *trace.t.last().unwrap();
    if params.h == 0.0 {
        if p > 1.0 && t >= extinction_time(params)? {
            return Ok(0.0);
        }
    } else if t > end {
        return Err(Error::InsufficientCoverage { start: 0.0, end: t });
    }
    // largest k with T_k <= t
    let k = trace.t.partition_point(|&tk| tk <= t) - 1;
    if k == 0 {
        return Ok(from_start);
    }
    let window = lift(2.0 * trace.m[k - 1].powf(p) + 2.0 * (params.h * (t - trace.t[k - 1])).powf(1.0 / p));
    Ok(window.min(from_start))
}

/// `lim T_k = T_1 / (1 - 2^{-p(p-1)})` when `H = 0` and `p > 1`.
pub fn extinction_time(params: &GronwallParams) -> Result<f64> {
    params.validate()?;
    if params.p <= 1.0 {
        return Err(invalid("p", "extinction needs p > 1"));
    }
    if params.h > 0.0 {
        return Err(invalid("h", "extinction needs H = 0"));
    }
    if params.y0 == 0.0 {
        return Ok(0.0);
    }
    let ratio = 0.5f64.powf(params.p * (params.p - 1.0));
    Ok(bootstrap(params)? / (1.0 - ratio))
}

/// Empirical exponent `ln(T*(c Y0) / T*(Y0)) / ln c`.
pub fn extinction_exponent(params: &GronwallParams, c: f64) -> Result<f64> {
    if !(c > 0.0 && c != 1.0 && c.is_finite()) {
        return Err(invalid("c", format!("must be positive and != 1, got {c}")));
    }
    let base = extinction_time(params)?;
    let scaled = extinction_time(&GronwallParams {
        y0: params.y0 * c,
        ..*params
    })?;
    Ok((scaled / base).ln() / c.ln())
}

/// Exact extinction time `p / (kappa (p - 1)) Y0^{(p-1)/p}` of `Y' = -kappa Y^{1/p}`.
pub fn ode_extinction_time(params: &GronwallParams) -> Option<f64> {
    (params.h == 0.0 && params.p > 1.0)
        .then(|| params.p / (params.kappa * (params.p - 1.0)) * params.y0.powf((params.p - 1.0) / params.p))
}

/// `V(k)` and `W(k)` from sampled trajectories `(times, Y)`, over the
/// windows `[T_k, T_{k+1}]` covered by every trajectory.
pub fn measure_windows(trace: &GronwallTrace, p: f64, trajectories: &[(&[f64], &[f64])]) -> Result<(Vec<f64>, Vec<f64>)> {
    if trajectories.is_empty() {
        return Err(invalid("trajectories", "need at least one"));
    }
    let mut covered = trace.k_max();
    let mut v = vec![0.0f64; covered];
    for &(times, values) in trajectories {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::DimensionMismatch {
                expected: times.len().max(2),
                found: values.len(),
            });
        }
        let roots: Vec<f64> = values.iter().map(|y| y.max(0.0).powf(1.0 / p)).collect();
        let last = *times.last().unwrap();
        covered = covered.min(trace.t.partition_point(|&tk| tk <= last).saturating_sub(1));
        for (k, vk) in v.iter_mut().enumerate().take(covered) {
            let integral = crate::functionals::integrate_trapezoid(times, &roots, trace.t[k], trace.t[k + 1])?;
            *vk = vk.max(integral);
        }
    }
    v.truncate(covered);
    let w = v
        .iter()
        .zip(&trace.increments)
        .map(|(&vk, &dt)| (vk / dt).powf(1.0 / p))
        .collect();
    Ok((v, w))
}

/// One comparison of the ODE solution with the envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub t: f64,
    pub y: f64,
    pub bound: f64,
}

/// Outcome of [`verify_against_ode`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeVerification {
    pub params: GronwallParams,
    pub dt: f64,
    /// Integration stops here; beyond it `Y` is replaced by the upper
    /// envelope `max(Y(tail_start), (H/kappa)^p)`, valid since scalar
    /// autonomous solutions are monotone.
    pub tail_start: f64,
    pub samples: Vec<BoundSample>,
    pub max_ratio: f64,
    pub counterexample: Option<f64>,
    pub w_within_m: bool,
    pub tk1_max_deviation: f64,
    pub tk0_holds: bool,
    pub ode_extinction: Option<f64>,
    pub exact_extinction: Option<f64>,
    pub t_star: Option<f64>,
    pub trace: GronwallTrace,
}

impl OdeVerification {
    pub fn passed(&self) -> bool {
        let extinction_ok = match (self.exact_extinction, self.t_star) {
            (Some(e), Some(t)) => e <= t,
            _ => true,
        };
        self.counterexample.is_none() && self.w_within_m && self.tk0_holds && self.tk1_max_deviation <= 1e-12 && extinction_ok
    }
}

pub const ODE_DT: f64 = 1e-5;
const MAX_HORIZON: f64 = 100.0;
const SAMPLES: usize = 100;
/// Integration stops within this relative distance of the plateau; the tail
/// envelope covers the rest.
const SETTLE_TOL: f64 = 1e-6;

/// Integrates `Y' = -kappa Y^{1/p} + H` with RK4 at `dt = 1e-5`, checks the
/// envelope at 100 times and `W(k) <= M(k)` on every window.
pub fn verify_against_ode(params: &GronwallParams, k_max: usize) -> Result<OdeVerification> {
    let mut trace = build_trace(params, k_max)?;
    let p = params.p;
    let (kappa, h) = (params.kappa, params.h);
    let root = |y: f64| {
        let y = y.max(0.0);
        if p == 1.0 {
            y
        } else if p == 2.0 {
            y.sqrt()
        } else if p == 3.0 {
            y.cbrt()
        } else {
            y.powf(1.0 / p)
        }
    };
    let rhs = |y: f64| -kappa * root(y) + h;
    let y_inf = params.ode_equilibrium();
    let end = *trace.t.last().unwrap();
    let exact_extinction = ode_extinction_time(params);

    let focus = exact_extinction
        .unwrap_or_else(|| 10.0 * p * params.y0.max(y_inf).max(1.0).powf((p - 1.0) / p) / kappa)
        .min(end);
    let mut sample_times: Vec<f64> = (0..SAMPLES / 2)
        .map(|i| end * i as f64 / (SAMPLES / 2 - 1) as f64)
        .chain((0..SAMPLES / 2).map(|i| focus * (i as f64 + 0.5) / (SAMPLES / 2) as f64))
        .collect();
    sample_times.sort_by(f64::total_cmp);

    let mut v = vec![0.0f64; trace.k_max()];
    let mut window = 0usize;
    let mut accumulate = |ta: f64, tb: f64, fa: f64, fb: f64, v: &mut [f64]| {
        while window < v.len() && trace.t[window + 1] <= ta {
            window += 1;
        }
        let mut j = window;
        while j < v.len() && trace.t[j] < tb {
            let x0 = ta.max(trace.t[j]);
            let x1 = tb.min(trace.t[j + 1]);
            if x1 > x0 {
                let at = |x: f64| fa + (fb - fa) * (x - ta) / (tb - ta);
                v[j] += 0.5 * (x1 - x0) * (at(x0) + at(x1));
            }
            j += 1;
        }
    };

    let mut samples = Vec::with_capacity(SAMPLES);
    let mut next = 0usize;
    let (mut t, mut y) = (0.0f64, params.y0);
    let mut ode_extinction = None;
    let settled = |y: f64| {
        if h == 0.0 && p > 1.0 {
            y == 0.0
        } else if h == 0.0 {
            y <= 1e-15 * params.y0
        } else {
            (y - y_inf).abs() <= SETTLE_TOL * (1.0 + y_inf)
        }
    };
    let mut ry = root(y);
    while t < end && t < MAX_HORIZON && !settled(y) {
        let dt = ODE_DT.min(end - t);
        let k1 = -kappa * ry + h;
        let k2 = rhs(y + 0.5 * dt * k1);
        let k3 = rhs(y + 0.5 * dt * k2);
        let k4 = rhs(y + dt * k3);
        let y1 = (y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
        let t1 = t + dt;
        let ry1 = root(y1);
        accumulate(t, t1, ry, ry1, &mut v);
        while next < sample_times.len() && sample_times[next] <= t1 {
            let s = sample_times[next];
            let ys = y + (y1 - y) * (s - t) / dt;
            samples.push((s, ys));
            next += 1;
        }
        if y1 == 0.0 && ode_extinction.is_none() {
            ode_extinction = Some(t1);
        }
        t = t1;
        y = y1;
        ry = ry1;
    }
    let tail_start = t;
    let tail = y.max(y_inf);
    for s in &sample_times[next..] {
        samples.push((*s, tail));
    }
    if tail_start < end {
        let root = root(tail);
        for (k, vk) in v.iter_mut().enumerate() {
            let x0 = tail_start.max(trace.t[k]);
            let x1 = trace.t[k + 1];
            if x1 > x0 {
                *vk += root * (x1 - x0);
            }
        }
    }

    let mut checked = Vec::with_capacity(samples.len());
    let mut max_ratio = 0.0f64;
    let mut counterexample = None;
    for (s, ys) in samples {
        let bound = decay_bound(&trace, params, s)?;
        let ratio = if bound > 0.0 {
            ys / bound
        } else if ys > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        max_ratio = max_ratio.max(ratio);
        if ys > bound && counterexample.is_none() {
            counterexample = Some(s);
        }
        checked.push(BoundSample { t: s, y: ys, bound });
    }

    let w: Vec<f64> = v
        .iter()
        .zip(&trace.increments)
        .map(|(&vk, &dt)| (vk / dt).powf(1.0 / p))
        .collect();
    trace.v = Some(v);
    trace.w = Some(w);
    let t_star = if h == 0.0 && p > 1.0 { Some(extinction_time(params)?) } else { None };
    Ok(OdeVerification {
        params: *params,
        dt: ODE_DT,
        tail_start,
        samples: checked,
        max_ratio,
        counterexample,
        w_within_m: trace.w_within_m().unwrap_or(true),
        tk1_max_deviation: trace.tk1_max_deviation(params),
        tk0_holds: trace.tk0_holds(),
        ode_extinction,
        exact_extinction,
        t_star,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> GronwallParams {
        GronwallParams {
            l: Some(5.0),
            ..GronwallParams::new(1.0, 0.0, 2.0, 1.0).unwrap()
        }
    }

    #[test]
    fn bootstrap_matches_iterated_fixed_point() {
        let params = reference();
        let trace = build_trace(&params, 30).unwrap();
        // iterate T1 -> 80 M0(T1)^2 with M0 = 2 / sqrt(T1)
        let mut t1 = 1.0f64;
        for _ in 0..200 {
            let m0 = 2.0 / t1.sqrt();
            t1 = (t1 * 80.0 * m0 * m0).sqrt();
        }
        assert_relative_eq!(trace.t[1], t1, max_relative = 1e-12);
        assert_relative_eq!(trace.m[0], (2.0 / 80f64.sqrt()).sqrt(), max_relative = 1e-12);
        assert!((trace.t[1] - 17.889).abs() < 1e-3);
        assert!((trace.m[0] - 0.47287).abs() < 1e-5);
    }

    #[test]
    fn bootstrap_with_source_is_self_consistent() {
        for p in [1.5, 2.0, 3.0] {
            let params = GronwallParams::new(1.0, 1.0, p, 2.0).unwrap();
            let trace = build_trace(&params, 10).unwrap();
            assert!(trace.bootstrap_residual < 1e-12, "p = {p}: {}", trace.bootstrap_residual);
        }
    }

    #[test]
    fn m_recursion_and_limits() {
        let params = reference();
        let trace = build_trace(&params, 30).unwrap();
        for k in 1..=30 {
            assert_eq!(trace.m[k], trace.m[0] * 0.5f64.powi(k as i32));
        }
        let with_h = GronwallParams::new(1.0, 0.5, 2.0, 3.0).unwrap();
        let trace = build_trace(&with_h, 60).unwrap();
        let c = 4.0 * (0.5 * (with_h.l_value() + 1.0)).sqrt();
        for k in 1..=60 {
            assert_relative_eq!(trace.m[k], 0.5 * trace.m[k - 1] + c, max_relative = 1e-13);
        }
        assert_relative_eq!(trace.m[60], with_h.m_limit(), max_relative = 1e-13);
    }

    #[test]
    fn extinction_sum_and_scaling() {
        let params = reference();
        let t_star = extinction_time(&params).unwrap();
        assert!((t_star - 23.852).abs() < 1e-3);
        let trace = build_trace(&params, 60).unwrap();
        assert_relative_eq!(*trace.t.last().unwrap(), t_star, max_relative = 1e-14);
        assert_relative_eq!(extinction_exponent(&params, 16.0).unwrap(), 0.5, epsilon = 1e-12);
        let p3 = GronwallParams::new(1.0, 0.0, 3.0, 1.0).unwrap();
        assert_relative_eq!(extinction_exponent(&p3, 8.0).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert!(extinction_time(&GronwallParams { y0: 1e-12, ..params }).unwrap() < 1e-4);
        assert!(extinction_time(&GronwallParams { h: 1.0, ..params }).is_err());
        assert!(extinction_time(&GronwallParams::new(1.0, 0.0, 1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn envelope_edges() {
        let params = reference();
        let trace = build_trace(&params, 30).unwrap();
        assert!(decay_bound(&trace, &params, 0.0).unwrap() >= params.y0);
        assert_eq!(decay_bound(&trace, &params, 30.0).unwrap(), 0.0);
        let late = decay_bound(&trace, &params, trace.t[20]).unwrap();
        assert!(late < 1e-20);
        let with_h = GronwallParams::new(1.0, 1.0, 2.0, 1.0).unwrap();
        let trace = build_trace(&with_h, 5).unwrap();
        assert!(decay_bound(&trace, &with_h, trace.t[5] * 2.0).is_err());
        assert!(decay_bound(&trace, &with_h, -1.0).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(GronwallParams::new(0.0, 0.0, 2.0, 1.0).is_err());
        assert!(GronwallParams::new(1.0, -1.0, 2.0, 1.0).is_err());
        assert!(GronwallParams::new(1.0, 0.0, 0.5, 1.0).is_err());
        let bad = GronwallParams {
            lambda: 2.0,
            ..reference()
        };
        assert!(bad.validate().is_err());
        assert!(build_trace(&reference(), 0).is_err());
        assert!(build_trace(&GronwallParams::new(1.0, 0.0, 2.0, 0.0).unwrap(), 3).is_err());
    }

    #[test]
    fn trace_json_uses_short_keys() {
        let trace = build_trace(&reference(), 3).unwrap();
        let json = serde_json::to_value(&trace).unwrap();
        assert!(json.get("T").is_some() && json.get("M").is_some());
        assert!(json.get("W").is_none());
        let back: GronwallTrace = serde_json::from_value(json).unwrap();
        assert_eq!(back, trace);
    }
}
