//! Weights of exponential growth and the weighted norms built from them.
//!
//! The smooth weight is `phi(x) = exp(-eps sqrt(1 + |x - x0|^2))`; the bump is a
//! `C^inf` radial cutoff equal to 1 on the unit ball around `x0` and vanishing
//! outside the ball of radius 2.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{AxisClosedGrid, BoxDomain, GridField, SpectralField, MAX_DIM};
use crate::scalar::{count, lit, Real};

/// Exponents accepted by the weighted `L^p` norms.
pub const SUPPORTED_EXPONENTS: [u32; 6] = [2, 3, 4, 6, 10, 12];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    SmoothExp,
    Bump,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec<T: Real> {
    pub kind: WeightKind,
    /// Decay rate of the smooth weight; ignored by the bump.
    pub epsilon: T,
    pub center: Vec<T>,
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn flat_exp<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
fn smooth_step<T: Real>(t: T) -> T {
    let a = flat_exp(t);
    let b = flat_exp(T::one() - t);
    a / (a + b)
}

fn smooth_step_derivative<T: Real>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let s = T::one() - t;
    let a = flat_exp(t);
    let b = flat_exp(s);
    (a / (t * t) * b + a * b / (s * s)) / (a + b).powi(2)
}

impl<T: Real> WeightSpec<T> {
    pub fn smooth(epsilon: T, center: &[T]) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon.is_finite()) {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        Self::check_center(center)?;
        Ok(Self {
            kind: WeightKind::SmoothExp,
            epsilon,
            center: center.to_vec(),
        })
    }

    pub fn bump(center: &[T]) -> Result<Self> {
        Self::check_center(center)?;
        Ok(Self {
            kind: WeightKind::Bump,
            epsilon: T::zero(),
            center: center.to_vec(),
        })
    }

    fn check_center(center: &[T]) -> Result<()> {
        if center.is_empty() || center.len() > MAX_DIM || center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("center", format!("need 1..={MAX_DIM} finite coordinates")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Same kind and center, different decay rate.
    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        match self.kind {
            WeightKind::SmoothExp => Self::smooth(epsilon, &self.center),
            WeightKind::Bump => Ok(self.clone()),
        }
    }

    fn offset(&self, x: &[T]) -> [T; MAX_DIM] {
        let mut d = [T::zero(); MAX_DIM];
        for (i, c) in self.center.iter().enumerate() {
            d[i] = x[i] - *c;
        }
        d
    }

    fn radius_sq(&self, x: &[T]) -> T {
        self.offset(x).iter().map(|&d| d * d).sum()
    }

    pub fn eval(&self, x: &[T]) -> T {
        let r2 = self.radius_sq(x);
        match self.kind {
            WeightKind::SmoothExp => (-self.epsilon * (T::one() + r2).sqrt()).exp(),
            WeightKind::Bump => smooth_step(lit::<T>(2.0) - r2.sqrt()),
        }
    }

    pub fn gradient(&self, x: &[T]) -> [T; MAX_DIM] {
        let d = self.offset(x);
        let r2: T = d.iter().map(|&v| v * v).sum();
        let radial = match self.kind {
            // d/dr of phi divided by r
            WeightKind::SmoothExp => {
                let q = (T::one() + r2).sqrt();
                -self.epsilon * self.eval(x) / q
            }
            WeightKind::Bump => {
                let r = r2.sqrt();
                if r.is_zero() {
                    T::zero()
                } else {
                    -smooth_step_derivative(lit::<T>(2.0) - r) / r
                }
            }
        };
        d.map(|v| radial * v)
    }

    /// Laplacian of the smooth weight.
    pub fn laplacian(&self, x: &[T]) -> Result<T> {
        if self.kind != WeightKind::SmoothExp {
            return Err(invalid("kind", "laplacian is provided for the smooth weight only"));
        }
        let r2 = self.radius_sq(x);
        let q = (T::one() + r2).sqrt();
        let eps = self.epsilon;
        let dim = count::<T>(self.dim());
        Ok(self.eval(x) * (eps * eps * r2 / (q * q) - eps * (dim / q - r2 / (q * q * q))))
    }

    pub fn sample(&self, domain: &Arc<BoxDomain<T>>) -> GridField<T> {
        GridField::sample(domain, |x| self.eval(x))
    }
}

/// Components of `||xi||^2` in the weighted energy space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyNorms<T> {
    /// `||phi grad xi_1||^2`
    pub gradient: T,
    /// `lambda0 ||phi xi_1||^2`
    pub potential: T,
    /// `||phi xi_2||^2`
    pub velocity: T,
}

impl<T: Real> EnergyNorms<T> {
    pub fn total(&self) -> T {
        self.gradient + self.potential + self.velocity
    }
}

/// A weight tabulated on the interior grid and on the axis-closed gradient grids.
#[derive(Clone, Debug)]
pub struct SampledWeight<T: Real> {
    spec: WeightSpec<T>,
    domain: Arc<BoxDomain<T>>,
    interior: GridField<T>,
    /// Per axis: quadrature weights for `phi^2 (d_a u)^2` on the closed grid.
    closed: Vec<Vec<T>>,
}

impl<T: Real> SampledWeight<T> {
    pub fn new(spec: &WeightSpec<T>, domain: &Arc<BoxDomain<T>>) -> Result<Self> {
        if spec.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: spec.dim(),
            });
        }
        let h = domain.spacing();
        let half = domain.length() / lit(2.0);
        // Euler-Maclaurin endpoint correction for phi^2 (d_a u)^2: d_a^2 u vanishes
        // on the boundary, so only the phi d_a phi part of the slope remains.
        let end_weight = domain.cell_volume() * h / lit(6.0);
        let closed = (0..domain.dim())
            .map(|axis| {
                AxisClosedGrid::nodes(domain, axis)
                    .into_iter()
                    .map(|(x, w)| {
                        let x = &x[..domain.dim()];
                        let phi = spec.eval(x);
                        let mut c = w * phi * phi;
                        if x[axis] < h / lit(2.0) || x[axis] > domain.length() - h / lit(2.0) {
                            let sign = if x[axis] > half { T::one() } else { -T::one() };
                            c = c - sign * end_weight * phi * spec.gradient(x)[axis];
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            spec: spec.clone(),
            domain: Arc::clone(domain),
            interior: spec.sample(domain),
            closed,
        })
    }

    pub fn spec(&self) -> &WeightSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &GridField<T> {
        &self.interior
    }

    /// Pointwise product `phi * g`.
    pub fn multiply(&self, grid: &GridField<T>) -> GridField<T> {
        self.interior.zip_map(grid, |w, g| w * g)
    }

    /// `(int phi^p |u|^p)^(1/p)` by grid quadrature.
    pub fn lp_norm(&self, grid: &GridField<T>, p: u32) -> Result<T> {
        check_exponent(p)?;
        let sum = self.interior.zip_map(grid, |w, u| (w * u).abs().powi(p as i32)).integral();
        Ok(sum.powf(count::<T>(p as usize).recip()))
    }

    /// `||phi u||^2` by grid quadrature.
    pub fn l2_norm_sq(&self, grid: &GridField<T>) -> T {
        self.interior.zip_map(grid, |w, u| (w * u).powi(2)).integral()
    }

    /// `h^d sum phi^power a b` on the interior grid.
    pub fn weighted_inner(&self, a: &GridField<T>, b: &GridField<T>, power: i32) -> T {
        let sum: T = self
            .interior
            .values()
            .iter()
            .zip(a.values().iter().zip(b.values()))
            .map(|(&w, (&x, &y))| w.powi(power) * x * y)
            .sum();
        sum * self.domain.cell_volume()
    }

    /// `||phi grad u||^2`, with the derivatives synthesized spectrally.
    pub fn gradient_norm_sq(&self, u: &SpectralField<T>) -> T {
        let du: Vec<AxisClosedGrid<T>> = (0..self.domain.dim()).map(|axis| u.derivative_closed(axis)).collect();
        self.gradient_norm_sq_from(&du)
    }

    /// `||phi grad u||^2` from precomputed partial derivatives, one per axis.
    pub fn gradient_norm_sq_from(&self, derivatives: &[AxisClosedGrid<T>]) -> T {
        derivatives
            .iter()
            .map(|du| {
                du.values()
                    .iter()
                    .zip(&self.closed[du.axis()])
                    .map(|(&g, &w)| w * g * g)
                    .sum::<T>()
            })
            .sum()
    }

    pub fn energy(&self, u: &SpectralField<T>, v: &SpectralField<T>, lambda0: T) -> EnergyNorms<T> {
        EnergyNorms {
            gradient: self.gradient_norm_sq(u),
            potential: lambda0 * self.l2_norm_sq(&u.to_grid()),
            velocity: self.l2_norm_sq(&v.to_grid()),
        }
    }
}

fn check_exponent(p: u32) -> Result<()> {
    if SUPPORTED_EXPONENTS.contains(&p) {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(p))
    }
}

pub fn weighted_lp_norm<T: Real>(field: &SpectralField<T>, spec: &WeightSpec<T>, p: u32) -> Result<T> {
    check_exponent(p)?;
    SampledWeight::new(spec, field.domain())?.lp_norm(&field.to_grid(), p)
}

/// Max over `centers` of the smooth-weighted `L^p` norm.
pub fn uniformly_local_norm<T: Real>(field: &SpectralField<T>, epsilon: T, p: u32, centers: &[Vec<T>]) -> Result<T> {
    check_exponent(p)?;
    if centers.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let grid = field.to_grid();
    let mut best = T::zero();
    for c in centers {
        let w = SampledWeight::new(&WeightSpec::smooth(epsilon, c)?, field.domain())?;
        best = best.max(w.lp_norm(&grid, p)?);
    }
    Ok(best)
}

pub fn energy_norm<T: Real>(
    u: &SpectralField<T>,
    v: &SpectralField<T>,
    spec: &WeightSpec<T>,
    lambda0: T,
) -> Result<EnergyNorms<T>> {
    if u.domain() != v.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(SampledWeight::new(spec, u.domain())?.energy(u, v, lambda0))
}

/// Unweighted `L^p` norm of grid values restricted to the ball `B_R(center)`.
pub fn ball_lp_norm<T: Real>(grid: &GridField<T>, center: &[T], radius: T, p: u32) -> Result<T> {
    check_exponent(p)?;
    let d = grid.domain();
    let r2 = radius * radius;
    let sum: T = grid
        .values()
        .iter()
        .enumerate()
        .filter(|(flat, _)| {
            let x = d.grid_point(*flat);
            center.iter().zip(&x).map(|(&c, &xi)| (xi - c) * (xi - c)).sum::<T>() < r2
        })
        .map(|(_, &u)| u.abs().powi(p as i32))
        .sum();
    Ok((sum * d.cell_volume()).powf(count::<T>(p as usize).recip()))
}

/// `int phi(x0)^2 ||u||^2_{L^2(B_R(x0))} dx0` with `x0` running over the grid.
pub fn ball_averaged_norm_sq<T: Real>(field: &SpectralField<T>, weight: &WeightSpec<T>, radius: T) -> Result<T> {
    let d = field.domain();
    let phi = SampledWeight::new(weight, d)?;
    let u2: Vec<T> = field.to_grid().values().iter().map(|&u| u * u).collect();
    let points: Vec<[T; MAX_DIM]> = (0..d.num_grid()).map(|flat| d.grid_point(flat)).collect();
    let r2 = radius * radius;
    let h = d.cell_volume();
    let mut total = T::zero();
    for (x0, &w) in points.iter().zip(phi.values().values()) {
        let local: T = points
            .iter()
            .zip(&u2)
            .filter(|(x, _)| x.iter().zip(x0).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() < r2)
            .map(|(_, &v)| v)
            .sum();
        total = total + w * w * local;
    }
    Ok(total * h * h)
}

/// Result of sampling `phi(x + y) <= exp(mu |y|) phi(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthReport<T> {
    pub max_ratio: T,
    pub samples: usize,
    pub passed: bool,
}

/// Largest sampled `phi(x + y) / (exp(mu |y|) phi(x))`; with `inverse` the
/// check is run on `1 / phi`.
pub fn check_growth_axiom<T: Real>(spec: &WeightSpec<T>, mu: T, pairs: &[(Vec<T>, Vec<T>)], inverse: bool) -> Result<GrowthReport<T>> {
    if spec.kind != WeightKind::SmoothExp {
        return Err(invalid("kind", "growth axiom is checked for the smooth weight only"));
    }
    let mut max_ratio = T::zero();
    for (x, y) in pairs {
        let xy: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a + b).collect();
        let norm_y = y.iter().map(|&v| v * v).sum::<T>().sqrt();
        let (top, bottom) = if inverse {
            (spec.eval(x), spec.eval(&xy))
        } else {
            (spec.eval(&xy), spec.eval(x))
        };
        max_ratio = max_ratio.max(top / ((mu * norm_y).exp() * bottom));
    }
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit(8.0));
    Ok(GrowthReport {
        max_ratio,
        samples: pairs.len(),
        passed: max_ratio <= T::one() + tol,
    })
}

/// Lattice `{ j * spacing }^d` strictly inside the box.
pub fn center_lattice<T: Real>(domain: &BoxDomain<T>, spacing: T) -> Result<Vec<Vec<T>>> {
    if !(spacing > T::zero() && spacing.is_finite()) {
        return Err(invalid("spacing", format!("must be positive, got {spacing}")));
    }
    let axis: Vec<T> = (1..)
        .map(|j| count::<T>(j) * spacing)
        .take_while(|&x| x < domain.length())
        .collect();
    if axis.is_empty() {
        return Err(Error::EmptyCenters);
    }
    let mut points: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..domain.dim() {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}
