//! Dirichlet box discretization.
//!
//! A field on the box `(0, L)^d` is stored as coefficients of the sine basis
//! `prod_i sin(k_i pi x_i / L)`, `1 <= k_i <= N`. Physical values live on the
//! `M = pad_factor * N` interior nodes `x_j = j L / (M + 1)` of each axis, so
//! the sine basis is orthogonal under the discrete sum and `-Delta` is diagonal
//! with eigenvalue `sum_i (k_i pi / L)^2`.
//!
//! Both synthesis and analysis use one complex FFT of length `2 (M + 1)`: for
//! real input `a_k` the transform `X_j = sum_k a_k exp(-i pi j k / (M + 1))`
//! carries the sine sum in `-Im X_j` and the cosine sum in `Re X_j`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{count, lit, Real};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Cube `(0, L)^d` with homogeneous Dirichlet data and its sine discretization.
#[derive(Clone)]
pub struct BoxDomain<T: Real> {
    dim: usize,
    length: T,
    modes: usize,
    pad_factor: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for BoxDomain<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoxDomain")
            .field("dim", &self.dim)
            .field("length", &self.length)
            .field("modes", &self.modes)
            .field("pad_factor", &self.pad_factor)
            .finish()
    }
}

impl<T: Real> PartialEq for BoxDomain<T> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.length == other.length
            && self.modes == other.modes
            && self.pad_factor == other.pad_factor
    }
}

impl<T: Real> BoxDomain<T> {
    pub fn new(dim: usize, length: T, modes: usize, pad_factor: usize) -> Result<Arc<Self>> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDomain(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(Error::InvalidDomain(format!("side length must be positive, got {length}")));
        }
        if modes == 0 {
            return Err(Error::InvalidDomain("modes per axis must be positive".into()));
        }
        if pad_factor == 0 {
            return Err(Error::InvalidDomain("pad factor must be at least 1".into()));
        }
        let m = modes * pad_factor;
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Ok(Arc::new(Self {
            dim,
            length,
            modes,
            pad_factor,
            fft,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Sine modes per axis, `N`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn pad_factor(&self) -> usize {
        self.pad_factor
    }

    /// Interior grid nodes per axis, `M`.
    pub fn grid_points(&self) -> usize {
        self.modes * self.pad_factor
    }

    /// Node spacing `L / (M + 1)`.
    pub fn spacing(&self) -> T {
        self.length / count(self.grid_points() + 1)
    }

    pub fn num_coeffs(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    pub fn num_grid(&self) -> usize {
        self.grid_points().pow(self.dim as u32)
    }

    /// Volume element of the grid quadrature, `h^d`.
    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// `(L / 2)^d`: squared L2 norm of one sine basis function.
    pub fn basis_norm_sq(&self) -> T {
        (self.length / lit(2.0)).powi(self.dim as i32)
    }

    /// Wavenumber `k pi / L` of the 1-based mode `k`.
    pub fn wavenumber(&self, k: usize) -> T {
        count::<T>(k) * T::PI() / self.length
    }

    /// Eigenvalue of `-Delta` for the 1-based multi-index `k`.
    pub fn eigenvalue(&self, k: &[usize]) -> T {
        k.iter().map(|&ki| self.wavenumber(ki).powi(2)).sum()
    }

    /// 1-based multi-index of the flat (row-major) coefficient index.
    pub fn mode_index(&self, flat: usize) -> [usize; MAX_DIM] {
        unravel(flat, self.modes, self.dim).map(|i| i + 1)
    }

    /// Physical coordinates of the flat interior grid index.
    pub fn grid_point(&self, flat: usize) -> [T; MAX_DIM] {
        let h = self.spacing();
        let idx = unravel(flat, self.grid_points(), self.dim);
        let mut x = [T::zero(); MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = count::<T>(idx[axis] + 1) * h;
        }
        x
    }

    /// Eigenvalues `mu_k` of `-Delta` in coefficient order.
    pub fn laplacian_eigenvalues(&self) -> Vec<T> {
        (0..self.num_coeffs())
            .map(|flat| self.eigenvalue(&self.mode_index(flat)[..self.dim]))
            .collect()
    }

    /// Euclidean length of every multi-index, in coefficient order.
    pub fn index_norms(&self) -> Vec<T> {
        (0..self.num_coeffs())
            .map(|flat| {
                let k = self.mode_index(flat);
                k[..self.dim].iter().map(|&ki| count::<T>(ki * ki)).sum::<T>().sqrt()
            })
            .collect()
    }

    /// Center of the box.
    pub fn center(&self) -> Vec<T> {
        vec![self.length / lit(2.0); self.dim]
    }

    fn shape(&self, len: usize) -> Vec<usize> {
        vec![len; self.dim]
    }

    fn synth_line(&self, coeffs: &[T], out: &mut [T], buf: &mut [Complex<T>]) {
        buf.iter_mut().for_each(|z| *z = Complex::default());
        for (k, &c) in coeffs.iter().enumerate() {
            buf[k + 1] = Complex::new(c, T::zero());
        }
        self.fft.process(buf);
        for (j, o) in out.iter_mut().enumerate() {
            *o = -buf[j + 1].im;
        }
    }

    /// Cosine sum `sum_k c_k cos(pi j k / (M + 1))` at `j = 0..=M+1`.
    fn synth_cos_line(&self, coeffs: &[T], out: &mut [T], buf: &mut [Complex<T>]) {
        buf.iter_mut().for_each(|z| *z = Complex::default());
        for (k, &c) in coeffs.iter().enumerate() {
            buf[k + 1] = Complex::new(c, T::zero());
        }
        self.fft.process(buf);
        for (j, o) in out.iter_mut().enumerate() {
            *o = buf[j].re;
        }
    }

    fn analyze_line(&self, values: &[T], out: &mut [T], buf: &mut [Complex<T>]) {
        buf.iter_mut().for_each(|z| *z = Complex::default());
        for (j, &v) in values.iter().enumerate() {
            buf[j + 1] = Complex::new(v, T::zero());
        }
        self.fft.process(buf);
        let scale = lit::<T>(2.0) / count(self.grid_points() + 1);
        for (k, o) in out.iter_mut().enumerate() {
            *o = -buf[k + 1].im * scale;
        }
    }

    fn fft_buffer(&self) -> Vec<Complex<T>> {
        vec![Complex::default(); 2 * (self.grid_points() + 1)]
    }
}

fn unravel(mut flat: usize, n: usize, dim: usize) -> [usize; MAX_DIM] {
    let mut idx = [0; MAX_DIM];
    for axis in (0..dim).rev() {
        idx[axis] = flat % n;
        flat /= n;
    }
    idx
}

/// Applies `op` to every line along `axis` of a row-major array, replacing
/// that axis length with `out_len`.
fn map_axis<T: Real>(
    data: &[T],
    shape: &[usize],
    axis: usize,
    out_len: usize,
    mut op: impl FnMut(&[T], &mut [T]),
) -> (Vec<T>, Vec<usize>) {
    let len = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out_shape = shape.to_vec();
    out_shape[axis] = out_len;
    let mut out = vec![T::zero(); outer * out_len * inner];
    let mut line = vec![T::zero(); len];
    let mut res = vec![T::zero(); out_len];
    for o in 0..outer {
        for i in 0..inner {
            for (a, l) in line.iter_mut().enumerate() {
                *l = data[(o * len + a) * inner + i];
            }
            op(&line, &mut res);
            for (a, &r) in res.iter().enumerate() {
                out[(o * out_len + a) * inner + i] = r;
            }
        }
    }
    (out, out_shape)
}

/// Field stored as sine-basis coefficients, row-major over the multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField<T: Real> {
    domain: Arc<BoxDomain<T>>,
    coeffs: Vec<T>,
}

/// Point values on the interior `M^d` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField<T: Real> {
    domain: Arc<BoxDomain<T>>,
    values: Vec<T>,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(domain: &Arc<BoxDomain<T>>) -> Self {
        Self {
            domain: Arc::clone(domain),
            coeffs: vec![T::zero(); domain.num_coeffs()],
        }
    }

    pub fn from_coeffs(domain: &Arc<BoxDomain<T>>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != domain.num_coeffs() {
            return Err(Error::DimensionMismatch {
                expected: domain.num_coeffs(),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(crate::error::invalid("coefficients", "non-finite entry"));
        }
        Ok(Self {
            domain: Arc::clone(domain),
            coeffs,
        })
    }

    /// `amplitude * prod_i sin(k_i pi x_i / L)` for the 1-based multi-index `k`.
    pub fn single_mode(domain: &Arc<BoxDomain<T>>, k: &[usize], amplitude: T) -> Result<Self> {
        if k.len() != domain.dim() || k.iter().any(|&ki| ki == 0 || ki > domain.modes()) {
            return Err(crate::error::invalid("mode", format!("{k:?} outside 1..={}", domain.modes())));
        }
        let mut field = Self::zeros(domain);
        let n = domain.modes();
        let flat = k.iter().fold(0, |acc, &ki| acc * n + (ki - 1));
        field.coeffs[flat] = amplitude;
        Ok(field)
    }

    /// Coefficients `|k|^{-decay} * xi_k` with independent standard normal `xi_k`.
    pub fn random<R: Rng + ?Sized>(domain: &Arc<BoxDomain<T>>, decay: T, rng: &mut R) -> Self {
        let coeffs = domain
            .index_norms()
            .into_iter()
            .map(|knorm| {
                let xi: f64 = rng.sample(StandardNormal);
                lit::<T>(xi) * knorm.powf(-decay)
            })
            .collect();
        Self {
            domain: Arc::clone(domain),
            coeffs,
        }
    }

    pub fn domain(&self) -> &Arc<BoxDomain<T>> {
        &self.domain
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Re-expresses the field on another domain with the same box, keeping the
    /// common modes and zero-filling the rest.
    pub fn resample(&self, target: &Arc<BoxDomain<T>>) -> Result<Self> {
        if target.dim() != self.domain.dim() || target.length() != self.domain.length() {
            return Err(Error::DomainMismatch);
        }
        let mut out = Self::zeros(target);
        let nt = target.modes();
        for flat in 0..self.domain.num_coeffs() {
            let k = self.domain.mode_index(flat);
            if k[..target.dim()].iter().all(|&ki| ki <= nt) {
                let tflat = k[..target.dim()].iter().fold(0, |acc, &ki| acc * nt + (ki - 1));
                out.coeffs[tflat] = self.coeffs[flat];
            }
        }
        Ok(out)
    }

    /// Multiplies each coefficient by `symbol(mu_k)`.
    pub fn apply_symbol(&self, symbol: impl Fn(T) -> T) -> Self {
        let coeffs = self
            .domain
            .laplacian_eigenvalues()
            .into_iter()
            .zip(&self.coeffs)
            .map(|(mu, &c)| symbol(mu) * c)
            .collect();
        Self {
            domain: Arc::clone(&self.domain),
            coeffs,
        }
    }

    /// Spectral `-Delta`.
    pub fn neg_laplacian(&self) -> Self {
        self.apply_symbol(|mu| mu)
    }

    /// Exact L2 norm squared from the coefficients (Parseval).
    pub fn l2_norm_sq(&self) -> T {
        self.domain.basis_norm_sq() * self.coeffs.iter().map(|&c| c * c).sum::<T>()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_sq().sqrt()
    }

    /// L2 inner product from the coefficients.
    pub fn inner(&self, other: &Self) -> T {
        self.domain.basis_norm_sq() * self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a * b).sum::<T>()
    }

    /// `||grad u||^2 = sum_k mu_k |c_k|^2 (L/2)^d`.
    pub fn gradient_norm_sq(&self) -> T {
        self.domain.basis_norm_sq()
            * self
                .domain
                .laplacian_eigenvalues()
                .into_iter()
                .zip(&self.coeffs)
                .map(|(mu, &c)| mu * c * c)
                .sum::<T>()
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            coeffs: self.coeffs.iter().map(|&c| a * c).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Self {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        Self {
            domain: Arc::clone(&self.domain),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&x, &y)| x + a * y).collect(),
        }
    }

    /// Point values on the interior grid.
    pub fn to_grid(&self) -> GridField<T> {
        let d = &self.domain;
        let m = d.grid_points();
        let mut buf = d.fft_buffer();
        let mut data = self.coeffs.clone();
        let mut shape = d.shape(d.modes());
        for axis in 0..d.dim() {
            let (next, next_shape) = map_axis(&data, &shape, axis, m, |line, out| d.synth_line(line, out, &mut buf));
            data = next;
            shape = next_shape;
        }
        GridField {
            domain: Arc::clone(d),
            values: data,
        }
    }

    /// Sine-basis projection of grid values (discrete sine transform).
    pub fn from_grid(grid: &GridField<T>) -> Self {
        let d = &grid.domain;
        let mut buf = d.fft_buffer();
        let mut data = grid.values.clone();
        let mut shape = d.shape(d.grid_points());
        for axis in 0..d.dim() {
            let (next, next_shape) =
                map_axis(&data, &shape, axis, d.modes(), |line, out| d.analyze_line(line, out, &mut buf));
            data = next;
            shape = next_shape;
        }
        Self {
            domain: Arc::clone(d),
            coeffs: data,
        }
    }

    /// Partial derivative along `axis` on the grid that includes both boundary
    /// nodes of that axis (where the derivative does not vanish).
    pub fn derivative_closed(&self, axis: usize) -> AxisClosedGrid<T> {
        let d = &self.domain;
        assert!(axis < d.dim(), "axis {axis} out of range");
        let m = d.grid_points();
        let mut buf = d.fft_buffer();
        let mut data = self.coeffs.clone();
        let mut shape = d.shape(d.modes());
        for a in 0..d.dim() {
            let (next, next_shape) = if a == axis {
                map_axis(&data, &shape, a, m + 2, |line, out| {
                    let scaled: Vec<T> = line.iter().enumerate().map(|(k, &c)| c * d.wavenumber(k + 1)).collect();
                    d.synth_cos_line(&scaled, out, &mut buf)
                })
            } else {
                map_axis(&data, &shape, a, m, |line, out| d.synth_line(line, out, &mut buf))
            };
            data = next;
            shape = next_shape;
        }
        AxisClosedGrid {
            domain: Arc::clone(d),
            axis,
            values: data,
        }
    }
}

impl<T: Real> GridField<T> {
    pub fn zeros(domain: &Arc<BoxDomain<T>>) -> Self {
        Self {
            domain: Arc::clone(domain),
            values: vec![T::zero(); domain.num_grid()],
        }
    }

    pub fn from_values(domain: &Arc<BoxDomain<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.num_grid() {
            return Err(Error::DimensionMismatch {
                expected: domain.num_grid(),
                found: values.len(),
            });
        }
        Ok(Self {
            domain: Arc::clone(domain),
            values,
        })
    }

    /// Samples `f` at every interior node.
    pub fn sample(domain: &Arc<BoxDomain<T>>, f: impl Fn(&[T]) -> T) -> Self {
        let values = (0..domain.num_grid())
            .map(|flat| f(&domain.grid_point(flat)[..domain.dim()]))
            .collect();
        Self {
            domain: Arc::clone(domain),
            values,
        }
    }

    pub fn domain(&self) -> &Arc<BoxDomain<T>> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn to_spectral(&self) -> SpectralField<T> {
        SpectralField::from_grid(self)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Grid quadrature `h^d sum_j v_j` (trapezoid; boundary nodes vanish).
    pub fn integral(&self) -> T {
        self.domain.cell_volume() * self.values.iter().copied().sum::<T>()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Values on a grid that is closed (boundary nodes included) along one axis
/// and interior along the others.
#[derive(Clone, Debug)]
pub struct AxisClosedGrid<T: Real> {
    domain: Arc<BoxDomain<T>>,
    axis: usize,
    values: Vec<T>,
}

impl<T: Real> AxisClosedGrid<T> {
    pub fn domain(&self) -> &Arc<BoxDomain<T>> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    /// Coordinates and trapezoid weight (including `h^d`) of every node.
    pub fn nodes(domain: &BoxDomain<T>, axis: usize) -> Vec<([T; MAX_DIM], T)> {
        let m = domain.grid_points();
        let h = domain.spacing();
        let dim = domain.dim();
        let mut shape = [m; MAX_DIM];
        shape[axis] = m + 2;
        let total: usize = shape[..dim].iter().product();
        let half = lit::<T>(0.5);
        (0..total)
            .map(|mut flat| {
                let mut x = [T::zero(); MAX_DIM];
                let mut w = domain.cell_volume();
                for a in (0..dim).rev() {
                    let i = flat % shape[a];
                    flat /= shape[a];
                    if a == axis {
                        x[a] = count::<T>(i) * h;
                        if i == 0 || i == m + 1 {
                            w = w * half;
                        }
                    } else {
                        x[a] = count::<T>(i + 1) * h;
                    }
                }
                (x, w)
            })
            .collect()
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        self.axpy(-T::one(), rhs)
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.scaled(-T::one())
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: T) -> SpectralField<T> {
        self.scaled(rhs)
    }
}
