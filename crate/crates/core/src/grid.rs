//! Uniform periodic grid on the ring angle, spectral kinetic operator and
//! FFT-backed circular correlations.
//!
//! Node `j` sits at `-π + j·Δ` with `Δ = 2π/M`. A shift by `s` nodes realizes
//! `f(φ - r₀)` for `r₀ = s·Δ`, so every integral over `r₀` is an exact
//! circular sum over the same `M` nodes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub struct RingGrid {
    m: usize,
    delta: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for RingGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RingGrid")
            .field("m", &self.m)
            .field("delta", &self.delta)
            .finish()
    }
}

/// Builds a ring grid with `m` nodes. `m` must be even and at least 8.
pub fn make_grid(m: usize) -> Result<Arc<RingGrid>> {
    RingGrid::new(m)
}

impl RingGrid {
    pub fn new(m: usize) -> Result<Arc<Self>> {
        if m < 8 || !m.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid size must be an even integer >= 8, got {m}"
            )));
        }
        let delta = 2.0 * PI / m as f64;
        let nodes = (0..m).map(|j| -PI + j as f64 * delta).collect();
        let half = (m / 2) as i64;
        let wavenumbers = (0..m as i64)
            .map(|k| if k < half { k } else { k - m as i64 })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            m,
            delta,
            nodes,
            wavenumbers,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }))
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Integer wavenumbers in FFT order: `0, 1, …, M/2-1, -M/2, …, -1`.
    pub fn wavenumbers(&self) -> &[i64] {
        &self.wavenumbers
    }

    /// Index of the node at `φ = 0`.
    pub fn center_index(&self) -> usize {
        self.m / 2
    }

    /// Shift `r₀ = s·Δ` mapped into `[-π, π)`.
    pub fn shift_value(&self, s: usize) -> f64 {
        let s = s % self.m;
        if s < self.m / 2 {
            s as f64 * self.delta
        } else {
            (s as f64 - self.m as f64) * self.delta
        }
    }

    /// Unnormalized forward DFT, `F_k = Σ_j x_j e^{-2πi jk/M}`.
    pub fn fft(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Unnormalized inverse DFT.
    pub fn ifft(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }

    fn check(&self, other: &RingGrid) -> Result<()> {
        if self.m != other.m {
            return Err(Error::GridMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }
}

/// Complex samples of a single-particle function on a [`RingGrid`].
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<RingGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<RingGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Arc<RingGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn from_real_fn(grid: &Arc<RingGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(grid: &Arc<RingGrid>, c: Complex64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    /// The normalized constant `1/√(2π)`.
    pub fn uniform(grid: &Arc<RingGrid>) -> Self {
        Self::constant(grid, Complex64::new((2.0 * PI).sqrt().recip(), 0.0))
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.delta * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// Copy rescaled to unit quadrature norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized {
                norm_sq: self.norm_sq(),
            });
        }
        Ok(self.scaled(Complex64::new(n.recip(), 0.0)))
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise square `φ²` (no conjugation).
    pub fn squared(&self) -> Self {
        self.map(|v| v * v)
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A function of the shift node `r₀ = s·Δ`, indexed by `s = 0..M`.
#[derive(Clone, Debug)]
pub struct Profile {
    grid: Arc<RingGrid>,
    values: Vec<Complex64>,
}

impl Profile {
    pub fn new(grid: Arc<RingGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, s: usize) -> Complex64 {
        self.values[s % self.values.len()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Quadrature inner product `Σ_j conj(f_j) g_j Δ`.
pub fn inner(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.grid.check(&g.grid)?;
    let sum: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum * f.grid.delta)
}

/// `T̂ = -∂²/∂φ²` applied spectrally: mode `n` is multiplied by `n²`.
pub fn apply_kinetic(f: &GridFunction) -> GridFunction {
    let grid = &f.grid;
    let mut buf = f.values.clone();
    grid.fft(&mut buf);
    let scale = (grid.len() as f64).recip();
    for (v, &n) in buf.iter_mut().zip(grid.wavenumbers()) {
        *v *= (n * n) as f64 * scale;
    }
    grid.ifft(&mut buf);
    GridFunction {
        grid: Arc::clone(grid),
        values: buf,
    }
}

/// `h(r₀) = Σ_j conj(f_j) g(φ_j - r₀) Δ` for every shift node.
pub fn crosscorr(f: &GridFunction, g: &GridFunction) -> Result<Profile> {
    f.grid.check(&g.grid)?;
    let values = crosscorr_raw(&f.grid, &f.values, &g.values);
    Ok(Profile {
        grid: Arc::clone(&f.grid),
        values,
    })
}

pub(crate) fn crosscorr_raw(grid: &RingGrid, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let mut ff = f.to_vec();
    let mut gg = g.to_vec();
    grid.fft(&mut ff);
    grid.fft(&mut gg);
    for (a, b) in ff.iter_mut().zip(&gg) {
        *a = a.conj() * b;
    }
    // c(s) = (1/M) Σ_k conj(F_k) G_k e^{-2πi sk/M}
    grid.fft(&mut ff);
    let scale = grid.delta / grid.len() as f64;
    for v in &mut ff {
        *v *= scale;
    }
    ff
}

/// Circular convolution `Σ_s c_s f_{j-s}` (no quadrature weight).
pub(crate) fn convolve_raw(grid: &RingGrid, c: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
    let mut cc = c.to_vec();
    let mut ff = f.to_vec();
    grid.fft(&mut cc);
    grid.fft(&mut ff);
    for (a, b) in cc.iter_mut().zip(&ff) {
        *a *= b;
    }
    grid.ifft(&mut cc);
    let scale = (grid.len() as f64).recip();
    for v in &mut cc {
        *v *= scale;
    }
    cc
}

/// Circular index shift: the new sample at node `i` is the old sample at
/// node `i - j`.
pub fn shift(f: &GridFunction, j: i64) -> GridFunction {
    let mut values = f.values.clone();
    rotate(&mut values, j);
    GridFunction {
        grid: Arc::clone(&f.grid),
        values,
    }
}

pub(crate) fn rotate(values: &mut [Complex64], j: i64) {
    let m = values.len() as i64;
    let r = j.rem_euclid(m) as usize;
    values.rotate_right(r);
}
