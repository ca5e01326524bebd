//! Orbital pairs whose translation-averaged (anti)symmetrized product
//! reproduces an exact two-particle eigenstate.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::relative::{RelativeSolution, Sector, Statistics};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, RingGrid};

/// How an orbital pair recombines into `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairForm {
    /// Cosine/sine orbitals at zero total momentum: `φ₁φ₁` (symmetric) or
    /// `det[φ₁, φ₂]` (antisymmetric).
    Parity,
    /// Plane-wave orbitals: `e^{iP₀r₀}[φ₁φ₂ ± φ₂φ₁]`.
    PlaneWave,
}

#[derive(Clone, Debug)]
pub struct OrbitalPair {
    pub phi1: GridFunction,
    pub phi2: GridFunction,
    pub form: PairForm,
}

/// Principal square root: nonnegative real part, `+i√|a|` on the negative axis.
pub fn principal_sqrt(a: Complex64) -> Complex64 {
    if a.im == 0.0 {
        if a.re >= 0.0 {
            Complex64::new(a.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-a.re).sqrt())
        }
    } else {
        a.sqrt()
    }
}

/// Samples the two orbitals of a relative eigenstate on `grid`.
pub fn build_orbitals(solution: &RelativeSolution, grid: &Arc<RingGrid>) -> OrbitalPair {
    let norm = (2.0 * PI).sqrt().recip();
    let roots: Vec<(i64, Complex64)> = (solution.k_min..=solution.k_max())
        .map(|k| (k, principal_sqrt(solution.coefficient(k))))
        .filter(|(_, r)| *r != Complex64::new(0.0, 0.0))
        .collect();
    let form = match solution.sector {
        Sector::General { .. } => PairForm::PlaneWave,
        _ => PairForm::Parity,
    };
    let (phi1, phi2) = if form == PairForm::Parity {
        let phi1 = GridFunction::from_fn(grid, |r| {
            roots
                .iter()
                .map(|&(k, a)| a * (k as f64 * r).cos())
                .sum::<Complex64>()
                * norm
        });
        let phi2 = GridFunction::from_fn(grid, |r| {
            roots
                .iter()
                .map(|&(k, a)| a * (k as f64 * r).sin())
                .sum::<Complex64>()
                * norm
        });
        (phi1, phi2)
    } else {
        let p0 = solution.p0;
        let plane = |r: f64, k: i64| Complex64::from_polar(1.0, k as f64 * r);
        let phi1 = GridFunction::from_fn(grid, |r| {
            roots
                .iter()
                .map(|&(k, a)| a * plane(r, k))
                .sum::<Complex64>()
                * norm
        });
        let phi2 = GridFunction::from_fn(grid, |r| {
            roots
                .iter()
                .map(|&(k, a)| a * plane(r, p0 - k))
                .sum::<Complex64>()
                * norm
        });
        (phi1, phi2)
    };
    OrbitalPair { phi1, phi2, form }
}

/// Two-particle amplitude `Ψ(φ_{j₁}, φ_{j₂})`, stored row-major in `j₁`.
#[derive(Clone, Debug)]
pub struct TwoBodyWavefunction {
    grid: Arc<RingGrid>,
    values: Vec<Complex64>,
    pub statistics: Statistics,
    pub p0: i64,
    /// Norm before normalization.
    pub raw_norm: f64,
}

impl TwoBodyWavefunction {
    fn from_raw(
        grid: Arc<RingGrid>,
        mut values: Vec<Complex64>,
        statistics: Statistics,
        p0: i64,
    ) -> Self {
        let d = grid.delta();
        let raw_norm = (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * d * d).sqrt();
        if raw_norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= raw_norm);
        }
        TwoBodyWavefunction {
            grid,
            values,
            statistics,
            p0,
            raw_norm,
        }
    }

    pub fn grid(&self) -> &Arc<RingGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, j1: usize, j2: usize) -> Complex64 {
        let m = self.grid.len();
        self.values[(j1 % m) * m + j2 % m]
    }

    pub fn norm_sq(&self) -> f64 {
        let d = self.grid.delta();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * d * d
    }

    /// `max |Ψ(a, b) ∓ Ψ(b, a)|` for the declared statistics.
    pub fn exchange_error(&self) -> f64 {
        let m = self.grid.len();
        let sign = self.statistics.sign();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                worst = worst.max((self.at(a, b) - self.at(b, a) * sign).norm());
            }
        }
        worst
    }

    /// `max |Ψ(j₁ + a, j₂ + a) - e^{iP₀ aδ} Ψ(j₁, j₂)|` over all `j₁, j₂`.
    pub fn translation_error(&self, a: usize) -> f64 {
        let m = self.grid.len();
        let phase = Complex64::from_polar(1.0, self.p0 as f64 * a as f64 * self.grid.delta());
        let mut worst = 0.0f64;
        for j1 in 0..m {
            for j2 in 0..m {
                worst = worst.max((self.at(j1 + a, j2 + a) - phase * self.at(j1, j2)).norm());
            }
        }
        worst
    }

    /// `max |Ψ_self - cΨ_other|` with the complex factor `c` chosen by least squares.
    pub fn aligned_max_error(&self, other: &TwoBodyWavefunction) -> Result<f64> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.len() != other.grid.len() {
            return Err(Error::GridMismatch {
                left: self.grid.len(),
                right: other.grid.len(),
            });
        }
        let num: Complex64 = other
            .values
            .iter()
            .zip(&self.values)
            .map(|(b, a)| b.conj() * a)
            .sum();
        let den: f64 = other.values.iter().map(|b| b.norm_sqr()).sum();
        let c = if den > 0.0 {
            num / den
        } else {
            Complex64::new(0.0, 0.0)
        };
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - c * b).norm())
            .fold(0.0, f64::max))
    }
}

/// Translation-averaged (anti)symmetrized product, summed over every shift node.
pub fn reconstruct(
    pair: &OrbitalPair,
    p0: i64,
    statistics: Statistics,
) -> Result<TwoBodyWavefunction> {
    let grid = Arc::clone(pair.phi1.grid());
    if pair.phi2.len() != grid.len() {
        return Err(Error::GridMismatch {
            left: grid.len(),
            right: pair.phi2.len(),
        });
    }
    let m = grid.len();
    let d = grid.delta();
    let f1 = pair.phi1.values();
    let f2 = pair.phi2.values();
    let mut psi = vec![Complex64::new(0.0, 0.0); m * m];
    let mut a1 = vec![Complex64::new(0.0, 0.0); m];
    let mut a2 = vec![Complex64::new(0.0, 0.0); m];
    let hartree = pair.form == PairForm::Parity && statistics == Statistics::Symmetric;
    let sign = statistics.sign();
    for s in 0..m {
        let weight = Complex64::from_polar(d, p0 as f64 * grid.shift_value(s));
        for j in 0..m {
            let idx = (j + m - s) % m;
            a1[j] = f1[idx];
            a2[j] = f2[idx];
        }
        for j1 in 0..m {
            let row = &mut psi[j1 * m..(j1 + 1) * m];
            if hartree {
                let x = weight * a1[j1];
                for (out, &y) in row.iter_mut().zip(&a1) {
                    *out += x * y;
                }
            } else {
                let x1 = weight * a1[j1];
                let x2 = weight * a2[j1] * sign;
                for ((out, &y1), &y2) in row.iter_mut().zip(&a1).zip(&a2) {
                    *out += x1 * y2 + x2 * y1;
                }
            }
        }
    }
    Ok(TwoBodyWavefunction::from_raw(grid, psi, statistics, p0))
}

/// `Ψ` evaluated directly from the eigenvector in its own basis.
pub fn direct_wavefunction(
    solution: &RelativeSolution,
    grid: &Arc<RingGrid>,
) -> TwoBodyWavefunction {
    let m = grid.len();
    let x = grid.nodes();
    let c = &solution.amplitudes;
    let two_pi = 2.0 * PI;
    let mut psi = vec![Complex64::new(0.0, 0.0); m * m];
    for j1 in 0..m {
        for j2 in 0..m {
            let theta = x[j1] - x[j2];
            psi[j1 * m + j2] = match solution.sector {
                Sector::Even => {
                    let f = c[0] / two_pi.sqrt()
                        + c[1..]
                            .iter()
                            .enumerate()
                            .map(|(i, cn)| cn * ((i + 1) as f64 * theta).cos())
                            .sum::<f64>()
                            / PI.sqrt();
                    Complex64::new(f / two_pi.sqrt(), 0.0)
                }
                Sector::Odd => {
                    let f = c
                        .iter()
                        .enumerate()
                        .map(|(i, cn)| cn * ((i + 1) as f64 * theta).sin())
                        .sum::<f64>()
                        / PI.sqrt();
                    Complex64::new(f / two_pi.sqrt(), 0.0)
                }
                Sector::General { .. } => {
                    c.iter()
                        .enumerate()
                        .map(|(i, &ck)| {
                            let k = solution.k_min + i as i64;
                            Complex64::from_polar(
                                ck,
                                k as f64 * x[j1] + (solution.p0 - k) as f64 * x[j2],
                            )
                        })
                        .sum::<Complex64>()
                        / two_pi
                }
            };
        }
    }
    TwoBodyWavefunction::from_raw(Arc::clone(grid), psi, solution.statistics(), solution.p0)
}

/// Unprojected `φ(φ₁)φ(φ₂)`.
pub fn hartree_product(phi: &GridFunction) -> TwoBodyWavefunction {
    let m = phi.len();
    let v = phi.values();
    let psi = (0..m * m).map(|i| v[i / m] * v[i % m]).collect();
    TwoBodyWavefunction::from_raw(Arc::clone(phi.grid()), psi, Statistics::Symmetric, 0)
}

/// Mean and variance of the total momentum `-i(∂₁ + ∂₂)`, evaluated spectrally.
pub fn momentum_check(psi: &TwoBodyWavefunction) -> (f64, f64) {
    let grid = psi.grid();
    let m = grid.len();
    let mut data = psi.values().to_vec();
    for row in data.chunks_mut(m) {
        grid.fft(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for j2 in 0..m {
        for j1 in 0..m {
            column[j1] = data[j1 * m + j2];
        }
        grid.fft(&mut column);
        for j1 in 0..m {
            data[j1 * m + j2] = column[j1];
        }
    }
    let k = grid.wavenumbers();
    let (mut w, mut first, mut second) = (0.0, 0.0, 0.0);
    for k1 in 0..m {
        for k2 in 0..m {
            let p = (k[k1] + k[k2]) as f64;
            let prob = data[k1 * m + k2].norm_sqr();
            w += prob;
            first += prob * p;
            second += prob * p * p;
        }
    }
    let mean = first / w;
    (mean, (second / w - mean * mean).max(0.0))
}
