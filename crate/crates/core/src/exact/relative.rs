//! Two-particle problem in relative coordinates.
//!
//! At total momentum zero the pair wavefunction depends only on
//! `θ = φ₁ - φ₂` and the Hamiltonian is `-2∂²/∂θ² + U(θ)`. It is diagonalized
//! in the normalized bases `{1/√(2π), cos(nθ)/√π}` (even) or `{sin(nθ)/√π}`
//! (odd). At total momentum `P₀` the basis is the symmetrized pair of plane
//! waves with momenta `(k, P₀ - k)`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::interaction::InteractionSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistics {
    Symmetric,
    Antisymmetric,
}

impl Statistics {
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Symmetric => 1.0,
            Statistics::Antisymmetric => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    /// `P₀ = 0`, even in `θ` (bosons, spin singlet).
    Even,
    /// `P₀ = 0`, odd in `θ` (spin triplet).
    Odd,
    /// Any `P₀`, with the requested exchange symmetry.
    General { statistics: Statistics },
}

impl Sector {
    pub fn statistics(self) -> Statistics {
        match self {
            Sector::Even => Statistics::Symmetric,
            Sector::Odd => Statistics::Antisymmetric,
            Sector::General { statistics } => statistics,
        }
    }
}

/// One eigenpair of the relative problem.
#[derive(Clone, Debug)]
pub struct RelativeSolution {
    pub sector: Sector,
    pub p0: i64,
    pub n_max: usize,
    /// Two-particle energy (includes the centre-of-mass kinetic term).
    pub energy: f64,
    pub level_index: usize,
    /// Smallest momentum label carried by `coefficients`.
    pub k_min: i64,
    /// Decomposition coefficients `A_k` for `k = k_min, k_min + 1, …`.
    ///
    /// At `P₀ = 0` they are real and satisfy
    /// `Ψ₊ = A₀ + ½ Σ_{k>0} A_k cos kθ` and `Ψ₋ = Σ_{k>0} A_k sin kθ`;
    /// at `P₀ ≠ 0`, `Ψ = Σ_k A_k [e^{i(kφ₁ + (P₀-k)φ₂)} ± e^{i(kφ₂ + (P₀-k)φ₁)}]`.
    pub coefficients: Vec<Complex64>,
    /// Unit eigenvector in the sector basis: `(c₀, c₁, …)` over `1/√(2π), cos(nθ)/√π`
    /// (even), `(c₁, c₂, …)` over `sin(nθ)/√π` (odd), or plane-wave pair amplitudes
    /// `c_k` of `e^{i(kφ₁ + (P₀-k)φ₂)}/(2π)` for `k = k_min, …` (general).
    pub amplitudes: Vec<f64>,
}

impl RelativeSolution {
    pub fn statistics(&self) -> Statistics {
        self.sector.statistics()
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        let i = k - self.k_min;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coefficients
            .get(i as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coefficients.len() as i64 - 1
    }
}

fn diagonalize(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let dim = h.nrows();
    let asym = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)]).abs())
        .fold(0.0, f64::max);
    assert!(
        asym < 1e-12,
        "relative Hamiltonian is not symmetric ({asym:e})"
    );
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: largest component positive
        let big = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if big < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Energy and decomposition coefficients of the requested level.
pub fn solve_relative(
    interaction: &InteractionSpec,
    sector: Sector,
    p0: i64,
    n_max: usize,
    level: usize,
) -> Result<RelativeSolution> {
    if n_max < 8 {
        return Err(Error::Config(format!("n_max must be >= 8, got {n_max}")));
    }
    match sector {
        Sector::Even | Sector::Odd if p0 != 0 => Err(Error::Config(
            "even/odd sectors are defined at zero total momentum".into(),
        )),
        Sector::Even => solve_parity(interaction, true, n_max, level),
        Sector::Odd => solve_parity(interaction, false, n_max, level),
        Sector::General { statistics } => solve_general(interaction, statistics, p0, n_max, level),
    }
}

fn solve_parity(
    interaction: &InteractionSpec,
    even: bool,
    n_max: usize,
    level: usize,
) -> Result<RelativeSolution> {
    let u = |m: usize| interaction.component(m as i64);
    // basis label n for row i
    let labels: Vec<usize> = if even {
        (0..=n_max).collect()
    } else {
        (1..=n_max).collect()
    };
    let dim = labels.len();
    if level >= dim {
        return Err(Error::InvalidLevel { level, dim });
    }
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let (m, n) = (labels[i], labels[j]);
        let kinetic = if i == j { 2.0 * (n * n) as f64 } else { 0.0 };
        let diff = m.abs_diff(n);
        let potential = if !even {
            u(diff) - u(m + n)
        } else {
            match (m, n) {
                (0, 0) => u(0),
                (0, k) | (k, 0) => SQRT_2 * u(k),
                _ => u(diff) + u(m + n),
            }
        };
        kinetic + potential
    });
    let (values, vectors) = diagonalize(h);
    let c: Vec<f64> = vectors.column(level).iter().copied().collect();
    let coefficients = if even {
        labels
            .iter()
            .zip(&c)
            .map(|(&n, &cn)| {
                let a = if n == 0 {
                    cn / (2.0 * PI)
                } else {
                    SQRT_2 * cn / PI
                };
                Complex64::new(a, 0.0)
            })
            .collect()
    } else {
        std::iter::once(Complex64::new(0.0, 0.0))
            .chain(c.iter().map(|&cn| Complex64::new(cn / (PI * SQRT_2), 0.0)))
            .collect()
    };
    Ok(RelativeSolution {
        sector: if even { Sector::Even } else { Sector::Odd },
        p0: 0,
        n_max,
        energy: values[level],
        level_index: level,
        k_min: 0,
        coefficients,
        amplitudes: c,
    })
}

fn solve_general(
    interaction: &InteractionSpec,
    statistics: Statistics,
    p0: i64,
    n_max: usize,
    level: usize,
) -> Result<RelativeSolution> {
    let n = n_max as i64;
    // |2k - P₀| <= 2 n_max
    let k_min = (p0 - 2 * n).div_euclid(2) + i64::from((p0 - 2 * n).rem_euclid(2) != 0);
    let k_max = (p0 + 2 * n).div_euclid(2);
    let sign = statistics.sign();
    // basis vectors as (k, weight) lists over plane-wave pairs
    let mut basis: Vec<Vec<(i64, f64)>> = Vec::new();
    for k in k_min..=k_max {
        let partner = p0 - k;
        if k < partner {
            let w = SQRT_2.recip();
            basis.push(vec![(k, w), (partner, sign * w)]);
        } else if k == partner && statistics == Statistics::Symmetric {
            basis.push(vec![(k, 1.0)]);
        }
    }
    let dim = basis.len();
    if level >= dim {
        return Err(Error::InvalidLevel { level, dim });
    }
    let pair_h = |k: i64, kp: i64| -> f64 {
        let kinetic = if k == kp {
            (k * k + (p0 - k) * (p0 - k)) as f64
        } else {
            0.0
        };
        kinetic + interaction.component(k - kp)
    };
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        basis[i]
            .iter()
            .flat_map(|&(k, a)| basis[j].iter().map(move |&(kp, b)| a * b * pair_h(k, kp)))
            .sum()
    });
    let (values, vectors) = diagonalize(h);
    let width = (k_max - k_min + 1) as usize;
    let mut amplitudes = vec![0.0; width];
    for (i, b) in basis.iter().enumerate() {
        for &(k, w) in b {
            amplitudes[(k - k_min) as usize] += vectors[(i, level)] * w;
        }
    }
    let coefficients = amplitudes
        .iter()
        .map(|&c| Complex64::new(c / (4.0 * PI), 0.0))
        .collect();
    Ok(RelativeSolution {
        sector: Sector::General { statistics },
        p0,
        n_max,
        energy: values[level],
        level_index: level,
        k_min,
        coefficients,
        amplitudes,
    })
}

/// Exact ground energy of `-2∂²/∂θ² + Ũ₀δ(θ)` on the periodic interval.
///
/// Attractive: `E = -2κ²` with `κ tanh(πκ) = |Ũ₀|/4`. Repulsive: `E = 2q²`
/// with `q tan(πq) = Ũ₀/4`, `0 < q < 1/2`.
pub fn contact_ground_energy(u_tilde: f64) -> Result<f64> {
    if !u_tilde.is_finite() {
        return Err(Error::Config("interaction must be finite".into()));
    }
    if u_tilde == 0.0 {
        return Ok(0.0);
    }
    let target = u_tilde.abs() / 4.0;
    if u_tilde < 0.0 {
        let f = |k: f64| k * (PI * k).tanh() - target;
        let mut hi = 1.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::NoRoot("bound-state bracket".into()));
            }
        }
        let k = bisect(f, 0.0, hi)?;
        Ok(-2.0 * k * k)
    } else {
        let f = |q: f64| q * (PI * q).tan() - target;
        let q = bisect(f, 0.0, 0.5 - 1e-15)?;
        Ok(2.0 * q * q)
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot(format!("f({lo}) = {flo}, f({hi}) = {fhi}")));
    }
    let increasing = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_contact_spectrum_is_free() {
        let c = InteractionSpec::contact(-0.4 * PI);
        for level in 0..6 {
            let s = solve_relative(&c, Sector::Odd, 0, 16, level).unwrap();
            let n = (level + 1) as f64;
            assert!((s.energy - 2.0 * n * n).abs() < 1e-12);
        }
    }

    #[test]
    fn free_even_ground_state() {
        let s = solve_relative(&InteractionSpec::contact(0.0), Sector::Even, 0, 8, 0).unwrap();
        assert!(s.energy.abs() < 1e-14);
        assert!((s.amplitudes[0] - 1.0).abs() < 1e-14);
        assert!(s.coefficients[1..].iter().all(|a| a.norm() < 1e-14));
    }

    #[test]
    fn invalid_requests() {
        let c = InteractionSpec::contact(-1.0);
        assert!(matches!(
            solve_relative(&c, Sector::Even, 0, 8, 9),
            Err(Error::InvalidLevel { level: 9, dim: 9 })
        ));
        assert!(solve_relative(&c, Sector::Even, 0, 4, 0).is_err());
        assert!(solve_relative(&c, Sector::Even, 2, 8, 0).is_err());
    }

    #[test]
    fn general_sector_at_zero_momentum_matches_parity_sectors() {
        let u = InteractionSpec::fourier(vec![0.0, -0.3]).unwrap();
        for level in 0..3 {
            let a = solve_relative(&u, Sector::Even, 0, 12, level).unwrap();
            let b = solve_relative(
                &u,
                Sector::General {
                    statistics: Statistics::Symmetric,
                },
                0,
                12,
                level,
            )
            .unwrap();
            assert!((a.energy - b.energy).abs() < 1e-12);
            let a = solve_relative(&u, Sector::Odd, 0, 12, level).unwrap();
            let b = solve_relative(
                &u,
                Sector::General {
                    statistics: Statistics::Antisymmetric,
                },
                0,
                12,
                level,
            )
            .unwrap();
            assert!((a.energy - b.energy).abs() < 1e-12);
        }
    }

    #[test]
    fn general_window() {
        let c = InteractionSpec::contact(-1.0);
        let g = Sector::General {
            statistics: Statistics::Symmetric,
        };
        let s = solve_relative(&c, g, 2, 8, 0).unwrap();
        assert_eq!(s.k_min, -7);
        assert_eq!(s.k_max(), 9);
        let s = solve_relative(&c, g, 3, 8, 0).unwrap();
        assert_eq!(s.k_min, -6);
        assert_eq!(s.k_max(), 9);
    }

    #[test]
    fn contact_root_limits() {
        assert_eq!(contact_ground_energy(0.0).unwrap(), 0.0);
        // weak coupling: first order in Ũ₀ is Ũ₀/(2π)
        let u = -1e-6;
        let e = contact_ground_energy(u).unwrap();
        assert!((e - u / (2.0 * PI)).abs() < 1e-11);
        let e = contact_ground_energy(-u).unwrap();
        assert!((e + u / (2.0 * PI)).abs() < 1e-11);
        // strong attraction: κ → |Ũ₀|/4
        let e = contact_ground_energy(-400.0).unwrap();
        assert!((e + 2.0 * 100.0f64.powi(2)).abs() < 1e-6);
    }
}
