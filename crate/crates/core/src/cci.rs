//! The projected-Hartree (CCI) energy functional for `N` bosons on the ring,
//! its gradient, the stationarity equation and the minimizer.
//!
//! For a unit-norm orbital `φ` the overlap kernels are
//!
//! ```text
//! S(r₀) = ⟨φ(r)|φ(r - r₀)⟩
//! K(r₀) = ⟨φ(r)|T̂|φ(r - r₀)⟩
//! W(r₀) = ⟨φ²(r)|φ²(r - r₀)⟩
//! ```
//!
//! and the energy per particle is
//!
//! ```text
//! ε(N) = Σ S^{N-2} ε(N; r₀) / Σ S^N,   ε(N; r₀) = S K + Ũ₀(N-1)/2 · W
//! ```
//!
//! with every `r₀` integral taken as a shift-node sum times `Δ`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{apply_kinetic, convolve_raw, crosscorr_raw, GridFunction, Profile, RingGrid};
use crate::optimize::{initial_orbital, minimize, CciSolveConfig, Objective};
use crate::params::ModelParams;

/// Overlap magnitudes below this contribute nothing to any power.
pub const OVERLAP_FLOOR: f64 = 1e-250;

const NORM_TOL: f64 = 1e-8;
const IMAG_TOL: f64 = 1e-10;

/// `S^p` as `sign(S)^p · exp(p ln|S|)`, flushed to zero when `|S| < 1e-250`.
pub fn overlap_power(s: Complex64, p: usize) -> Complex64 {
    if p == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = s.norm();
    if r < OVERLAP_FLOOR {
        return Complex64::new(0.0, 0.0);
    }
    let p = p as f64;
    Complex64::from_polar((p * r.ln()).exp(), p * s.arg())
}

/// Overlap powers `S^{N-3}, …, S^N` at one shift node; `S^{N-3}` is zero for `N = 2`.
#[derive(Clone, Copy)]
struct Powers {
    n3: Complex64,
    n2: Complex64,
    n1: Complex64,
    n0: Complex64,
}

impl Powers {
    fn new(s: Complex64, n: usize) -> Self {
        let r = s.norm();
        if r < OVERLAP_FLOOR {
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            let pick = |p: usize| if p == 0 { one } else { zero };
            return Self {
                n3: if n >= 3 { pick(n - 3) } else { zero },
                n2: pick(n - 2),
                n1: pick(n - 1),
                n0: zero,
            };
        }
        let (ln_r, arg) = (r.ln(), s.arg());
        let pow = |p: usize| {
            if p == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                let p = p as f64;
                Complex64::from_polar((p * ln_r).exp(), p * arg)
            }
        };
        Self {
            n3: if n >= 3 {
                pow(n - 3)
            } else {
                Complex64::new(0.0, 0.0)
            },
            n2: pow(n - 2),
            n1: pow(n - 1),
            n0: pow(n),
        }
    }
}

/// The three overlap kernels over all shift nodes.
#[derive(Clone, Debug)]
pub struct Profiles {
    pub s: Profile,
    pub k: Profile,
    pub w: Profile,
}

impl Profiles {
    pub fn grid(&self) -> &Arc<RingGrid> {
        self.s.grid()
    }
}

fn check_normalized(phi: &GridFunction) -> Result<()> {
    let norm_sq = phi.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(())
}

/// `S`, `K` and `W` via FFT correlations. `phi` must have unit norm.
pub fn compute_profiles(phi: &GridFunction, _params: &ModelParams) -> Result<Profiles> {
    check_normalized(phi)?;
    Ok(profiles_fft(phi.grid(), phi.values()))
}

fn profiles_fft(grid: &Arc<RingGrid>, phi: &[Complex64]) -> Profiles {
    let tphi = kinetic_raw(grid, phi);
    let sq: Vec<Complex64> = phi.iter().map(|v| v * v).collect();
    let wrap = |values| Profile::new(Arc::clone(grid), values).expect("length matches grid");
    Profiles {
        s: wrap(crosscorr_raw(grid, phi, phi)),
        k: wrap(crosscorr_raw(grid, phi, &tphi)),
        w: wrap(crosscorr_raw(grid, &sq, &sq)),
    }
}

fn kinetic_raw(grid: &Arc<RingGrid>, phi: &[Complex64]) -> Vec<Complex64> {
    let f = GridFunction::new(Arc::clone(grid), phi.to_vec()).expect("length matches grid");
    apply_kinetic(&f).into_values()
}

/// `ε(N; r₀) = S(r₀)K(r₀) + Ũ₀(N-1)/2 · W(r₀)` at shift node `s`.
pub fn energy_density(profiles: &Profiles, params: &ModelParams, s: usize) -> Complex64 {
    profiles.s.at(s) * profiles.k.at(s) + params.pair_prefactor() * profiles.w.at(s)
}

/// `μ(r₀) = S²(r₀) N ε(N) - (N-1) ε(N-1; r₀)` where `ε(N-1; r₀)` keeps `Ũ₀`
/// fixed and uses the `N-1` interaction prefactor.
pub fn chemical_potential_density(
    profiles: &Profiles,
    params: &ModelParams,
    eps_n: f64,
    s: usize,
) -> Complex64 {
    let n = params.n() as f64;
    let sv = profiles.s.at(s);
    let eps_minus = sv * profiles.k.at(s) + params.pair_prefactor_minus_one() * profiles.w.at(s);
    sv * sv * n * eps_n - (n - 1.0) * eps_minus
}

struct Evaluation {
    energy: f64,
    den: f64,
    powers: Vec<Powers>,
}

fn evaluate_energy(
    grid: &RingGrid,
    profiles: &Profiles,
    params: &ModelParams,
) -> Result<Evaluation> {
    let n = params.n();
    let g = params.pair_prefactor();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    let mut powers = Vec::with_capacity(grid.len());
    for ((s, k), w) in profiles
        .s
        .values()
        .iter()
        .zip(profiles.k.values())
        .zip(profiles.w.values())
    {
        let p = Powers::new(*s, n);
        num += p.n1 * k + p.n2 * w * g;
        den += p.n0;
        magnitude += p.n0.norm();
        powers.push(p);
    }
    let num = num * grid.delta();
    let den = den * grid.delta();
    // Σ S^N cancelling to roundoff is as degenerate as an exact zero.
    if den.norm() < OVERLAP_FLOOR || den.norm() < 1e-12 * magnitude * grid.delta() {
        return Err(Error::DegenerateOrbital(den.norm()));
    }
    let eps = num / den;
    if eps.im.abs() > IMAG_TOL * eps.re.abs().max(1.0) {
        return Err(Error::NonRealEnergy(eps.im));
    }
    Ok(Evaluation {
        energy: eps.re,
        den: den.re,
        powers,
    })
}

/// `ε(N)` of the (internally normalized) orbital.
pub fn energy_per_particle(phi: &GridFunction, params: &ModelParams) -> Result<f64> {
    let phi = phi.normalized()?;
    let grid = phi.grid();
    let profiles = profiles_fft(grid, phi.values());
    Ok(evaluate_energy(grid, &profiles, params)?.energy)
}

fn energy_and_gradient(
    grid: &Arc<RingGrid>,
    phi: &[Complex64],
    params: &ModelParams,
) -> Result<(f64, Vec<Complex64>)> {
    let n = params.n() as f64;
    let g = params.pair_prefactor();
    let profiles = profiles_fft(grid, phi);
    let eval = evaluate_energy(grid, &profiles, params)?;
    let eps = eval.energy;

    let m = grid.len();
    let mut a = Vec::with_capacity(m);
    let mut sn1 = Vec::with_capacity(m);
    let mut sn2 = Vec::with_capacity(m);
    for (i, p) in eval.powers.iter().enumerate() {
        let k = profiles.k.values()[i];
        let w = profiles.w.values()[i];
        a.push((n - 1.0) * p.n2 * k + g * (n - 2.0) * p.n3 * w - eps * n * p.n1);
        sn1.push(p.n1);
        sn2.push(p.n2);
    }
    let tphi = kinetic_raw(grid, phi);
    let sq: Vec<Complex64> = phi.iter().map(|v| v * v).collect();
    let t1 = convolve_raw(grid, &a, phi);
    let t2 = convolve_raw(grid, &sn1, &tphi);
    let t3 = convolve_raw(grid, &sn2, &sq);
    let scale = 2.0 * grid.delta() * grid.delta() / eval.den;
    let grad = (0..m)
        .map(|j| (t1[j] + t2[j] + 2.0 * g * phi[j].conj() * t3[j]) * scale)
        .collect();
    Ok((eps, grad))
}

/// Gradient of `ε(N)` with respect to the real and imaginary parts of each
/// sample, packed as `∂ε/∂Re φ_j + i ∂ε/∂Im φ_j`.
pub fn cci_gradient(phi: &GridFunction, params: &ModelParams) -> Result<GridFunction> {
    let norm = phi.norm();
    let unit = phi.normalized()?;
    let (_, mut grad) = energy_and_gradient(unit.grid(), unit.values(), params)?;
    for v in &mut grad {
        *v /= norm;
    }
    GridFunction::new(Arc::clone(phi.grid()), grad)
}

/// Overlap kernels by direct `O(M²)` shift loops.
fn profiles_direct(grid: &Arc<RingGrid>, phi: &[Complex64]) -> Profiles {
    let m = grid.len();
    let tphi = kinetic_raw(grid, phi);
    let sq: Vec<Complex64> = phi.iter().map(|v| v * v).collect();
    let corr = |f: &[Complex64], g: &[Complex64]| -> Vec<Complex64> {
        (0..m)
            .map(|s| {
                let sum: Complex64 = (0..m).map(|j| f[j].conj() * g[(j + m - s) % m]).sum();
                sum * grid.delta()
            })
            .collect()
    };
    let wrap = |values| Profile::new(Arc::clone(grid), values).expect("length matches grid");
    Profiles {
        s: wrap(corr(phi, phi)),
        k: wrap(corr(phi, &tphi)),
        w: wrap(corr(&sq, &sq)),
    }
}

/// Pointwise residual `LHS - RHS` of the orbital equation and its quadrature
/// norm, assembled by direct shift loops.
///
/// For `N = 2` the right side uses `2 S ε(2) - K` so that no `S⁻¹` appears.
pub fn cci_residual(phi: &GridFunction, params: &ModelParams) -> Result<(GridFunction, f64)> {
    check_normalized(phi)?;
    let grid = phi.grid();
    let m = grid.len();
    let n = params.n();
    let values = phi.values();
    let profiles = profiles_direct(grid, values);
    let eps = evaluate_energy(grid, &profiles, params)?.energy;
    let tphi = kinetic_raw(grid, values);
    let coupling = (n - 1) as f64 * params.u_tilde();

    let mut left_s = Vec::with_capacity(m);
    let mut left_w = Vec::with_capacity(m);
    let mut right = Vec::with_capacity(m);
    for s in 0..m {
        let sv = profiles.s.at(s);
        let p = Powers::new(sv, n);
        left_s.push(p.n1);
        left_w.push(p.n2);
        let weight = if n == 2 {
            2.0 * sv * eps - profiles.k.at(s)
        } else {
            p.n3 * chemical_potential_density(&profiles, params, eps, s)
        };
        right.push(weight);
    }

    let residual: Vec<Complex64> = (0..m)
        .map(|j| {
            let mut lhs = Complex64::new(0.0, 0.0);
            let mut rhs = Complex64::new(0.0, 0.0);
            for s in 0..m {
                let i = (j + m - s) % m;
                lhs += left_s[s] * tphi[i]
                    + coupling * left_w[s] * values[j].conj() * values[i] * values[i];
                rhs += right[s] * values[i];
            }
            (lhs - rhs) * grid.delta()
        })
        .collect();
    let residual = GridFunction::new(Arc::clone(grid), residual)?;
    let norm = residual.norm();
    Ok((residual, norm))
}

/// Outcome of [`solve_cci`].
#[derive(Clone, Debug)]
pub struct CciResult {
    /// Unit-norm, recentered, phase-fixed orbital.
    pub orbital: GridFunction,
    pub energy_per_particle: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub residual_norm: f64,
    /// Energy after each accepted step; nonincreasing up to [`ENERGY_NOISE`](crate::ENERGY_NOISE).
    pub energy_trace: Vec<f64>,
    pub converged: bool,
}

struct CciObjective<'a> {
    grid: &'a Arc<RingGrid>,
    params: ModelParams,
}

impl Objective for CciObjective<'_> {
    fn evaluate(&self, phi: &[Complex64]) -> Result<(f64, Vec<Complex64>)> {
        energy_and_gradient(self.grid, phi, &self.params)
    }
}

/// Minimizes `ε(N)` over unit-norm orbitals on `grid`.
///
/// An unconverged run is not an error: the best iterate is returned with
/// `converged = false`.
pub fn solve_cci(
    grid: &Arc<RingGrid>,
    params: &ModelParams,
    config: &CciSolveConfig,
) -> Result<CciResult> {
    let start = initial_orbital(grid, config)?;
    solve_cci_from(&start, params, config)
}

/// [`solve_cci`] from a caller-supplied starting orbital.
pub fn solve_cci_from(
    start: &GridFunction,
    params: &ModelParams,
    config: &CciSolveConfig,
) -> Result<CciResult> {
    let grid = start.grid();
    let objective = CciObjective {
        grid,
        params: *params,
    };
    let out = minimize(grid, &objective, start, config, params.gamma() <= 0.0, None)?;
    let orbital = GridFunction::new(Arc::clone(grid), out.orbital)?;
    let (_, residual_norm) = cci_residual(&orbital, params)?;
    Ok(CciResult {
        orbital,
        energy_per_particle: out.energy,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        residual_norm,
        energy_trace: out.trace,
        converged: out.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn overlap_power_rules() {
        let s = Complex64::new(-0.5, 0.0);
        assert!((overlap_power(s, 3) - Complex64::new(-0.125, 0.0)).norm() < 1e-15);
        assert_eq!(overlap_power(s, 0), Complex64::new(1.0, 0.0));
        assert_eq!(
            overlap_power(Complex64::new(1e-251, 0.0), 2),
            Complex64::new(0.0, 0.0)
        );
        // 0.5^10000 underflows benignly
        assert_eq!(overlap_power(Complex64::new(0.5, 0.0), 10_000).norm(), 0.0);
        let z = Complex64::from_polar(0.9, 0.3);
        assert!((overlap_power(z, 7) - z.powi(7)).norm() < 1e-14);
    }

    #[test]
    fn uniform_profiles() {
        let g = make_grid(32).unwrap();
        let p = ModelParams::new(5, -0.2).unwrap();
        let u = GridFunction::uniform(&g);
        let pr = compute_profiles(&u, &p).unwrap();
        for s in 0..32 {
            assert!((pr.s.at(s) - 1.0).norm() < 1e-13);
            assert!(pr.k.at(s).norm() < 1e-13);
            assert!((pr.w.at(s) - 1.0 / (2.0 * PI)).norm() < 1e-13);
            assert!((energy_density(&pr, &p, s) - (-0.1)).norm() < 1e-13);
            assert!((chemical_potential_density(&pr, &p, -0.1, s) - (-0.2)).norm() < 1e-13);
        }
    }

    #[test]
    fn plane_wave_profiles() {
        let g = make_grid(32).unwrap();
        let p = ModelParams::new(3, -0.4).unwrap();
        let a = (2.0 * PI).sqrt().recip();
        let e = GridFunction::from_fn(&g, |x| Complex64::from_polar(a, x));
        let pr = compute_profiles(&e, &p).unwrap();
        for s in 0..32 {
            let ph = Complex64::from_polar(1.0, -(s as f64) * g.delta());
            assert!((pr.s.at(s) - ph).norm() < 1e-13);
            assert!((pr.k.at(s) - ph).norm() < 1e-13);
            assert!((pr.w.at(s) - ph * ph / (2.0 * PI)).norm() < 1e-13);
        }
    }

    #[test]
    fn profiles_require_unit_norm() {
        let g = make_grid(16).unwrap();
        let p = ModelParams::new(2, -0.2).unwrap();
        let f = GridFunction::uniform(&g).scaled(Complex64::new(1.1, 0.0));
        assert!(matches!(
            compute_profiles(&f, &p),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn uniform_energy_and_stationarity() {
        let g = make_grid(64).unwrap();
        let u = GridFunction::uniform(&g);
        for &(n, gamma) in &[(2, -0.2), (3, -0.2), (5, -1.0), (100, 0.3), (10_000, -0.2)] {
            let p = ModelParams::new(n, gamma).unwrap();
            let e = energy_per_particle(&u, &p).unwrap();
            assert!((e - gamma / 2.0).abs() < 1e-13, "N={n}: {e}");
            let (_, r) = cci_residual(&u, &p).unwrap();
            assert!(r < 1e-10, "N={n}: residual {r}");
            let grad = cci_gradient(&u, &p).unwrap();
            let mut proj = grad.values().to_vec();
            let c: Complex64 = proj
                .iter()
                .zip(u.values())
                .map(|(a, b)| b.conj() * a)
                .sum::<Complex64>()
                / u.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
            for (x, b) in proj.iter_mut().zip(u.values()) {
                *x -= c * b;
            }
            assert!(proj.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn free_particles_energy_is_non_negative() {
        let g = make_grid(64).unwrap();
        let p = ModelParams::new(4, 0.0).unwrap();
        let f = GridFunction::from_real_fn(&g, |x| (0.8 * x.cos()).exp());
        assert!(energy_per_particle(&f, &p).unwrap() > 0.0);
        assert!(
            energy_per_particle(&GridFunction::uniform(&g), &p)
                .unwrap()
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn degenerate_denominator() {
        // A single plane wave has Σ S² = 0 at N = 2.
        let g = make_grid(16).unwrap();
        let p = ModelParams::new(2, -0.2).unwrap();
        let e = GridFunction::from_fn(&g, |x| Complex64::from_polar(1.0, x));
        assert!(matches!(
            energy_per_particle(&e, &p),
            Err(Error::DegenerateOrbital(_))
        ));
    }

    #[test]
    fn non_stationary_orbital_has_large_residual() {
        let g = make_grid(64).unwrap();
        let p = ModelParams::new(5, -0.2).unwrap();
        let f = GridFunction::from_real_fn(&g, |x| (1.5 * x.cos()).exp() + 0.2 * (3.0 * x).sin())
            .normalized()
            .unwrap();
        let (_, r) = cci_residual(&f, &p).unwrap();
        assert!(r > 1e-3);
    }
}
