//! Gross-Pitaevskii baseline: `ε_GP = ⟨φ|T̂|φ⟩ + Ũ₀(N-1)/2 ∫|φ|⁴`, which is the
//! CCI energy density at zero shift.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{apply_kinetic, GridFunction, RingGrid};
use crate::optimize::{initial_orbital, minimize, CciSolveConfig, Objective};
use crate::params::ModelParams;

/// GP energy per particle of a unit-norm orbital.
pub fn gp_energy(phi: &GridFunction, params: &ModelParams) -> f64 {
    let (a, b, c) = moments(phi.grid(), phi.values());
    a / b + params.pair_prefactor() * c / (b * b)
}

/// `(⟨φ|T̂|φ⟩, ⟨φ|φ⟩, ∫|φ|⁴)`.
fn moments(grid: &Arc<RingGrid>, phi: &[Complex64]) -> (f64, f64, f64) {
    let f = GridFunction::new(Arc::clone(grid), phi.to_vec()).expect("length matches grid");
    let tphi = apply_kinetic(&f);
    let d = grid.delta();
    let kin: f64 = phi
        .iter()
        .zip(tphi.values())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    let norm: f64 = phi.iter().map(|v| v.norm_sqr()).sum();
    let quartic: f64 = phi.iter().map(|v| v.norm_sqr().powi(2)).sum();
    (kin * d, norm * d, quartic * d)
}

/// `⟨φ|T̂ + Ũ₀(N-1)|φ|²|φ⟩` for a unit-norm orbital.
pub fn gp_chemical_potential(phi: &GridFunction, params: &ModelParams) -> f64 {
    let (a, b, c) = moments(phi.grid(), phi.values());
    a / b + 2.0 * params.pair_prefactor() * c / (b * b)
}

/// Raw-sample gradient of the scale-invariant GP energy.
pub fn gp_gradient(phi: &GridFunction, params: &ModelParams) -> GridFunction {
    let (_, grad) = energy_and_gradient(phi.grid(), phi.values(), params);
    GridFunction::new(Arc::clone(phi.grid()), grad).expect("length matches grid")
}

fn energy_and_gradient(
    grid: &Arc<RingGrid>,
    phi: &[Complex64],
    params: &ModelParams,
) -> (f64, Vec<Complex64>) {
    let g = params.pair_prefactor();
    let f = GridFunction::new(Arc::clone(grid), phi.to_vec()).expect("length matches grid");
    let tphi = apply_kinetic(&f);
    let (a, b, c) = moments(grid, phi);
    let d = grid.delta();
    let energy = a / b + g * c / (b * b);
    let grad = phi
        .iter()
        .zip(tphi.values())
        .map(|(&x, &tx)| {
            2.0 * d
                * (tx / b - x * (a / (b * b)) + x * (2.0 * g * x.norm_sqr() / (b * b))
                    - x * (2.0 * g * c / (b * b * b)))
        })
        .collect();
    (energy, grad)
}

#[derive(Clone, Debug)]
pub struct GpResult {
    /// Unit-norm, recentered, phase-fixed orbital.
    pub orbital: GridFunction,
    pub energy_per_particle: f64,
    pub chemical_potential: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

struct GpObjective<'a> {
    grid: &'a Arc<RingGrid>,
    params: ModelParams,
}

impl Objective for GpObjective<'_> {
    fn evaluate(&self, phi: &[Complex64]) -> Result<(f64, Vec<Complex64>)> {
        Ok(energy_and_gradient(self.grid, phi, &self.params))
    }
}

/// Minimizes the GP energy under unit norm with the same initialization and
/// line-search policy as the CCI solver.
pub fn solve_gp(
    grid: &Arc<RingGrid>,
    params: &ModelParams,
    config: &CciSolveConfig,
) -> Result<GpResult> {
    let start = initial_orbital(grid, config)?;
    let objective = GpObjective {
        grid,
        params: *params,
    };
    let out = minimize(grid, &objective, &start, config, true, Some(1.0))?;
    let orbital = GridFunction::new(Arc::clone(grid), out.orbital)?;
    let chemical_potential = gp_chemical_potential(&orbital, params);
    Ok(GpResult {
        orbital,
        energy_per_particle: out.energy,
        chemical_potential,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        converged: out.converged,
    })
}
