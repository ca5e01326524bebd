//! Exact diagonalization of a few contact-interacting bosons in the
//! zero-momentum sector of a finite plane-wave basis.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Largest many-body basis that will be diagonalized densely.
pub const MAX_FOCK_DIM: usize = 4000;

/// Single-particle modes kept in the Fock basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeSet {
    /// Momenta `-n_max..=n_max`, momentum conserved exactly.
    Truncated { n_max: usize },
    /// The `m` wavenumbers of a ring grid, momentum conserved modulo `m`.
    /// Reproduces the grid-discretized Hamiltonian exactly.
    Ring { m: usize },
}

impl ModeSet {
    fn momenta(self) -> Vec<i64> {
        match self {
            ModeSet::Truncated { n_max } => (-(n_max as i64)..=n_max as i64).collect(),
            ModeSet::Ring { m } => {
                let half = (m / 2) as i64;
                (0..m as i64)
                    .map(|j| if j < half { j } else { j - m as i64 })
                    .collect()
            }
        }
    }

    fn modulus(self) -> Option<i64> {
        match self {
            ModeSet::Truncated { .. } => None,
            ModeSet::Ring { m } => Some(m as i64),
        }
    }
}

/// Ground energy per particle in the `P = 0` sector with `n_max` plane waves each way.
pub fn fock_diagonalize(n: usize, params: &ModelParams, n_max: usize) -> Result<f64> {
    if n != params.n() {
        return Err(Error::Config(format!(
            "particle number {n} does not match parameters ({})",
            params.n()
        )));
    }
    fock_ground_energy(params, ModeSet::Truncated { n_max }).map(|e| e / n as f64)
}

/// Total ground energy of `params.n()` bosons in the zero-momentum sector.
pub fn fock_ground_energy(params: &ModelParams, modes: ModeSet) -> Result<f64> {
    let n = params.n();
    if !(2..=4).contains(&n) {
        return Err(Error::Config(format!(
            "Fock diagonalization supports 2..=4 particles, got {n}"
        )));
    }
    match modes {
        ModeSet::Truncated { n_max: 0 } => {
            return Err(Error::Config("n_max must be positive".into()))
        }
        ModeSet::Ring { m } if m < 4 || !m.is_multiple_of(2) => {
            return Err(Error::Config(format!(
                "ring size must be even and >= 4, got {m}"
            )))
        }
        _ => {}
    }
    let momenta = modes.momenta();
    let modulus = modes.modulus();
    let reduce = |p: i64| modulus.map_or(p, |m| p.rem_euclid(m));
    let lookup: HashMap<i64, usize> = momenta
        .iter()
        .enumerate()
        .map(|(i, &k)| (reduce(k), i))
        .collect();

    let states = enumerate_states(&momenta, n, &reduce);
    let dim = states.len();
    if dim > MAX_FOCK_DIM {
        return Err(Error::BasisTooLarge {
            dim,
            cap: MAX_FOCK_DIM,
        });
    }
    let index: HashMap<&[usize], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();

    let coupling = 0.5 * params.u_tilde() / (2.0 * PI);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut occ = vec![0usize; momenta.len()];
    for (col, state) in states.iter().enumerate() {
        occ.iter_mut().for_each(|o| *o = 0);
        for &i in state {
            occ[i] += 1;
        }
        h[(col, col)] += state
            .iter()
            .map(|&i| (momenta[i] * momenta[i]) as f64)
            .sum::<f64>();

        let occupied: Vec<usize> = (0..momenta.len()).filter(|&i| occ[i] > 0).collect();
        // ½ û Σ a†_{k1} a†_{k2} a_{k3} a_{k4}
        for &k4 in &occupied {
            let amp4 = (occ[k4] as f64).sqrt();
            occ[k4] -= 1;
            for &k3 in &occupied {
                if occ[k3] == 0 {
                    continue;
                }
                let amp3 = (occ[k3] as f64).sqrt();
                occ[k3] -= 1;
                let total = momenta[k3] + momenta[k4];
                for k1 in 0..momenta.len() {
                    let Some(&k2) = lookup.get(&reduce(total - momenta[k1])) else {
                        continue;
                    };
                    let amp2 = ((occ[k2] + 1) as f64).sqrt();
                    occ[k2] += 1;
                    let amp1 = ((occ[k1] + 1) as f64).sqrt();
                    occ[k1] += 1;
                    let row = index[key(&occ).as_slice()];
                    h[(row, col)] += coupling * amp1 * amp2 * amp3 * amp4;
                    occ[k1] -= 1;
                    occ[k2] -= 1;
                }
                occ[k3] += 1;
            }
            occ[k4] += 1;
        }
    }
    let asym = (0..dim)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)]).abs())
        .fold(0.0, f64::max);
    assert!(asym < 1e-10, "Fock Hamiltonian is not symmetric ({asym:e})");
    let eig = SymmetricEigen::new(h);
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

fn key(occ: &[usize]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect()
}

/// Nondecreasing mode-index tuples of length `n` with zero total momentum.
fn enumerate_states(momenta: &[i64], n: usize, reduce: &impl Fn(i64) -> i64) -> Vec<Vec<usize>> {
    fn walk(
        momenta: &[i64],
        n: usize,
        start: usize,
        current: &mut Vec<usize>,
        sum: i64,
        reduce: &impl Fn(i64) -> i64,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == n {
            if reduce(sum) == 0 {
                out.push(current.clone());
            }
            return;
        }
        for i in start..momenta.len() {
            current.push(i);
            walk(momenta, n, i, current, sum + momenta[i], reduce, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    walk(
        momenta,
        n,
        0,
        &mut Vec::with_capacity(n),
        0,
        reduce,
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noninteracting_ground_state_is_zero() {
        let p = ModelParams::from_u_tilde(3, 0.0).unwrap();
        let e = fock_ground_energy(&p, ModeSet::Truncated { n_max: 6 }).unwrap();
        assert!(e.abs() < 1e-12);
    }

    #[test]
    fn condensate_expectation_bounds_ground_state() {
        // ⟨0|H|0⟩ = ½ û N(N-1) = N γ/2 per the uniform product state
        let p = ModelParams::new(4, -0.2).unwrap();
        let e = fock_diagonalize(4, &p, 6).unwrap();
        assert!(e < -0.1);
    }

    #[test]
    fn two_body_matches_relative_problem() {
        use crate::exact::{solve_relative, InteractionSpec, Sector};
        let p = ModelParams::new(2, -0.2).unwrap();
        let e = fock_ground_energy(&p, ModeSet::Truncated { n_max: 10 }).unwrap();
        let rel = solve_relative(
            &InteractionSpec::contact(p.u_tilde()),
            Sector::Even,
            0,
            10,
            0,
        )
        .unwrap();
        assert!((e - rel.energy).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_requests() {
        let p = ModelParams::new(5, -0.2).unwrap();
        assert!(fock_ground_energy(&p, ModeSet::Truncated { n_max: 4 }).is_err());
        let p = ModelParams::new(3, -0.2).unwrap();
        assert!(fock_diagonalize(2, &p, 4).is_err());
        assert!(matches!(
            fock_ground_energy(
                &ModelParams::new(4, -0.2).unwrap(),
                ModeSet::Truncated { n_max: 40 }
            ),
            Err(Error::BasisTooLarge { .. })
        ));
    }
}
