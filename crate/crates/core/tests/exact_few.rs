use std::f64::consts::PI;

use cci_core::exact::*;
use cci_core::*;

const N_MAX: usize = 64;
const M: usize = 256;

fn contact(gamma: f64) -> InteractionSpec {
    InteractionSpec::contact(ModelParams::new(2, gamma).unwrap().u_tilde())
}

fn finite_range() -> InteractionSpec {
    InteractionSpec::fourier(vec![0.0, -0.3]).unwrap()
}

fn check_level(solution: &RelativeSolution, grid: &std::sync::Arc<RingGrid>) {
    let pair = build_orbitals(solution, grid);
    let psi = reconstruct(&pair, solution.p0, solution.statistics()).unwrap();
    let direct = direct_wavefunction(solution, grid);
    let err = psi.aligned_max_error(&direct).unwrap();
    let tag = format!(
        "{:?} P0={} level {}",
        solution.sector, solution.p0, solution.level_index
    );
    assert!(err < 1e-8, "{tag}: reconstruction error {err:e}");
    assert!(
        (psi.raw_norm - 1.0).abs() < 1e-10,
        "{tag}: norm {}",
        psi.raw_norm
    );
    assert!(psi.exchange_error() < 1e-12, "{tag}");
    let (mean, var) = momentum_check(&psi);
    assert!((mean - solution.p0 as f64).abs() < 1e-10, "{tag}: {mean}");
    assert!(var < 1e-10, "{tag}: variance {var:e}");
}

#[test]
fn even_levels_decompose_exactly() {
    let g = make_grid(M).unwrap();
    for interaction in [contact(-0.2), finite_range()] {
        for level in 0..5 {
            let s = solve_relative(&interaction, Sector::Even, 0, N_MAX, level).unwrap();
            assert!(s.coefficients.iter().all(|a| a.im == 0.0));
            check_level(&s, &g);
        }
    }
}

#[test]
fn odd_levels_decompose_exactly() {
    let g = make_grid(M).unwrap();
    let interaction = finite_range();
    let mut shift = 0.0;
    for level in 0..5 {
        let s = solve_relative(&interaction, Sector::Odd, 0, N_MAX, level).unwrap();
        let n = (level + 1) as f64;
        shift += (s.energy - 2.0 * n * n).abs();
        check_level(&s, &g);
        let psi = reconstruct(&build_orbitals(&s, &g), 0, Statistics::Antisymmetric).unwrap();
        for j in 0..M {
            assert!(psi.at(j, j).norm() < 1e-12);
        }
    }
    // unlike contact, the finite-range interaction moves the odd levels
    assert!(shift > 1e-3, "{shift}");
}

#[test]
fn finite_momentum_levels_decompose_exactly() {
    let g = make_grid(M).unwrap();
    for interaction in [contact(-0.2), finite_range()] {
        for statistics in [Statistics::Symmetric, Statistics::Antisymmetric] {
            for level in 0..3 {
                let s = solve_relative(
                    &interaction,
                    Sector::General { statistics },
                    2,
                    N_MAX,
                    level,
                )
                .unwrap();
                check_level(&s, &g);
                let psi = reconstruct(&build_orbitals(&s, &g), 2, statistics).unwrap();
                for a in [1, 5, 100] {
                    assert!(psi.translation_error(a) < 1e-10);
                }
            }
        }
    }
}

#[test]
fn attractive_ground_state_orbitals_are_real_and_orthogonal() {
    let g = make_grid(M).unwrap();
    for gamma in [-0.2, -1.0] {
        let s = solve_relative(&contact(gamma), Sector::Even, 0, N_MAX, 0).unwrap();
        assert!(s.coefficients.iter().all(|a| a.re > 0.0));
        let pair = build_orbitals(&s, &g);
        assert!(pair
            .phi1
            .values()
            .iter()
            .chain(pair.phi2.values())
            .all(|z| z.im == 0.0));
        assert!(inner(&pair.phi1, &pair.phi2).unwrap().norm() < 1e-10);
    }
}

#[test]
fn negative_coefficients_give_complex_orbitals_but_real_states() {
    let g = make_grid(M).unwrap();
    let s = solve_relative(&contact(-0.2), Sector::Even, 0, N_MAX, 1).unwrap();
    assert!(s.coefficients.iter().any(|a| a.re < 0.0));
    let pair = build_orbitals(&s, &g);
    assert!(pair.phi1.values().iter().any(|z| z.im.abs() > 1e-3));
    let psi = reconstruct(&pair, 0, Statistics::Symmetric).unwrap();
    // real up to a global phase
    let pivot = psi
        .values()
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let phase = pivot.conj() / pivot.norm();
    assert!(psi.values().iter().all(|z| (z * phase).im.abs() < 1e-10));
    check_level(&s, &g);
}

#[test]
fn square_roots_reproduce_coefficients() {
    for sector in [
        Sector::Even,
        Sector::Odd,
        Sector::General {
            statistics: Statistics::Symmetric,
        },
    ] {
        let p0 = if matches!(sector, Sector::General { .. }) {
            3
        } else {
            0
        };
        for level in 0..4 {
            let s = solve_relative(&finite_range(), sector, p0, 16, level).unwrap();
            for &a in &s.coefficients {
                let r = principal_sqrt(a);
                assert!(r.re >= 0.0);
                assert!((r * r - a).norm() <= 4.0 * f64::EPSILON * a.norm());
            }
        }
    }
}

#[test]
fn hartree_product_breaks_momentum() {
    let g = make_grid(64).unwrap();
    let phi = GridFunction::from_real_fn(&g, |x| (2.0 * x.cos()).exp())
        .normalized()
        .unwrap();
    let (_, var) = momentum_check(&hartree_product(&phi));
    assert!(var > 0.1);
}

#[test]
fn relative_cutoff_is_variational_and_converges_like_one_over_n() {
    for gamma in [-0.2, -1.0] {
        let spec = contact(gamma);
        let exact = contact_ground_energy(ModelParams::new(2, gamma).unwrap().u_tilde()).unwrap();
        let levels: Vec<f64> = [16, 32, 64, 128, 256]
            .iter()
            .map(|&n| solve_relative(&spec, Sector::Even, 0, n, 0).unwrap().energy)
            .collect();
        for w in levels.windows(2) {
            assert!(w[1] <= w[0] + 1e-14);
        }
        assert!(levels.iter().all(|&e| e >= exact));
        let errors: Vec<f64> = levels.iter().map(|e| e - exact).collect();
        for w in errors.windows(2) {
            let ratio = w[1] / w[0];
            assert!((0.4..0.6).contains(&ratio), "{ratio}");
        }
    }
}

#[test]
fn transcendental_roots_satisfy_their_conditions() {
    for u in [-0.4 * PI, -2.0 * PI, -20.0] {
        let e = contact_ground_energy(u).unwrap();
        let kappa = (-e / 2.0).sqrt();
        assert!((kappa * (PI * kappa).tanh() - u.abs() / 4.0).abs() < 1e-14);
    }
    for u in [0.3, 3.0] {
        let e = contact_ground_energy(u).unwrap();
        let q = (e / 2.0).sqrt();
        assert!((q * (PI * q).tan() - u / 4.0).abs() < 1e-12);
        assert!(q < 0.5);
    }
}

#[test]
fn fock_energies_are_monotone_in_cutoff() {
    let p = ModelParams::new(3, -0.2).unwrap();
    let e: Vec<f64> = [4, 8, 12]
        .iter()
        .map(|&n| fock_diagonalize(3, &p, n).unwrap())
        .collect();
    assert!(e[1] <= e[0] && e[2] <= e[1]);
    let p = ModelParams::new(2, -0.2).unwrap();
    let rel = solve_relative(
        &InteractionSpec::contact(p.u_tilde()),
        Sector::Even,
        0,
        12,
        0,
    )
    .unwrap();
    assert!((fock_diagonalize(2, &p, 12).unwrap() - rel.energy / 2.0).abs() < 1e-12);
}

#[test]
fn cci_is_an_upper_bound_in_its_own_mode_space() {
    // the CCI state on an M-point grid lives in the Fock space of the M grid modes
    let p = ModelParams::new(3, -0.2).unwrap();
    for m in [16, 26] {
        let g = make_grid(m).unwrap();
        let cci = solve_cci(&g, &p, &CciSolveConfig::default()).unwrap();
        let fock = fock_ground_energy(&p, ModeSet::Ring { m }).unwrap() / 3.0;
        assert!(fock <= cci.energy_per_particle + 1e-12);
        assert!(cci.energy_per_particle <= -0.1);
    }
}
