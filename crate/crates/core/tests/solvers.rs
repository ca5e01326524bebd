use std::f64::consts::PI;

use cci_core::exact::{fock_ground_energy, ModeSet};
use cci_core::*;
use num_complex::Complex64;

fn config() -> CciSolveConfig {
    CciSolveConfig::default()
}

fn max_imag(phi: &GridFunction) -> f64 {
    phi.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

fn argmax_density(phi: &GridFunction) -> usize {
    phi.density()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0
}

#[test]
fn free_bosons_reach_zero_energy() {
    let g = make_grid(64).unwrap();
    for n in [2, 5] {
        let p = ModelParams::new(n, 0.0).unwrap();
        let r = solve_cci(&g, &p, &config()).unwrap();
        assert!(r.converged);
        assert!(
            r.energy_per_particle.abs() < 1e-10,
            "{}",
            r.energy_per_particle
        );
        assert!(density_contrast(&r.orbital) < 1e-2);
    }
}

#[test]
fn two_bosons_are_exact_on_the_grid() {
    // N = 2 CCI spans the exact zero-momentum two-body space of the grid
    // model, so it must reproduce the Fock ground state in the same modes.
    for &(m, gamma) in &[(32, -0.2), (64, -1.0), (128, -0.2)] {
        let g = make_grid(m).unwrap();
        let p = ModelParams::new(2, gamma).unwrap();
        let r = solve_cci(&g, &p, &config()).unwrap();
        let exact = fock_ground_energy(&p, ModeSet::Ring { m }).unwrap() / 2.0;
        assert!(r.converged);
        assert!(
            (r.energy_per_particle - exact).abs() < 1e-10,
            "M={m}: {} vs {exact}",
            r.energy_per_particle
        );
    }
}

#[test]
fn converged_orbital_satisfies_orbital_equation() {
    let g = make_grid(256).unwrap();
    let p = ModelParams::new(5, -0.2).unwrap();
    let r = solve_cci(&g, &p, &config()).unwrap();
    assert!(r.converged);
    assert!(r.grad_norm <= config().tol_grad);
    let kinetic_scale = apply_kinetic(&r.orbital).norm();
    assert!(
        r.residual_norm < 1e-6 * kinetic_scale,
        "{} vs {kinetic_scale}",
        r.residual_norm
    );
    assert!((r.orbital.norm_sq() - 1.0).abs() < 1e-12);
    assert_eq!(argmax_density(&r.orbital), g.center_index());
    let center = r.orbital.values()[g.center_index()];
    assert!(center.re > 0.0 && center.im == 0.0);
    // nonincreasing up to evaluation roundoff
    for w in r.energy_trace.windows(2) {
        assert!(w[1] <= w[0] + ENERGY_NOISE * w[0].abs());
    }
}

#[test]
fn attractive_ground_state_is_real() {
    let g = make_grid(128).unwrap();
    let p = ModelParams::new(4, -0.3).unwrap();
    let r = solve_cci(&g, &p, &config()).unwrap();
    assert!(r.converged);
    assert!(max_imag(&r.orbital) < 1e-8);
    // the real minimizer is stationary in the full complex space
    let grad = cci_gradient(&r.orbital, &p).unwrap();
    assert!(grad.values().iter().all(|z| z.im.abs() < 1e-12));
    // and a complex start does not find anything lower
    let kick = GridFunction::from_fn(&g, |x| {
        Complex64::new(0.0, 1e-3 * (3.0 * x).sin() + 1e-3 * x.cos())
    });
    let start = GridFunction::new(
        g.clone(),
        r.orbital
            .values()
            .iter()
            .zip(kick.values())
            .map(|(a, b)| a + b)
            .collect(),
    )
    .unwrap();
    let free = CciSolveConfig {
        keep_real: false,
        ..config()
    };
    let c = solve_cci_from(&start, &p, &free).unwrap();
    assert!(c.energy_per_particle >= r.energy_per_particle - 1e-12);
}

#[test]
fn solves_are_deterministic() {
    let g = make_grid(64).unwrap();
    let p = ModelParams::new(3, -0.5).unwrap();
    let a = solve_cci(&g, &p, &config()).unwrap();
    let b = solve_cci(&g, &p, &config()).unwrap();
    assert_eq!(a.orbital.values(), b.orbital.values());
    assert_eq!(a.energy_trace, b.energy_trace);
    let other = solve_cci(
        &g,
        &p,
        &CciSolveConfig {
            rng_seed: 7,
            ..config()
        },
    )
    .unwrap();
    assert!((other.energy_per_particle - a.energy_per_particle).abs() < 1e-10);
}

#[test]
fn unconverged_runs_return_best_iterate() {
    let g = make_grid(64).unwrap();
    let p = ModelParams::new(3, -0.5).unwrap();
    let r = solve_cci(
        &g,
        &p,
        &CciSolveConfig {
            max_iter: 3,
            ..config()
        },
    )
    .unwrap();
    assert!(!r.converged);
    assert_eq!(r.iterations, 3);
    assert_eq!(r.energy_trace.len(), 4);
    assert!(r.energy_per_particle <= r.energy_trace[0]);
}

#[test]
fn degenerate_start_is_rejected() {
    let g = make_grid(32).unwrap();
    let p = ModelParams::new(2, -0.2).unwrap();
    let wave = GridFunction::from_fn(&g, |x| Complex64::from_polar(1.0, x));
    assert!(matches!(
        solve_cci_from(&wave, &p, &config()),
        Err(Error::DegenerateOrbital(_))
    ));
}

#[test]
fn cci_lowers_the_energy_of_a_gp_orbital() {
    let g = make_grid(256).unwrap();
    let p = ModelParams::new(100, -1.0).unwrap();
    let gp = solve_gp(&g, &p, &config()).unwrap();
    assert!(gp.converged);
    let projected = energy_per_particle(&gp.orbital, &p).unwrap();
    assert!(projected < gp_energy(&gp.orbital, &p));
}

#[test]
fn gp_transition_at_half() {
    let g = make_grid(256).unwrap();
    let uniform = (2.0 * PI).sqrt().recip();
    let weak = solve_gp(&g, &ModelParams::new(10, -0.2).unwrap(), &config()).unwrap();
    assert!(weak.converged);
    assert!((weak.energy_per_particle + 0.1).abs() < 1e-8);
    assert!(weak
        .orbital
        .values()
        .iter()
        .all(|z| (z - uniform).norm() < 1e-6));
    assert!((weak.chemical_potential + 0.2).abs() < 1e-8);

    let below = solve_gp(&g, &ModelParams::new(10, -0.45).unwrap(), &config()).unwrap();
    assert!(below
        .orbital
        .values()
        .iter()
        .all(|z| (z - uniform).norm() < 1e-6));
    let above = solve_gp(&g, &ModelParams::new(10, -0.55).unwrap(), &config()).unwrap();
    assert!(density_contrast(&above.orbital) > 1e-3);

    let strong = solve_gp(&g, &ModelParams::new(10, -1.0).unwrap(), &config()).unwrap();
    assert!(strong.energy_per_particle < -0.5);
    assert_eq!(argmax_density(&strong.orbital), g.center_index());
}

#[test]
fn gp_shape_depends_only_on_gamma() {
    let g = make_grid(256).unwrap();
    let shapes: Vec<Vec<f64>> = [10, 100, 1000]
        .iter()
        .map(|&n| {
            let r = solve_gp(&g, &ModelParams::new(n, -1.0).unwrap(), &config()).unwrap();
            assert!(r.converged);
            r.orbital.density()
        })
        .collect();
    for other in &shapes[1..] {
        let diff = shapes[0]
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
    }
}

#[test]
fn cci_orbital_is_narrower_than_gp() {
    let g = make_grid(256).unwrap();
    for gamma in [-0.2, -1.0] {
        let p = ModelParams::new(2, gamma).unwrap();
        let cci = solve_cci(&g, &p, &config()).unwrap();
        let gp = solve_gp(&g, &p, &config()).unwrap();
        let peak = |f: &GridFunction| f.density().iter().copied().fold(0.0, f64::max);
        assert!(peak(&cci.orbital) > peak(&gp.orbital));
        assert_eq!(argmax_density(&cci.orbital), g.center_index());
    }
}
