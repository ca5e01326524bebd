//! Constrained minimization of scale-invariant orbital functionals.
//!
//! The orbital lives on the unit sphere `Σ|φ_j|² Δ = 1`. Search directions are
//! limited-memory quasi-Newton directions, optionally built on a kinetic
//! preconditioner `(T̂ + σ)⁻¹`, projected onto the tangent space; every step is
//! followed by renormalization and accepted only through a monotone
//! backtracking line search. With `history = 0` this is plain projected
//! gradient descent.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{rotate, GridFunction, RingGrid};

/// Starting orbital for a solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialGuess {
    /// `1/√(2π)` plus seeded noise.
    UniformPlusNoise,
    /// `exp(κ cos φ)` plus seeded noise.
    Bump { kappa: f64 },
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Bump { kappa: 1.0 }
    }
}

/// Choice of the metric used to build search directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preconditioning {
    /// Kinetic for GP, none for CCI.
    ///
    /// The GP Hessian is kinetic-dominated. The CCI one is not: its kinetic
    /// term enters through a smoothing convolution with `S^{N-1}`, and the
    /// kinetic metric slows it down by orders of magnitude.
    Auto,
    Off,
    /// `(T̂ + σ)⁻¹` with shift `σ > 0`.
    Kinetic {
        shift: f64,
    },
}

/// Solver settings shared by the CCI and GP minimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct CciSolveConfig {
    pub max_iter: usize,
    /// Stop when the infinity norm of the projected gradient drops below this.
    pub tol_grad: f64,
    pub init: InitialGuess,
    /// Amplitude of the uniform noise in `[-a, a]` added to the initial guess.
    pub noise: f64,
    pub rng_seed: u64,
    pub recenter: bool,
    pub initial_step: f64,
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Number of stored quasi-Newton correction pairs.
    pub history: usize,
    pub preconditioning: Preconditioning,
    /// Keep iterates in the real subspace when the start is real and the
    /// ground state is known to be real (GP, attractive CCI). The functionals
    /// are conjugation-symmetric, so the gradient at a real orbital is real
    /// and this only discards roundoff.
    pub keep_real: bool,
    /// Give up (unconverged) when the energy has not moved beyond roundoff
    /// for this many iterations.
    pub stall_iters: usize,
}

impl Default for CciSolveConfig {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol_grad: 1e-9,
            init: InitialGuess::default(),
            noise: 1e-3,
            rng_seed: 0,
            recenter: true,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            max_backtracks: 60,
            history: 12,
            preconditioning: Preconditioning::Auto,
            keep_real: true,
            stall_iters: 500,
        }
    }
}

impl CciSolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.max_iter < 1 {
            return bad("max_iter must be >= 1");
        }
        if !(self.tol_grad > 0.0 && self.tol_grad.is_finite()) {
            return bad("tol_grad must be positive");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be non-negative");
        }
        if let InitialGuess::Bump { kappa } = self.init {
            if !(kappa.is_finite() && kappa >= 0.0) {
                return bad("bump concentration must be non-negative");
            }
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo must lie in (0, 1)");
        }
        if self.stall_iters < 1 {
            return bad("stall_iters must be >= 1");
        }
        if self.max_backtracks < 1 {
            return bad("max_backtracks must be >= 1");
        }
        if let Preconditioning::Kinetic { shift } = self.preconditioning {
            if !(shift > 0.0 && shift.is_finite()) {
                return bad("preconditioner shift must be positive");
            }
        }
        Ok(())
    }
}

/// Normalized, seeded starting orbital.
pub fn initial_orbital(grid: &Arc<RingGrid>, config: &CciSolveConfig) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let base: Box<dyn Fn(f64) -> f64> = match config.init {
        InitialGuess::UniformPlusNoise => Box::new(|_| (2.0 * PI).sqrt().recip()),
        InitialGuess::Bump { kappa } => Box::new(move |x: f64| (kappa * x.cos()).exp()),
    };
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            let noise = if config.noise > 0.0 {
                config.noise * rng.gen_range(-1.0..1.0)
            } else {
                0.0
            };
            Complex64::new(base(x) + noise, 0.0)
        })
        .collect();
    GridFunction::new(Arc::clone(grid), values)?.normalized()
}

/// Moves the density peak to `φ = 0` (when `recenter`) and makes the sample
/// there real and positive. Returns the rotation and phase applied.
pub fn gauge_fix(values: &mut [Complex64], center: usize, recenter: bool) -> (i64, Complex64) {
    let mut roll = 0;
    if recenter {
        let peak = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
                let d = v.norm_sqr();
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            })
            .0;
        roll = center as i64 - peak as i64;
        rotate(values, roll);
    }
    let pivot = values[center];
    let phase = if pivot.norm() > 0.0 {
        pivot.conj() / pivot.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    for v in values.iter_mut() {
        *v *= phase;
    }
    values[center].im = 0.0;
    (roll, phase)
}

/// A real functional of the orbital, invariant under `φ → cφ`.
pub(crate) trait Objective {
    /// Energy and raw gradient `∂/∂Re φ_j + i ∂/∂Im φ_j` at a unit-norm orbital.
    fn evaluate(&self, phi: &[Complex64]) -> Result<(f64, Vec<Complex64>)>;
}

pub(crate) struct Outcome {
    pub orbital: Vec<Complex64>,
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

fn axpy(alpha: f64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Removes the component along `x` (real-linear, Euclidean in the samples).
fn project(x: &[Complex64], v: &mut [Complex64]) {
    let c = dot(x, v) / dot(x, x);
    axpy(-c, x, v);
}

fn normalize(grid: &RingGrid, v: &mut [Complex64]) {
    let n = (grid.delta() * v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
    for z in v.iter_mut() {
        *z /= n;
    }
}

struct Preconditioner<'a> {
    grid: &'a RingGrid,
    diag: Vec<f64>,
}

impl<'a> Preconditioner<'a> {
    fn new(grid: &'a RingGrid, shift: Option<f64>) -> Self {
        let scale = 1.0 / (2.0 * grid.delta());
        let diag = match shift {
            Some(shift) => grid
                .wavenumbers()
                .iter()
                .map(|&n| scale / (grid.len() as f64 * ((n * n) as f64 + shift)))
                .collect(),
            None => vec![scale],
        };
        Self { grid, diag }
    }

    fn is_spectral(&self) -> bool {
        self.diag.len() > 1
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        if let [scale] = self.diag[..] {
            return v.iter().map(|z| z * scale).collect();
        }
        let mut buf = v.to_vec();
        self.grid.fft(&mut buf);
        for (b, d) in buf.iter_mut().zip(&self.diag) {
            *b *= *d;
        }
        self.grid.ifft(&mut buf);
        buf
    }
}

struct Pair {
    s: Vec<Complex64>,
    y: Vec<Complex64>,
    rho: f64,
}

fn transform(v: &mut [Complex64], roll: i64, phase: Complex64) {
    rotate(v, roll);
    for z in v.iter_mut() {
        *z *= phase;
    }
}

fn direction(
    g: &[Complex64],
    x: &[Complex64],
    memory: &VecDeque<Pair>,
    precond: &Preconditioner<'_>,
) -> Vec<Complex64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for p in memory.iter().rev() {
        let a = p.rho * dot(&p.s, &q);
        axpy(-a, &p.y, &mut q);
        alphas.push(a);
    }
    let mut r = precond.apply(&q);
    // A spectral preconditioner already fixes the step scale; rescaling it
    // by low-mode curvature would overshoot the stiff modes.
    if let (Some(last), false) = (memory.back(), precond.is_spectral()) {
        let py = precond.apply(&last.y);
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &py);
        if gamma.is_finite() && gamma > 0.0 {
            for z in r.iter_mut() {
                *z *= gamma;
            }
        }
    }
    for (p, a) in memory.iter().zip(alphas.iter().rev()) {
        let b = p.rho * dot(&p.y, &r);
        axpy(a - b, &p.s, &mut r);
    }
    for z in r.iter_mut() {
        *z = -*z;
    }
    project(x, &mut r);
    r
}

/// Relative size of roundoff in an energy evaluation.
pub const ENERGY_NOISE: f64 = 4e-14;

pub(crate) fn minimize(
    grid: &Arc<RingGrid>,
    objective: &dyn Objective,
    start: &GridFunction,
    config: &CciSolveConfig,
    real_ground_state: bool,
    auto_shift: Option<f64>,
) -> Result<Outcome> {
    config.validate()?;
    let real = config.keep_real && real_ground_state && start.values().iter().all(|z| z.im == 0.0);
    let evaluate = |x: &[Complex64]| -> Result<(f64, Vec<Complex64>)> {
        let (f, mut g) = objective.evaluate(x)?;
        if real {
            g.iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok((f, g))
    };
    let center = grid.center_index();
    let shift = match config.preconditioning {
        Preconditioning::Auto => auto_shift,
        Preconditioning::Off => None,
        Preconditioning::Kinetic { shift } => Some(shift),
    };
    let precond = Preconditioner::new(grid, shift);

    let mut x = start.normalized()?.into_values();
    gauge_fix(&mut x, center, config.recenter);
    let (mut f, mut g) = evaluate(&x)?;
    project(&x, &mut g);
    let mut trace = vec![f];
    let mut memory: VecDeque<Pair> = VecDeque::with_capacity(config.history);
    let mut grad_norm = inf_norm(&g);
    let mut iterations = 0;
    let mut first_step = true;

    while grad_norm > config.tol_grad && iterations < config.max_iter {
        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                if memory.is_empty() {
                    break;
                }
                memory.clear();
            }
            let mut d = direction(&g, &x, &memory, &precond);
            let mut slope = dot(&g, &d);
            if slope.is_nan() || slope >= 0.0 {
                memory.clear();
                d = direction(&g, &x, &memory, &precond);
                slope = dot(&g, &d);
                if slope.is_nan() || slope >= 0.0 {
                    break;
                }
            }
            let mut alpha = if first_step || memory.is_empty() {
                config.initial_step
            } else {
                1.0
            };
            // Keep the first trial step from overshooting the orbital scale.
            let limit = 0.5 * inf_norm(&x) / inf_norm(&d);
            if alpha > limit {
                alpha = limit;
            }
            for _ in 0..config.max_backtracks {
                let mut trial = x.clone();
                axpy(alpha, &d, &mut trial);
                normalize(grid, &mut trial);
                if let Ok((ft, gt)) = evaluate(&trial) {
                    let decrease = alpha * slope;
                    let scale = f.abs().max(f64::MIN_POSITIVE);
                    let roundoff = decrease.abs() <= 1e-13 * scale;
                    let armijo = ft <= f + config.armijo * decrease;
                    // Below the energy's evaluation noise only the gradient
                    // still tells progress apart.
                    let flatter = roundoff && ft <= f + ENERGY_NOISE * scale && {
                        let mut gp = gt.clone();
                        project(&trial, &mut gp);
                        inf_norm(&gp) < grad_norm
                    };
                    if ft.is_finite() && (armijo || (roundoff && ft <= f) || flatter) {
                        accepted = Some((trial, ft, gt));
                        break;
                    }
                }
                alpha *= config.shrink;
            }
            if accepted.is_some() {
                break;
            }
        }
        let Some((mut x_new, f_new, mut g_new)) = accepted else {
            break;
        };
        first_step = false;
        iterations += 1;
        project(&x_new, &mut g_new);

        let mut s: Vec<Complex64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let mut g_old = g;
        project(&x_new, &mut s);
        project(&x_new, &mut g_old);
        let y: Vec<Complex64> = g_new.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if config.history > 0 && sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == config.history {
                memory.pop_front();
            }
            memory.push_back(Pair {
                s,
                y,
                rho: 1.0 / sy,
            });
        }

        let (roll, phase) = gauge_fix(&mut x_new, center, config.recenter);
        transform(&mut g_new, roll, phase);
        for p in memory.iter_mut() {
            transform(&mut p.s, roll, phase);
            transform(&mut p.y, roll, phase);
        }

        x = x_new;
        g = g_new;
        f = f_new;
        trace.push(f);
        grad_norm = inf_norm(&g);
        if let Some(&past) = trace
            .len()
            .checked_sub(config.stall_iters + 1)
            .map(|i| &trace[i])
        {
            if past - f <= 1e-14 * f.abs().max(1.0) {
                break;
            }
        }
    }

    Ok(Outcome {
        orbital: x,
        energy: f,
        iterations,
        grad_norm,
        converged: grad_norm <= config.tol_grad,
        trace,
    })
}
