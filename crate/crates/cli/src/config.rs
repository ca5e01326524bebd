//! Run configuration: line-based `key = value` text with `[section]` headers.
//!
//! ```text
//! [model]
//! gamma = -0.2
//! n_particles = 5, 25, 100
//! grid_m = 256
//!
//! [solver]
//! tol_grad = 1e-9
//! ```
//!
//! `#` starts a comment. Lists are comma separated. Unknown or repeated keys
//! are rejected, and every value is validated before anything runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cci_core::exact::{InteractionSpec, ModeSet, Sector, Statistics};
use cci_core::{CciSolveConfig, InitialGuess, ModelParams, Preconditioning};

use crate::error::{io_err, CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Cci,
    Gp,
    Exact2,
    Fock,
    Sweep,
    Fig1,
    Fig2,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Cci,
        Mode::Gp,
        Mode::Exact2,
        Mode::Fock,
        Mode::Sweep,
        Mode::Fig1,
        Mode::Fig2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cci => "cci",
            Mode::Gp => "gp",
            Mode::Exact2 => "exact2",
            Mode::Fock => "fock",
            Mode::Sweep => "sweep",
            Mode::Fig1 => "fig1",
            Mode::Fig2 => "fig2",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// Which minimizer a sweep runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepSolver {
    Cci,
    Gp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSettings {
    pub sector: Sector,
    pub p0: i64,
    pub level: usize,
    pub interaction: InteractionKind,
    pub fourier: Vec<f64>,
    pub fock_modes: FockModes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionKind {
    Contact,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockModes {
    Truncated,
    Ring,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub gammas: Vec<f64>,
    pub n_particles: Vec<usize>,
    pub grid_m: usize,
    pub n_max: usize,
    pub solver: CciSolveConfig,
    pub exact: ExactSettings,
    pub sweep_solver: SweepSolver,
    /// Worker threads for sweeps; 0 uses all cores, 1 runs serially.
    pub threads: usize,
    pub output_dir: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "mode",
    "model.gamma",
    "model.n_particles",
    "model.grid_m",
    "model.n_max",
    "solver.max_iter",
    "solver.tol_grad",
    "solver.init",
    "solver.kappa",
    "solver.noise",
    "solver.rng_seed",
    "solver.recenter",
    "solver.initial_step",
    "solver.shrink",
    "solver.armijo",
    "solver.max_backtracks",
    "solver.history",
    "solver.preconditioning",
    "solver.precond_shift",
    "solver.keep_real",
    "solver.stall_iters",
    "exact.sector",
    "exact.p0",
    "exact.level",
    "exact.statistics",
    "exact.interaction",
    "exact.fourier",
    "fock.modes",
    "sweep.solver",
    "sweep.threads",
    "output.dir",
];

/// Raw `section.key → value` pairs in file order semantics (last override wins).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section = String::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| CliError::Syntax {
                    line: i + 1,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Syntax {
                    line: i + 1,
                    message: "empty key".into(),
                });
            }
            let full = if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            if !KEYS.contains(&full.as_str()) {
                return Err(CliError::UnknownKey(full));
            }
            if raw
                .entries
                .insert(full.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(CliError::DuplicateKey(full));
            }
        }
        Ok(raw)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// Applies `section.key=value`.
    pub fn set_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("override `{spec}` is not key=value")))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::UnknownKey(key.to_string()));
        }
        self.entries
            .insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

fn value_err(key: &str, message: impl Into<String>) -> CliError {
    CliError::Value {
        key: key.to_string(),
        message: message.into(),
    }
}

fn scalar<T: FromStr>(raw: &RawConfig, key: &str, default: T) -> Result<T>
where
    T::Err: fmt::Display,
{
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|e: T::Err| value_err(key, format!("`{v}`: {e}"))),
    }
}

fn list<T: FromStr>(raw: &RawConfig, key: &str, default: Vec<T>) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let Some(v) = raw.get(key) else {
        return Ok(default);
    };
    if v.is_empty() {
        return Err(value_err(key, "list is empty"));
    }
    v.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|e: T::Err| value_err(key, format!("`{item}`: {e}")))
        })
        .collect()
}

fn choice<T: Copy>(raw: &RawConfig, key: &str, default: T, options: &[(&str, T)]) -> Result<T> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|&(_, t)| t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                value_err(key, format!("`{v}` is not one of {}", names.join(", ")))
            }),
    }
}

impl RunConfig {
    /// Builds and validates a configuration. `mode` overrides any `mode` key.
    pub fn from_raw(raw: &RawConfig, mode: Option<Mode>) -> Result<Self> {
        let mode = match (mode, raw.get("mode")) {
            (Some(m), _) => m,
            (None, Some(v)) => v.parse().map_err(|e: String| value_err("mode", e))?,
            (None, None) => return Err(CliError::Invalid("no mode given".into())),
        };
        let defaults = CciSolveConfig::default();
        let kappa = scalar(raw, "solver.kappa", 1.0)?;
        let init = choice(
            raw,
            "solver.init",
            "bump",
            &[("bump", "bump"), ("uniform_plus_noise", "uniform")],
        )?;
        let init = if init == "bump" {
            InitialGuess::Bump { kappa }
        } else {
            InitialGuess::UniformPlusNoise
        };
        let precond_shift = scalar(raw, "solver.precond_shift", 1.0)?;
        let preconditioning = choice(
            raw,
            "solver.preconditioning",
            Preconditioning::Auto,
            &[
                ("auto", Preconditioning::Auto),
                ("off", Preconditioning::Off),
                (
                    "kinetic",
                    Preconditioning::Kinetic {
                        shift: precond_shift,
                    },
                ),
            ],
        )?;
        let solver = CciSolveConfig {
            max_iter: scalar(raw, "solver.max_iter", defaults.max_iter)?,
            tol_grad: scalar(raw, "solver.tol_grad", defaults.tol_grad)?,
            init,
            noise: scalar(raw, "solver.noise", defaults.noise)?,
            rng_seed: scalar(raw, "solver.rng_seed", defaults.rng_seed)?,
            recenter: scalar(raw, "solver.recenter", defaults.recenter)?,
            initial_step: scalar(raw, "solver.initial_step", defaults.initial_step)?,
            shrink: scalar(raw, "solver.shrink", defaults.shrink)?,
            armijo: scalar(raw, "solver.armijo", defaults.armijo)?,
            max_backtracks: scalar(raw, "solver.max_backtracks", defaults.max_backtracks)?,
            history: scalar(raw, "solver.history", defaults.history)?,
            preconditioning,
            keep_real: scalar(raw, "solver.keep_real", defaults.keep_real)?,
            stall_iters: scalar(raw, "solver.stall_iters", defaults.stall_iters)?,
        };
        let statistics = choice(
            raw,
            "exact.statistics",
            Statistics::Symmetric,
            &[
                ("symmetric", Statistics::Symmetric),
                ("antisymmetric", Statistics::Antisymmetric),
            ],
        )?;
        let exact = ExactSettings {
            sector: choice(
                raw,
                "exact.sector",
                Sector::Even,
                &[
                    ("even", Sector::Even),
                    ("odd", Sector::Odd),
                    ("general", Sector::General { statistics }),
                ],
            )?,
            p0: scalar(raw, "exact.p0", 0)?,
            level: scalar(raw, "exact.level", 0)?,
            interaction: choice(
                raw,
                "exact.interaction",
                InteractionKind::Contact,
                &[
                    ("contact", InteractionKind::Contact),
                    ("fourier", InteractionKind::Fourier),
                ],
            )?,
            fourier: list(raw, "exact.fourier", Vec::new())?,
            fock_modes: choice(
                raw,
                "fock.modes",
                FockModes::Truncated,
                &[
                    ("truncated", FockModes::Truncated),
                    ("ring", FockModes::Ring),
                ],
            )?,
        };
        let config = RunConfig {
            mode,
            gammas: list(raw, "model.gamma", vec![-0.2])?,
            n_particles: list(raw, "model.n_particles", vec![2])?,
            grid_m: scalar(raw, "model.grid_m", 256)?,
            n_max: scalar(raw, "model.n_max", 64)?,
            solver,
            exact,
            sweep_solver: choice(
                raw,
                "sweep.solver",
                SweepSolver::Cci,
                &[("cci", SweepSolver::Cci), ("gp", SweepSolver::Gp)],
            )?,
            threads: scalar(raw, "sweep.threads", 0)?,
            output_dir: raw.get("output.dir").map(PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.grid_m < 8 || !self.grid_m.is_multiple_of(2) {
            return Err(value_err("model.grid_m", "must be even and >= 8"));
        }
        if self.n_max < 8 {
            return Err(value_err("model.n_max", "must be >= 8"));
        }
        if self.mode != Mode::Sweep && (self.gammas.len() != 1 || self.n_particles.len() != 1) {
            return Err(CliError::Invalid(format!(
                "mode {} takes a single gamma and n_particles; use sweep for lists",
                self.mode
            )));
        }
        for &n in &self.n_particles {
            for &g in &self.gammas {
                ModelParams::new(n, g)?;
            }
        }
        if self.mode == Mode::Fock && !(2..=4).contains(&self.n_particles[0]) {
            return Err(value_err(
                "model.n_particles",
                "fock mode supports 2 to 4 particles",
            ));
        }
        if self.mode == Mode::Exact2 {
            let n = self.n_particles[0];
            if n != 2 {
                return Err(value_err(
                    "model.n_particles",
                    "exact2 mode is the two-particle problem",
                ));
            }
            if self.exact.interaction == InteractionKind::Fourier && self.exact.fourier.is_empty() {
                return Err(value_err(
                    "exact.fourier",
                    "fourier interaction needs coefficients",
                ));
            }
            if self.exact.fourier.iter().any(|c| !c.is_finite()) {
                return Err(value_err("exact.fourier", "coefficients must be finite"));
            }
            if matches!(self.exact.sector, Sector::Even | Sector::Odd) && self.exact.p0 != 0 {
                return Err(value_err(
                    "exact.p0",
                    "even/odd sectors have zero total momentum",
                ));
            }
        }
        Ok(())
    }

    /// Model parameters of a single-run mode.
    pub fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(self.n_particles[0], self.gammas[0])?)
    }

    pub fn interaction(&self, params: &ModelParams) -> Result<InteractionSpec> {
        Ok(match self.exact.interaction {
            InteractionKind::Contact => InteractionSpec::contact(params.u_tilde()),
            InteractionKind::Fourier => InteractionSpec::fourier(self.exact.fourier.clone())?,
        })
    }

    pub fn mode_set(&self) -> ModeSet {
        match self.exact.fock_modes {
            FockModes::Truncated => ModeSet::Truncated { n_max: self.n_max },
            FockModes::Ring => ModeSet::Ring { m: self.grid_m },
        }
    }

    /// Canonical `key → value` echo of every effective setting.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut e = BTreeMap::new();
        let join = |v: &[String]| v.join(",");
        let s = &self.solver;
        let mut put = |k: &str, v: String| {
            e.insert(k.to_string(), v);
        };
        put("mode", self.mode.to_string());
        put(
            "model.gamma",
            join(
                &self
                    .gammas
                    .iter()
                    .map(|g| crate::io::fmt_f64(*g))
                    .collect::<Vec<_>>(),
            ),
        );
        put(
            "model.n_particles",
            join(
                &self
                    .n_particles
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>(),
            ),
        );
        put("model.grid_m", self.grid_m.to_string());
        put("model.n_max", self.n_max.to_string());
        put("solver.max_iter", s.max_iter.to_string());
        put("solver.tol_grad", crate::io::fmt_f64(s.tol_grad));
        match s.init {
            InitialGuess::Bump { kappa } => {
                put("solver.init", "bump".into());
                put("solver.kappa", crate::io::fmt_f64(kappa));
            }
            InitialGuess::UniformPlusNoise => put("solver.init", "uniform_plus_noise".into()),
        }
        put("solver.noise", crate::io::fmt_f64(s.noise));
        put("solver.rng_seed", s.rng_seed.to_string());
        put("solver.recenter", s.recenter.to_string());
        put("solver.initial_step", crate::io::fmt_f64(s.initial_step));
        put("solver.shrink", crate::io::fmt_f64(s.shrink));
        put("solver.armijo", crate::io::fmt_f64(s.armijo));
        put("solver.max_backtracks", s.max_backtracks.to_string());
        put("solver.history", s.history.to_string());
        match s.preconditioning {
            Preconditioning::Auto => put("solver.preconditioning", "auto".into()),
            Preconditioning::Off => put("solver.preconditioning", "off".into()),
            Preconditioning::Kinetic { shift } => {
                put("solver.preconditioning", "kinetic".into());
                put("solver.precond_shift", crate::io::fmt_f64(shift));
            }
        }
        put("solver.keep_real", s.keep_real.to_string());
        put("solver.stall_iters", s.stall_iters.to_string());
        if self.mode == Mode::Exact2 || self.mode == Mode::Fock {
            let (sector, stats) = match self.exact.sector {
                Sector::Even => ("even", None),
                Sector::Odd => ("odd", None),
                Sector::General { statistics } => ("general", Some(statistics)),
            };
            put("exact.sector", sector.into());
            if let Some(st) = stats {
                put("exact.statistics", format!("{st:?}").to_lowercase());
            }
            put("exact.p0", self.exact.p0.to_string());
            put("exact.level", self.exact.level.to_string());
            put(
                "exact.interaction",
                match self.exact.interaction {
                    InteractionKind::Contact => "contact".into(),
                    InteractionKind::Fourier => "fourier".into(),
                },
            );
            if !self.exact.fourier.is_empty() {
                put(
                    "exact.fourier",
                    join(
                        &self
                            .exact
                            .fourier
                            .iter()
                            .map(|c| crate::io::fmt_f64(*c))
                            .collect::<Vec<_>>(),
                    ),
                );
            }
            put(
                "fock.modes",
                match self.exact.fock_modes {
                    FockModes::Truncated => "truncated".into(),
                    FockModes::Ring => "ring".into(),
                },
            );
        }
        if self.mode == Mode::Sweep {
            put(
                "sweep.solver",
                match self.sweep_solver {
                    SweepSolver::Cci => "cci".into(),
                    SweepSolver::Gp => "gp".into(),
                },
            );
        }
        e
    }
}
