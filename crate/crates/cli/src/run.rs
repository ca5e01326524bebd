//! Mode dispatch, per-run output directories and parameter sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cci_core::exact::{
    build_orbitals, contact_ground_energy, direct_wavefunction, fock_ground_energy, momentum_check,
    reconstruct, solve_relative, Sector,
};
use cci_core::{
    density_contrast, energy_per_particle, gp_energy, make_grid, solve_cci, solve_gp, ModelParams,
};
use rayon::prelude::*;

use crate::config::{InteractionKind, Mode, RunConfig, SweepSolver};
use crate::error::{io_err, CliError, Result};
use crate::io::{
    csv_text, fmt_f64, orbital_table, profile_table, push_line, write_text, Manifest, Table,
};

pub const FIG1_GAMMAS: [f64; 2] = [-0.2, -1.0];
pub const FIG2_PARTICLES: [usize; 5] = [5, 25, 100, 1000, 10000];
pub const FIG2_GAMMA: f64 = -0.2;
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Unconverged,
    /// Some sweep combinations failed; the rest were still written.
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::Unconverged => 2,
            RunStatus::Failed => 1,
        }
    }

    fn worst(self, other: RunStatus) -> RunStatus {
        let rank = |s| match s {
            RunStatus::Converged => 0,
            RunStatus::Unconverged => 1,
            RunStatus::Failed => 2,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }

    fn from_converged(converged: bool) -> RunStatus {
        if converged {
            RunStatus::Converged
        } else {
            RunStatus::Unconverged
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub status: RunStatus,
}

/// Output directory: explicit `--out`, then `output.dir`, then
/// `$CCI_RING_OUT/<mode>`, then `cci-ring-out/<mode>`.
pub fn resolve_output_dir(
    cli_out: Option<&Path>,
    config: &RunConfig,
    env_root: Option<&Path>,
) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Some(p) = &config.output_dir {
        return p.clone();
    }
    env_root
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("cci-ring-out"))
        .join(config.mode.as_str())
}

pub const OUTPUT_ENV: &str = "CCI_RING_OUT";

/// Runs `config` and writes every artifact under `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunReport> {
    config.validate()?;
    if config.mode == Mode::Sweep {
        return sweep(config, out).map(|s| s.report);
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let started = Instant::now();
    let mut writer = RunWriter::new(out, config);
    let converged = match config.mode {
        Mode::Cci => writer.emit(solve_cci_case(config, &config.params()?)?, "", "")?,
        Mode::Gp => writer.emit(solve_gp_case(config, &config.params()?)?, "", "")?,
        Mode::Exact2 => run_exact2(config, &mut writer)?,
        Mode::Fock => run_fock(config, &mut writer)?,
        Mode::Fig1 => run_fig1(config, &mut writer)?,
        Mode::Fig2 => run_fig2(config, &mut writer)?,
        Mode::Sweep => unreachable!("sweeps return above"),
    };
    writer.finish(started, RunStatus::from_converged(converged))
}

/// Scalars and tables produced by one solve.
struct CaseOutput {
    converged: bool,
    scalars: Vec<(&'static str, f64)>,
    tables: Vec<(&'static str, Table)>,
}

fn solve_cci_case(config: &RunConfig, params: &ModelParams) -> Result<CaseOutput> {
    let grid = make_grid(config.grid_m)?;
    let r = solve_cci(&grid, params, &config.solver)?;
    Ok(CaseOutput {
        converged: r.converged,
        scalars: vec![
            ("eps_cci", r.energy_per_particle),
            ("eps_gp_of_orbital", gp_energy(&r.orbital, params)),
            ("iterations", r.iterations as f64),
            ("grad_norm", r.grad_norm),
            ("residual_norm", r.residual_norm),
            ("density_contrast", density_contrast(&r.orbital)),
        ],
        tables: vec![
            ("orbital", orbital_table(&r.orbital)),
            (
                "profiles",
                profile_table(&r.orbital, params, r.energy_per_particle)?,
            ),
        ],
    })
}

fn solve_gp_case(config: &RunConfig, params: &ModelParams) -> Result<CaseOutput> {
    let grid = make_grid(config.grid_m)?;
    let r = solve_gp(&grid, params, &config.solver)?;
    let projected = energy_per_particle(&r.orbital, params)?;
    Ok(CaseOutput {
        converged: r.converged,
        scalars: vec![
            ("eps_gp", r.energy_per_particle),
            ("mu_gp", r.chemical_potential),
            ("eps_cci_of_orbital", projected),
            ("iterations", r.iterations as f64),
            ("grad_norm", r.grad_norm),
            ("density_contrast", density_contrast(&r.orbital)),
        ],
        tables: vec![
            ("orbital", orbital_table(&r.orbital)),
            ("profiles", profile_table(&r.orbital, params, projected)?),
        ],
    })
}

/// Collects artifacts and manifest fields for one output directory.
struct RunWriter<'a> {
    dir: &'a Path,
    manifest: Manifest,
    artifacts: Vec<String>,
}

impl<'a> RunWriter<'a> {
    fn new(dir: &'a Path, config: &RunConfig) -> Self {
        let mut manifest = Manifest::new();
        manifest.set("mode", config.mode.as_str());
        for (k, v) in config.echo() {
            manifest.set(&format!("config.{k}"), v);
        }
        RunWriter {
            dir,
            manifest,
            artifacts: Vec::new(),
        }
    }

    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        table.write(&self.dir.join(name))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Writes `<file_prefix><table>.csv` files and `<key_prefix><scalar>`
    /// fields; returns whether the solve converged.
    fn emit(&mut self, case: CaseOutput, file_prefix: &str, key_prefix: &str) -> Result<bool> {
        for (name, table) in &case.tables {
            self.table(&format!("{file_prefix}{name}.csv"), table)?;
        }
        for (name, value) in case.scalars {
            let key = format!("{key_prefix}{name}");
            if name == "iterations" {
                self.manifest.set(&key, value as u64);
            } else {
                self.manifest.set_f64(&key, value);
            }
        }
        self.manifest
            .set(&format!("{key_prefix}converged"), case.converged);
        Ok(case.converged)
    }

    fn finish(mut self, started: Instant, status: RunStatus) -> Result<RunReport> {
        self.manifest
            .set("converged", status == RunStatus::Converged);
        self.manifest.set(
            "status",
            match status {
                RunStatus::Converged => "converged",
                RunStatus::Unconverged => "unconverged",
                RunStatus::Failed => "failed",
            },
        );
        self.manifest.set("artifacts", self.artifacts);
        self.manifest
            .set_f64("wall_time_s", started.elapsed().as_secs_f64());
        self.manifest.write_atomic(self.dir)?;
        Ok(RunReport {
            dir: self.dir.to_path_buf(),
            manifest: self.manifest,
            status,
        })
    }
}

fn run_exact2(config: &RunConfig, w: &mut RunWriter<'_>) -> Result<bool> {
    let params = config.params()?;
    let interaction = config.interaction(&params)?;
    let ex = &config.exact;
    let sol = solve_relative(&interaction, ex.sector, ex.p0, config.n_max, ex.level)?;
    let grid = make_grid(config.grid_m)?;
    let pair = build_orbitals(&sol, &grid);
    let psi = reconstruct(&pair, sol.p0, sol.statistics())?;
    let error = psi.aligned_max_error(&direct_wavefunction(&sol, &grid))?;
    let (mean, variance) = momentum_check(&psi);

    let mut coeffs = Table::new(&["k", "re", "im"]);
    for (i, a) in sol.coefficients.iter().enumerate() {
        coeffs.push(vec![(sol.k_min + i as i64) as f64, a.re, a.im]);
    }
    w.table("coefficients.csv", &coeffs)?;
    w.table("orbital1.csv", &orbital_table(&pair.phi1))?;
    w.table("orbital2.csv", &orbital_table(&pair.phi2))?;

    let m = &mut w.manifest;
    m.set_f64("exact_energy", sol.energy);
    m.set_f64("exact_energy_per_particle", sol.energy / 2.0);
    if ex.interaction == InteractionKind::Contact && ex.sector == Sector::Even && ex.level == 0 {
        let bound = contact_ground_energy(params.u_tilde())?;
        m.set_f64("transcendental_energy_per_particle", bound / 2.0);
        m.set_f64(
            "cutoff_relative_error",
            (sol.energy - bound).abs() / bound.abs(),
        );
    }
    m.set_f64("reconstruction_error", error);
    m.set_f64("reconstruction_raw_norm", psi.raw_norm);
    m.set_f64("exchange_error", psi.exchange_error());
    m.set_f64("momentum_mean", mean);
    m.set_f64("momentum_variance", variance);
    Ok(true)
}

fn run_fock(config: &RunConfig, w: &mut RunWriter<'_>) -> Result<bool> {
    let params = config.params()?;
    let total = fock_ground_energy(&params, config.mode_set())?;
    w.manifest.set_f64("fock_energy", total);
    w.manifest
        .set_f64("fock_energy_per_particle", total / params.n() as f64);
    Ok(true)
}

fn gamma_label(gamma: f64) -> String {
    format!("g{:.1}", gamma.abs())
}

fn run_fig1(config: &RunConfig, w: &mut RunWriter<'_>) -> Result<bool> {
    let mut converged = true;
    for gamma in FIG1_GAMMAS {
        let params = ModelParams::new(2, gamma)?;
        let label = gamma_label(gamma);
        let cci = solve_cci_case(config, &params)?;
        converged &= w.emit(cci, &format!("fig1_cci_{label}_"), &format!("cci_{label}."))?;
        let gp = solve_gp_case(config, &params)?;
        converged &= w.emit(gp, &format!("fig1_gp_{label}_"), &format!("gp_{label}."))?;
    }
    let mut script = gnuplot_header("fig1.png");
    push_line(
        &mut script,
        format_args!("set multiplot layout 1,{}", FIG1_GAMMAS.len()),
    );
    for gamma in FIG1_GAMMAS {
        let label = gamma_label(gamma);
        push_line(
            &mut script,
            format_args!("set title \"N = 2, gamma = {gamma}\""),
        );
        push_line(
            &mut script,
            format_args!(
                "plot \"fig1_cci_{label}_orbital.csv\" skip 1 using 1:2 with lines title \"CCI\", \\\n     \"fig1_gp_{label}_orbital.csv\" skip 1 using 1:2 with lines title \"GP\""
            ),
        );
    }
    push_line(&mut script, format_args!("unset multiplot"));
    w.text("fig1.gp", &script)?;
    Ok(converged)
}

fn run_fig2(config: &RunConfig, w: &mut RunWriter<'_>) -> Result<bool> {
    let mut converged = true;
    for n in FIG2_PARTICLES {
        let params = ModelParams::new(n, FIG2_GAMMA)?;
        let cci = solve_cci_case(config, &params)?;
        converged &= w.emit(cci, &format!("fig2_N{n}_"), &format!("cci_N{n}."))?;
    }
    let mut script = gnuplot_header("fig2.png");
    push_line(
        &mut script,
        format_args!("set title \"CCI orbitals, gamma = {FIG2_GAMMA}\""),
    );
    let curves: Vec<String> = FIG2_PARTICLES
        .iter()
        .map(|n| format!("\"fig2_N{n}_orbital.csv\" skip 1 using 1:2 with lines title \"N = {n}\""))
        .collect();
    push_line(
        &mut script,
        format_args!("plot {}", curves.join(", \\\n     ")),
    );
    w.text("fig2.gp", &script)?;
    Ok(converged)
}

fn gnuplot_header(png: &str) -> String {
    let mut s = String::new();
    push_line(&mut s, format_args!("set datafile separator \",\""));
    push_line(&mut s, format_args!("set terminal pngcairo size 1200,500"));
    push_line(&mut s, format_args!("set output \"{png}\""));
    push_line(&mut s, format_args!("set xlabel \"phi\""));
    push_line(&mut s, format_args!("set ylabel \"orbital\""));
    push_line(&mut s, format_args!("set xrange [-pi:pi]"));
    s
}

/// One combination of a sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub index: usize,
    pub n_particles: usize,
    pub gamma: f64,
    pub outcome: std::result::Result<RunReport, String>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub report: RunReport,
}

pub fn run_dir_name(index: usize) -> String {
    format!("run_{index:03}")
}

/// Runs every `(n_particles, gamma)` combination; failures are recorded in
/// the summary and do not stop the others.
pub fn sweep(config: &RunConfig, out: &Path) -> Result<SweepReport> {
    sweep_with(config, out, run)
}

fn sweep_with<F>(config: &RunConfig, out: &Path, runner: F) -> Result<SweepReport>
where
    F: Fn(&RunConfig, &Path) -> Result<RunReport> + Sync,
{
    config.validate()?;
    if config.mode != Mode::Sweep {
        return Err(CliError::Invalid(format!("{} is not a sweep", config.mode)));
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let started = Instant::now();
    let combos: Vec<(usize, usize, f64)> = config
        .n_particles
        .iter()
        .flat_map(|&n| config.gammas.iter().map(move |&g| (n, g)))
        .enumerate()
        .map(|(i, (n, g))| (i, n, g))
        .collect();
    let run_one = |&(index, n, gamma): &(usize, usize, f64)| {
        let mut sub = config.clone();
        sub.mode = match config.sweep_solver {
            SweepSolver::Cci => Mode::Cci,
            SweepSolver::Gp => Mode::Gp,
        };
        sub.n_particles = vec![n];
        sub.gammas = vec![gamma];
        sub.output_dir = None;
        let outcome = runner(&sub, &out.join(run_dir_name(index))).map_err(|e| e.to_string());
        SweepEntry {
            index,
            n_particles: n,
            gamma,
            outcome,
        }
    };
    let entries: Vec<SweepEntry> = if config.threads == 1 {
        combos.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| combos.par_iter().map(run_one).collect())
    };

    let mut writer = RunWriter::new(out, config);
    let energy_key = match config.sweep_solver {
        SweepSolver::Cci => "eps_cci",
        SweepSolver::Gp => "eps_gp",
    };
    let mut summary = String::from(
        "index,n_particles,gamma,status,energy,iterations,grad_norm,density_contrast,dir,error\n",
    );
    let mut status = RunStatus::Converged;
    let (mut n_ok, mut n_unconverged, mut n_failed) = (0u64, 0u64, 0u64);
    for e in &entries {
        let dir = run_dir_name(e.index);
        let key = format!("{dir}.");
        match &e.outcome {
            Ok(r) => {
                let get = |k: &str| r.manifest.f64(k).map(fmt_f64).unwrap_or_default();
                let label = if r.status == RunStatus::Converged {
                    n_ok += 1;
                    "converged"
                } else {
                    n_unconverged += 1;
                    "unconverged"
                };
                status = status.worst(r.status);
                summary.push_str(&format!(
                    "{},{},{},{label},{},{},{},{},{dir},\n",
                    e.index,
                    e.n_particles,
                    fmt_f64(e.gamma),
                    get(energy_key),
                    r.manifest
                        .get("iterations")
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    get("grad_norm"),
                    get("density_contrast"),
                ));
                writer.manifest.set(&format!("{key}status"), label);
                if let Some(v) = r.manifest.f64(energy_key) {
                    writer.manifest.set_f64(&format!("{key}{energy_key}"), v);
                }
                writer.artifacts.push(format!("{dir}/manifest.json"));
            }
            Err(msg) => {
                n_failed += 1;
                status = RunStatus::Failed;
                summary.push_str(&format!(
                    "{},{},{},failed,,,,,{dir},{}\n",
                    e.index,
                    e.n_particles,
                    fmt_f64(e.gamma),
                    csv_text(msg)
                ));
                writer.manifest.set(&format!("{key}status"), "failed");
                writer.manifest.set(&format!("{key}error"), msg.as_str());
            }
        }
        writer
            .manifest
            .set(&format!("{key}n_particles"), e.n_particles as u64);
        writer.manifest.set_f64(&format!("{key}gamma"), e.gamma);
    }
    writer.text(crate::run::SUMMARY_FILE, &summary)?;
    writer.manifest.set("runs", entries.len() as u64);
    writer.manifest.set("runs_converged", n_ok);
    writer.manifest.set("runs_unconverged", n_unconverged);
    writer.manifest.set("runs_failed", n_failed);
    let report = writer.finish(started, status)?;
    Ok(SweepReport { entries, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn sweep_config(extra: &str) -> RunConfig {
        let raw = RawConfig::parse(&format!(
            "mode = sweep\n[model]\nn_particles = 2, 3\ngamma = -0.2\ngrid_m = 16\n{extra}"
        ))
        .unwrap();
        RunConfig::from_raw(&raw, None).unwrap()
    }

    #[test]
    fn failing_combinations_are_recorded_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let config = sweep_config("");
        let report = sweep_with(&config, dir.path(), |c, out| {
            if c.n_particles[0] == 3 {
                Err(CliError::Invalid("boom, with a comma".into()))
            } else {
                run(c, out)
            }
        })
        .unwrap();
        assert_eq!(report.report.status, RunStatus::Failed);
        assert!(report.entries[0].outcome.is_ok());
        assert!(report.entries[1].outcome.is_err());
        let summary = fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert!(summary.contains("failed"));
        assert!(summary.contains("\"invalid config: boom, with a comma\""));
        assert!(dir.path().join("run_000/manifest.json").exists());
        assert_eq!(
            report.report.manifest.get("runs_failed"),
            Some(&1u64.into())
        );
    }

    #[test]
    fn output_dir_precedence() {
        let mut c = sweep_config("");
        assert_eq!(
            resolve_output_dir(None, &c, None),
            PathBuf::from("cci-ring-out/sweep")
        );
        assert_eq!(
            resolve_output_dir(None, &c, Some(Path::new("/tmp/root"))),
            PathBuf::from("/tmp/root/sweep")
        );
        c.output_dir = Some(PathBuf::from("cfg"));
        assert_eq!(
            resolve_output_dir(None, &c, Some(Path::new("/x"))),
            PathBuf::from("cfg")
        );
        assert_eq!(
            resolve_output_dir(Some(Path::new("cli")), &c, None),
            PathBuf::from("cli")
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(RunStatus::Converged.exit_code(), 0);
        assert_eq!(RunStatus::Unconverged.exit_code(), 2);
        assert_eq!(RunStatus::Failed.exit_code(), 1);
        assert_eq!(
            RunStatus::Unconverged.worst(RunStatus::Converged),
            RunStatus::Unconverged
        );
    }
}
