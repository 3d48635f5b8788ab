//! Command line: `cell`, `poisson`, `eigen` and `sweep`.
//!
//! Settings are layered as defaults, then `--config`, then the
//! [`OUT_DIR_ENV`] variable and `--out-dir`, then per-command flags.
//! Exit codes: 0 success, 1 a theory check failed, 2 bad input, I/O or a
//! numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use langevin_homog_core::{model::model_by_name, solve_cell};

use crate::config::{SweepConfig, OUT_DIR_ENV};
use crate::error::{HarnessError, Result};
use crate::output::{
    emit_csv, emit_plot_script, emit_profile, emit_summary, fmt_num, profile_file_name,
    PLOT_SCRIPT, SUMMARY_CSV, SWEEP_CSV,
};
use crate::pipeline::{poisson_run, spectrum_run, Discretization};
use crate::rhs::{rhs_by_name, rhs_names};
use crate::sweep::{run_sweep_with, summarize, violations};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// Single-run epsilon when neither flag nor config picks one.
pub const DEFAULT_EPSILON: f64 = 0.1;

const ORTHONORMALITY_TOL: f64 = 1e-8;
const RAYLEIGH_TOL: f64 = 1e-8;
const H1_IDENTITY_TOL: f64 = 1e-6;
const SIMPLICITY_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(
    name = "langevin-homog",
    version,
    about = "Homogenization of multiscale Langevin generators"
)]
pub struct Cli {
    /// Flat `key = value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for `sweep`.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective coefficients of the cell problem as one CSV row.
    Cell {
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        model: Option<String>,
        /// Print a header line before the row.
        #[arg(long)]
        header: bool,
    },
    /// Multiscale, homogenized and corrected Poisson solutions.
    Poisson {
        #[command(flatten)]
        disc: DiscArgs,
        #[arg(long)]
        eta: Option<f64>,
        /// Right-hand side by name: linear, constant, sine, cubic, bump.
        #[arg(long)]
        rhs: Option<String>,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiscale against homogenized spectrum.
    Eigen {
        #[command(flatten)]
        disc: DiscArgs,
        #[arg(long)]
        n_pairs: Option<usize>,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full ε sweep with CSV, summary and plot script.
    Sweep {
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        n_pairs: Option<usize>,
        /// Fixed mesh size instead of `h = ε²`.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        rhs: Option<String>,
        /// Process ε values one after another.
        #[arg(long)]
        serial: bool,
    },
}

#[derive(Debug, Args)]
pub struct DiscArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Mesh size; defaults to `ε²`.
    #[arg(long)]
    pub h: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn base_config(cli: &Cli) -> Result<SweepConfig> {
    let mut cfg = match &cli.config {
        Some(p) => SweepConfig::from_file(p)?,
        None => SweepConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    Ok(cfg)
}

fn discretization(cfg: &mut SweepConfig, args: &DiscArgs) -> Discretization {
    if let Some(s) = args.sigma {
        cfg.sigma = s;
    }
    if let Some(r) = args.radius {
        cfg.radius = r;
    }
    let epsilon = args.epsilon.unwrap_or(DEFAULT_EPSILON);
    cfg.epsilons = vec![epsilon];
    if args.h.is_some() {
        cfg.h = args.h;
    }
    Discretization {
        epsilon,
        radius: cfg.radius,
        h: cfg.mesh_size(epsilon),
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |e| HarnessError::io(path, e)
}

fn stdout_err(e: std::io::Error) -> HarnessError {
    HarnessError::io("<stdout>", e)
}

fn write_table(
    header: &[&str],
    rows: &[Vec<f64>],
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        let fields: Vec<String> = r.iter().map(|&v| fmt_num(v)).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    match dest {
        Some(p) => std::fs::write(p, text).map_err(io(p)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> Result<u8> {
    let mut cfg = base_config(&cli)?;
    match &cli.command {
        Command::Cell {
            sigma,
            model,
            header,
        } => {
            if let Some(s) = sigma {
                cfg.sigma = *s;
            }
            if let Some(m) = model {
                cfg.model = m.clone();
            }
            let model = model_by_name(&cfg.model, cfg.sigma)?;
            let c = solve_cell(&model)?;
            if *header {
                writeln!(out, "k,sigma_eff,c_mu,c_mu_hat,c_phi,k_residual").map_err(stdout_err)?;
            }
            let row: Vec<String> = [
                c.k(),
                c.sigma_eff(),
                c.c_mu(),
                c.c_mu_hat(),
                c.c_phi(),
                c.k_residual(),
            ]
            .iter()
            .map(|&v| fmt_num(v))
            .collect();
            writeln!(out, "{}", row.join(",")).map_err(stdout_err)?;
            Ok(EXIT_OK)
        }

        Command::Poisson {
            disc,
            eta,
            rhs,
            out: dest,
        } => {
            let d = discretization(&mut cfg, disc);
            if let Some(e) = eta {
                cfg.eta = *e;
            }
            if let Some(r) = rhs {
                cfg.rhs = r.clone();
            }
            cfg.validate()?;
            let f = rhs_by_name(&cfg.rhs).ok_or_else(|| {
                let known: Vec<_> = rhs_names().collect();
                HarnessError::Invalid(format!(
                    "unknown rhs '{}' (known: {})",
                    cfg.rhs,
                    known.join(", ")
                ))
            })?;
            let model = model_by_name(&cfg.model, cfg.sigma)?;
            let coeffs = solve_cell(&model)?;
            let run = poisson_run(&model, &coeffs, d, cfg.eta, f)?;
            if run.multiscale.coarse_mesh {
                let _ = writeln!(err, "warning: h = {} exceeds epsilon^2", d.h);
            }
            let rows: Vec<Vec<f64>> = (0..run.grid.n_nodes())
                .map(|i| {
                    vec![
                        run.grid.nodes()[i],
                        run.multiscale.u.values()[i],
                        run.homogenized.u.values()[i],
                        run.corrector.values()[i],
                    ]
                })
                .collect();
            write_table(
                &["x", "u_eps", "u_hom", "u_corrector"],
                &rows,
                dest.as_deref(),
                out,
            )?;
            let _ = writeln!(
                err,
                "err_l2 {:.6e}  err_h1 {:.6e}  corrector_err_h1 {:.6e}",
                run.err_l2, run.err_h1, run.corrector_err_h1
            );
            if !run.stable() {
                let _ = writeln!(err, "violation: stability bound");
                return Ok(EXIT_VIOLATION);
            }
            Ok(EXIT_OK)
        }

        Command::Eigen {
            disc,
            n_pairs,
            out: dest,
        } => {
            let d = discretization(&mut cfg, disc);
            if let Some(n) = n_pairs {
                cfg.n_pairs = *n;
            }
            cfg.validate()?;
            let model = model_by_name(&cfg.model, cfg.sigma)?;
            let coeffs = solve_cell(&model)?;
            let run = spectrum_run(&model, &coeffs, d, cfg.n_pairs)?;
            let rows: Vec<Vec<f64>> = run
                .comparison
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n as f64,
                        r.lambda_eps,
                        r.lambda_hom,
                        r.gap,
                        r.err_l2,
                        r.err_h1,
                        r.aligned_sign,
                    ]
                })
                .collect();
            write_table(
                &[
                    "n",
                    "lambda_eps",
                    "lambda_hom",
                    "gap",
                    "err_l2",
                    "err_h1",
                    "aligned_sign",
                ],
                &rows,
                dest.as_deref(),
                out,
            )?;
            for r in run.comparison.rows.iter().filter(|r| r.ambiguous) {
                let _ = writeln!(err, "warning: sign of eigenfunction {} is ambiguous", r.n);
            }
            let mut failed = Vec::new();
            if !run.sandwich.holds() {
                failed.push("minimax sandwich");
            }
            for inv in [run.ms_invariants, run.hom_invariants] {
                if inv.orthonormality >= ORTHONORMALITY_TOL {
                    failed.push("orthonormality");
                }
                if inv.rayleigh >= RAYLEIGH_TOL {
                    failed.push("rayleigh identity");
                }
                if inv.h1_identity >= H1_IDENTITY_TOL {
                    failed.push("h1 identity");
                }
                if inv.min_gap <= SIMPLICITY_TOL {
                    failed.push("simplicity");
                }
            }
            for f in &failed {
                let _ = writeln!(err, "violation: {f}");
            }
            Ok(if failed.is_empty() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }

        Command::Sweep {
            epsilons,
            radius,
            sigma,
            eta,
            n_pairs,
            h,
            rhs,
            serial,
        } => {
            if let Some(e) = epsilons {
                cfg.epsilons = e.clone();
            }
            if let Some(v) = radius {
                cfg.radius = *v;
            }
            if let Some(v) = sigma {
                cfg.sigma = *v;
            }
            if let Some(v) = eta {
                cfg.eta = *v;
            }
            if let Some(v) = n_pairs {
                cfg.n_pairs = *v;
            }
            if h.is_some() {
                cfg.h = *h;
            }
            if let Some(v) = rhs {
                cfg.rhs = v.clone();
            }
            if *serial {
                cfg.parallel = false;
            }
            cfg.validate()?;
            sweep(&cfg, out, err)
        }
    }
}

fn sweep(cfg: &SweepConfig, out: &mut dyn Write, err: &mut (dyn Write + Send)) -> Result<u8> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let write_errors = Mutex::new(Vec::new());
    let log = Mutex::new(&mut *err);
    let output = run_sweep_with(cfg, |o| {
        let eps = o.row.epsilon();
        let mut log = log.lock().expect("logger poisoned");
        match &o.profile {
            Some(p) => {
                let _ = writeln!(log, "epsilon {eps}: done");
                if let Err(e) = emit_profile(p, &dir.join(profile_file_name(eps))) {
                    write_errors.lock().expect("collector poisoned").push(e);
                }
            }
            None => {
                let _ = writeln!(log, "epsilon {eps}: failed");
            }
        }
    })?;
    if let Some(e) = write_errors
        .into_inner()
        .expect("collector poisoned")
        .into_iter()
        .next()
    {
        return Err(e);
    }
    let rows = output.rows();
    emit_csv(&rows, &dir.join(SWEEP_CSV))?;
    let checks = summarize(&output);
    emit_summary(&checks, &dir.join(SUMMARY_CSV))?;
    emit_plot_script(&rows, &dir.join(PLOT_SCRIPT), SWEEP_CSV)?;
    for c in &checks {
        writeln!(out, "{:<32} {}", c.name, c.verdict.as_str()).map_err(stdout_err)?;
    }
    if output.has_failures() {
        return Ok(EXIT_ERROR);
    }
    Ok(if violations(&checks).is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
