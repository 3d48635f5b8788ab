//! ε sweeps: one record per ε, computed serially or on worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use langevin_homog_core::{model::model_by_name, solve_cell, EffectiveCoefficients, ModelSpec};

use crate::config::SweepConfig;
use crate::error::{HarnessError, Result};
use crate::pipeline::{poisson_run, spectrum_run, Discretization, SpectralInvariants};
use crate::rhs::rhs_by_name;

/// Distances between the multiscale and homogenized problems at one ε.
/// Eigen vectors are indexed by `n = 0..n_pairs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub epsilon: f64,
    pub h: f64,
    pub poisson_err_l2: f64,
    pub poisson_err_h1: f64,
    pub corrector_err_h1: f64,
    pub eigen_gap: Vec<f64>,
    pub eigen_err_l2: Vec<f64>,
    pub eigen_err_h1: Vec<f64>,
}

impl ConvergenceRecord {
    pub fn n_pairs(&self) -> usize {
        self.eigen_gap.len()
    }

    pub fn errors_are_valid(&self) -> bool {
        [
            self.poisson_err_l2,
            self.poisson_err_h1,
            self.corrector_err_h1,
        ]
        .iter()
        .chain(&self.eigen_gap)
        .chain(&self.eigen_err_l2)
        .chain(&self.eigen_err_h1)
        .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// A sweep row: either a record or the error that stopped its ε.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepRow {
    Ok(ConvergenceRecord),
    Failed {
        epsilon: f64,
        h: f64,
        message: String,
    },
}

impl SweepRow {
    pub fn epsilon(&self) -> f64 {
        match self {
            SweepRow::Ok(r) => r.epsilon,
            SweepRow::Failed { epsilon, .. } => *epsilon,
        }
    }

    pub fn record(&self) -> Option<&ConvergenceRecord> {
        match self {
            SweepRow::Ok(r) => Some(r),
            SweepRow::Failed { .. } => None,
        }
    }
}

/// Checks evaluated alongside a record but not part of the CSV schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub lambda_eps: Vec<f64>,
    pub lambda_hom: Vec<f64>,
    pub stable: bool,
    pub coarse_mesh: bool,
    pub sandwich_holds: bool,
    pub ambiguous_alignment: bool,
    pub ms_invariants: SpectralInvariants,
    pub hom_invariants: SpectralInvariants,
}

/// Nodal profiles of the three Poisson approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub u_eps: Vec<f64>,
    pub u_hom: Vec<f64>,
    pub u_corrector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonOutcome {
    pub row: SweepRow,
    pub diagnostics: Option<Diagnostics>,
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub config: SweepConfig,
    pub k: f64,
    pub outcomes: Vec<EpsilonOutcome>,
}

impl SweepOutput {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.outcomes.iter().map(|o| o.row.clone()).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = &ConvergenceRecord> {
        self.outcomes.iter().filter_map(|o| o.row.record())
    }

    pub fn has_failures(&self) -> bool {
        self.outcomes.iter().any(|o| o.row.record().is_none())
    }
}

pub fn run_epsilon(
    config: &SweepConfig,
    model: &ModelSpec,
    coeffs: &EffectiveCoefficients,
    epsilon: f64,
) -> EpsilonOutcome {
    let h = config.mesh_size(epsilon);
    match compute(config, model, coeffs, epsilon, h) {
        Ok((record, diagnostics, profile)) => EpsilonOutcome {
            row: SweepRow::Ok(record),
            diagnostics: Some(diagnostics),
            profile: Some(profile),
        },
        Err(e) => EpsilonOutcome {
            row: SweepRow::Failed {
                epsilon,
                h,
                message: e.to_string(),
            },
            diagnostics: None,
            profile: None,
        },
    }
}

fn compute(
    config: &SweepConfig,
    model: &ModelSpec,
    coeffs: &EffectiveCoefficients,
    epsilon: f64,
    h: f64,
) -> Result<(ConvergenceRecord, Diagnostics, Profile)> {
    let rhs = rhs_by_name(&config.rhs)
        .ok_or_else(|| HarnessError::Invalid(format!("unknown rhs '{}'", config.rhs)))?;
    let disc = Discretization {
        epsilon,
        radius: config.radius,
        h,
    };
    let poisson = poisson_run(model, coeffs, disc, config.eta, rhs)?;
    let spectrum = spectrum_run(model, coeffs, disc, config.n_pairs)?;
    let rows = &spectrum.comparison.rows;
    let record = ConvergenceRecord {
        epsilon,
        h,
        poisson_err_l2: poisson.err_l2,
        poisson_err_h1: poisson.err_h1,
        corrector_err_h1: poisson.corrector_err_h1,
        eigen_gap: rows.iter().map(|r| r.gap).collect(),
        eigen_err_l2: rows.iter().map(|r| r.err_l2).collect(),
        eigen_err_h1: rows.iter().map(|r| r.err_h1).collect(),
    };
    let diagnostics = Diagnostics {
        lambda_eps: rows.iter().map(|r| r.lambda_eps).collect(),
        lambda_hom: rows.iter().map(|r| r.lambda_hom).collect(),
        stable: poisson.stable(),
        coarse_mesh: poisson.multiscale.coarse_mesh,
        sandwich_holds: spectrum.sandwich.holds(),
        ambiguous_alignment: rows.iter().any(|r| r.ambiguous),
        ms_invariants: spectrum.ms_invariants,
        hom_invariants: spectrum.hom_invariants,
    };
    let profile = Profile {
        x: poisson.grid.nodes().to_vec(),
        u_eps: poisson.multiscale.u.values().to_vec(),
        u_hom: poisson.homogenized.u.values().to_vec(),
        u_corrector: poisson.corrector.values().to_vec(),
    };
    Ok((record, diagnostics, profile))
}

/// Runs the sweep; see [`run_sweep_with`].
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput> {
    run_sweep_with(config, |_| {})
}

/// Runs every ε of `config`, calling `on_complete` as each one finishes.
/// With `config.parallel` the ε values are spread over worker threads; the
/// returned outcomes are in config order either way and each one is computed
/// by the same single-threaded code, so the results do not depend on the
/// schedule.
pub fn run_sweep_with<F>(config: &SweepConfig, on_complete: F) -> Result<SweepOutput>
where
    F: Fn(&EpsilonOutcome) + Sync,
{
    config.validate()?;
    let model = model_by_name(&config.model, config.sigma)?;
    let coeffs = solve_cell(&model)?;
    let eps = &config.epsilons;

    let outcomes = if config.parallel && eps.len() > 1 {
        let workers = std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(eps.len());
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<EpsilonOutcome>>> = Mutex::new(vec![None; eps.len()]);
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= eps.len() {
                        break;
                    }
                    let out = run_epsilon(config, &model, &coeffs, eps[i]);
                    on_complete(&out);
                    slots.lock().expect("worker panicked")[i] = Some(out);
                });
            }
        });
        slots
            .into_inner()
            .expect("worker panicked")
            .into_iter()
            .map(|o| o.expect("every epsilon is claimed by a worker"))
            .collect()
    } else {
        eps.iter()
            .map(|&e| {
                let out = run_epsilon(config, &model, &coeffs, e);
                on_complete(&out);
                out
            })
            .collect()
    };

    Ok(SweepOutput {
        config: config.clone(),
        k: coeffs.k(),
        outcomes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Not enough data, e.g. a monotonicity check on a single ε.
    Skipped,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
}

/// Minimum successive ratio for the `L²_ρ⁰` Poisson error.
pub const POISSON_L2_MIN_RATIO: f64 = 1.5;
/// Minimum successive ratio for the corrector error.
pub const CORRECTOR_MIN_RATIO: f64 = 1.3;
/// Allowed band, relative to the first ε, for errors that need not decay.
pub const H1_BAND: (f64, f64) = (0.5, 2.0);

/// Strictly decreasing with `values[i] / values[i + 1] ≥ min_ratio`.
pub fn decays(values: &[f64], min_ratio: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] < w[0] && w[0] >= min_ratio * w[1])
}

pub fn within_band(values: &[f64], band: (f64, f64)) -> bool {
    let Some(&first) = values.first() else {
        return true;
    };
    values
        .iter()
        .all(|&v| v >= band.0 * first && v <= band.1 * first)
}

/// The sweep-level pass/fail checks, in a fixed order.
pub fn summarize(output: &SweepOutput) -> Vec<Check> {
    let recs: Vec<&ConvergenceRecord> = output.records().collect();
    let complete = !output.has_failures();
    let trend = recs.len() >= 2 && complete;
    let col = |f: &dyn Fn(&ConvergenceRecord) -> f64| recs.iter().map(|r| f(r)).collect::<Vec<_>>();
    let monotone = |ok: bool| {
        if trend {
            Verdict::from_bool(ok)
        } else {
            Verdict::Skipped
        }
    };

    let mut checks = vec![
        Check {
            name: "sweep_complete".into(),
            verdict: Verdict::from_bool(complete),
        },
        Check {
            name: "poisson_l2_decay".into(),
            verdict: monotone(decays(&col(&|r| r.poisson_err_l2), POISSON_L2_MIN_RATIO)),
        },
        Check {
            name: "poisson_h1_bounded".into(),
            verdict: monotone(within_band(&col(&|r| r.poisson_err_h1), H1_BAND)),
        },
        Check {
            name: "corrector_h1_decay".into(),
            verdict: monotone(decays(&col(&|r| r.corrector_err_h1), CORRECTOR_MIN_RATIO)),
        },
    ];
    let n_pairs = output.config.n_pairs;
    for n in 1..n_pairs {
        checks.push(Check {
            name: format!("eigen_gap_decay_n{n}"),
            verdict: monotone(decays(&col(&|r| r.eigen_gap[n]), 1.0)),
        });
    }
    for n in 1..n_pairs {
        checks.push(Check {
            name: format!("eigen_l2_decay_n{n}"),
            verdict: monotone(decays(&col(&|r| r.eigen_err_l2[n]), 1.0)),
        });
    }
    for n in 1..n_pairs {
        checks.push(Check {
            name: format!("eigen_h1_bounded_n{n}"),
            verdict: monotone(within_band(&col(&|r| r.eigen_err_h1[n]), H1_BAND)),
        });
    }
    let at_tenth = recs.iter().find(|r| (r.epsilon - 0.1).abs() < 1e-12);
    checks.push(Check {
        name: "gap_grows_with_n_at_eps_0.1".into(),
        verdict: match at_tenth {
            Some(r) if n_pairs >= 2 => {
                Verdict::from_bool(r.eigen_gap[n_pairs - 1] > r.eigen_gap[1])
            }
            _ => Verdict::Skipped,
        },
    });
    let diags: Vec<&Diagnostics> = output
        .outcomes
        .iter()
        .filter_map(|o| o.diagnostics.as_ref())
        .collect();
    checks.push(Check {
        name: "minimax_sandwich".into(),
        verdict: Verdict::from_bool(diags.iter().all(|d| d.sandwich_holds)),
    });
    checks.push(Check {
        name: "stability_bound".into(),
        verdict: Verdict::from_bool(diags.iter().all(|d| d.stable)),
    });
    checks
}

/// Any failing check counts as a theory violation.
pub fn violations(checks: &[Check]) -> Vec<&str> {
    checks
        .iter()
        .filter(|c| c.verdict == Verdict::Fail && c.name != "sweep_complete")
        .map(|c| c.name.as_str())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_and_band() {
        assert!(decays(&[4.0, 2.0, 1.0], 2.0));
        assert!(!decays(&[4.0, 2.0, 1.5], 1.5));
        assert!(!decays(&[1.0, 1.0], 1.0));
        assert!(decays(&[1.0], 1.0));
        assert!(within_band(&[1.0, 0.6, 1.9], (0.5, 2.0)));
        assert!(!within_band(&[1.0, 0.4], (0.5, 2.0)));
    }
}
