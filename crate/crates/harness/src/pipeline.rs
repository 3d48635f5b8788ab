//! Single-ε runs shared by the sweep and the command line.

use langevin_homog_core::{
    build_grid, compare_spectra, corrector_expansion, eval_rho, minimax_sandwich_check,
    rayleigh_quotient, solve_homogenized, solve_multiscale, solve_spectrum, EffectiveCoefficients,
    EigenOptions, EigenPair, Grid, GridFunction, ModelSpec, PoissonProblem, PoissonSolution,
    Result, SandwichReport, SpectrumComparison, WeightedSpace,
};

use crate::rhs::Rhs;

/// Slack on the stability estimate `‖u‖_{H¹} ≤ ‖f‖_{L²}/min{c, η}`.
pub const STABILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub epsilon: f64,
    pub radius: f64,
    pub h: f64,
}

/// Multiscale and homogenized Poisson solutions on a common grid, with the
/// first-order corrector and the distances between them in `H¹_ρ⁰`.
#[derive(Debug, Clone)]
pub struct PoissonRun {
    pub grid: Grid,
    pub multiscale: PoissonSolution,
    pub homogenized: PoissonSolution,
    pub corrector: GridFunction,
    pub err_l2: f64,
    pub err_h1: f64,
    pub corrector_err_h1: f64,
}

impl PoissonRun {
    pub fn stable(&self) -> bool {
        self.multiscale.is_stable(STABILITY_SLACK) && self.homogenized.is_stable(STABILITY_SLACK)
    }
}

pub fn poisson_run(
    model: &ModelSpec,
    coeffs: &EffectiveCoefficients,
    disc: Discretization,
    eta: f64,
    rhs: Rhs,
) -> Result<PoissonRun> {
    let densities = eval_rho(model, disc.epsilon, disc.radius)?;
    let grid = build_grid(disc.radius, disc.h)?;
    let problem = PoissonProblem {
        eta,
        rhs: &rhs,
        epsilon: Some(disc.epsilon),
        grid: &grid,
    };
    let multiscale = solve_multiscale(&problem, &densities)?;
    let homogenized = solve_homogenized(&problem, &densities, coeffs)?;
    let corrector = corrector_expansion(&homogenized.u, &grid, coeffs, disc.epsilon)?;
    let hom_space = WeightedSpace::homogenized(&grid, &densities)?;
    let (err_l2, err_h1) = hom_space.norms(&multiscale.u.sub(&homogenized.u)?)?;
    let (_, corrector_err_h1) = hom_space.norms(&multiscale.u.sub(&corrector)?)?;
    Ok(PoissonRun {
        grid,
        multiscale,
        homogenized,
        corrector,
        err_l2,
        err_h1,
        corrector_err_h1,
    })
}

/// Worst-case deviations of a computed spectrum from the identities every
/// exact eigenpair satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInvariants {
    /// `max |φ_iᵀ M φ_j − δ_ij|`.
    pub orthonormality: f64,
    /// `max |R(φ_n) − λ_n| / max(|λ_n|, 1)`.
    pub rayleigh: f64,
    /// `max |‖φ_n‖²_{H¹} − (1 + λ_n/c)|`.
    pub h1_identity: f64,
    /// `min (λ_{n+1} − λ_n)`; infinite for a single pair.
    pub min_gap: f64,
}

pub fn spectral_invariants(
    space: &WeightedSpace,
    pairs: &[EigenPair],
    diffusion: f64,
) -> Result<SpectralInvariants> {
    let mut inv = SpectralInvariants {
        orthonormality: 0.0,
        rayleigh: 0.0,
        h1_identity: 0.0,
        min_gap: f64::INFINITY,
    };
    for a in pairs {
        for b in pairs {
            let delta = if a.index == b.index { 1.0 } else { 0.0 };
            let dev = (space.inner(&a.phi, &b.phi)? - delta).abs();
            inv.orthonormality = inv.orthonormality.max(dev);
        }
        let r = rayleigh_quotient(&a.phi, space.stiffness(), space.mass(), diffusion)?;
        inv.rayleigh = inv
            .rayleigh
            .max((r - a.lambda).abs() / a.lambda.abs().max(1.0));
        let (_, h1) = space.norms(&a.phi)?;
        inv.h1_identity = inv
            .h1_identity
            .max((h1 * h1 - 1.0 - a.lambda / diffusion).abs());
    }
    for w in pairs.windows(2) {
        inv.min_gap = inv.min_gap.min(w[1].lambda - w[0].lambda);
    }
    Ok(inv)
}

#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub multiscale: Vec<EigenPair>,
    pub homogenized: Vec<EigenPair>,
    pub comparison: SpectrumComparison,
    pub sandwich: SandwichReport,
    pub ms_invariants: SpectralInvariants,
    pub hom_invariants: SpectralInvariants,
}

pub fn spectrum_run(
    model: &ModelSpec,
    coeffs: &EffectiveCoefficients,
    disc: Discretization,
    n_pairs: usize,
) -> Result<SpectrumRun> {
    let densities = eval_rho(model, disc.epsilon, disc.radius)?;
    let grid = build_grid(disc.radius, disc.h)?;
    let ms_space = WeightedSpace::multiscale(&grid, &densities)?;
    let hom_space = WeightedSpace::homogenized(&grid, &densities)?;
    let opts = EigenOptions::with_pairs(n_pairs);
    let multiscale = solve_spectrum(&ms_space, model.sigma(), &opts)?;
    let homogenized = solve_spectrum(&hom_space, coeffs.sigma_eff(), &opts)?;
    let comparison = compare_spectra(&multiscale, &homogenized, &hom_space)?;
    let sandwich = minimax_sandwich_check(&multiscale, &homogenized, coeffs)?;
    let ms_invariants = spectral_invariants(&ms_space, &multiscale, model.sigma())?;
    let hom_invariants = spectral_invariants(&hom_space, &homogenized, coeffs.sigma_eff())?;
    Ok(SpectrumRun {
        multiscale,
        homogenized,
        comparison,
        sandwich,
        ms_invariants,
        hom_invariants,
    })
}
