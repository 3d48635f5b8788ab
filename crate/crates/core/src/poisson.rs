//! Reaction-Poisson problems `-L u + η u = f` for the multiscale and the
//! homogenized generator, and the two-term corrector expansion.

use alloc::vec::Vec;

use crate::cell::EffectiveCoefficients;
use crate::fem::{Grid, GridFunction, WeightedSpace};
use crate::math;
use crate::model::DensityPair;
use crate::{Error, Result};

/// Right-hand side, reaction coefficient and mesh of one solve. `epsilon`
/// is `None` for the homogenized problem.
#[derive(Clone, Copy)]
pub struct PoissonProblem<'a> {
    pub eta: f64,
    pub rhs: &'a dyn Fn(f64) -> f64,
    pub epsilon: Option<f64>,
    pub grid: &'a Grid,
}

impl core::fmt::Debug for PoissonProblem<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PoissonProblem")
            .field("eta", &self.eta)
            .field("epsilon", &self.epsilon)
            .field("n_elems", &self.grid.n_elems())
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub u: GridFunction,
    /// `‖(cA + ηM)u - F‖∞ / ‖F‖∞` (absolute when `F = 0`).
    pub residual: f64,
    /// `‖u‖_{H¹_ρ}` in the space the problem was posed in.
    pub h1_norm: f64,
    /// `‖f‖_{L²_ρ}`.
    pub rhs_norm: f64,
    /// `‖u‖_{H¹_ρ} / ‖f‖_{L²_ρ}` (zero when `f = 0`).
    pub stability_ratio: f64,
    /// `1 / min{c, η}` with `c` the diffusion coefficient.
    pub stability_bound: f64,
    /// Mesh coarser than `h = ε²`.
    pub coarse_mesh: bool,
}

impl PoissonSolution {
    /// `‖u‖_{H¹} ≤ ‖f‖_{L²} / min{c, η} + slack`.
    pub fn is_stable(&self, slack: f64) -> bool {
        self.stability_ratio <= self.stability_bound + slack
    }
}

/// Solves `(c A + η M) u = F` in a prebuilt weighted space, `c` being `σ`
/// for the multiscale weight and `Σ` for the homogenized one.
pub fn solve_in_space(
    space: &WeightedSpace,
    diffusion: f64,
    eta: f64,
    rhs: &dyn Fn(f64) -> f64,
) -> Result<PoissonSolution> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::parameter(
            "reaction coefficient eta must be positive",
        ));
    }
    if !(diffusion > 0.0 && diffusion.is_finite()) {
        return Err(Error::parameter("diffusion coefficient must be positive"));
    }
    let system = space.system(diffusion, eta);
    let load = space.load_vector(rhs);
    let u = system.factor()?.solve(&load)?;

    let applied = system.apply(&u)?;
    let load_max = load.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    let res_max = applied
        .iter()
        .zip(&load)
        .fold(0.0f64, |m, (a, b)| m.max(math::abs(a - b)));
    let residual = if load_max > 0.0 {
        res_max / load_max
    } else {
        res_max
    };

    let u = GridFunction::new(u);
    let (_, h1_norm) = space.norms(&u)?;
    let rhs_norm = space.l2_norm_of(rhs);
    let stability_ratio = if rhs_norm > 0.0 {
        h1_norm / rhs_norm
    } else {
        0.0
    };
    Ok(PoissonSolution {
        u,
        residual,
        h1_norm,
        rhs_norm,
        stability_ratio,
        stability_bound: 1.0 / diffusion.min(eta),
        coarse_mesh: false,
    })
}

/// Multiscale problem, weighted by `ρ^ε` with diffusion `σ`.
pub fn solve_multiscale(
    problem: &PoissonProblem<'_>,
    densities: &DensityPair<'_>,
) -> Result<PoissonSolution> {
    let eps = problem
        .epsilon
        .ok_or_else(|| Error::parameter("multiscale problem needs epsilon"))?;
    if math::abs(eps - densities.epsilon()) > 1e-15 * eps {
        return Err(Error::parameter(
            "densities were built for a different epsilon",
        ));
    }
    let space = WeightedSpace::multiscale(problem.grid, densities)?;
    let mut sol = solve_in_space(&space, densities.model().sigma(), problem.eta, problem.rhs)?;
    sol.coarse_mesh = problem.grid.h() > eps * eps * (1.0 + 1e-12);
    Ok(sol)
}

/// Homogenized problem, weighted by `ρ^0` with diffusion `Σ = Kσ`.
pub fn solve_homogenized(
    problem: &PoissonProblem<'_>,
    densities: &DensityPair<'_>,
    coeffs: &EffectiveCoefficients,
) -> Result<PoissonSolution> {
    let space = WeightedSpace::homogenized(problem.grid, densities)?;
    solve_in_space(&space, coeffs.sigma_eff(), problem.eta, problem.rhs)
}

/// Nodal values of `u⁰(x) + ε (u⁰)'(x) Φ(x/ε)`, with `(u⁰)'` recovered by
/// averaged element slopes.
pub fn corrector_expansion(
    u0: &GridFunction,
    grid: &Grid,
    coeffs: &EffectiveCoefficients,
    epsilon: f64,
) -> Result<GridFunction> {
    if epsilon < 0.0 {
        return Err(Error::parameter("epsilon must be non-negative"));
    }
    if epsilon == 0.0 {
        return Ok(u0.clone());
    }
    let slopes = u0.nodal_slopes(grid)?;
    let values: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(u0.values())
        .zip(slopes.values())
        .map(|((&x, &u), &du)| u + epsilon * du * coeffs.phi(x / epsilon))
        .collect();
    Ok(GridFunction::new(values))
}
