//! Numerical homogenization of the overdamped Langevin generator in one
//! dimension.
//!
//! The multiscale generator
//!
//! ```text
//! L^ε u = -(V'(x) + p'(x/ε)/ε) u' + σ u''
//! ```
//!
//! is discretized with P1 finite elements in the space weighted by its
//! invariant density `ρ^ε ∝ exp(-(V + p(·/ε))/σ)` on a truncated interval
//! `[-R, R]`, next to its homogenized counterpart
//! `L^0 u = -K V' u' + Σ u''` weighted by `ρ^0 ∝ exp(-V/σ)`.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration and the
//! command line live in the `langevin-homog` companion crate.
//!
//! Layout:
//!
//! - [`model`]: potentials, invariant densities, assumption spot-checks
//! - [`cell`]: closed-form 1D cell problem and effective coefficients
//! - [`fem`]: grids, weighted mass/stiffness assembly, tridiagonal solves
//! - [`poisson`]: reaction-Poisson solves and the first-order corrector
//! - [`eigen`]: shift-invert subspace iteration, Hermite references,
//!   spectrum comparison and minimax bounds
//! - [`quadrature`]: Gauss-Legendre rules, fixed and adaptive composite
//! - [`dense`]: small dense symmetric eigensolver used for Rayleigh-Ritz

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod cell;
pub mod dense;
pub mod eigen;
mod error;
pub mod fem;
pub(crate) mod math;
pub mod model;
pub mod poisson;
pub mod quadrature;

pub use cell::{solve_cell, EffectiveCoefficients};
pub use eigen::{
    compare_spectra, hermite_reference, minimax_sandwich_check, rayleigh_quotient, solve_spectrum,
    EigenOptions, EigenPair, SandwichReport, SpectrumComparison,
};
pub use error::{Error, Result};
pub use fem::{
    assemble, build_grid, solve_tridiagonal_spd, weighted_norms, Grid, GridFunction, OperatorKind,
    SymTridiagonal, WeightKind, WeightedOperator, WeightedSpace,
};
pub use model::{check_assumptions, eval_rho, make_ou_cosine_model, DensityPair, ModelSpec};
pub use poisson::{
    corrector_expansion, solve_homogenized, solve_multiscale, PoissonProblem, PoissonSolution,
};
