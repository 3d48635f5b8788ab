//! Low eigenpairs of `-L` from the weighted variational form
//! `c ∫ φ' ψ' ρ = λ ∫ φ ψ ρ`, plus the analytic Hermite references for the
//! Ornstein-Uhlenbeck case, spectrum comparison and minimax bounds.

use alloc::vec;
use alloc::vec::Vec;

use crate::cell::EffectiveCoefficients;
use crate::dense::{jacobi_eigen, DenseSym};
use crate::fem::{Grid, GridFunction, SymTridiagonal, WeightedOperator, WeightedSpace};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub index: usize,
    pub lambda: f64,
    /// Normalized to unit `L²_ρ` norm.
    pub phi: GridFunction,
    /// `‖c A φ - λ M φ‖∞`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    pub n_pairs: usize,
    /// Extra subspace vectors beyond `n_pairs`.
    pub guard_vectors: usize,
    /// Shift `η` in `(cA + ηM)⁻¹ M`.
    pub shift: f64,
    /// Relative change of the wanted Ritz values between sweeps.
    pub tolerance: f64,
    pub residual_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            n_pairs: 5,
            guard_vectors: 2,
            shift: 1.0,
            tolerance: 1e-10,
            residual_tolerance: 1e-8,
            max_iterations: 500,
        }
    }
}

impl EigenOptions {
    pub fn with_pairs(n_pairs: usize) -> Self {
        Self {
            n_pairs,
            ..Self::default()
        }
    }
}

/// `coefficient · ψᵀAψ / ψᵀMψ` with the operators' own coefficients divided out.
pub fn rayleigh_quotient(
    psi: &GridFunction,
    stiffness: &WeightedOperator,
    mass: &WeightedOperator,
    coefficient: f64,
) -> Result<f64> {
    let den = mass.unit_form(psi.values())?;
    if !(den > 0.0) {
        return Err(Error::Domain("Rayleigh quotient of the zero vector"));
    }
    Ok(coefficient * stiffness.unit_form(psi.values())? / den)
}

fn m_dot(mass: &SymTridiagonal, x: &[f64], y: &[f64]) -> f64 {
    mass.bilinear_unchecked(x, y)
}

/// Modified Gram-Schmidt in the `M` inner product, applied twice.
fn m_orthonormalize(mass: &SymTridiagonal, block: &mut [Vec<f64>]) -> Result<()> {
    for j in 0..block.len() {
        let start = math::sqrt(m_dot(mass, &block[j], &block[j]));
        for _pass in 0..2 {
            for i in 0..j {
                let (done, rest) = block.split_at_mut(j);
                let c = m_dot(mass, &done[i], &rest[0]);
                for (x, q) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= c * q;
                }
            }
        }
        let norm = math::sqrt(m_dot(mass, &block[j], &block[j]));
        if !(norm > 1e-13 * start) {
            return Err(Error::Domain("subspace iteration lost rank"));
        }
        for x in block[j].iter_mut() {
            *x /= norm;
        }
    }
    Ok(())
}

/// Chebyshev polynomials `T_j(x/R)` at the nodes.
fn initial_block(grid: &Grid, k: usize) -> Vec<Vec<f64>> {
    let r = grid.radius();
    let mut block = Vec::with_capacity(k);
    for j in 0..k {
        block.push(
            grid.nodes()
                .iter()
                .map(|&x| {
                    let t = x / r;
                    let (mut t0, mut t1) = (1.0, t);
                    match j {
                        0 => 1.0,
                        1 => t,
                        _ => {
                            for _ in 2..=j {
                                let t2 = 2.0 * t * t1 - t0;
                                t0 = t1;
                                t1 = t2;
                            }
                            t1
                        }
                    }
                })
                .collect(),
        );
    }
    block
}

/// First `n_pairs` eigenpairs of `c A φ = λ M φ` by shift-invert subspace
/// iteration with Rayleigh-Ritz extraction.
///
/// Each sweep applies `(cA + ηM)⁻¹ M` to a block of `n_pairs + guard`
/// vectors, `M`-orthonormalizes it and rotates it onto the Ritz vectors of
/// the projected pencil. Eigenvectors are returned `M`-orthonormal with the
/// sign fixed so that the value at the right end of the grid is positive.
pub fn solve_spectrum(
    space: &WeightedSpace,
    diffusion: f64,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    if opts.n_pairs == 0 {
        return Err(Error::parameter("n_pairs must be at least 1"));
    }
    if !(diffusion > 0.0) || !(opts.shift > 0.0) {
        return Err(Error::parameter("diffusion and shift must be positive"));
    }
    let n = space.grid().n_nodes();
    if opts.n_pairs > n {
        return Err(Error::parameter(
            "more eigenpairs requested than grid nodes",
        ));
    }
    let k = (opts.n_pairs + opts.guard_vectors).min(n);
    let mass = &space.mass().matrix;
    let stiff = &space.stiffness().matrix;
    let factor = space.system(diffusion, opts.shift).factor()?;

    let mut block = initial_block(space.grid(), k);
    m_orthonormalize(mass, &mut block)?;
    let mut prev: Vec<f64> = vec![f64::INFINITY; k];
    let mut work = vec![0.0; n];
    let mut residuals = vec![f64::INFINITY; opts.n_pairs];

    for _iter in 0..opts.max_iterations {
        for col in block.iter_mut() {
            mass.apply_into(col, &mut work);
            factor.solve_in_place(&mut work);
            col.copy_from_slice(&work);
        }
        m_orthonormalize(mass, &mut block)?;

        // Projected pencil is (QᵀcAQ, I) after M-orthonormalization.
        let mut h = DenseSym::zeros(k);
        let applied: Vec<Vec<f64>> = block
            .iter()
            .map(|q| {
                let mut y = vec![0.0; n];
                stiff.apply_into(q, &mut y);
                y
            })
            .collect();
        for i in 0..k {
            for j in i..k {
                let v: f64 = diffusion
                    * block[i]
                        .iter()
                        .zip(&applied[j])
                        .map(|(a, b)| a * b)
                        .sum::<f64>();
                h.set(i, j, v);
                h.set(j, i, v);
            }
        }
        let eig = jacobi_eigen(&h);
        let rotated: Vec<Vec<f64>> = eig
            .vectors
            .iter()
            .map(|w| {
                let mut x = vec![0.0; n];
                for (c, q) in w.iter().zip(&block) {
                    for (xi, qi) in x.iter_mut().zip(q) {
                        *xi += c * qi;
                    }
                }
                x
            })
            .collect();
        block = rotated;

        let values = eig.values;
        let settled = (0..opts.n_pairs).all(|j| {
            math::abs(values[j] - prev[j]) <= opts.tolerance * math::abs(values[j]).max(1.0)
        });
        prev = values;
        if settled {
            for (j, r) in residuals.iter_mut().enumerate() {
                *r = pair_residual(stiff, mass, diffusion, prev[j], &block[j], &mut work);
            }
            if residuals.iter().all(|r| *r <= opts.residual_tolerance) {
                return Ok(finish(block, prev, residuals, opts.n_pairs));
            }
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iterations,
        residuals,
    })
}

fn pair_residual(
    stiff: &SymTridiagonal,
    mass: &SymTridiagonal,
    diffusion: f64,
    lambda: f64,
    x: &[f64],
    work: &mut [f64],
) -> f64 {
    let mut mx = vec![0.0; x.len()];
    stiff.apply_into(x, work);
    mass.apply_into(x, &mut mx);
    work.iter().zip(&mx).fold(0.0, |m, (a, b)| {
        m.max(math::abs(diffusion * a - lambda * b))
    })
}

fn finish(
    block: Vec<Vec<f64>>,
    values: Vec<f64>,
    residuals: Vec<f64>,
    n_pairs: usize,
) -> Vec<EigenPair> {
    block
        .into_iter()
        .zip(values)
        .zip(residuals)
        .take(n_pairs)
        .enumerate()
        .map(|(index, ((mut phi, lambda), residual))| {
            let anchor = phi
                .iter()
                .rev()
                .copied()
                .find(|v| math::abs(*v) > 1e-12)
                .unwrap_or(1.0);
            if anchor < 0.0 {
                phi.iter_mut().for_each(|v| *v = -*v);
            }
            EigenPair {
                index,
                lambda,
                phi: GridFunction::new(phi),
                residual,
            }
        })
        .collect()
}

/// Largest order accepted by [`hermite_reference`].
pub const MAX_HERMITE_ORDER: usize = 10;

/// Probabilists' Hermite polynomial `He_n(z)`.
pub fn hermite(n: usize, z: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, z);
    if n == 0 {
        return 1.0;
    }
    for k in 1..n {
        let h2 = z * h1 - k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Nodal values of `He_n(√(K/Σ) x) / √(n!)`, the `n`-th normalized
/// eigenfunction of the homogenized Ornstein-Uhlenbeck generator.
pub fn hermite_reference(
    coeffs: &EffectiveCoefficients,
    grid: &Grid,
    n: usize,
) -> Result<GridFunction> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::parameter("Hermite order above 10"));
    }
    let scale = math::sqrt(coeffs.k() / coeffs.sigma_eff());
    let norm = math::sqrt((1..=n).map(|k| k as f64).product::<f64>());
    Ok(GridFunction::from_fn(grid, |x| {
        hermite(n, scale * x) / norm
    }))
}

/// One index of a [`SpectrumComparison`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub n: usize,
    pub lambda_eps: f64,
    pub lambda_hom: f64,
    pub gap: f64,
    pub err_l2: f64,
    pub err_h1: f64,
    /// `+1` if the multiscale eigenfunction was kept, `-1` if flipped.
    pub aligned_sign: f64,
    /// `|⟨φ^ε, φ⁰⟩| < 1e-6`: the sign could not be aligned.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumComparison {
    pub rows: Vec<SpectrumRow>,
}

/// Inner products below this are treated as undecidable for alignment.
pub const ALIGNMENT_THRESHOLD: f64 = 1e-6;

/// Aligns each multiscale eigenfunction to positive `L²_ρ⁰` overlap with its
/// homogenized partner, then measures eigenvalue gaps and `L²_ρ⁰`/`H¹_ρ⁰`
/// distances in `hom_space`.
pub fn compare_spectra(
    ms: &[EigenPair],
    hom: &[EigenPair],
    hom_space: &WeightedSpace,
) -> Result<SpectrumComparison> {
    if ms.len() != hom.len() {
        return Err(Error::Shape {
            expected: hom.len(),
            found: ms.len(),
        });
    }
    let mut rows = Vec::with_capacity(ms.len());
    for (a, b) in ms.iter().zip(hom) {
        let overlap = hom_space.inner(&a.phi, &b.phi)?;
        let ambiguous = math::abs(overlap) < ALIGNMENT_THRESHOLD;
        let sign = if !ambiguous && overlap < 0.0 {
            -1.0
        } else {
            1.0
        };
        let diff = a.phi.scaled(sign).sub(&b.phi)?;
        let (err_l2, err_h1) = hom_space.norms(&diff)?;
        rows.push(SpectrumRow {
            n: b.index,
            lambda_eps: a.lambda,
            lambda_hom: b.lambda,
            gap: math::abs(a.lambda - b.lambda),
            err_l2,
            err_h1,
            aligned_sign: sign,
            ambiguous,
        });
    }
    Ok(SpectrumComparison { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichRow {
    pub n: usize,
    pub lower: f64,
    pub lambda_eps: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub c_low: f64,
    pub c_up: f64,
    pub rows: Vec<SandwichRow>,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }
}

/// Checks `(C_low²/(K C_up²)) λ⁰_n ≤ λ^ε_n ≤ (C_up²/(K C_low²)) λ⁰_n` with
/// `C_low = e^{-M/σ}`, `C_up = e^{M/σ}` and `M = max |p|`.
pub fn minimax_sandwich_check(
    ms: &[EigenPair],
    hom: &[EigenPair],
    coeffs: &EffectiveCoefficients,
) -> Result<SandwichReport> {
    if ms.len() != hom.len() {
        return Err(Error::Shape {
            expected: hom.len(),
            found: ms.len(),
        });
    }
    let model = coeffs.model();
    let amp = model.fast_amplitude();
    let c_low = math::exp(-amp / model.sigma());
    let c_up = math::exp(amp / model.sigma());
    let k = coeffs.k();
    let lo_factor = c_low * c_low / (k * c_up * c_up);
    let hi_factor = c_up * c_up / (k * c_low * c_low);
    let rows = ms
        .iter()
        .zip(hom)
        .map(|(a, b)| {
            let lower = lo_factor * b.lambda;
            let upper = hi_factor * b.lambda;
            let slack = 1e-8 * math::abs(b.lambda).max(1.0);
            SandwichRow {
                n: b.index,
                lower,
                lambda_eps: a.lambda,
                upper,
                holds: a.lambda >= lower - slack && a.lambda <= upper + slack,
            }
        })
        .collect();
    Ok(SandwichReport { c_low, c_up, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::solve_cell;
    use crate::fem::{build_grid, WeightKind};
    use crate::model::make_ou_cosine_model;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 3.0), 1.0);
        assert_eq!(hermite(1, 3.0), 3.0);
        assert_eq!(hermite(3, 2.0), 2.0);
        let c = solve_cell(&make_ou_cosine_model(1.0).unwrap()).unwrap();
        let g = build_grid(3.0, 0.5).unwrap();
        let h3 = hermite_reference(&c, &g, 3).unwrap();
        let i = g
            .nodes()
            .iter()
            .position(|&x| (x - 2.0).abs() < 1e-12)
            .unwrap();
        assert!((h3.values()[i] - 2.0 / 6f64.sqrt()).abs() < 1e-14);
        let h1 = hermite_reference(&c, &g, 1).unwrap();
        for (v, x) in h1.values().iter().zip(g.nodes()) {
            assert!((v - x).abs() < 1e-14);
        }
        assert!(hermite_reference(&c, &g, 11).is_err());
    }

    #[test]
    fn rayleigh_quotient_of_constant_is_zero_and_zero_vector_errors() {
        let g = build_grid(2.0, 0.1).unwrap();
        let s = WeightedSpace::new(&g, &|x| libm::exp(-x * x), WeightKind::Custom).unwrap();
        let one = GridFunction::from_fn(&g, |_| 1.0);
        let r = rayleigh_quotient(&one, s.stiffness(), s.mass(), 1.0).unwrap();
        assert!(r.abs() < 1e-12);
        let zero = GridFunction::zeros(&g);
        assert!(matches!(
            rayleigh_quotient(&zero, s.stiffness(), s.mass(), 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn identical_spectra_compare_to_zero_and_flip_is_undone() {
        let g = build_grid(5.0, 0.05).unwrap();
        let s = WeightedSpace::new(
            &g,
            &|x| libm::exp(-0.5 * x * x) / 2.5066,
            WeightKind::Custom,
        )
        .unwrap();
        let pairs = solve_spectrum(&s, 1.0, &EigenOptions::with_pairs(3)).unwrap();
        let cmp = compare_spectra(&pairs, &pairs, &s).unwrap();
        assert!(cmp
            .rows
            .iter()
            .all(|r| r.gap == 0.0 && r.err_l2 == 0.0 && r.err_h1 == 0.0));

        let mut flipped = pairs.clone();
        flipped[2].phi = flipped[2].phi.scaled(-1.0);
        let cmp = compare_spectra(&flipped, &pairs, &s).unwrap();
        assert_eq!(cmp.rows[2].aligned_sign, -1.0);
        assert!(cmp.rows[2].err_l2 < 1e-15);
        assert!(compare_spectra(&pairs[..2], &pairs, &s).is_err());
    }

    #[test]
    fn rejects_zero_pairs() {
        let g = build_grid(1.0, 0.1).unwrap();
        let s = WeightedSpace::new(&g, &|_| 1.0, WeightKind::Custom).unwrap();
        assert!(solve_spectrum(&s, 1.0, &EigenOptions::with_pairs(0)).is_err());
    }
}
