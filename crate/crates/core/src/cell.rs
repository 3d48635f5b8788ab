//! Periodic cell problem in one dimension.
//!
//! In 1D the cell problem `-σΦ'' + Φ'p' = -p'` on `[0, L]` with periodic
//! boundary conditions and `∫Φμ = 0` has the closed-form solution
//!
//! ```text
//! Φ(y)  = C_Φ - y + (L/Ĉ_μ) ∫_0^y e^{p(z)/σ} dz
//! Φ'(y) = -1 + (L/Ĉ_μ) e^{p(y)/σ}
//! ```
//!
//! with `C_μ = ∫_0^L e^{-p/σ}` and `Ĉ_μ = ∫_0^L e^{p/σ}`. The effective
//! coefficient is `K = L²/(C_μ Ĉ_μ)`, cross-checked here against both
//! integral representations `∫(1+Φ')μ` and `∫(1+Φ')²μ`.

use alloc::vec::Vec;

use crate::math;
use crate::model::ModelSpec;
use crate::quadrature::{self, GaussLegendre};
use crate::{Error, Result};

/// Panels in the cumulative table of `∫_0^y e^{p/σ}`.
const TABLE_PANELS: usize = 4096;
/// Gauss points per table panel.
const TABLE_ORDER: usize = 8;
/// Maximum tolerated spread between the three evaluations of `K`.
pub const K_CONSISTENCY_TOL: f64 = 1e-8;

/// Effective coefficients and the corrector `Φ`.
#[derive(Debug, Clone)]
pub struct EffectiveCoefficients {
    model: ModelSpec,
    k: f64,
    sigma_eff: f64,
    c_mu: f64,
    c_mu_hat: f64,
    c_phi: f64,
    k_integral_linear: f64,
    k_integral_quadratic: f64,
    rule: GaussLegendre,
    panel_width: f64,
    /// `cumulative[k] = ∫_0^{k·width} e^{p/σ}`.
    cumulative: Vec<f64>,
}

impl EffectiveCoefficients {
    /// Effective drift multiplier `K`, from the closed form `L²/(C_μ Ĉ_μ)`.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Effective diffusion `Σ = Kσ`.
    pub fn sigma_eff(&self) -> f64 {
        self.sigma_eff
    }

    pub fn c_mu(&self) -> f64 {
        self.c_mu
    }

    pub fn c_mu_hat(&self) -> f64 {
        self.c_mu_hat
    }

    pub fn c_phi(&self) -> f64 {
        self.c_phi
    }

    /// `∫ (1 + Φ') μ dy`.
    pub fn k_integral_linear(&self) -> f64 {
        self.k_integral_linear
    }

    /// `∫ (1 + Φ')² μ dy`.
    pub fn k_integral_quadratic(&self) -> f64 {
        self.k_integral_quadratic
    }

    /// Largest pairwise difference between the three values of `K`.
    pub fn k_residual(&self) -> f64 {
        let ks = [self.k, self.k_integral_linear, self.k_integral_quadratic];
        let hi = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Cell density `μ(y) = e^{-p(y)/σ} / C_μ`.
    pub fn mu(&self, y: f64) -> f64 {
        math::exp(-self.model.p(y) / self.model.sigma()) / self.c_mu
    }

    /// `∫_0^y e^{p/σ}` for `y ∈ [0, L]`.
    pub fn cumulative_exp(&self, y: f64) -> f64 {
        let sigma = self.model.sigma();
        let k = ((y / self.panel_width) as usize).min(TABLE_PANELS - 1);
        let start = self.panel_width * k as f64;
        if y <= start {
            return self.cumulative[k];
        }
        self.cumulative[k]
            + self
                .rule
                .integrate(|z| math::exp(self.model.p(z) / sigma), start, y)
    }

    /// `Φ(y)` for `y ∈ [0, L]` straight from the closed form, without
    /// periodic reduction.
    pub fn phi_unwrapped(&self, y: f64) -> f64 {
        let l = self.model.period();
        self.c_phi - y + l / self.c_mu_hat * self.cumulative_exp(y)
    }

    /// Periodic corrector `Φ(y)`.
    pub fn phi(&self, y: f64) -> f64 {
        self.phi_unwrapped(math::wrap(y, self.model.period()))
    }

    /// `Φ'(y) = -1 + (L/Ĉ_μ) e^{p(y)/σ}`.
    pub fn dphi(&self, y: f64) -> f64 {
        let m = &self.model;
        -1.0 + m.period() / self.c_mu_hat * math::exp(m.p(y) / m.sigma())
    }

    /// `Φ''(y) = (L/Ĉ_μ) (p'(y)/σ) e^{p(y)/σ}`.
    pub fn ddphi(&self, y: f64) -> f64 {
        let m = &self.model;
        m.period() / self.c_mu_hat * m.dp(y) / m.sigma() * math::exp(m.p(y) / m.sigma())
    }

    /// Residual of the cell equation `-σΦ'' + Φ'p' + p'` at `y`.
    pub fn cell_residual(&self, y: f64) -> f64 {
        let m = &self.model;
        -m.sigma() * self.ddphi(y) + self.dphi(y) * m.dp(y) + m.dp(y)
    }
}

/// Solves the 1D cell problem for `model` and evaluates the effective
/// coefficients.
pub fn solve_cell(model: &ModelSpec) -> Result<EffectiveCoefficients> {
    let sigma = model.sigma();
    let l = model.period();
    let c_mu = quadrature::integrate(|y| math::exp(-model.p(y) / sigma), 0.0, l)?;
    let c_mu_hat = quadrature::integrate(|y| math::exp(model.p(y) / sigma), 0.0, l)?;

    let rule = GaussLegendre::new(TABLE_ORDER);
    let panel_width = l / TABLE_PANELS as f64;
    let mut cumulative = Vec::with_capacity(TABLE_PANELS + 1);
    let mut acc = 0.0;
    cumulative.push(acc);
    for k in 0..TABLE_PANELS {
        let a = panel_width * k as f64;
        let b = if k + 1 == TABLE_PANELS {
            l
        } else {
            a + panel_width
        };
        acc += rule.integrate(|z| math::exp(model.p(z) / sigma), a, b);
        cumulative.push(acc);
    }
    let table_gap = math::abs(acc - c_mu_hat);
    if table_gap > 1e-10 * c_mu_hat {
        return Err(Error::Consistency {
            what: "cumulative table total differs from Ĉ_μ",
            discrepancy: table_gap,
        });
    }

    let k = l * l / (c_mu * c_mu_hat);
    let mut coeffs = EffectiveCoefficients {
        model: model.clone(),
        k,
        sigma_eff: k * sigma,
        c_mu,
        c_mu_hat,
        c_phi: 0.0,
        k_integral_linear: f64::NAN,
        k_integral_quadratic: f64::NAN,
        rule,
        panel_width,
        cumulative,
    };

    let first = quadrature::integrate(|y| y * math::exp(-model.p(y) / sigma), 0.0, l)? / c_mu;
    let double = quadrature::integrate(
        |y| coeffs.cumulative_exp(y) * math::exp(-model.p(y) / sigma),
        0.0,
        l,
    )?;
    coeffs.c_phi = first - l / (c_mu * c_mu_hat) * double;

    coeffs.k_integral_linear =
        quadrature::integrate(|y| (1.0 + coeffs.dphi(y)) * coeffs.mu(y), 0.0, l)?;
    coeffs.k_integral_quadratic = quadrature::integrate(
        |y| {
            let g = 1.0 + coeffs.dphi(y);
            g * g * coeffs.mu(y)
        },
        0.0,
        l,
    )?;
    let spread = coeffs.k_residual();
    if !(spread <= K_CONSISTENCY_TOL) {
        return Err(Error::Consistency {
            what: "effective coefficient formulas disagree",
            discrepancy: spread,
        });
    }
    Ok(coeffs)
}

/// `μ(y) = e^{-p(y)/σ}/C_μ` for a model, without solving for `Φ`.
pub fn mu(model: &ModelSpec, y: f64) -> Result<f64> {
    let sigma = model.sigma();
    let c_mu = quadrature::integrate(|z| math::exp(-model.p(z) / sigma), 0.0, model.period())?;
    Ok(math::exp(-model.p(y) / sigma) / c_mu)
}
