//! Multiscale potentials `V(x) + p(x/ε)`, their invariant densities and
//! numerical spot-checks of the dissipativity/compactness hypotheses.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::math;
use crate::quadrature::{self, AdaptiveOptions};
use crate::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Slow potential `V` and `L`-periodic fast potential `p`, with derivatives.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    v: ScalarFn,
    dv: ScalarFn,
    ddv: ScalarFn,
    p: ScalarFn,
    dp: ScalarFn,
    sigma: f64,
    period: f64,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("sigma", &self.sigma)
            .field("period", &self.period)
            .finish_non_exhaustive()
    }
}

/// Number of samples per period used for the periodicity check and for `max |p|`.
const PERIOD_SAMPLES: usize = 10_000;

impl ModelSpec {
    /// Validates `sigma > 0`, `period > 0` and `p(y + L) = p(y)` on a sample
    /// grid of two periods.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        v: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dp: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: f64,
        period: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::parameter("sigma must be positive"));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::parameter("period must be positive"));
        }
        let model = Self {
            name: name.into(),
            v: Arc::new(v),
            dv: Arc::new(dv),
            ddv: Arc::new(ddv),
            p: Arc::new(p),
            dp: Arc::new(dp),
            sigma,
            period,
        };
        let n = 1000;
        for i in 0..=2 * n {
            let y = -period + period * i as f64 / n as f64;
            let a = model.p(y);
            let b = model.p(y + period);
            if math::abs(a - b) > 1e-12 * a.abs().max(1.0) {
                return Err(Error::parameter("fast potential is not periodic"));
            }
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Period `L` of the fast potential.
    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn v(&self, x: f64) -> f64 {
        (self.v)(x)
    }

    pub fn dv(&self, x: f64) -> f64 {
        (self.dv)(x)
    }

    pub fn ddv(&self, x: f64) -> f64 {
        (self.ddv)(x)
    }

    pub fn p(&self, y: f64) -> f64 {
        (self.p)(y)
    }

    pub fn dp(&self, y: f64) -> f64 {
        (self.dp)(y)
    }

    /// `M = max |p|` over one period: dense sampling followed by a
    /// golden-section refinement around the best sample.
    pub fn fast_amplitude(&self) -> f64 {
        let h = self.period / PERIOD_SAMPLES as f64;
        let g = |y: f64| math::abs(self.p(y));
        let (mut best_i, mut best) = (0, g(0.0));
        for i in 1..PERIOD_SAMPLES {
            let val = g(h * i as f64);
            if val > best {
                best = val;
                best_i = i;
            }
        }
        let centre = h * best_i as f64;
        let (mut a, mut b) = (centre - h, centre + h);
        let ratio = 0.5 * (math::sqrt(5.0) - 1.0);
        for _ in 0..80 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best.max(g(0.5 * (a + b)))
    }

    /// Largest central-difference residual `|V'(x) - (V(x+δ) - V(x-δ))/2δ|`
    /// (and likewise for `p`) over the given points.
    pub fn derivative_residual(&self, points: &[f64], delta: f64) -> f64 {
        let fd = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + delta) - f(x - delta)) / (2.0 * delta);
        points
            .iter()
            .map(|&x| {
                let rv = math::abs(self.dv(x) - fd(&|s| self.v(s), x));
                let rp = math::abs(self.dp(x) - fd(&|s| self.p(s), x));
                let rvv = math::abs(self.ddv(x) - fd(&|s| self.dv(s), x));
                rv.max(rp).max(rvv)
            })
            .fold(0.0, f64::max)
    }
}

/// `V(x) = x²/2`, `p(y) = cos(y)`, `L = 2π`.
pub fn make_ou_cosine_model(sigma: f64) -> Result<ModelSpec> {
    ModelSpec::new(
        "ou_cosine",
        |x| 0.5 * x * x,
        |x| x,
        |_| 1.0,
        math::cos,
        |y| -math::sin(y),
        sigma,
        2.0 * PI,
    )
}

/// Ornstein-Uhlenbeck potential with no fast component (`p ≡ 0`, `L = 2π`).
pub fn make_ou_flat_model(sigma: f64) -> Result<ModelSpec> {
    ModelSpec::new(
        "ou_flat",
        |x| 0.5 * x * x,
        |x| x,
        |_| 1.0,
        |_| 0.0,
        |_| 0.0,
        sigma,
        2.0 * PI,
    )
}

/// Looks up a built-in model by the name used in configuration files.
pub fn model_by_name(name: &str, sigma: f64) -> Result<ModelSpec> {
    match name {
        "ou_cosine" => make_ou_cosine_model(sigma),
        "ou_flat" => make_ou_flat_model(sigma),
        other => Err(Error::parameter(alloc::format!("unknown model `{other}`"))),
    }
}

/// Multiscale and homogenized invariant densities on `[-R, R]`, normalized
/// by quadrature on the truncated interval.
#[derive(Debug, Clone, Copy)]
pub struct DensityPair<'m> {
    model: &'m ModelSpec,
    epsilon: f64,
    radius: f64,
    c_ms: f64,
    c_hom: f64,
}

/// Largest accepted `exp(-(V(±R) - min V)/σ)` in [`eval_rho`].
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-4;

impl<'m> DensityPair<'m> {
    pub fn model(&self) -> &'m ModelSpec {
        self.model
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `C_{ρ^ε} = ∫ exp(-(V(x) + p(x/ε))/σ) dx` over `[-R, R]`.
    pub fn c_ms(&self) -> f64 {
        self.c_ms
    }

    /// `C_{ρ^0} = ∫ exp(-V(x)/σ) dx` over `[-R, R]`.
    pub fn c_hom(&self) -> f64 {
        self.c_hom
    }

    pub fn rho_ms_unnormalized(&self, x: f64) -> f64 {
        let m = self.model;
        math::exp(-(m.v(x) + m.p(x / self.epsilon)) / m.sigma)
    }

    pub fn rho_hom_unnormalized(&self, x: f64) -> f64 {
        math::exp(-self.model.v(x) / self.model.sigma)
    }

    pub fn rho_ms(&self, x: f64) -> f64 {
        self.rho_ms_unnormalized(x) / self.c_ms
    }

    pub fn rho_hom(&self, x: f64) -> f64 {
        self.rho_hom_unnormalized(x) / self.c_hom
    }
}

/// Computes both normalization constants for scale `epsilon` on `[-R, R]`.
pub fn eval_rho(model: &ModelSpec, epsilon: f64, radius: f64) -> Result<DensityPair<'_>> {
    eval_rho_with(model, epsilon, radius, DEFAULT_TAIL_TOLERANCE)
}

/// [`eval_rho`] with an explicit bound on the relative density left at `±R`.
pub fn eval_rho_with(
    model: &ModelSpec,
    epsilon: f64,
    radius: f64,
    tail_tolerance: f64,
) -> Result<DensityPair<'_>> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::parameter("epsilon must be positive"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::parameter("domain radius must be positive"));
    }
    let samples = 2000;
    let v_min = (0..=samples)
        .map(|i| model.v(-radius + 2.0 * radius * i as f64 / samples as f64))
        .fold(f64::INFINITY, f64::min);
    let edge = model.v(-radius).min(model.v(radius));
    let ratio = math::exp(-(edge - v_min) / model.sigma);
    if ratio > tail_tolerance {
        return Err(Error::Truncation {
            ratio,
            tolerance: tail_tolerance,
        });
    }

    let sigma = model.sigma;
    let c_hom = quadrature::integrate(|x| math::exp(-model.v(x) / sigma), -radius, radius)?;
    // Start with a few panels per fast period so doubling sees the oscillation.
    let periods = 2.0 * radius / (model.period * epsilon);
    let opts = AdaptiveOptions {
        initial_panels: (math::ceil(periods) as usize).max(8),
        ..AdaptiveOptions::default()
    };
    let c_ms = quadrature::integrate_adaptive(
        |x| math::exp(-(model.v(x) + model.p(x / epsilon)) / sigma),
        -radius,
        radius,
        &opts,
    )?;
    Ok(DensityPair {
        model,
        epsilon,
        radius,
        c_ms,
        c_hom,
    })
}

/// One finding of [`check_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub enum AssumptionViolation {
    /// No `b > 0` makes `-V'(x) x ≤ a - b x²` hold on the outer samples.
    Dissipativity { b: f64 },
    /// `|V'|` fails to grow at the sample `x`.
    GradientGrowth { x: f64 },
    /// `|V'|²/4 - V''/2` fails to grow at the sample `x`.
    SchrodingerGrowth { x: f64 },
}

/// Diagnostic report; violations never abort a computation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub a: f64,
    pub b: f64,
    pub violations: Vec<AssumptionViolation>,
}

impl AssumptionReport {
    pub fn dissipative(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| matches!(v, AssumptionViolation::Dissipativity { .. }))
    }

    pub fn compact(&self) -> bool {
        !self.violations.iter().any(|v| {
            matches!(
                v,
                AssumptionViolation::GradientGrowth { .. }
                    | AssumptionViolation::SchrodingerGrowth { .. }
            )
        })
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Spot-checks the dissipativity bound and the growth conditions of the
/// slow potential on a uniform grid over `[-r, r]`.
pub fn check_assumptions(model: &ModelSpec, sample_radius: f64) -> Result<AssumptionReport> {
    if !(sample_radius > 0.0 && sample_radius.is_finite()) {
        return Err(Error::parameter("sample radius must be positive"));
    }
    let n = 2001;
    let xs: Vec<f64> = (0..n)
        .map(|i| -sample_radius + 2.0 * sample_radius * i as f64 / (n - 1) as f64)
        .collect();
    let outer = 0.8 * sample_radius;
    let mut violations = Vec::new();

    // b: the smallest V'(x) x / x² on the outer ring; a: what is then needed
    // to cover the inner samples.
    let b = xs
        .iter()
        .filter(|x| math::abs(**x) >= outer)
        .map(|&x| model.dv(x) * x / (x * x))
        .fold(f64::INFINITY, f64::min);
    let a = xs
        .iter()
        .map(|&x| -model.dv(x) * x + b * x * x)
        .fold(0.0, f64::max);
    if !(b > 0.0) {
        violations.push(AssumptionViolation::Dissipativity { b });
    }

    let grad = |x: f64| math::abs(model.dv(x));
    let schrod = |x: f64| {
        let g = model.dv(x);
        0.25 * g * g - 0.5 * model.ddv(x)
    };
    // Walk outward on each side; values must not decrease.
    let right: Vec<f64> = xs.iter().copied().filter(|&x| x >= outer).collect();
    let left: Vec<f64> = xs.iter().rev().copied().filter(|&x| x <= -outer).collect();
    for side in [&right, &left] {
        if let Some(x) = first_decrease(side, grad) {
            violations.push(AssumptionViolation::GradientGrowth { x });
        }
        if let Some(x) = first_decrease(side, schrod) {
            violations.push(AssumptionViolation::SchrodingerGrowth { x });
        }
    }

    Ok(AssumptionReport { a, b, violations })
}

fn first_decrease(xs: &[f64], f: impl Fn(f64) -> f64) -> Option<f64> {
    xs.windows(2).find_map(|w| {
        let (f0, f1) = (f(w[0]), f(w[1]));
        (f1 < f0 - 1e-12 * f0.abs().max(1.0)).then_some(w[1])
    })
}
