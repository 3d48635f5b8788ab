//! Model, cell and assembly checks against independent quadrature and
//! series oracles.

use std::f64::consts::PI;

use langevin_homog_core::cell::{mu, solve_cell};
use langevin_homog_core::fem::{assemble, build_grid, GridFunction, OperatorKind, WeightedSpace};
use langevin_homog_core::model::{eval_rho, make_ou_cosine_model, make_ou_flat_model};
use rand::{Rng, SeedableRng};

/// Modified Bessel function I₀(x) by its power series.
fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= q / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

/// Composite Simpson with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

#[test]
fn bessel_oracle_matches_high_precision_value() {
    // 1/I₀(1)² to 15 digits from an arbitrary-precision evaluation.
    assert!((1.0 / bessel_i0(1.0).powi(2) - 0.623_860_360_432_069).abs() < 1e-15);
}

#[test]
fn effective_coefficient_matches_bessel_oracle() {
    let c = solve_cell(&make_ou_cosine_model(1.0).unwrap()).unwrap();
    let k_oracle = 1.0 / bessel_i0(1.0).powi(2);
    assert!(
        (c.k() - k_oracle).abs() < 1e-10,
        "{} vs {}",
        c.k(),
        k_oracle
    );
    assert!((c.k_integral_linear() - k_oracle).abs() < 1e-10);
    assert!((c.k_integral_quadratic() - k_oracle).abs() < 1e-10);
    assert!(c.k_residual() < 1e-8);
    assert!((c.c_mu() - 2.0 * PI * bessel_i0(1.0)).abs() < 1e-11);
    assert!((c.c_mu_hat() - 2.0 * PI * bessel_i0(1.0)).abs() < 1e-11);
}

#[test]
fn cell_density_values() {
    let m = make_ou_cosine_model(1.0).unwrap();
    let want = std::f64::consts::E / (2.0 * PI * bessel_i0(1.0));
    assert!((mu(&m, PI).unwrap() - want).abs() < 1e-13);
    let c = solve_cell(&m).unwrap();
    let total = simpson(|y| c.mu(y), 0.0, 2.0 * PI, 2000);
    assert!((total - 1.0).abs() < 1e-10);
    assert!((0..1000).all(|i| c.mu(0.01 * i as f64) > 0.0));
}

#[test]
fn corrector_has_zero_mean() {
    let c = solve_cell(&make_ou_cosine_model(1.0).unwrap()).unwrap();
    let mean = simpson(|y| c.phi(y) * c.mu(y), 0.0, 2.0 * PI, 4000);
    assert!(mean.abs() < 1e-8, "{mean}");
    let c = solve_cell(&make_ou_cosine_model(0.5).unwrap()).unwrap();
    let mean = simpson(|y| c.phi(y) * c.mu(y), 0.0, 2.0 * PI, 8000);
    assert!(mean.abs() < 1e-8, "{mean}");
    assert!(c.k() > 0.0 && c.k() < 1.0);
}

#[test]
fn corrector_derivative_agrees_with_finite_differences() {
    let c = solve_cell(&make_ou_cosine_model(1.0).unwrap()).unwrap();
    let d = 1e-5;
    for i in 1..50 {
        let y = 0.12 * i as f64;
        let fd = (c.phi(y + d) - c.phi(y - d)) / (2.0 * d);
        assert!((fd - c.dphi(y)).abs() < 1e-7, "y = {y}");
    }
}

#[test]
fn densities_normalize_to_one() {
    let m = make_ou_cosine_model(1.0).unwrap();
    for eps in [0.4, 0.1, 0.025] {
        let d = eval_rho(&m, eps, 5.0).unwrap();
        let ms = simpson(|x| d.rho_ms(x), -5.0, 5.0, 400_000);
        let hom = simpson(|x| d.rho_hom(x), -5.0, 5.0, 20_000);
        assert!((ms - 1.0).abs() < 1e-8, "eps = {eps}: {ms}");
        assert!((hom - 1.0).abs() < 1e-8);
    }
    let d = eval_rho(&m, 0.1, 5.0).unwrap();
    // Oracle: Simpson on exp(-x²/2), independent of the adaptive integrator.
    let c0 = simpson(|x| (-0.5 * x * x).exp(), -5.0, 5.0, 20_000);
    assert!((d.c_hom() - c0).abs() < 1e-10);
    assert!((d.c_hom() - (2.0 * PI).sqrt()).abs() < 2e-6);
}

#[test]
fn fast_factor_bounded_by_amplitude() {
    let m = make_ou_cosine_model(1.0).unwrap();
    let amp = m.fast_amplitude();
    let d = eval_rho(&m, 0.1, 5.0).unwrap();
    for i in 0..=2000 {
        let x = -5.0 + 0.005 * i as f64;
        let factor = (-m.p(x / d.epsilon()) / m.sigma()).exp();
        assert!(factor >= (-amp).exp() - 1e-15 && factor <= amp.exp() + 1e-15);
        let r = d.rho_ms(x) / d.rho_hom(x);
        assert!(r >= (-2.0 * amp).exp() && r <= (2.0 * amp).exp());
    }
}

#[test]
fn derivatives_consistent_at_random_points() {
    let m = make_ou_cosine_model(1.0).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let pts: Vec<f64> = (0..100).map(|_| rng.gen_range(-5.0..5.0)).collect();
    // Central differences are O(δ²); δ = 1e-4 leaves ~1e-8 truncation + rounding.
    assert!(m.derivative_residual(&pts, 1e-4) < 1e-7);
}

#[test]
fn homogenized_mass_rows_match_hat_integrals() {
    let m = make_ou_cosine_model(1.0).unwrap();
    let d = eval_rho(&m, 0.1, 5.0).unwrap();
    let g = build_grid(5.0, 0.1).unwrap();
    let mass = assemble(&g, &|x| d.rho_hom(x), OperatorKind::Mass, 1.0).unwrap();
    let ones = vec![1.0; g.n_nodes()];
    let rows = mass.matrix.apply(&ones).unwrap();
    let h = g.h();
    for (i, &xi) in g.nodes().iter().enumerate() {
        let hat = |x: f64| (1.0 - (x - xi).abs() / h).max(0.0);
        let a = (xi - h).max(-5.0);
        let b = (xi + h).min(5.0);
        let oracle = simpson(|x| hat(x) * d.rho_hom(x), a, xi, 200)
            + simpson(|x| hat(x) * d.rho_hom(x), xi, b, 200);
        assert!((rows[i] - oracle).abs() < 1e-12, "row {i}");
    }
    let total: f64 = rows.iter().sum();
    assert!((total - 1.0).abs() < 1e-10);
}

#[test]
fn norms_of_constant_and_identity() {
    let m = make_ou_cosine_model(1.0).unwrap();
    let d = eval_rho(&m, 0.1, 5.0).unwrap();
    let g = build_grid(5.0, 0.01).unwrap();
    let s = WeightedSpace::homogenized(&g, &d).unwrap();
    let (l2, h1) = s.norms(&GridFunction::from_fn(&g, |_| 1.0)).unwrap();
    assert!((l2 - 1.0).abs() < 1e-10 && (h1 - 1.0).abs() < 1e-10);

    // Truncated Gaussian second moment, by Simpson.
    let second = simpson(|x| x * x * d.rho_hom(x), -5.0, 5.0, 20_000);
    let (l2, h1) = s.norms(&GridFunction::from_fn(&g, |x| x)).unwrap();
    assert!((l2 * l2 - second).abs() < 1e-10);
    assert!((h1 * h1 - second - 1.0).abs() < 1e-10);
    assert!((l2 * l2 - 1.0).abs() < 1e-4);
    assert!((h1 * h1 - 2.0).abs() < 1e-4);
}

#[test]
fn flat_model_spaces_coincide() {
    let m = make_ou_flat_model(1.0).unwrap();
    let d = eval_rho(&m, 0.2, 5.0).unwrap();
    let g = build_grid(5.0, 0.04).unwrap();
    let a = WeightedSpace::multiscale(&g, &d).unwrap();
    let b = WeightedSpace::homogenized(&g, &d).unwrap();
    for (x, y) in a.mass().diag().iter().zip(b.mass().diag()) {
        assert!((x - y).abs() < 1e-15);
    }
}
