use langevin_homog_core::fem::{
    build_grid, solve_tridiagonal_spd, GridFunction, SymTridiagonal, WeightedSpace,
};
use langevin_homog_core::model::{eval_rho, make_ou_cosine_model};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
    let n = t.dim();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = t.diag()[i];
        if i + 1 < n {
            m[(i, i + 1)] = t.off_diag()[i];
            m[(i + 1, i)] = t.off_diag()[i];
        }
    }
    m
}

#[test]
fn discrete_coercivity() {
    let model = make_ou_cosine_model(1.0).unwrap();
    let d = eval_rho(&model, 0.4, 5.0).unwrap();
    let g = build_grid(5.0, 0.2).unwrap();
    let s = WeightedSpace::multiscale(&g, &d).unwrap();
    for (sigma, eta) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
        let c = f64::min(sigma, eta);
        let lhs = dense(&s.system(sigma, eta));
        let rhs = dense(&s.system(c, c));
        let eig = SymmetricEigen::new(lhs - rhs);
        assert!(eig.eigenvalues.min() >= -1e-10, "σ={sigma}, η={eta}");
    }
}

#[test]
fn mass_spd_and_stiffness_psd() {
    let model = make_ou_cosine_model(1.0).unwrap();
    let d = eval_rho(&model, 0.2, 5.0).unwrap();
    let g = build_grid(5.0, 0.25).unwrap();
    let s = WeightedSpace::multiscale(&g, &d).unwrap();
    let m = dense(&s.mass().matrix);
    let a = dense(&s.stiffness().matrix);
    assert!(SymmetricEigen::new(m).eigenvalues.min() > 0.0);
    assert!(SymmetricEigen::new(a).eigenvalues.min() > -1e-12);
}

#[test]
fn h1_norm_equivalence_between_weights() {
    let model = make_ou_cosine_model(1.0).unwrap();
    let amp = model.fast_amplitude();
    let (c_low, c_up) = ((-amp).exp(), amp.exp());
    let d = eval_rho(&model, 0.1, 5.0).unwrap();
    let g = build_grid(5.0, 0.01).unwrap();
    let ms = WeightedSpace::multiscale(&g, &d).unwrap();
    let hom = WeightedSpace::homogenized(&g, &d).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for _ in 0..50 {
        let u = GridFunction::new((0..g.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let (l2e, h1e) = ms.norms(&u).unwrap();
        let (l20, h10) = hom.norms(&u).unwrap();
        assert!(c_low * h10 <= h1e && h1e <= c_up * h10);
        assert!(c_low * l20 <= l2e && l2e <= c_up * l20);
    }
}

#[test]
fn operators_symmetric_by_construction() {
    let g = build_grid(2.0, 0.1).unwrap();
    let s = WeightedSpace::new(
        &g,
        &|x| (-x * x).exp(),
        langevin_homog_core::WeightKind::Custom,
    )
    .unwrap();
    let m = dense(&s.mass().matrix);
    assert_eq!(m.clone(), m.transpose());
}

#[test]
fn random_spd_systems_solve_to_tight_residual() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for _ in 0..1000 {
        let n: usize = rng.gen_range(1..60);
        let off: Vec<f64> = (0..n.saturating_sub(1))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let diag: Vec<f64> = (0..n)
            .map(|i| {
                let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { off[i].abs() } else { 0.0 };
                l + r + rng.gen_range(0.01..2.0)
            })
            .collect();
        let a = SymTridiagonal::new(diag, off).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_tridiagonal_spd(&a, &b).unwrap();
        let ax = a.apply(&x).unwrap();
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let res = ax
            .iter()
            .zip(&b)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(res <= 1e-10 * bmax, "residual {res}");
    }
}

proptest! {
    #[test]
    fn ldl_solve_inverts_apply(
        xs in prop::collection::vec(-10.0f64..10.0, 2..40),
        offs in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let n = xs.len();
        let off: Vec<f64> = offs[..n - 1].to_vec();
        let diag: Vec<f64> = (0..n).map(|i| 2.5 + if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let a = SymTridiagonal::new(diag, off).unwrap();
        let b = a.apply(&xs).unwrap();
        let back = solve_tridiagonal_spd(&a, &b).unwrap();
        for (p, q) in back.iter().zip(&xs) {
            prop_assert!((p - q).abs() < 1e-10 * (1.0 + q.abs()));
        }
    }
}
