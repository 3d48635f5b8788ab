//! Named right-hand sides for the Poisson problem.

/// A forcing term `f(x)`.
pub type Rhs = fn(f64) -> f64;

const REGISTRY: &[(&str, Rhs)] = &[
    ("linear", |x| x),
    ("constant", |_| 1.0),
    ("sine", f64::sin),
    ("cubic", |x| x * x * x - 3.0 * x),
    ("bump", |x| (-x * x).exp()),
];

/// Looks up a right-hand side by name.
pub fn rhs_by_name(name: &str) -> Option<Rhs> {
    REGISTRY.iter().find(|(n, _)| *n == name).map(|&(_, f)| f)
}

/// Names accepted by [`rhs_by_name`], in registry order.
pub fn rhs_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|&(n, _)| n)
}
