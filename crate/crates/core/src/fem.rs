//! Uniform P1 finite elements on `[-R, R]` with density-weighted mass and
//! stiffness matrices.
//!
//! No boundary rows are modified: the weighted weak form on the truncated
//! interval carries natural (no-flux) conditions at `±R`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::model::DensityPair;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Gauss points per element used in assembly, load vectors and norms.
pub const ELEMENT_QUADRATURE_ORDER: usize = 6;

/// Uniform mesh of `[-R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    radius: f64,
    n_elems: usize,
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elems + 1
    }

    /// Mesh width `2R / n_elems`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Grid with exactly `n_elems` elements.
    pub fn with_elements(radius: f64, n_elems: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::parameter("domain radius must be positive"));
        }
        if n_elems == 0 {
            return Err(Error::parameter("grid needs at least one element"));
        }
        let h = 2.0 * radius / n_elems as f64;
        let mut nodes: Vec<f64> = (0..=n_elems).map(|i| -radius + h * i as f64).collect();
        nodes[n_elems] = radius;
        Ok(Self {
            radius,
            n_elems,
            h,
            nodes,
        })
    }
}

/// Smallest uniform grid of `[-R, R]` with mesh width at most `h_target`.
pub fn build_grid(radius: f64, h_target: f64) -> Result<Grid> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::parameter("domain radius must be positive"));
    }
    if !(h_target > 0.0 && h_target < 2.0 * radius) {
        return Err(Error::parameter("mesh width must lie in (0, 2R)"));
    }
    let q = 2.0 * radius / h_target;
    // Forgive the last-ulp noise of e.g. 10 / 0.1² = 999.9999999999998.
    let n = math::ceil(q * (1.0 - 1e-12)) as usize;
    Grid::with_elements(radius, n.max(1))
}

/// Nodal values of a P1 function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::new(vec![0.0; grid.n_nodes()])
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::new(grid.nodes().iter().map(|&x| f(x)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nodal derivative recovered by averaging the two adjacent element
    /// slopes; one-sided at the ends.
    pub fn nodal_slopes(&self, grid: &Grid) -> Result<GridFunction> {
        check_len(grid.n_nodes(), self.len())?;
        let h = grid.h();
        let u = &self.values;
        let slopes: Vec<f64> = u.windows(2).map(|w| (w[1] - w[0]) / h).collect();
        let n = u.len();
        let mut d = vec![0.0; n];
        d[0] = slopes[0];
        d[n - 1] = slopes[n - 2];
        for i in 1..n - 1 {
            d[i] = 0.5 * (slopes[i - 1] + slopes[i]);
        }
        Ok(GridFunction::new(d))
    }

    /// `self - other`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        check_len(self.len(), other.len())?;
        Ok(GridFunction::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scaled(&self, s: f64) -> GridFunction {
        GridFunction::new(self.values.iter().map(|v| v * s).collect())
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape { expected, found })
    }
}

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::parameter("empty matrix"));
        }
        check_len(diag.len() - 1, off.len())?;
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off_diag(&self) -> &[f64] {
        &self.off
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        check_len(self.dim(), y.len())?;
        Ok(self.bilinear_unchecked(x, y))
    }

    pub(crate) fn bilinear_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            s += x[i] * self.diag[i] * y[i];
            if i + 1 < n {
                s += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
            }
        }
        s
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &SymTridiagonal, b: f64) -> Result<SymTridiagonal> {
        check_len(self.dim(), other.dim())?;
        let diag = self
            .diag
            .iter()
            .zip(&other.diag)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let off = self
            .off
            .iter()
            .zip(&other.off)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(SymTridiagonal { diag, off })
    }

    /// `L D Lᵀ` factorization; fails on the first non-positive pivot.
    pub fn factor(&self) -> Result<LdlFactor> {
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = self.diag[0];
        if !(prev > 0.0) {
            return Err(Error::NotSpd {
                row: 0,
                pivot: prev,
            });
        }
        pivots.push(prev);
        for i in 1..n {
            let l = self.off[i - 1] / prev;
            let d = self.diag[i] - l * self.off[i - 1];
            if !(d > 0.0) {
                return Err(Error::NotSpd { row: i, pivot: d });
            }
            lower.push(l);
            pivots.push(d);
            prev = d;
        }
        Ok(LdlFactor { pivots, lower })
    }
}

/// Factorization produced by [`SymTridiagonal::factor`].
#[derive(Debug, Clone)]
pub struct LdlFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.pivots.len(), rhs.len())?;
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub(crate) fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.pivots[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.lower[i] * x[i + 1];
        }
    }
}

/// Solves `A x = b` for symmetric positive definite tridiagonal `A`.
pub fn solve_tridiagonal_spd(matrix: &SymTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    matrix.factor()?.solve(rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Mass,
    Stiffness,
}

/// Which density weights an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Multiscale,
    Homogenized,
    Custom,
}

/// Weighted P1 mass or stiffness matrix, already scaled by `coefficient`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    pub kind: OperatorKind,
    pub weight: WeightKind,
    pub coefficient: f64,
    pub matrix: SymTridiagonal,
}

impl WeightedOperator {
    pub fn diag(&self) -> &[f64] {
        self.matrix.diag()
    }

    pub fn off_diag(&self) -> &[f64] {
        self.matrix.off_diag()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `uᵀ A u / coefficient`, i.e. the quadratic form of the unscaled operator.
    pub fn unit_form(&self, u: &[f64]) -> Result<f64> {
        Ok(self.matrix.bilinear(u, u)? / self.coefficient)
    }
}

/// `w_q (h/2) ρ(x_q)` for every Gauss point of every element, element-major.
fn element_weights(
    grid: &Grid,
    rule: &GaussLegendre,
    weight: &dyn Fn(f64) -> f64,
) -> Result<Vec<f64>> {
    let half = 0.5 * grid.h();
    let nodes = grid.nodes();
    let mut out = Vec::with_capacity(grid.n_elems() * rule.len());
    for e in 0..grid.n_elems() {
        let mid = 0.5 * (nodes[e] + nodes[e + 1]);
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            let x = mid + half * t;
            let rho = weight(x);
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Weight { x, value: rho });
            }
            out.push(w * half * rho);
        }
    }
    Ok(out)
}

fn build_operator(
    grid: &Grid,
    rule: &GaussLegendre,
    wq: &[f64],
    kind: OperatorKind,
    coefficient: f64,
    weight: WeightKind,
) -> WeightedOperator {
    let n = grid.n_nodes();
    let q = rule.len();
    let h = grid.h();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for e in 0..grid.n_elems() {
        let w = &wq[e * q..(e + 1) * q];
        let (a00, a01, a11) = match kind {
            OperatorKind::Mass => {
                let mut m = (0.0, 0.0, 0.0);
                for (&t, &wk) in rule.nodes().iter().zip(w) {
                    let s = 0.5 * (t + 1.0);
                    let (p0, p1) = (1.0 - s, s);
                    m.0 += wk * p0 * p0;
                    m.1 += wk * p0 * p1;
                    m.2 += wk * p1 * p1;
                }
                m
            }
            OperatorKind::Stiffness => {
                let s: f64 = w.iter().sum::<f64>() / (h * h);
                (s, -s, s)
            }
        };
        diag[e] += coefficient * a00;
        diag[e + 1] += coefficient * a11;
        off[e] += coefficient * a01;
    }
    WeightedOperator {
        kind,
        weight,
        coefficient,
        matrix: SymTridiagonal { diag, off },
    }
}

/// Assembles `coefficient · ∫ φ_i φ_j ρ` (mass) or `coefficient · ∫ φ_i' φ_j' ρ`
/// (stiffness) with an order-6 Gauss rule per element.
pub fn assemble(
    grid: &Grid,
    weight: &dyn Fn(f64) -> f64,
    kind: OperatorKind,
    coefficient: f64,
) -> Result<WeightedOperator> {
    let rule = GaussLegendre::new(ELEMENT_QUADRATURE_ORDER);
    let wq = element_weights(grid, &rule, weight)?;
    Ok(build_operator(
        grid,
        &rule,
        &wq,
        kind,
        coefficient,
        WeightKind::Custom,
    ))
}

/// Weighted P1 space: unit-coefficient mass and stiffness for one density,
/// plus the per-Gauss-point weights for load vectors and norms of functions.
#[derive(Debug, Clone)]
pub struct WeightedSpace {
    grid: Grid,
    weight: WeightKind,
    rule: GaussLegendre,
    wq: Vec<f64>,
    mass: WeightedOperator,
    stiffness: WeightedOperator,
}

impl WeightedSpace {
    pub fn new(grid: &Grid, weight: &dyn Fn(f64) -> f64, kind: WeightKind) -> Result<Self> {
        let rule = GaussLegendre::new(ELEMENT_QUADRATURE_ORDER);
        let wq = element_weights(grid, &rule, weight)?;
        let mass = build_operator(grid, &rule, &wq, OperatorKind::Mass, 1.0, kind);
        let stiffness = build_operator(grid, &rule, &wq, OperatorKind::Stiffness, 1.0, kind);
        Ok(Self {
            grid: grid.clone(),
            weight: kind,
            rule,
            wq,
            mass,
            stiffness,
        })
    }

    /// Space weighted by `ρ^ε`.
    pub fn multiscale(grid: &Grid, densities: &DensityPair<'_>) -> Result<Self> {
        Self::new(grid, &|x| densities.rho_ms(x), WeightKind::Multiscale)
    }

    /// Space weighted by `ρ^0`.
    pub fn homogenized(grid: &Grid, densities: &DensityPair<'_>) -> Result<Self> {
        Self::new(grid, &|x| densities.rho_hom(x), WeightKind::Homogenized)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weight_kind(&self) -> WeightKind {
        self.weight
    }

    pub fn mass(&self) -> &WeightedOperator {
        &self.mass
    }

    pub fn stiffness(&self) -> &WeightedOperator {
        &self.stiffness
    }

    /// `c_a · A + c_m · M`.
    pub fn system(&self, stiffness_coeff: f64, mass_coeff: f64) -> SymTridiagonal {
        // Both operators have unit coefficient; combine cannot fail.
        self.stiffness
            .matrix
            .combine(stiffness_coeff, &self.mass.matrix, mass_coeff)
            .expect("operators share the grid")
    }

    fn for_each_point(&self, mut visit: impl FnMut(usize, f64, f64, f64)) {
        let q = self.rule.len();
        let half = 0.5 * self.grid.h();
        let nodes = self.grid.nodes();
        for e in 0..self.grid.n_elems() {
            let mid = 0.5 * (nodes[e] + nodes[e + 1]);
            for (k, &t) in self.rule.nodes().iter().enumerate() {
                visit(e, mid + half * t, 0.5 * (t + 1.0), self.wq[e * q + k]);
            }
        }
    }

    /// `F_i = ∫ f φ_i ρ`.
    pub fn load_vector(&self, f: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n_nodes()];
        self.for_each_point(|e, x, s, w| {
            let fw = f(x) * w;
            out[e] += fw * (1.0 - s);
            out[e + 1] += fw * s;
        });
        out
    }

    /// `‖f‖_{L²_ρ}` by the same element quadrature as the operators.
    pub fn l2_norm_of(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_point(|_, x, _, w| {
            let v = f(x);
            acc += v * v * w;
        });
        math::sqrt(acc)
    }

    /// `∫ ρ` over the grid.
    pub fn total_mass(&self) -> f64 {
        self.wq.iter().sum()
    }

    /// `(‖u‖_{L²_ρ}, ‖u‖_{H¹_ρ})`.
    pub fn norms(&self, u: &GridFunction) -> Result<(f64, f64)> {
        weighted_norms(u, &self.mass, &self.stiffness)
    }

    /// `⟨u, v⟩_{L²_ρ}`.
    pub fn inner(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.mass.matrix.bilinear(u.values(), v.values())
    }
}

/// `(√(uᵀMu), √(uᵀMu + uᵀAu))`, with the operators' coefficients divided out.
pub fn weighted_norms(
    u: &GridFunction,
    mass: &WeightedOperator,
    stiffness: &WeightedOperator,
) -> Result<(f64, f64)> {
    check_len(mass.dim(), u.len())?;
    check_len(stiffness.dim(), u.len())?;
    let l2sq = mass.unit_form(u.values())?.max(0.0);
    let grad = stiffness.unit_form(u.values())?.max(0.0);
    Ok((math::sqrt(l2sq), math::sqrt(l2sq + grad)))
}
