//! Conservative finite-volume discretization of
//! `-div(w ∇u) + b f̃(u) + β((u - u̲)⁻ + (u - ū)⁺) w = h` in the radial
//! coordinate.
//!
//! Node `j` owns the cell `[r_{j-1/2}, r_{j+1/2}]` (clipped to the grid) with
//! radial measure `μ_j = ∫ r^(N-1) dr`. Fluxes use the weight at the midpoint:
//! `W_{j+1/2} = w(r_{j+1/2}) r_{j+1/2}^(N-1)`. The surface constant `|S^(N-1)|`
//! is dropped from every term.

use std::fmt;
use std::ops::Deref;

use crate::grid::Grid;
use crate::tridiag::Tridiagonal;
use crate::weights::{Domain, WeightFamily};
use crate::{Error, Result, ScalarFn};

/// Nodal values on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteField {
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric { node });
        }
        Ok(Self { values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().iter().map(|&r| f(r)).collect())
    }

    pub fn try_from_fn(grid: &Grid, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn constant(grid: &Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    /// `(a + b)/2`
    pub fn midpoint(a: &DiscreteField, b: &DiscreteField) -> Self {
        Self {
            values: a.iter().zip(b.iter()).map(|(x, y)| 0.5 * (x + y)).collect(),
        }
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

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_j |self_j - other_j|`
    pub fn max_diff(&self, other: &DiscreteField) -> f64 {
        self.iter()
            .zip(other.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for DiscreteField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Monotone nonlinearity `f`.
#[derive(Clone)]
pub enum Nonlinearity {
    /// `f(t) = |t|^(p-1) t`, the odd extension of `t^p`.
    Power { p: f64 },
    /// User-supplied `f` with derivative `df`.
    Custom { f: ScalarFn, df: ScalarFn },
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Nonlinearity::Power { p } => write!(f, "Power {{ p: {p} }}"),
            Nonlinearity::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl Nonlinearity {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => {
                if *p == 3.0 {
                    t * t * t
                } else {
                    t.abs().powf(p - 1.0) * t
                }
            }
            Nonlinearity::Custom { f, .. } => f(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => {
                if *p == 3.0 {
                    3.0 * t * t
                } else {
                    p * t.abs().powf(p - 1.0)
                }
            }
            Nonlinearity::Custom { df, .. } => df(t),
        }
    }

    /// Largest `|f'|` on `[lo, hi]`: closed form for powers, sampled otherwise.
    pub fn max_slope(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Nonlinearity::Power { .. } => self.derivative(lo.abs().max(hi.abs())).abs(),
            Nonlinearity::Custom { df, .. } => (0..=16)
                .map(|k| df(lo + (hi - lo) * k as f64 / 16.0).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Whether `f` is nondecreasing on `samples` equispaced points of `[lo, hi]`.
    pub fn is_monotone_on(&self, lo: f64, hi: f64, samples: usize) -> bool {
        let n = samples.max(2);
        let vals: Vec<f64> = (0..n)
            .map(|k| self.value(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect();
        vals.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Dirichlet data. `inner` is required on intervals and must be absent on
/// balls (symmetry at `r = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub inner: Option<f64>,
    pub outer: f64,
}

/// `-div(w ∇u) + b f(u) = h` on a radial domain with Dirichlet data.
#[derive(Clone)]
pub struct Problem {
    pub domain: Domain,
    pub weight: WeightFamily,
    pub b_coef: ScalarFn,
    pub nonlin: Nonlinearity,
    pub source: ScalarFn,
    pub boundary: BoundaryData,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("domain", &self.domain)
            .field("weight", &self.weight)
            .field("nonlin", &self.nonlin)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

/// Numerical evidence for the structural hypotheses on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypotheses {
    /// `max |b/w|` over nodes and half-nodes.
    pub b_over_w_sup: f64,
    /// `f` nondecreasing on the sampled range.
    pub monotone: bool,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        match (self.domain.is_radial(), self.boundary.inner) {
            (true, Some(_)) => Err(Error::Domain(
                "a ball has no inner boundary; drop the inner datum".into(),
            )),
            (false, None) => Err(Error::Domain("an interval needs an inner datum".into())),
            _ => Ok(()),
        }
    }

    pub fn with_outer_value(mut self, outer: f64) -> Self {
        self.boundary.outer = outer;
        self
    }

    /// Whether row `j` of an `m`-node grid carries a Dirichlet condition.
    pub fn is_dirichlet_row(&self, j: usize, m: usize) -> bool {
        j + 1 == m || (j == 0 && !self.domain.is_radial())
    }

    /// Dirichlet value for row `j`, if any.
    pub fn dirichlet_value(&self, j: usize, m: usize) -> Option<f64> {
        if j + 1 == m {
            Some(self.boundary.outer)
        } else if j == 0 {
            self.boundary.inner
        } else {
            None
        }
    }

    /// Checks `‖b/w‖_∞ < ∞` on the grid and monotonicity of `f` on `[t_lo, t_hi]`.
    pub fn check_hypotheses(&self, grid: &Grid, t_lo: f64, t_hi: f64) -> Result<Hypotheses> {
        let mut sup = 0.0f64;
        let points = grid.nodes().iter().copied().chain(grid.half_nodes());
        for (k, r) in points.enumerate() {
            let w = match self.weight.at_radius(&self.domain, r) {
                Ok(w) => w,
                // the outer node of an untruncated grid is a Dirichlet row
                Err(_) if k + 1 == grid.len() => continue,
                Err(e) => return Err(e),
            };
            let ratio = ((self.b_coef)(r) / w).abs();
            if !ratio.is_finite() {
                return Err(Error::Numeric { node: k.min(grid.len() - 1) });
            }
            sup = sup.max(ratio);
        }
        Ok(Hypotheses {
            b_over_w_sup: sup,
            monotone: self.nonlin.is_monotone_on(t_lo, t_hi, 257),
        })
    }
}

/// `f̃_j(t)`: `f` clamped to `[u̲_j, ū_j]`.
#[derive(Debug, Clone)]
pub struct TruncatedNonlinearity {
    base: Nonlinearity,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Builds `f̃` from the sub/supersolution pair; fails if `u̲_j > ū_j` anywhere.
pub fn truncate_nonlinearity(
    f: &Nonlinearity,
    lower: &DiscreteField,
    upper: &DiscreteField,
) -> Result<TruncatedNonlinearity> {
    if lower.len() != upper.len() {
        return Err(Error::LengthMismatch {
            expected: lower.len(),
            got: upper.len(),
        });
    }
    if let Some(node) = lower.iter().zip(upper.iter()).position(|(l, u)| l > u) {
        return Err(Error::Ordering {
            node,
            lower: lower[node],
            upper: upper[node],
        });
    }
    Ok(TruncatedNonlinearity {
        base: f.clone(),
        lower: lower.to_vec(),
        upper: upper.to_vec(),
    })
}

impl TruncatedNonlinearity {
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn base(&self) -> &Nonlinearity {
        &self.base
    }

    /// Projection of `t` onto `[u̲_j, ū_j]`.
    pub fn clamp(&self, j: usize, t: f64) -> f64 {
        t.clamp(self.lower[j], self.upper[j])
    }

    pub fn eval(&self, j: usize, t: f64) -> f64 {
        self.base.value(self.clamp(j, t))
    }

    /// Generalized derivative: zero on the clamped branches, including the kinks.
    pub fn derivative(&self, j: usize, t: f64) -> f64 {
        if t <= self.lower[j] || t >= self.upper[j] {
            0.0
        } else {
            self.base.derivative(t)
        }
    }
}

/// `(t)⁻ + (t - s)⁺` style penalty density at node `j`: `(u - u̲)⁻ + (u - ū)⁺`.
pub fn penalty_density(u: f64, lower: f64, upper: f64) -> f64 {
    (u - lower).min(0.0) + (u - upper).max(0.0)
}

/// Grid-dependent coefficients of one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// `W_{j+1/2} / h_{j+1/2}`
    conductance: Vec<f64>,
    /// radial cell measures `μ_j`
    measure: Vec<f64>,
    /// `w(r_j)` on equation rows, 0 on Dirichlet rows
    node_weight: Vec<f64>,
    /// `b(r_j)` on equation rows
    b: Vec<f64>,
    /// `h(r_j)` on equation rows
    source: Vec<f64>,
    /// Dirichlet value per row
    dirichlet: Vec<Option<f64>>,
    nonlin: Nonlinearity,
}

impl Discretization {
    pub fn new(grid: &Grid, problem: &Problem) -> Result<Self> {
        problem.validate()?;
        let nodes = grid.nodes();
        let m = nodes.len();
        let dim = problem.domain.dim() as i32;
        if grid.radius() > problem.domain.radius() * (1.0 + 1e-14) {
            return Err(Error::Domain(format!(
                "grid radius {} exceeds the domain radius {}",
                grid.radius(),
                problem.domain.radius()
            )));
        }

        let mut conductance = Vec::with_capacity(m - 1);
        for (j, w2) in nodes.windows(2).enumerate() {
            let mid = 0.5 * (w2[0] + w2[1]);
            let w = problem
                .weight
                .at_radius(&problem.domain, mid)
                .map_err(|e| Error::Assembly {
                    node: j,
                    reason: format!("weight at half-node {mid}: {e}"),
                })?;
            conductance.push(w * mid.powi(dim - 1) / (w2[1] - w2[0]));
        }

        let mut edges = Vec::with_capacity(m + 1);
        edges.push(nodes[0]);
        edges.extend(grid.half_nodes());
        edges.push(nodes[m - 1]);
        let measure: Vec<f64> = edges
            .windows(2)
            .map(|e| (e[1].powi(dim) - e[0].powi(dim)) / dim as f64)
            .collect();

        let mut node_weight = vec![0.0; m];
        let mut b = vec![0.0; m];
        let mut source = vec![0.0; m];
        let mut dirichlet = vec![None; m];
        for (j, &r) in nodes.iter().enumerate() {
            if let Some(g) = problem.dirichlet_value(j, m) {
                dirichlet[j] = Some(g);
                continue;
            }
            node_weight[j] =
                problem
                    .weight
                    .at_radius(&problem.domain, r)
                    .map_err(|e| Error::Assembly {
                        node: j,
                        reason: format!("weight at node {r}: {e}"),
                    })?;
            b[j] = (problem.b_coef)(r);
            source[j] = (problem.source)(r);
            if !(b[j].is_finite() && source[j].is_finite()) {
                return Err(Error::Assembly {
                    node: j,
                    reason: "non-finite coefficient".into(),
                });
            }
        }

        Ok(Self {
            conductance,
            measure,
            node_weight,
            b,
            source,
            dirichlet,
            nonlin: problem.nonlin.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    pub fn node_weight(&self) -> &[f64] {
        &self.node_weight
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn is_dirichlet(&self, j: usize) -> bool {
        self.dirichlet[j].is_some()
    }

    pub fn dirichlet_value(&self, j: usize) -> Option<f64> {
        self.dirichlet[j]
    }

    /// Symmetric positive semidefinite stiffness with natural (flux-free)
    /// end rows, before any Dirichlet elimination.
    pub fn stiffness(&self) -> Tridiagonal {
        let m = self.len();
        let mut t = Tridiagonal::zeros(m);
        for (j, &k) in self.conductance.iter().enumerate() {
            t.diag[j] += k;
            t.diag[j + 1] += k;
            t.upper[j] = -k;
            t.lower[j] = -k;
        }
        t
    }

    /// Stiffness with Dirichlet rows replaced by identity rows.
    pub fn eliminated_stiffness(&self) -> Tridiagonal {
        let mut t = self.stiffness();
        for j in 0..self.len() {
            if self.is_dirichlet(j) {
                t.set_identity_row(j);
            }
        }
        t
    }

    /// `(Tu)_j` in flux form, which avoids cancellation between large nodal
    /// values on strongly graded meshes.
    fn stiffness_action(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for (j, &k) in self.conductance.iter().enumerate() {
            let flux = k * (u[j + 1] - u[j]);
            out[j] -= flux;
            out[j + 1] += flux;
        }
        out
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.len(),
                got: len,
            })
        }
    }

    /// Residual of the unmodified equation (`f`, no penalty); Dirichlet rows
    /// hold `u_j - g_j`.
    pub fn plain_residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut res = self.stiffness_action(u);
        for (j, r) in res.iter_mut().enumerate() {
            match self.dirichlet[j] {
                Some(g) => *r = u[j] - g,
                None => {
                    *r += (self.b[j] * self.nonlin.value(u[j]) - self.source[j]) * self.measure[j]
                }
            }
            if !r.is_finite() {
                return Err(Error::Numeric { node: j });
            }
        }
        Ok(res)
    }

    /// Per-row magnitude `|flux terms| + |b f μ| + |h μ|` used to normalise
    /// residual signs.
    pub fn residual_scale(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        let mut scale = vec![0.0; u.len()];
        for (j, &k) in self.conductance.iter().enumerate() {
            let flux = (k * (u[j + 1] - u[j])).abs();
            scale[j] += flux;
            scale[j + 1] += flux;
        }
        for (j, s) in scale.iter_mut().enumerate() {
            if self.dirichlet[j].is_some() {
                *s = 1.0 + u[j].abs();
            } else {
                *s += (self.b[j] * self.nonlin.value(u[j]) * self.measure[j]).abs()
                    + (self.source[j] * self.measure[j]).abs();
            }
        }
        Ok(scale)
    }

    /// Residual of the penalized problem.
    pub fn residual(
        &self,
        u: &[f64],
        ftilde: &TruncatedNonlinearity,
        penalty: f64,
    ) -> Result<Vec<f64>> {
        self.check_len(u.len())?;
        self.check_len(ftilde.lower.len())?;
        let mut res = self.stiffness_action(u);
        for (j, r) in res.iter_mut().enumerate() {
            match self.dirichlet[j] {
                Some(g) => *r = u[j] - g,
                None => {
                    let pen = penalty
                        * penalty_density(u[j], ftilde.lower[j], ftilde.upper[j])
                        * self.node_weight[j];
                    *r += (self.b[j] * ftilde.eval(j, u[j]) + pen - self.source[j])
                        * self.measure[j];
                }
            }
            if !r.is_finite() {
                return Err(Error::Numeric { node: j });
            }
        }
        Ok(res)
    }

    /// Newton Jacobian of [`Discretization::residual`].
    pub fn jacobian(
        &self,
        u: &[f64],
        ftilde: &TruncatedNonlinearity,
        penalty: f64,
    ) -> Result<Tridiagonal> {
        self.check_len(u.len())?;
        let mut t = self.eliminated_stiffness();
        for j in 0..self.len() {
            if self.is_dirichlet(j) {
                continue;
            }
            let outside = u[j] < ftilde.lower[j] || u[j] > ftilde.upper[j];
            let mut diag = self.b[j] * ftilde.derivative(j, u[j]);
            if outside {
                diag += penalty * self.node_weight[j];
            }
            let value = diag * self.measure[j];
            if !value.is_finite() {
                return Err(Error::Numeric { node: j });
            }
            t.add_to_diag(j, value);
        }
        Ok(t)
    }
}

/// Full stiffness operator (before boundary elimination) of `problem` on `grid`.
pub fn assemble_stiffness(grid: &Grid, problem: &Problem) -> Result<Tridiagonal> {
    Ok(Discretization::new(grid, problem)?.stiffness())
}

/// Residual of the penalized problem for `u`.
pub fn assemble_residual(
    grid: &Grid,
    problem: &Problem,
    u: &DiscreteField,
    ftilde: &TruncatedNonlinearity,
    penalty: f64,
) -> Result<Vec<f64>> {
    Discretization::new(grid, problem)?.residual(u, ftilde, penalty)
}

/// Jacobian of [`assemble_residual`].
pub fn assemble_jacobian(
    grid: &Grid,
    problem: &Problem,
    u: &DiscreteField,
    ftilde: &TruncatedNonlinearity,
    penalty: f64,
) -> Result<Tridiagonal> {
    Discretization::new(grid, problem)?.jacobian(u, ftilde, penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{constant_fn, scalar_fn};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn linear_problem(length: f64) -> Problem {
        Problem {
            domain: Domain::interval(length).unwrap(),
            weight: WeightFamily::Constant,
            b_coef: constant_fn(1.0),
            nonlin: Nonlinearity::Power { p: 1.0 },
            source: constant_fn(1.0),
            boundary: BoundaryData {
                inner: Some(0.0),
                outer: 0.0,
            },
        }
    }

    fn cubic(lo: f64, hi: f64, m: usize) -> (Grid, TruncatedNonlinearity) {
        let g = Grid::uniform(1.0, m).unwrap();
        let l = DiscreteField::constant(&g, lo).unwrap();
        let u = DiscreteField::constant(&g, hi).unwrap();
        let ft = truncate_nonlinearity(&Nonlinearity::Power { p: 3.0 }, &l, &u).unwrap();
        (g, ft)
    }

    #[test]
    fn laplacian_stencil() {
        let g = Grid::uniform(1.0, 11).unwrap();
        let t = assemble_stiffness(&g, &linear_problem(1.0)).unwrap();
        let h = 0.1;
        for j in 1..10 {
            assert_relative_eq!(t.diag[j], 2.0 / h, max_relative = 1e-12);
            assert_relative_eq!(t.upper[j], -1.0 / h, max_relative = 1e-12);
            assert_relative_eq!(t.lower[j - 1], -1.0 / h, max_relative = 1e-12);
        }
        assert!(t.is_symmetric());
        assert_eq!(t, t.transpose());
    }

    #[test]
    fn stiffness_is_exact_on_linears() {
        let g = crate::grid::build_graded_grid(1.0, 0.1, 31, 2.0).unwrap();
        let t = assemble_stiffness(&g, &linear_problem(1.0)).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|r| 2.0 * r + 0.5).collect();
        let tu = t.apply(&u);
        for v in &tu[1..tu.len() - 1] {
            assert!(v.abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn truncation_branches() {
        let (_, ft) = cubic(-1.0, 2.0, 5);
        assert_eq!(ft.eval(2, -5.0), -1.0);
        assert_eq!(ft.eval(2, 1.0), 1.0);
        assert_eq!(ft.eval(2, 3.0), 8.0);
        assert_eq!(ft.derivative(2, -1.0), 0.0);
        assert_eq!(ft.derivative(2, 2.0), 0.0);
        assert_eq!(ft.derivative(2, 1.0), 3.0);
    }

    #[test]
    fn truncation_rejects_misordered_bounds() {
        let g = Grid::uniform(1.0, 5).unwrap();
        let mut lo = vec![0.0; 5];
        lo[3] = 2.0;
        let lo = DiscreteField::new(&g, lo).unwrap();
        let hi = DiscreteField::constant(&g, 1.0).unwrap();
        let err = truncate_nonlinearity(&Nonlinearity::Power { p: 3.0 }, &lo, &hi).unwrap_err();
        assert!(matches!(err, Error::Ordering { node: 3, .. }));
    }

    #[test]
    fn penalty_only_outside_slab() {
        let g = Grid::uniform(1.0, 9).unwrap();
        let p = linear_problem(1.0);
        let disc = Discretization::new(&g, &p).unwrap();
        let lo = DiscreteField::constant(&g, 0.0).unwrap();
        let hi = DiscreteField::constant(&g, 1.0).unwrap();
        let ft = truncate_nonlinearity(&p.nonlin, &lo, &hi).unwrap();

        let inside = DiscreteField::constant(&g, 0.5).unwrap();
        let a = disc.residual(&inside, &ft, 10.0).unwrap();
        let b = disc.residual(&inside, &ft, 0.0).unwrap();
        assert_eq!(a, b);

        // u ≡ u̲ - 1 with w ≡ 1: penalty entry is -β μ_j
        let below = DiscreteField::constant(&g, -1.0).unwrap();
        let a = disc.residual(&below, &ft, 10.0).unwrap();
        let b = disc.residual(&below, &ft, 0.0).unwrap();
        for j in 1..8 {
            assert_relative_eq!(a[j] - b[j], -10.0 * disc.measure()[j], max_relative = 1e-12);
        }
    }

    #[test]
    fn jacobian_special_cases() {
        let g = Grid::uniform(1.0, 9).unwrap();
        let p = linear_problem(1.0);
        let disc = Discretization::new(&g, &p).unwrap();
        let lo = DiscreteField::constant(&g, 0.0).unwrap();
        let hi = DiscreteField::constant(&g, 1.0).unwrap();
        let ft = truncate_nonlinearity(&p.nonlin, &lo, &hi).unwrap();
        let base = disc.eliminated_stiffness();

        let inside = DiscreteField::constant(&g, 0.5).unwrap();
        let j = disc.jacobian(&inside, &ft, 7.0).unwrap();
        for k in 1..8 {
            assert_relative_eq!(j.diag[k] - base.diag[k], disc.measure()[k], max_relative = 1e-12);
        }
        let far = DiscreteField::constant(&g, -100.0).unwrap();
        let j = disc.jacobian(&far, &ft, 7.0).unwrap();
        for k in 1..8 {
            assert_relative_eq!(
                j.diag[k] - base.diag[k],
                7.0 * disc.measure()[k],
                max_relative = 1e-12
            );
        }
        assert_eq!(j.diag[0], 1.0);
        assert_eq!(j.diag[8], 1.0);
    }

    #[test]
    fn radial_measures_sum_to_ball_volume() {
        let g = crate::grid::build_graded_grid(1.0, 0.2, 40, 2.0).unwrap();
        let p = Problem {
            domain: Domain::ball(1.0, 3).unwrap(),
            boundary: BoundaryData { inner: None, outer: 0.0 },
            ..linear_problem(1.0)
        };
        let disc = Discretization::new(&g, &p).unwrap();
        let total: f64 = disc.measure().iter().sum();
        assert_relative_eq!(total, 0.8f64.powi(3) / 3.0, max_relative = 1e-12);
        // symmetry row has a single flux
        let t = disc.stiffness();
        assert_relative_eq!(t.diag[0], -t.upper[0]);
    }

    #[test]
    fn boundary_kind_must_match_domain() {
        let mut p = linear_problem(1.0);
        p.boundary.inner = None;
        assert!(p.validate().is_err());
        let q = Problem {
            domain: Domain::ball(1.0, 3).unwrap(),
            ..linear_problem(1.0)
        };
        assert!(q.validate().is_err());
    }

    #[test]
    fn hypotheses_on_degenerate_weight() {
        // b = d^γ with w = d^α, γ ≥ α keeps b/w bounded
        let g = crate::grid::build_graded_grid(1.0, 1e-3, 50, 2.0).unwrap();
        let p = Problem {
            domain: Domain::ball(1.0, 3).unwrap(),
            weight: WeightFamily::Power { alpha: 0.5 },
            b_coef: scalar_fn(|r| (1.0 - r).powf(1.0)),
            nonlin: Nonlinearity::Power { p: 3.0 },
            source: constant_fn(0.0),
            boundary: BoundaryData { inner: None, outer: 1.0 },
        };
        let h = p.check_hypotheses(&g, -10.0, 10.0).unwrap();
        assert!(h.monotone);
        assert!(h.b_over_w_sup <= 1.0 + 1e-12);
    }

    #[test]
    fn assembly_error_names_node() {
        // interior-vanishing weight hits zero exactly at a half-node
        let g = Grid::uniform(1.0, 5).unwrap();
        let p = Problem {
            weight: WeightFamily::InteriorPower { center: 0.375, exponent: 1.0 },
            ..linear_problem(1.0)
        };
        let err = Discretization::new(&g, &p).unwrap_err();
        assert!(matches!(err, Error::Assembly { node: 1, .. }), "{err:?}");
    }

    fn smooth_weight() -> impl Strategy<Value = WeightFamily> {
        prop_oneof![
            Just(WeightFamily::Constant),
            (-0.9f64..1.9).prop_map(|alpha| WeightFamily::Power { alpha }),
            (0.1f64..2.0).prop_map(|alpha| WeightFamily::LogNegative { alpha }),
        ]
    }

    proptest! {
        #[test]
        fn coercivity(
            weight in smooth_weight(),
            v in proptest::collection::vec(-5.0f64..5.0, 16),
            dim in 1usize..4,
        ) {
            let g = crate::grid::build_graded_grid(1.0, 0.05, 16, 2.0).unwrap();
            let p = Problem {
                domain: Domain::ball(1.0, dim).unwrap(),
                weight,
                boundary: BoundaryData { inner: None, outer: 0.0 },
                ..linear_problem(1.0)
            };
            let disc = Discretization::new(&g, &p).unwrap();
            let t = disc.stiffness();
            prop_assert!(t.is_symmetric());
            let q = t.quadratic_form(&v);
            let spread = v.iter().cloned().fold(f64::MIN, f64::max)
                - v.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(q >= -1e-12 * t.diag.iter().sum::<f64>());
            if spread > 1e-6 {
                prop_assert!(q > 0.0);
            }
            let c = vec![3.7; 16];
            prop_assert!(t.quadratic_form(&c).abs() < 1e-9 * t.diag.iter().sum::<f64>());
            // zero outer value: positive definite after elimination of that row
            let mut w = v.clone();
            w[15] = 0.0;
            if w.iter().any(|x| x.abs() > 1e-6) {
                let q = t.quadratic_form(&w);
                prop_assert!(q > 0.0);
            }
        }

        #[test]
        fn truncation_idempotent_and_monotone(
            lo in -3.0f64..1.0,
            width in 0.0f64..4.0,
            ts in proptest::collection::vec(-10.0f64..10.0, 2..40),
        ) {
            let (_, ft) = cubic(lo, lo + width, 3);
            let mut sorted = ts.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in sorted.windows(2) {
                prop_assert!(ft.eval(1, w[0]) <= ft.eval(1, w[1]));
            }
            for t in ts {
                prop_assert_eq!(ft.eval(1, ft.clamp(1, t)), ft.eval(1, t));
            }
        }

        #[test]
        fn penalty_monotone_outside_slab(lo in -2.0f64..2.0, width in 0.0f64..3.0, a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let hi = lo + width;
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(penalty_density(x, lo, hi) <= penalty_density(y, lo, hi));
            if x >= lo && x <= hi {
                prop_assert_eq!(penalty_density(x, lo, hi), 0.0);
            }
        }
    }
}
