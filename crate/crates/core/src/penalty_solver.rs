//! Damped Newton solver for the penalized problem and the a-posteriori
//! sandwich certificate `u̲ ≤ u ≤ ū`.

use crate::assembly::{truncate_nonlinearity, DiscreteField, Discretization, Problem};
use crate::grid::Grid;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `(u̲ + ū)/2`
    Midpoint,
    Field(DiscreteField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Penalty coefficient; `None` selects [`default_penalty`].
    pub penalty: Option<f64>,
    pub max_iters: usize,
    /// Convergence threshold on the residual max-norm.
    pub abs_tol: f64,
    /// Step reduction factor of the backtracking line search.
    pub damping: f64,
    pub max_backtracks: usize,
    pub initial_guess: InitialGuess,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            penalty: None,
            max_iters: 50,
            abs_tol: 1e-8,
            damping: 0.5,
            max_backtracks: 60,
            initial_guess: InitialGuess::Midpoint,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Parameter(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Parameter(format!("damping must lie in (0, 1), got {}", self.damping)));
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::Parameter(format!("penalty must be positive, got {p}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichCheck {
    pub ok: bool,
    /// Node of the largest violation (0 when there is none).
    pub worst_node: usize,
    /// `max(0, max_j (u̲_j - u_j))`
    pub max_below: f64,
    /// `max(0, max_j (u_j - ū_j))`
    pub max_above: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub converged: bool,
    pub iters: usize,
    /// Residual max-norm at every accepted iterate, starting with the guess.
    pub residual_history: Vec<f64>,
    /// Penalty coefficient actually used.
    pub penalty: f64,
    /// Set when the line search could not reduce the residual.
    pub stagnated: bool,
    /// Sandwich violations of the returned field (tolerance 0).
    pub sandwich: SandwichCheck,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::INFINITY)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `1 + ‖b/w‖_∞ · max |f̃'|` over the sandwich range.
pub fn default_penalty(
    disc: &Discretization,
    problem: &Problem,
    lower: &[f64],
    upper: &[f64],
) -> f64 {
    let mut b_over_w = 0.0f64;
    let mut slope = 0.0f64;
    for j in 0..disc.len() {
        if disc.is_dirichlet(j) {
            continue;
        }
        b_over_w = b_over_w.max((disc.b()[j] / disc.node_weight()[j]).abs());
        slope = slope.max(problem.nonlin.max_slope(lower[j], upper[j]));
    }
    1.0 + b_over_w * slope
}

/// Solves the penalized problem between `lower` and `upper` by damped Newton.
///
/// A non-converged solve is not an error: the last iterate is returned with
/// `converged = false`.
pub fn solve_penalized(
    problem: &Problem,
    grid: &Grid,
    lower: &DiscreteField,
    upper: &DiscreteField,
    opts: &SolveOptions,
) -> Result<(DiscreteField, SolveReport)> {
    opts.validate()?;
    let disc = Discretization::new(grid, problem)?;
    let m = grid.len();
    for f in [lower, upper] {
        if f.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: f.len() });
        }
    }
    let ftilde = truncate_nonlinearity(&problem.nonlin, lower, upper)?;
    for j in 0..m {
        if let Some(g) = disc.dirichlet_value(j) {
            let slack = 1e-12 * (1.0 + g.abs());
            if g < lower[j] - slack || g > upper[j] + slack {
                return Err(Error::BoundaryData {
                    node: j,
                    value: g,
                    lower: lower[j],
                    upper: upper[j],
                });
            }
        }
    }
    let penalty = opts
        .penalty
        .unwrap_or_else(|| default_penalty(&disc, problem, lower, upper));

    let mut u = match &opts.initial_guess {
        InitialGuess::Midpoint => DiscreteField::midpoint(lower, upper),
        InitialGuess::Field(f) => {
            if f.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: f.len() });
            }
            f.clone()
        }
    };
    for j in 0..m {
        if let Some(g) = disc.dirichlet_value(j) {
            u.values_mut()[j] = g;
        }
    }

    let mut res = disc.residual(&u, &ftilde, penalty)?;
    let mut norm = max_norm(&res);
    let mut history = vec![norm];
    let mut converged = norm <= opts.abs_tol;
    let mut stagnated = false;
    let mut iters = 0;

    while !converged && iters < opts.max_iters {
        let jac = disc.jacobian(&u, &ftilde, penalty)?;
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = jac.solve(&rhs)?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            if trial.iter().all(|v| v.is_finite()) {
                if let Ok(r) = disc.residual(&trial, &ftilde, penalty) {
                    let n = max_norm(&r);
                    if n < norm {
                        accepted = Some((trial, r, n));
                        break;
                    }
                }
            }
            t *= opts.damping;
        }
        iters += 1;
        match accepted {
            Some((trial, r, n)) => {
                u = DiscreteField::new(grid, trial)?;
                res = r;
                norm = n;
                history.push(norm);
                converged = norm <= opts.abs_tol;
            }
            None => {
                stagnated = true;
                break;
            }
        }
    }

    let sandwich = check_sandwich(&u, lower, upper, 0.0);
    Ok((
        u,
        SolveReport {
            converged,
            iters,
            residual_history: history,
            penalty,
            stagnated,
            sandwich,
        },
    ))
}

/// `ok` iff `u̲ - u ≤ tol` and `u - ū ≤ tol` at every node.
pub fn check_sandwich(u: &[f64], lower: &[f64], upper: &[f64], tol: f64) -> SandwichCheck {
    let mut max_below = 0.0f64;
    let mut max_above = 0.0f64;
    let mut worst_node = 0;
    let mut worst = 0.0f64;
    for (j, ((x, lo), hi)) in u.iter().zip(lower).zip(upper).enumerate() {
        let below = (lo - x).max(0.0);
        let above = (x - hi).max(0.0);
        max_below = max_below.max(below);
        max_above = max_above.max(above);
        if below.max(above) > worst {
            worst = below.max(above);
            worst_node = j;
        }
    }
    SandwichCheck {
        ok: max_below <= tol && max_above <= tol,
        worst_node,
        max_below,
        max_above,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSuperCheck {
    pub ok: bool,
    /// Most adverse raw residual on equation rows (minimum for `Super`,
    /// maximum for `Sub`).
    pub worst_residual: f64,
    /// Most adverse residual relative to the row magnitude.
    pub worst_relative: f64,
    pub worst_node: usize,
    /// Boundary inequality `u ≥ g` (`Super`) or `u ≤ g` (`Sub`) holds.
    pub boundary_ok: bool,
}

/// Sign test of the discrete weak residual (with `f`, no penalty) against
/// nonnegative hat functions.
///
/// A row passes when `r_j / s_j ≥ -tol` for a supersolution (or `≤ tol` for a
/// subsolution), where `s_j` is the sum of the magnitudes of the terms in
/// that row.
pub fn verify_subsupersolution(
    candidate: &DiscreteField,
    problem: &Problem,
    grid: &Grid,
    kind: Kind,
    tol: f64,
) -> Result<SubSuperCheck> {
    let disc = Discretization::new(grid, problem)?;
    let res = disc.plain_residual(candidate)?;
    let scale = disc.residual_scale(candidate)?;
    let sign = match kind {
        Kind::Super => 1.0,
        Kind::Sub => -1.0,
    };
    let mut worst_rel = f64::INFINITY;
    let mut worst_raw = f64::INFINITY;
    let mut worst_node = 0;
    let mut boundary_ok = true;
    for j in 0..disc.len() {
        if let Some(g) = disc.dirichlet_value(j) {
            let slack = tol * (1.0 + g.abs());
            boundary_ok &= sign * (candidate[j] - g) >= -slack;
            continue;
        }
        let raw = sign * res[j];
        let rel = if scale[j] > 0.0 { raw / scale[j] } else { 0.0 };
        if rel < worst_rel {
            worst_rel = rel;
            worst_node = j;
        }
        worst_raw = worst_raw.min(raw);
    }
    Ok(SubSuperCheck {
        ok: worst_rel >= -tol && boundary_ok,
        worst_residual: sign * worst_raw,
        worst_relative: sign * worst_rel,
        worst_node,
        boundary_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{BoundaryData, Nonlinearity};
    use crate::weights::{Domain, WeightFamily};
    use crate::constant_fn;

    /// `-u'' + u = 1` on `(0, R)`, `u(0) = u(R) = 0`.
    fn linear(length: f64) -> Problem {
        Problem {
            domain: Domain::interval(length).unwrap(),
            weight: WeightFamily::Constant,
            b_coef: constant_fn(1.0),
            nonlin: Nonlinearity::Power { p: 1.0 },
            source: constant_fn(1.0),
            boundary: BoundaryData { inner: Some(0.0), outer: 0.0 },
        }
    }

    #[test]
    fn zero_solution_in_one_step() {
        let p = Problem {
            source: constant_fn(0.0),
            nonlin: Nonlinearity::Power { p: 3.0 },
            ..linear(1.0)
        };
        let g = Grid::uniform(1.0, 21).unwrap();
        let z = DiscreteField::constant(&g, 0.0).unwrap();
        let (u, rep) = solve_penalized(&p, &g, &z, &z, &SolveOptions::default()).unwrap();
        assert!(rep.converged && rep.iters <= 1);
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn sandwich_check_cases() {
        let lo = [0.0, 0.0, 0.0];
        let hi = [2.0, 2.0, 2.0];
        let mid = [1.0, 1.0, 1.0];
        let c = check_sandwich(&mid, &lo, &hi, 0.0);
        assert!(c.ok && c.max_below == 0.0 && c.max_above == 0.0);
        let c = check_sandwich(&[1.0, 3.0, 1.0], &lo, &hi, 1e-10);
        assert!(!c.ok);
        assert_eq!(c.max_above, 1.0);
        assert_eq!(c.worst_node, 1);
    }

    #[test]
    fn constant_bounds_are_sub_and_super() {
        let p = linear(2.0);
        let g = Grid::uniform(2.0, 41).unwrap();
        // boundary rows are checked against g = 0, so use free ends for this test
        let free = Problem {
            boundary: BoundaryData { inner: Some(1.0), outer: 1.0 },
            ..p.clone()
        };
        let one = DiscreteField::constant(&g, 1.0).unwrap();
        let c = verify_subsupersolution(&one, &free, &g, Kind::Super, 1e-12).unwrap();
        assert!(c.ok);
        assert!(c.worst_residual.abs() < 1e-12);

        let zero = DiscreteField::constant(&g, 0.0).unwrap();
        let c = verify_subsupersolution(&zero, &p, &g, Kind::Sub, 1e-12).unwrap();
        assert!(c.ok);
        // residual ≡ -μ_j = -h
        assert!((c.worst_residual + 0.05).abs() < 1e-12, "{}", c.worst_residual);
    }

    #[test]
    fn misplaced_boundary_datum_is_rejected() {
        let p = Problem {
            boundary: BoundaryData { inner: Some(0.0), outer: 2.0 },
            ..linear(1.0)
        };
        let g = Grid::uniform(1.0, 11).unwrap();
        let lo = DiscreteField::constant(&g, 0.0).unwrap();
        let hi = DiscreteField::constant(&g, 1.0).unwrap();
        let err = solve_penalized(&p, &g, &lo, &hi, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BoundaryData { node: 10, .. }));
    }

    #[test]
    fn bad_options() {
        let bad = SolveOptions { damping: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SolveOptions { abs_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let p = Problem {
            nonlin: Nonlinearity::Power { p: 3.0 },
            source: constant_fn(50.0),
            boundary: BoundaryData { inner: Some(0.0), outer: 0.0 },
            ..linear(1.0)
        };
        let g = Grid::uniform(1.0, 41).unwrap();
        let lo = DiscreteField::constant(&g, 0.0).unwrap();
        let hi = DiscreteField::constant(&g, 10.0).unwrap();
        let opts = SolveOptions { max_iters: 1, ..Default::default() };
        let (_, rep) = solve_penalized(&p, &g, &lo, &hi, &opts).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iters, 1);
    }
}
