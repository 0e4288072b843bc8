//! Blow-up rate estimation `u ≈ K d^(-β)` near the outer boundary.

use std::f64::consts::SQRT_2;

use crate::assembly::{BoundaryData, DiscreteField, Nonlinearity, Problem};
use crate::grid::Grid;
use crate::weights::{Domain, WeightFamily};
use crate::{constant_fn, scalar_fn, Error, Result};

/// Minimum number of nodes inside a fit window.
pub const MIN_FIT_NODES: usize = 5;

/// Default discretization allowance of [`check_epsilon_bounds`].
pub const EPSILON_SLACK: f64 = 0.05;

/// Log-log least-squares fit of `u` against `d = R - r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub beta_hat: f64,
    pub k_hat: f64,
    /// `(d_min, d_max)`
    pub window: (f64, f64),
    /// Coefficient of determination in log-log coordinates.
    pub r2: f64,
    pub nodes_used: usize,
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Fit(format!("invalid window ({lo}, {hi})")));
    }
    Ok(())
}

/// Indices of the nodes with `d_min ≤ R - r_j ≤ d_max`.
fn window_nodes(grid: &Grid, window: (f64, f64)) -> Vec<usize> {
    grid.distances()
        .iter()
        .enumerate()
        .filter(|(_, d)| **d >= window.0 && **d <= window.1)
        .map(|(j, _)| j)
        .collect()
}

pub fn fit_blowup_rate(u: &DiscreteField, grid: &Grid, window: (f64, f64)) -> Result<RateFit> {
    check_window(window)?;
    if u.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: u.len() });
    }
    let idx = window_nodes(grid, window);
    if idx.len() < MIN_FIT_NODES {
        return Err(Error::Fit(format!(
            "{} nodes in window ({}, {}), need {MIN_FIT_NODES}",
            idx.len(),
            window.0,
            window.1
        )));
    }
    let d = grid.distances();
    let mut xs = Vec::with_capacity(idx.len());
    let mut ys = Vec::with_capacity(idx.len());
    for &j in &idx {
        if !(u[j] > 0.0) {
            return Err(Error::Fit(format!("nonpositive value {} at node {j}", u[j])));
        }
        xs.push(d[j].ln());
        ys.push(u[j].ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("window nodes share a single distance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let flat = syy <= 1e-24 * n * (1.0 + my * my);
    let r2 = if !flat { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit {
        beta_hat: -slope,
        k_hat: intercept.exp(),
        window,
        r2,
        nodes_used: idx.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBounds {
    pub ok: bool,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub slack: f64,
    pub nodes_used: usize,
}

/// Ratios `u_j / (K d_j^(-β))` over the window, accepted within
/// `[1 - ε - slack, 1 + ε + slack]`.
pub fn check_epsilon_bounds(
    u: &DiscreteField,
    grid: &Grid,
    k: f64,
    beta: f64,
    epsilon: f64,
    window: (f64, f64),
    slack: f64,
) -> Result<EpsilonBounds> {
    check_window(window)?;
    let rows = ratio_table(u, grid, k, beta, window)?;
    if rows.is_empty() {
        return Err(Error::Fit(format!("no nodes in window ({}, {})", window.0, window.1)));
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(EpsilonBounds {
        ok: min_ratio >= 1.0 - epsilon - slack && max_ratio <= 1.0 + epsilon + slack,
        min_ratio,
        max_ratio,
        slack,
        nodes_used: rows.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub d: f64,
    pub u: f64,
    pub ratio: f64,
}

/// `(d, u, u/(K d^(-β)))` for every node in the window, outermost last.
pub fn ratio_table(
    u: &DiscreteField,
    grid: &Grid,
    k: f64,
    beta: f64,
    window: (f64, f64),
) -> Result<Vec<RateRow>> {
    if u.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: u.len() });
    }
    if !(k > 0.0) {
        return Err(Error::Parameter(format!("K must be positive, got {k}")));
    }
    let d = grid.distances();
    Ok(window_nodes(grid, window)
        .into_iter()
        .map(|j| RateRow {
            d: d[j],
            u: u[j],
            ratio: u[j] / (k * d[j].powf(-beta)),
        })
        .collect())
}

/// `u*(x) = √2/(R - x)`, an exact solution of `u'' = u³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBlowup {
    pub radius: f64,
}

impl ExactBlowup {
    pub fn eval(&self, x: f64) -> f64 {
        SQRT_2 / (self.radius - x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        2.0 * SQRT_2 / (self.radius - x).powi(3)
    }
}

/// `-u'' + u³ = 0` on `(0, R - η)` with the exact data of [`ExactBlowup`].
///
/// Solve on a grid from [`crate::grid::build_graded_grid`] with the same
/// `R` and `η`.
pub fn oracle_exact_1d(radius: f64, eta: f64) -> Result<(Problem, ExactBlowup)> {
    if !(radius > 0.0 && eta > 0.0 && eta < radius) {
        return Err(Error::Parameter(format!("need 0 < eta < R, got R = {radius}, eta = {eta}")));
    }
    let exact = ExactBlowup { radius };
    let problem = Problem {
        domain: Domain::interval(radius)?,
        weight: WeightFamily::Constant,
        b_coef: constant_fn(1.0),
        nonlin: Nonlinearity::Power { p: 3.0 },
        source: scalar_fn(|_| 0.0),
        boundary: BoundaryData {
            inner: Some(exact.eval(0.0)),
            outer: exact.eval(radius - eta),
        },
    };
    Ok((problem, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_graded_grid;
    use approx::assert_relative_eq;

    #[test]
    fn synthetic_power_law() {
        let grid = build_graded_grid(1.0, 1e-4, 400, 2.0).unwrap();
        let u = DiscreteField::from_fn(&grid, |r| SQRT_2 / (1.0 - r)).unwrap();
        let fit = fit_blowup_rate(&u, &grid, (1e-3, 1e-2)).unwrap();
        assert_relative_eq!(fit.beta_hat, 1.0, max_relative = 1e-6);
        assert_relative_eq!(fit.k_hat, SQRT_2, max_relative = 1e-6);
        assert!(fit.r2 > 0.9999);
    }

    #[test]
    fn constant_field() {
        let grid = build_graded_grid(1.0, 1e-4, 400, 2.0).unwrap();
        let u = DiscreteField::constant(&grid, 5.0).unwrap();
        let fit = fit_blowup_rate(&u, &grid, (1e-3, 1e-2)).unwrap();
        assert!(fit.beta_hat.abs() < 1e-12);
        assert_relative_eq!(fit.k_hat, 5.0, max_relative = 1e-12);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn fit_errors() {
        let grid = build_graded_grid(1.0, 1e-4, 400, 2.0).unwrap();
        let u = DiscreteField::constant(&grid, -1.0).unwrap();
        assert!(matches!(fit_blowup_rate(&u, &grid, (1e-3, 1e-2)), Err(Error::Fit(_))));
        let u = DiscreteField::constant(&grid, 1.0).unwrap();
        assert!(fit_blowup_rate(&u, &grid, (1e-6, 2e-6)).is_err());
        assert!(fit_blowup_rate(&u, &grid, (1e-2, 1e-3)).is_err());
    }

    #[test]
    fn epsilon_envelopes() {
        let grid = build_graded_grid(1.0, 1e-4, 400, 2.0).unwrap();
        let (k, eps) = (SQRT_2, 0.1);
        let upper = DiscreteField::from_fn(&grid, |r| (1.0 + eps) * k / (1.0 - r)).unwrap();
        let c = check_epsilon_bounds(&upper, &grid, k, 1.0, eps, (1e-3, 1e-2), EPSILON_SLACK).unwrap();
        assert!(c.ok);
        assert_relative_eq!(c.max_ratio, 1.0 + eps, max_relative = 1e-12);
        let exact = DiscreteField::from_fn(&grid, |r| k / (1.0 - r)).unwrap();
        let c = check_epsilon_bounds(&exact, &grid, k, 1.0, 1e-3, (1e-3, 1e-2), EPSILON_SLACK).unwrap();
        assert!(c.ok);
        assert_relative_eq!(c.min_ratio, 1.0, max_relative = 1e-12);
        assert_relative_eq!(c.max_ratio, 1.0, max_relative = 1e-12);
        let far = DiscreteField::from_fn(&grid, |r| 2.0 * k / (1.0 - r)).unwrap();
        assert!(!check_epsilon_bounds(&far, &grid, k, 1.0, eps, (1e-3, 1e-2), EPSILON_SLACK).unwrap().ok);
        assert!(check_epsilon_bounds(&far, &grid, k, 1.0, eps, (1e-7, 2e-7), EPSILON_SLACK).is_err());
    }

    #[test]
    fn exact_solution_satisfies_the_equation() {
        let e = ExactBlowup { radius: 1.0 };
        for x in [0.0, 0.3, 0.9, 0.999] {
            assert_relative_eq!(e.second_derivative(x), e.eval(x).powi(3), max_relative = 1e-14);
        }
        let (problem, _) = oracle_exact_1d(1.0, 0.1).unwrap();
        assert_eq!(problem.boundary.inner, Some(SQRT_2));
        assert_relative_eq!(problem.boundary.outer, 10.0 * SQRT_2, max_relative = 1e-14);
        assert!(oracle_exact_1d(1.0, 1.0).is_err());
    }
}
