#![allow(dead_code)]

use degen_blowup::assembly::{BoundaryData, DiscreteField, Nonlinearity, Problem};
use degen_blowup::grid::{build_graded_grid, Grid};
use degen_blowup::penalty_solver::{solve_penalized, SolveOptions, SolveReport};
use degen_blowup::subsuper::{
    build_subsolution, build_supersolution, default_a_grid, find_min_a, uniform_samples,
    BlowupParams, SubSolution, SuperSolution,
};
use degen_blowup::weights::{Domain, WeightFamily};
use degen_blowup::constant_fn;

pub const BLOWUP_EPS: f64 = 0.1;
pub const BLOWUP_M: usize = 2000;
pub const BLOWUP_ETA: f64 = 1e-4;
pub const BLOWUP_TOL: f64 = 1e-4;
pub const FIT_WINDOW: (f64, f64) = (1e-3, 1e-2);

pub struct BlowupSetup {
    pub params: BlowupParams,
    pub sup: SuperSolution,
    pub sub: SubSolution,
    pub grid: Grid,
    pub lower: DiscreteField,
    pub upper: DiscreteField,
    pub problem: Problem,
}

/// `Δψ = ψ³` in the unit ball of R³ between `ψ̲` (C = -1) and `ψ̄`
/// (A = twice the smallest admissible power of two).
pub fn blowup_setup(epsilon: f64, m: usize, eta: f64) -> BlowupSetup {
    let params = BlowupParams::standard(epsilon).unwrap();
    let samples = uniform_samples(0.0, 1.0, 10_000);
    let a_min = find_min_a(&params, &samples, &default_a_grid()).unwrap().unwrap();
    let sup = build_supersolution(&params, 2.0 * a_min).unwrap();
    let sub = build_subsolution(&params, -1.0).unwrap();
    let grid = build_graded_grid(1.0, eta, m, 2.0).unwrap();
    let upper = DiscreteField::try_from_fn(&grid, |r| sup.eval(r)).unwrap();
    let lower = DiscreteField::try_from_fn(&grid, |r| sub.eval(r)).unwrap();
    let last = grid.len() - 1;
    let problem = params.problem(0.5 * (lower[last] + upper[last])).unwrap();
    BlowupSetup { params, sup, sub, grid, lower, upper, problem }
}

pub fn blowup_options(penalty: Option<f64>) -> SolveOptions {
    SolveOptions {
        penalty,
        abs_tol: BLOWUP_TOL,
        ..SolveOptions::default()
    }
}

pub fn solve_setup(s: &BlowupSetup, opts: &SolveOptions) -> (DiscreteField, SolveReport) {
    solve_penalized(&s.problem, &s.grid, &s.lower, &s.upper, opts).unwrap()
}

/// `-u'' + u = 1` on `(0, L)`, `u(0) = u(L) = 0`.
pub fn linear_problem(length: f64) -> Problem {
    Problem {
        domain: Domain::interval(length).unwrap(),
        weight: WeightFamily::Constant,
        b_coef: constant_fn(1.0),
        nonlin: Nonlinearity::Power { p: 1.0 },
        source: constant_fn(1.0),
        boundary: BoundaryData { inner: Some(0.0), outer: 0.0 },
    }
}

pub fn linear_exact(length: f64, x: f64) -> f64 {
    1.0 - (x - 0.5 * length).cosh() / (0.5 * length).cosh()
}

pub fn sandwich_tol(upper: &[f64]) -> f64 {
    1e-8 * (1.0 + upper.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}
