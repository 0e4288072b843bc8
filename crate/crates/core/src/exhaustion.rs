//! Large solutions by exhaustion: solve on `D_n = {d > 1/n}` with midpoint
//! boundary data and watch the solutions settle on a fixed ball `|x| ≤ r_K`.

use crate::assembly::{DiscreteField, Discretization, Problem};
use crate::grid::{build_graded_grid, nested_subdomain, Grid};
use crate::penalty_solver::{check_sandwich, solve_penalized, InitialGuess, SolveOptions};
use crate::subsuper::{build_subsolution, build_supersolution, uniform_samples, BlowupParams};
use crate::{Error, Result, ScalarFn};

#[derive(Debug, Clone)]
pub struct ExhaustionConfig {
    /// Increasing indices `n`; each defines `D_n = [0, R - 1/n]`.
    pub n_list: Vec<usize>,
    /// Radius `r_K` of the monitoring set.
    pub compact_radius: f64,
    /// Stop once two consecutive fields differ by less than this on `K`.
    pub tol: f64,
    /// Nodes per `D_n` grid.
    pub m: usize,
    pub grading: f64,
    /// Uniform comparison nodes on `[0, r_K]`.
    pub k_nodes: usize,
    pub solve: SolveOptions,
    /// Previous solution, interpolated, as the initial guess.
    pub warm_start: bool,
}

impl ExhaustionConfig {
    /// Geometric schedule `n0, 2 n0, …, n_max`.
    pub fn geometric(n0: usize, n_max: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut n = n0.max(1);
        while n <= n_max {
            out.push(n);
            n *= 2;
        }
        out
    }

    pub fn validate(&self, radius: f64) -> Result<()> {
        let Some(&n0) = self.n_list.first() else {
            return Err(Error::Parameter("empty n schedule".into()));
        };
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("n schedule must be increasing".into()));
        }
        let d0 = nested_subdomain(radius, n0)?;
        if !(self.compact_radius > 0.0 && self.compact_radius < d0.outer_radius) {
            return Err(Error::Parameter(format!(
                "compact radius must lie in (0, {}), got {}",
                d0.outer_radius, self.compact_radius
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.k_nodes < 2 {
            return Err(Error::Parameter("at least 2 comparison nodes required".into()));
        }
        self.solve.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// A consecutive difference dropped below `tol`.
    Stabilized,
    /// The schedule ran out first.
    ReachedNMax,
    /// The solve at this `n` did not converge.
    Aborted { n: usize },
    /// The solution at this `n` left its sandwich.
    SandwichFailure { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustionStep {
    pub n: usize,
    pub outer_radius: f64,
    /// Max difference on `K` to the previous step.
    pub delta: Option<f64>,
    pub sandwich_ok: bool,
    pub converged: bool,
    pub iters: usize,
    pub final_residual: f64,
}

/// Last field restricted to the nodes with `r ≤ r_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitField {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    /// Max-norm of the unpenalized residual over those nodes.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct ExhaustionRun {
    pub steps: Vec<ExhaustionStep>,
    pub grids: Vec<Grid>,
    pub fields: Vec<DiscreteField>,
    pub compact_radius: f64,
    pub outcome: Outcome,
    pub limit: Option<LimitField>,
}

impl ExhaustionRun {
    pub fn deltas(&self) -> Vec<f64> {
        self.steps.iter().filter_map(|s| s.delta).collect()
    }

    pub fn min_delta(&self) -> Option<f64> {
        self.deltas().into_iter().reduce(f64::min)
    }

    pub fn all_sandwiched(&self) -> bool {
        self.steps.iter().all(|s| s.sandwich_ok)
    }

    /// Limit value at the outermost node of `K`.
    pub fn limit_at_compact_edge(&self) -> Option<f64> {
        self.limit.as_ref().and_then(|l| l.values.last().copied())
    }
}

/// Runs the exhaustion for `problem` (its outer datum is replaced at every
/// `n`) between the radial profiles `lower ≤ upper`.
pub fn solve_large_solution(
    problem: &Problem,
    lower: &ScalarFn,
    upper: &ScalarFn,
    config: &ExhaustionConfig,
) -> Result<ExhaustionRun> {
    let radius = problem.domain.radius();
    config.validate(radius)?;
    let k_points = uniform_samples(0.0, config.compact_radius, config.k_nodes);

    let mut steps = Vec::new();
    let mut grids: Vec<Grid> = Vec::new();
    let mut fields: Vec<DiscreteField> = Vec::new();
    let mut prev_on_k: Option<Vec<f64>> = None;
    let mut outcome = Outcome::ReachedNMax;

    for &n in &config.n_list {
        let dn = nested_subdomain(radius, n)?;
        let grid = build_graded_grid(radius, dn.margin, config.m, config.grading)?;
        let lo = DiscreteField::from_fn(&grid, |r| lower(r))?;
        let hi = DiscreteField::from_fn(&grid, |r| upper(r))?;
        let last = grid.len() - 1;
        let sub_problem = problem.clone().with_outer_value(0.5 * (lo[last] + hi[last]));

        let mut opts = config.solve.clone();
        if config.warm_start {
            if let (Some(g), Some(f)) = (grids.last(), fields.last()) {
                let guess: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .enumerate()
                    .map(|(j, &r)| {
                        let v = g.interpolate(f, r).unwrap_or(0.5 * (lo[j] + hi[j]));
                        v.clamp(lo[j], hi[j])
                    })
                    .collect();
                opts.initial_guess = InitialGuess::Field(DiscreteField::new(&grid, guess)?);
            }
        }

        let (u, report) = solve_penalized(&sub_problem, &grid, &lo, &hi, &opts)?;
        let sandwich_tol = 1e-8 * (1.0 + hi.max_abs());
        let sandwich_ok = check_sandwich(&u, &lo, &hi, sandwich_tol).ok;
        let on_k: Vec<f64> = k_points
            .iter()
            .map(|&r| grid.interpolate(&u, r).expect("K lies inside every D_n"))
            .collect();
        let delta = prev_on_k.as_ref().map(|p| {
            p.iter().zip(&on_k).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        });
        steps.push(ExhaustionStep {
            n,
            outer_radius: dn.outer_radius,
            delta,
            sandwich_ok,
            converged: report.converged,
            iters: report.iters,
            final_residual: report.final_residual(),
        });
        grids.push(grid);
        fields.push(u);
        prev_on_k = Some(on_k);

        if !report.converged {
            outcome = Outcome::Aborted { n };
            break;
        }
        if !sandwich_ok {
            outcome = Outcome::SandwichFailure { n };
            break;
        }
        if delta.is_some_and(|d| d < config.tol) {
            outcome = Outcome::Stabilized;
            break;
        }
    }

    let limit = match outcome {
        Outcome::Stabilized | Outcome::ReachedNMax => {
            let grid = grids.last().expect("schedule is nonempty");
            let u = fields.last().expect("schedule is nonempty");
            let last = grid.len() - 1;
            let p = problem.clone().with_outer_value(u[last]);
            let res = Discretization::new(grid, &p)?.plain_residual(u)?;
            let count = grid.count_up_to(config.compact_radius);
            Some(LimitField {
                nodes: grid.nodes()[..count].to_vec(),
                values: u[..count].to_vec(),
                residual: res[..count].iter().fold(0.0, |m, r| m.max(r.abs())),
            })
        }
        _ => None,
    };

    Ok(ExhaustionRun {
        steps,
        grids,
        fields,
        compact_radius: config.compact_radius,
        outcome,
        limit,
    })
}

/// [`solve_large_solution`] for the radial blow-up problem between
/// `ψ̲` (shift `c < 0`) and `ψ̄` (shift `a > 0`).
pub fn solve_blowup_exhaustion(
    params: &BlowupParams,
    a: f64,
    c: f64,
    config: &ExhaustionConfig,
) -> Result<ExhaustionRun> {
    let sup = build_supersolution(params, a)?;
    let sub = build_subsolution(params, c)?;
    let upper: ScalarFn = std::sync::Arc::new(move |r| sup.eval(r).unwrap_or(f64::NAN));
    let lower: ScalarFn = std::sync::Arc::new(move |r| sub.eval(r).unwrap_or(f64::NAN));
    solve_large_solution(&params.problem(0.0)?, &lower, &upper, config)
}
