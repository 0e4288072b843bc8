//! The subcommands. Each one computes everything first and returns its files
//! in an [`Outcome`]; [`crate::run`] writes them.

use std::path::Path;
use std::sync::Arc;

use degen_blowup::assembly::{DiscreteField, Discretization, Problem};
use degen_blowup::asymptotics::{check_epsilon_bounds, fit_blowup_rate, oracle_exact_1d, ratio_table};
use degen_blowup::exhaustion::{solve_large_solution, ExhaustionConfig, Outcome as RunOutcome};
use degen_blowup::grid::{build_graded_grid, Grid};
use degen_blowup::penalty_solver::{check_sandwich, solve_penalized, SolveOptions};
use degen_blowup::subsuper::{
    build_subsolution, build_supersolution, default_a_grid, find_min_a, sub_neighbourhood_width,
    super_neighbourhood_width, uniform_samples, verify_sub_inequality, verify_super_inequality,
    BlowupParams, SubSolution, SuperSolution,
};
use degen_blowup::weights::{check_b2, Domain, WeightFamily};
use degen_blowup::{scalar_fn, ScalarFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ProblemKind, SweepConfig, WeightSpec};
use crate::{Artifacts, Command, Outcome, RunError, Status, THREADS_ENV};

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    match command {
        Command::Solve => cmd_solve(cfg),
        Command::Rate => cmd_rate(cfg),
        Command::VerifySubsuper => cmd_verify_subsuper(cfg),
        Command::Exhaust => cmd_exhaust(cfg),
        Command::B2 => cmd_b2(cfg),
        Command::Sweep => Err(RunError::Config("sweep files cannot nest".into())),
    }
}

fn config_error(key: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{key}: {msg}"))
}

pub fn blowup_params(cfg: &ExperimentConfig) -> Result<BlowupParams, RunError> {
    let p = &cfg.problem;
    let a = p.a_coef.clone();
    BlowupParams::new(p.p, p.alpha, p.gamma, p.dim, p.radius, scalar_fn(move |r| a.eval(r)), p.epsilon)
        .map_err(|e| config_error("problem", e))
}

/// Configured `A`, or twice the smallest admissible power of two.
fn super_shift(params: &BlowupParams, cfg: &ExperimentConfig) -> Result<f64, RunError> {
    if let Some(a) = cfg.problem.shift_a {
        return Ok(a);
    }
    let samples = uniform_samples(0.0, params.radius, cfg.subsuper.samples);
    let grid = cfg.subsuper.a_grid.clone().unwrap_or_else(default_a_grid);
    match find_min_a(params, &samples, &grid)? {
        Some(a) => Ok(2.0 * a),
        None => Err(config_error("subsuper.a_grid", "no admissible A in the grid")),
    }
}

fn blowup_profiles(params: &BlowupParams, cfg: &ExperimentConfig) -> Result<(SuperSolution, SubSolution), RunError> {
    let sup = build_supersolution(params, super_shift(params, cfg)?)?;
    let sub = build_subsolution(params, cfg.problem.shift_c).map_err(|e| config_error("problem.C", e))?;
    Ok((sup, sub))
}

fn solve_options(cfg: &ExperimentConfig) -> SolveOptions {
    SolveOptions {
        penalty: cfg.solver.penalty,
        max_iters: cfg.solver.max_iters,
        abs_tol: cfg.solver.tol,
        damping: cfg.solver.damping,
        ..SolveOptions::default()
    }
}

/// A problem on a grid between two nodal bounds.
struct Setup {
    grid: Grid,
    problem: Problem,
    lower: DiscreteField,
    upper: DiscreteField,
    exact: Option<ScalarFn>,
}

fn setup(cfg: &ExperimentConfig) -> Result<Setup, RunError> {
    let pc = &cfg.problem;
    let g = &cfg.grid;
    let (lo_s, hi_s) = (pc.lower_scale, pc.upper_scale);
    match pc.kind {
        ProblemKind::Blowup => {
            let params = blowup_params(cfg)?;
            let (sup, sub) = blowup_profiles(&params, cfg)?;
            let grid = build_graded_grid(pc.radius, g.eta, g.m, g.grading)?;
            let lower = DiscreteField::try_from_fn(&grid, |r| Ok(lo_s * sub.eval(r)?))?;
            let upper = DiscreteField::try_from_fn(&grid, |r| Ok(hi_s * sup.eval(r)?))?;
            let last = grid.len() - 1;
            let problem = params.problem(0.5 * (lower[last] + upper[last]))?;
            Ok(Setup { grid, problem, lower, upper, exact: None })
        }
        ProblemKind::Linear => {
            let length = pc.radius;
            let grid = Grid::uniform(length, g.m)?;
            let problem = linear_problem(length)?;
            let lower = DiscreteField::constant(&grid, 0.0)?;
            let upper = DiscreteField::constant(&grid, hi_s)?;
            let exact = scalar_fn(move |x| 1.0 - (x - 0.5 * length).cosh() / (0.5 * length).cosh());
            Ok(Setup { grid, problem, lower, upper, exact: Some(exact) })
        }
        ProblemKind::Oracle => {
            let (problem, u) = oracle_exact_1d(pc.radius, g.eta)?;
            let grid = build_graded_grid(pc.radius, g.eta, g.m, g.grading)?;
            let lower = DiscreteField::from_fn(&grid, |x| 0.9 * lo_s * u.eval(x))?;
            let upper = DiscreteField::from_fn(&grid, |x| 1.1 * hi_s * u.eval(x))?;
            Ok(Setup { grid, problem, lower, upper, exact: Some(scalar_fn(move |x| u.eval(x))) })
        }
    }
}

fn linear_problem(length: f64) -> Result<Problem, RunError> {
    use degen_blowup::assembly::{BoundaryData, Nonlinearity};
    Ok(Problem {
        domain: Domain::interval(length)?,
        weight: WeightFamily::Constant,
        b_coef: scalar_fn(|_| 1.0),
        nonlin: Nonlinearity::Power { p: 1.0 },
        source: scalar_fn(|_| 1.0),
        boundary: BoundaryData { inner: Some(0.0), outer: 0.0 },
    })
}

fn sandwich_tol(upper: &DiscreteField) -> f64 {
    1e-8 * (1.0 + upper.max_abs())
}

#[derive(Serialize)]
struct SolutionRow {
    r: f64,
    d: f64,
    u: f64,
    sub: f64,
    #[serde(rename = "super")]
    sup: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SolveSummary {
    converged: bool,
    iters: usize,
    final_residual: f64,
    residual_history: Vec<f64>,
    penalty: f64,
    sandwich_ok: bool,
    sandwich_tol: f64,
    max_below: f64,
    max_above: f64,
    max_error: Option<f64>,
    nodes: usize,
}

pub fn cmd_solve(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let s = setup(cfg)?;
    let (u, report) = solve_penalized(&s.problem, &s.grid, &s.lower, &s.upper, &solve_options(cfg))?;
    let residual = Discretization::new(&s.grid, &s.problem)?.plain_residual(&u)?;
    let tol = sandwich_tol(&s.upper);
    let sandwich = check_sandwich(&u, &s.lower, &s.upper, tol);
    let max_error = s.exact.as_ref().map(|f| {
        s.grid.nodes().iter().zip(u.iter()).fold(0.0f64, |m, (r, v)| m.max((v - f(*r)).abs()))
    });

    let radius = s.grid.radius();
    let rows: Vec<SolutionRow> = (0..s.grid.len())
        .map(|j| {
            let r = s.grid.nodes()[j];
            SolutionRow { r, d: radius - r, u: u[j], sub: s.lower[j], sup: s.upper[j], residual: residual[j] }
        })
        .collect();
    let summary = SolveSummary {
        converged: report.converged,
        iters: report.iters,
        final_residual: report.final_residual(),
        residual_history: report.residual_history.clone(),
        penalty: report.penalty,
        sandwich_ok: sandwich.ok,
        sandwich_tol: tol,
        max_below: sandwich.max_below,
        max_above: sandwich.max_above,
        max_error,
        nodes: s.grid.len(),
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("solution.csv", &rows)?;
    artifacts.json("report.json", &summary)?;

    let status = if !report.converged {
        Status::Nonconvergence
    } else if !sandwich.ok {
        Status::Certification
    } else {
        Status::Ok
    };
    Ok(Outcome {
        status,
        summary: format!(
            "solve: converged = {} after {} iterations, residual {:.3e}, sandwich ok = {}{}",
            report.converged,
            report.iters,
            report.final_residual(),
            sandwich.ok,
            max_error.map_or(String::new(), |e| format!(", max error {e:.3e}"))
        ),
        artifacts,
    })
}

#[derive(Serialize)]
struct RateRowOut {
    d: f64,
    u: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct RateSummary {
    synthetic: bool,
    beta: f64,
    k: f64,
    beta_hat: f64,
    k_hat: f64,
    k_ratio: f64,
    r2: f64,
    window: (f64, f64),
    nodes_used: usize,
    epsilon: f64,
    min_ratio: f64,
    max_ratio: f64,
    slack: f64,
    bounds_ok: bool,
    converged: bool,
}

pub fn cmd_rate(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    if cfg.problem.kind != ProblemKind::Blowup {
        return Err(config_error("problem.kind", "rate needs the blow-up problem"));
    }
    let rc = &cfg.rate;
    let window = (rc.d_min, rc.d_max);
    let params = blowup_params(cfg)?;
    let (beta, k) = (params.beta(), params.k_constant());
    let g = &cfg.grid;
    let grid = build_graded_grid(params.radius, g.eta, g.m, g.grading)?;
    let in_window = grid.distances().iter().filter(|d| **d >= window.0 && **d <= window.1).count();
    if in_window < degen_blowup::asymptotics::MIN_FIT_NODES {
        return Err(config_error("rate.d_min", format!("only {in_window} grid nodes in the window")));
    }

    let (u, converged) = if rc.synthetic {
        (DiscreteField::from_fn(&grid, |r| k * (params.radius - r).powf(-beta))?, true)
    } else {
        let s = setup(cfg)?;
        let (u, rep) = solve_penalized(&s.problem, &s.grid, &s.lower, &s.upper, &solve_options(cfg))?;
        (u, rep.converged)
    };
    let fit = fit_blowup_rate(&u, &grid, window)?;
    let bounds = check_epsilon_bounds(&u, &grid, k, beta, params.epsilon, window, rc.slack)?;
    let rows: Vec<RateRowOut> = ratio_table(&u, &grid, k, beta, window)?
        .into_iter()
        .map(|r| RateRowOut { d: r.d, u: r.u, ratio: r.ratio })
        .collect();
    let summary = RateSummary {
        synthetic: rc.synthetic,
        beta,
        k,
        beta_hat: fit.beta_hat,
        k_hat: fit.k_hat,
        k_ratio: fit.k_hat / k,
        r2: fit.r2,
        window,
        nodes_used: fit.nodes_used,
        epsilon: params.epsilon,
        min_ratio: bounds.min_ratio,
        max_ratio: bounds.max_ratio,
        slack: bounds.slack,
        bounds_ok: bounds.ok,
        converged,
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("rate.csv", &rows)?;
    artifacts.json("rate.json", &summary)?;
    let status = if !converged {
        Status::Nonconvergence
    } else if !bounds.ok {
        Status::Certification
    } else {
        Status::Ok
    };
    Ok(Outcome {
        status,
        summary: format!(
            "rate: beta_hat = {:.5} (beta = {beta}), K_hat/K = {:.5}, ratios in [{:.4}, {:.4}], bounds ok = {}",
            fit.beta_hat,
            fit.k_hat / k,
            bounds.min_ratio,
            bounds.max_ratio,
            bounds.ok
        ),
        artifacts,
    })
}

#[derive(Serialize)]
struct MarginRow {
    r: f64,
    super_margin: f64,
    sub_margin: Option<f64>,
    sufficient_margin: Option<f64>,
}

#[derive(Serialize)]
struct ActivationRow {
    c: f64,
    c_bar: Option<f64>,
}

#[derive(Serialize)]
struct SubsuperSummary {
    beta: f64,
    k: f64,
    b_bar: f64,
    b_under: f64,
    min_a: Option<f64>,
    super_ok: bool,
    super_worst_margin: Option<f64>,
    super_worst_r: Option<f64>,
    boundary_reduction_ok: bool,
    c: f64,
    c_bar: f64,
    sub_full_ok: bool,
    sub_full_worst_margin: f64,
    sub_sufficient_ok: bool,
    sub_sufficient_worst_margin: f64,
    c_bar_monotone: bool,
    delta: f64,
    delta_tilde: f64,
}

pub fn cmd_verify_subsuper(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let params = blowup_params(cfg)?;
    let radius = params.radius;
    let ss = &cfg.subsuper;
    let samples = uniform_samples(0.0, radius, ss.samples);
    let a_grid = ss.a_grid.clone().unwrap_or_else(default_a_grid);
    let min_a = find_min_a(&params, &samples, &a_grid)?;
    let super_check = match min_a {
        Some(a) => Some(verify_super_inequality(&params, a, &samples)?),
        None => None,
    };
    let (k, beta) = (params.k_constant(), params.beta());
    let b_bar = (1.0 + params.epsilon) * k;
    let boundary_reduction_ok = b_bar.powf(params.p - 1.0) >= params.balance() / params.a_at_radius();

    let c = cfg.problem.shift_c;
    let sub = build_subsolution(&params, c).map_err(|e| config_error("problem.C", e))?;
    let c_bar = sub.activation_radius;
    let sub_samples = uniform_samples(c_bar, radius * (1.0 - 1e-6), ss.samples);
    let sub_check = verify_sub_inequality(&params, c, &sub_samples)?;

    let mut c_list = ss.c_list.clone();
    c_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let activation: Vec<ActivationRow> = c_list
        .iter()
        .map(|&c| ActivationRow { c, c_bar: build_subsolution(&params, c).ok().map(|s| s.activation_radius) })
        .collect();
    let radii: Vec<f64> = activation.iter().filter_map(|a| a.c_bar).collect();
    let c_bar_monotone = radii.windows(2).all(|w| w[0] >= w[1]);

    let a_used = min_a.unwrap_or(0.0);
    let b_under = sub.b_under;
    let rows: Vec<MarginRow> = samples
        .iter()
        .map(|&r| {
            let active = r >= c_bar;
            let q = r / radius;
            MarginRow {
                r,
                super_margin: params.profile_rhs(a_used, b_bar, r) - params.profile_lhs(b_bar, r),
                sub_margin: active.then(|| params.profile_lhs(b_under, r) - params.profile_rhs(c, b_under, r)),
                sufficient_margin: active.then(|| {
                    params.balance()
                        - (params.a_coef)(r) * b_under.powf(params.p - 1.0) * q.powf(2.0 * (params.p - 1.0))
                }),
            }
        })
        .collect();

    let super_ok = super_check.is_some_and(|s| s.ok);
    let summary = SubsuperSummary {
        beta,
        k,
        b_bar,
        b_under,
        min_a,
        super_ok,
        super_worst_margin: super_check.map(|s| s.worst_margin),
        super_worst_r: super_check.map(|s| s.worst_r),
        boundary_reduction_ok,
        c,
        c_bar,
        sub_full_ok: sub_check.full.ok,
        sub_full_worst_margin: sub_check.full.worst_margin,
        sub_sufficient_ok: sub_check.sufficient.ok,
        sub_sufficient_worst_margin: sub_check.sufficient.worst_margin,
        c_bar_monotone,
        delta: super_neighbourhood_width(&params, &samples)?,
        delta_tilde: sub_neighbourhood_width(&params, &samples)?,
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("inequalities.csv", &rows)?;
    artifacts.csv("activation.csv", &activation)?;
    artifacts.json("subsuper.json", &summary)?;
    let ok = super_ok && boundary_reduction_ok && sub_check.full.ok && sub_check.sufficient.ok && c_bar_monotone;
    Ok(Outcome {
        status: if ok { Status::Ok } else { Status::Certification },
        summary: format!(
            "verify-subsuper: min A = {}, super ok = {super_ok}, r = R reduction ok = {boundary_reduction_ok}, c_bar({c}) = {c_bar:.10}, sub ok = {}/{}",
            min_a.map_or("none".to_string(), |a| a.to_string()),
            sub_check.full.ok,
            sub_check.sufficient.ok
        ),
        artifacts,
    })
}

#[derive(Serialize)]
struct StepRow {
    n: usize,
    outer_radius: f64,
    delta: Option<f64>,
    sandwich_ok: bool,
    converged: bool,
    iters: usize,
    residual: f64,
}

#[derive(Serialize)]
struct LimitRow {
    r: f64,
    u: f64,
}

#[derive(Serialize)]
struct ExhaustSummary {
    outcome: String,
    tol: f64,
    compact_radius: f64,
    min_delta: Option<f64>,
    all_sandwiched: bool,
    limit_residual: Option<f64>,
    limit_at_compact_edge: Option<f64>,
}

pub fn cmd_exhaust(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    if cfg.problem.kind != ProblemKind::Blowup {
        return Err(config_error("problem.kind", "exhaust needs the blow-up problem"));
    }
    let params = blowup_params(cfg)?;
    let (sup, sub) = blowup_profiles(&params, cfg)?;
    let (lo_s, hi_s) = (cfg.problem.lower_scale, cfg.problem.upper_scale);
    let upper: ScalarFn = Arc::new(move |r| hi_s * sup.eval(r).unwrap_or(f64::NAN));
    let lower: ScalarFn = Arc::new(move |r| lo_s * sub.eval(r).unwrap_or(f64::NAN));
    let ec = &cfg.exhaust;
    let config = ExhaustionConfig {
        n_list: ec.schedule(),
        compact_radius: ec.compact_radius,
        tol: ec.tol,
        m: cfg.grid.m,
        grading: cfg.grid.grading,
        k_nodes: ec.k_nodes,
        solve: solve_options(cfg),
        warm_start: true,
    };
    let run = solve_large_solution(&params.problem(0.0)?, &lower, &upper, &config)?;

    let steps: Vec<StepRow> = run
        .steps
        .iter()
        .map(|s| StepRow {
            n: s.n,
            outer_radius: s.outer_radius,
            delta: s.delta,
            sandwich_ok: s.sandwich_ok,
            converged: s.converged,
            iters: s.iters,
            residual: s.final_residual,
        })
        .collect();
    let limit_rows: Vec<LimitRow> = run
        .limit
        .iter()
        .flat_map(|l| l.nodes.iter().zip(&l.values).map(|(r, u)| LimitRow { r: *r, u: *u }))
        .collect();
    let summary = ExhaustSummary {
        outcome: format!("{:?}", run.outcome),
        tol: ec.tol,
        compact_radius: ec.compact_radius,
        min_delta: run.min_delta(),
        all_sandwiched: run.all_sandwiched(),
        limit_residual: run.limit.as_ref().map(|l| l.residual),
        limit_at_compact_edge: run.limit_at_compact_edge(),
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("steps.csv", &steps)?;
    artifacts.csv("limit.csv", &limit_rows)?;
    artifacts.json("exhaust.json", &summary)?;
    let status = match run.outcome {
        RunOutcome::Stabilized => Status::Ok,
        RunOutcome::SandwichFailure { .. } => Status::Certification,
        RunOutcome::Aborted { .. } | RunOutcome::ReachedNMax => Status::Nonconvergence,
    };
    Ok(Outcome {
        status,
        summary: format!(
            "exhaust: {:?} after {} solves, smallest delta {}, sandwiched = {}",
            run.outcome,
            run.steps.len(),
            run.min_delta().map_or("n/a".to_string(), |d| format!("{d:.3e}")),
            run.all_sandwiched()
        ),
        artifacts,
    })
}

#[derive(Serialize)]
struct B2Row {
    family: String,
    params: String,
    domain: String,
    margin: f64,
    integral_estimate: f64,
    passes: bool,
    divergent: bool,
    expected_pass: bool,
}

/// Dimension of the ball used for the catalogue weights.
const B2_DIM: usize = 3;

fn catalogue() -> Vec<WeightFamily> {
    vec![
        WeightFamily::Constant,
        WeightFamily::Power { alpha: -0.9 },
        WeightFamily::Power { alpha: 0.5 },
        WeightFamily::Power { alpha: 1.9 },
        WeightFamily::PowerLog { alpha: 1.0, beta_log: 1.0 },
        WeightFamily::PowerLog { alpha: -0.5, beta_log: 2.0 },
        WeightFamily::LogNegative { alpha: 1.0 },
        WeightFamily::ExpDeficit { a: -1.0 },
    ]
}

fn random_draws(rng: &mut ChaCha8Rng) -> Vec<WeightFamily> {
    let top = B2_DIM as f64 - 1.0;
    vec![
        WeightFamily::Power { alpha: rng.gen_range(-0.99..top) },
        WeightFamily::PowerLog { alpha: rng.gen_range(-0.99..top), beta_log: rng.gen_range(0.01..3.0) },
        WeightFamily::LogNegative { alpha: rng.gen_range(0.01..3.0) },
        WeightFamily::ExpDeficit { a: rng.gen_range(-5.0..-0.01) },
    ]
}

fn weight_from_spec(spec: &WeightSpec, k: usize) -> Result<WeightFamily, RunError> {
    let key = |field: &str| format!("b2.weights[{k}].{field}");
    let need = |v: Option<f64>, field: &str| v.ok_or_else(|| config_error(&key(field), "missing"));
    let fam = match spec.family.as_str() {
        "constant" => WeightFamily::Constant,
        "power" => WeightFamily::Power { alpha: need(spec.alpha, "alpha")? },
        "power-log" => WeightFamily::PowerLog {
            alpha: need(spec.alpha, "alpha")?,
            beta_log: need(spec.beta_log, "beta_log")?,
        },
        "log-negative" => WeightFamily::LogNegative { alpha: need(spec.alpha, "alpha")? },
        "exp-deficit" => WeightFamily::ExpDeficit { a: need(spec.a, "a")? },
        "interior-power" => WeightFamily::InteriorPower {
            center: need(spec.center, "center")?,
            exponent: need(spec.exponent, "exponent")?,
        },
        other => return Err(config_error(&key("family"), format!("unknown family {other:?}"))),
    };
    let field = match fam {
        WeightFamily::ExpDeficit { .. } => "a",
        WeightFamily::InteriorPower { .. } => "exponent",
        WeightFamily::PowerLog { alpha, .. } if alpha > -1.0 => "beta_log",
        _ => "alpha",
    };
    fam.validate(B2_DIM).map_err(|e| config_error(&key(field), e))?;
    Ok(fam)
}

fn describe(fam: &WeightFamily) -> String {
    match *fam {
        WeightFamily::Constant => String::new(),
        WeightFamily::Power { alpha } => format!("alpha={alpha}"),
        WeightFamily::PowerLog { alpha, beta_log } => format!("alpha={alpha};beta_log={beta_log}"),
        WeightFamily::LogNegative { alpha } => format!("alpha={alpha}"),
        WeightFamily::ExpDeficit { a } => format!("a={a}"),
        WeightFamily::InteriorPower { center, exponent } => format!("center={center};exponent={exponent}"),
    }
}

pub fn cmd_b2(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let b = &cfg.b2;
    let mut families = catalogue();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    for _ in 0..b.draws {
        families.extend(random_draws(&mut rng));
    }
    for (k, spec) in b.weights.iter().enumerate() {
        families.push(weight_from_spec(spec, k)?);
    }
    let ball = Domain::ball(1.0, B2_DIM)?;
    let interval = Domain::interval(1.0)?;
    let interior = WeightFamily::InteriorPower { center: 0.5, exponent: 1.0 };

    let mut rows = Vec::new();
    for fam in families.iter().chain(std::iter::once(&interior)) {
        let (domain, label) = match fam {
            WeightFamily::InteriorPower { .. } => (&interval, "interval(0,1)"),
            _ => (&ball, "unit ball R^3"),
        };
        let c = check_b2(fam, domain, b.margin, b.quad_nodes)?;
        rows.push(B2Row {
            family: fam.tag().to_string(),
            params: describe(fam),
            domain: label.to_string(),
            margin: b.margin,
            integral_estimate: c.integral_estimate,
            passes: c.passes,
            divergent: c.divergent,
            expected_pass: !matches!(fam, WeightFamily::InteriorPower { .. }),
        });
    }
    let mismatches = rows.iter().filter(|r| r.passes != r.expected_pass).count();
    let mut artifacts = Artifacts::default();
    artifacts.csv("b2.csv", &rows)?;
    Ok(Outcome {
        status: if mismatches == 0 { Status::Ok } else { Status::Certification },
        summary: format!(
            "b2: {} weights checked, {} pass, {mismatches} unexpected results",
            rows.len(),
            rows.iter().filter(|r| r.passes).count()
        ),
        artifacts,
    })
}

/// Thread cap from `DEGEN_BLOWUP_THREADS`; `None` leaves the choice to rayon.
pub fn thread_cap() -> Result<Option<usize>, RunError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(config_error(THREADS_ENV, format!("expected a positive integer, got {v:?}"))),
        },
    }
}

#[derive(Serialize)]
struct SweepRow {
    name: String,
    command: String,
    exit_code: i32,
    message: String,
}

pub fn sweep(path: &Path, out: &Path) -> Result<Outcome, RunError> {
    let sweep = SweepConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut jobs = Vec::new();
    for job in &sweep.job {
        let command = Command::parse(&job.command)
            .filter(|c| *c != Command::Sweep)
            .ok_or_else(|| config_error("job.command", format!("unknown command {:?}", job.command)))?;
        jobs.push((job, command, ExperimentConfig::load(&base.join(&job.config))?));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| RunError::Io(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(job, command, cfg)| {
                let result = execute(*command, cfg).and_then(|o| {
                    o.artifacts.write(&out.join(&job.name))?;
                    Ok(o)
                });
                let (status, message) = match result {
                    Ok(o) => (o.status, o.summary),
                    Err(e) => (e.status(), e.to_string()),
                };
                SweepRow {
                    name: job.name.clone(),
                    command: command.name().to_string(),
                    exit_code: status.code(),
                    message,
                }
            })
            .collect()
    });
    let worst = rows.iter().map(|r| r.exit_code).max().unwrap_or(0);
    let status = match worst {
        0 => Status::Ok,
        1 => Status::Config,
        2 => Status::Nonconvergence,
        _ => Status::Certification,
    };
    let mut artifacts = Artifacts::default();
    artifacts.csv("sweep.csv", &rows)?;
    artifacts.write(out)?;
    Ok(Outcome {
        status,
        summary: format!("sweep: {} jobs, worst exit code {worst}", rows.len()),
        artifacts,
    })
}
