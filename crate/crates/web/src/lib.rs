//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no generated TypeScript types. The `*_report` functions hold the
//! logic and are callable from native code.

use degen_blowup::assembly::DiscreteField;
use degen_blowup::asymptotics::fit_blowup_rate;
use degen_blowup::exhaustion::{solve_blowup_exhaustion, ExhaustionConfig};
use degen_blowup::grid::build_graded_grid;
use degen_blowup::penalty_solver::{solve_penalized, SolveOptions};
use degen_blowup::subsuper::{
    build_subsolution, build_supersolution, default_a_grid, find_min_a, uniform_samples, BlowupParams,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points kept per plotted curve.
const PLOT_POINTS: usize = 400;

#[derive(Debug, Serialize)]
pub struct ProfileReport {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub beta_hat: f64,
    pub k_hat: f64,
    pub k: f64,
    pub shift_a: f64,
    pub converged: bool,
    pub iters: usize,
}

fn shift_for(params: &BlowupParams) -> Result<f64, String> {
    let samples = uniform_samples(0.0, params.radius, 10_000);
    find_min_a(params, &samples, &default_a_grid())
        .map_err(|e| e.to_string())?
        .map(|a| 2.0 * a)
        .ok_or_else(|| "no admissible A found".to_string())
}

fn thin(values: &[f64], keep: &[usize]) -> Vec<f64> {
    keep.iter().map(|&j| values[j]).collect()
}

/// Node indices spread evenly in `log d`, so the boundary layer stays visible.
fn plot_indices(d: &[f64]) -> Vec<usize> {
    let (hi, lo) = (d[0].ln(), d[d.len() - 1].ln());
    let mut out: Vec<usize> = Vec::with_capacity(PLOT_POINTS);
    let mut k = 0;
    for i in 0..PLOT_POINTS {
        let target = hi + (lo - hi) * i as f64 / (PLOT_POINTS - 1) as f64;
        while k + 1 < d.len() && d[k].ln() > target {
            k += 1;
        }
        if out.last() != Some(&k) {
            out.push(k);
        }
    }
    out
}

/// Blow-up solution of `Δu = u³` in the unit ball of R³ between the explicit
/// profiles for `epsilon`.
pub fn profile_report(epsilon: f64, m: usize, eta: f64) -> Result<ProfileReport, String> {
    let params = BlowupParams::standard(epsilon).map_err(|e| e.to_string())?;
    let shift_a = shift_for(&params)?;
    let sup = build_supersolution(&params, shift_a).map_err(|e| e.to_string())?;
    let sub = build_subsolution(&params, -1.0).map_err(|e| e.to_string())?;
    let grid = build_graded_grid(1.0, eta, m, 2.0).map_err(|e| e.to_string())?;
    let upper = DiscreteField::try_from_fn(&grid, |r| sup.eval(r)).map_err(|e| e.to_string())?;
    let lower = DiscreteField::try_from_fn(&grid, |r| sub.eval(r)).map_err(|e| e.to_string())?;
    let last = grid.len() - 1;
    let problem = params.problem(0.5 * (lower[last] + upper[last])).map_err(|e| e.to_string())?;
    let opts = SolveOptions { abs_tol: 1e-4, ..SolveOptions::default() };
    let (u, rep) = solve_penalized(&problem, &grid, &lower, &upper, &opts).map_err(|e| e.to_string())?;
    let d_max = (100.0 * eta).min(0.1);
    let fit = fit_blowup_rate(&u, &grid, (10.0 * eta, d_max)).map_err(|e| e.to_string())?;
    let keep = plot_indices(&grid.distances());
    Ok(ProfileReport {
        r: thin(grid.nodes(), &keep),
        u: thin(&u, &keep),
        lower: thin(&lower, &keep),
        upper: thin(&upper, &keep),
        beta_hat: fit.beta_hat,
        k_hat: fit.k_hat,
        k: params.k_constant(),
        shift_a,
        converged: rep.converged,
        iters: rep.iters,
    })
}

#[derive(Debug, Serialize)]
pub struct InequalityReport {
    pub r: Vec<f64>,
    pub super_margin: Vec<f64>,
    /// `null` below the activation radius.
    pub sub_margin: Vec<Option<f64>>,
    pub min_a: Option<f64>,
    pub c_bar: f64,
}

/// Margins of the supersolution inequality (with `shift_a`, or the smallest
/// admissible `A` when `shift_a ≤ 0`) and the subsolution inequality for `shift_c`.
pub fn inequality_report(epsilon: f64, shift_a: f64, shift_c: f64) -> Result<InequalityReport, String> {
    let params = BlowupParams::standard(epsilon).map_err(|e| e.to_string())?;
    let samples = uniform_samples(0.0, 1.0, 10_000);
    let min_a = find_min_a(&params, &samples, &default_a_grid()).map_err(|e| e.to_string())?;
    let a = if shift_a > 0.0 { shift_a } else { min_a.unwrap_or(0.0) };
    let sub = build_subsolution(&params, shift_c).map_err(|e| e.to_string())?;
    let b_bar = (1.0 + epsilon) * params.k_constant();
    let r = uniform_samples(0.0, 1.0, PLOT_POINTS);
    Ok(InequalityReport {
        super_margin: r.iter().map(|&x| params.profile_rhs(a, b_bar, x) - params.profile_lhs(b_bar, x)).collect(),
        sub_margin: r
            .iter()
            .map(|&x| {
                (x >= sub.activation_radius)
                    .then(|| params.profile_lhs(sub.b_under, x) - params.profile_rhs(shift_c, sub.b_under, x))
            })
            .collect(),
        r,
        min_a,
        c_bar: sub.activation_radius,
    })
}

#[derive(Debug, Serialize)]
pub struct ExhaustionReport {
    pub n: Vec<usize>,
    pub delta: Vec<Option<f64>>,
    pub outcome: String,
    pub limit_r: Vec<f64>,
    pub limit_u: Vec<f64>,
}

/// Exhaustion over `n = 4, 8, …, n_max` monitored on `|x| ≤ 0.5`.
pub fn exhaustion_report(epsilon: f64, n_max: usize, m: usize, tol: f64) -> Result<ExhaustionReport, String> {
    let params = BlowupParams::standard(epsilon).map_err(|e| e.to_string())?;
    let shift_a = shift_for(&params)?;
    let config = ExhaustionConfig {
        n_list: ExhaustionConfig::geometric(4, n_max),
        compact_radius: 0.5,
        tol,
        m,
        grading: 2.0,
        k_nodes: 201,
        solve: SolveOptions { abs_tol: 1e-4, ..SolveOptions::default() },
        warm_start: true,
    };
    let run = solve_blowup_exhaustion(&params, shift_a, -1.0, &config).map_err(|e| e.to_string())?;
    let (limit_r, limit_u) = run
        .limit
        .as_ref()
        .map(|l| {
            let step = (l.nodes.len() / PLOT_POINTS).max(1);
            let r = l.nodes.iter().step_by(step).copied().collect();
            let u = l.values.iter().step_by(step).copied().collect();
            (r, u)
        })
        .unwrap_or_default();
    Ok(ExhaustionReport {
        n: run.steps.iter().map(|s| s.n).collect(),
        delta: run.steps.iter().map(|s| s.delta).collect(),
        outcome: format!("{:?}", run.outcome),
        limit_r,
        limit_u,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve_profile(epsilon: f64, m: usize, eta: f64) -> Result<String, JsValue> {
    to_js(profile_report(epsilon, m, eta))
}

#[wasm_bindgen]
pub fn inequality_curves(epsilon: f64, shift_a: f64, shift_c: f64) -> Result<String, JsValue> {
    to_js(inequality_report(epsilon, shift_a, shift_c))
}

#[wasm_bindgen]
pub fn exhaustion_deltas(epsilon: f64, n_max: usize, m: usize, tol: f64) -> Result<String, JsValue> {
    to_js(exhaustion_report(epsilon, n_max, m, tol))
}
