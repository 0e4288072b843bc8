//! Experiment configuration, read from TOML.
//!
//! Every block is optional and falls back to the acceptance problem
//! (`Δu = u³` in the unit ball of R³). Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// `-div(d^α ∇u) + a(r) d^γ u^p = 0` in the ball, between `ψ̲` and `ψ̄`.
    #[default]
    Blowup,
    /// `-u'' + u = 1` on `(0, R)` with zero data, between 0 and 1.
    Linear,
    /// `u'' = u³` on `(0, R - η)` with the data of `√2/(R - x)`.
    Oracle,
}

/// `a(r)`: a positive constant or polynomial coefficients `[c0, c1, …]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Polynomial(Vec<f64>),
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Constant(1.0)
    }
}

impl Coefficient {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Polynomial(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * r + c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub p: f64,
    pub alpha: f64,
    pub gamma: f64,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub a_coef: Coefficient,
    pub epsilon: f64,
    /// Shift of `ψ̄`; twice the smallest admissible power of two when unset.
    #[serde(rename = "A")]
    pub shift_a: Option<f64>,
    /// Shift of `ψ̲`.
    #[serde(rename = "C")]
    pub shift_c: f64,
    /// Multipliers applied to the bounds before solving.
    pub lower_scale: f64,
    pub upper_scale: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Blowup,
            p: 3.0,
            alpha: 0.0,
            gamma: 0.0,
            dim: 3,
            radius: 1.0,
            a_coef: Coefficient::default(),
            epsilon: 0.1,
            shift_a: None,
            shift_c: -1.0,
            lower_scale: 1.0,
            upper_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub m: usize,
    pub eta: f64,
    pub grading: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 2000, eta: 1e-4, grading: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub penalty: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { penalty: None, tol: 1e-4, max_iters: 50, damping: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub output: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub slack: f64,
    /// Fit `K d^(-β)` sampled on the grid instead of a solve.
    pub synthetic: bool,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self { d_min: 1e-3, d_max: 1e-2, slack: 0.05, synthetic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExhaustConfig {
    /// Explicit schedule; the geometric `n0, 2 n0, …, n_max` otherwise.
    pub n_list: Option<Vec<usize>>,
    pub n0: usize,
    pub n_max: usize,
    pub compact_radius: f64,
    pub tol: f64,
    pub k_nodes: usize,
}

impl Default for ExhaustConfig {
    fn default() -> Self {
        Self {
            n_list: None,
            n0: 4,
            n_max: 64,
            compact_radius: 0.5,
            tol: 1e-5,
            k_nodes: 201,
        }
    }
}

impl ExhaustConfig {
    pub fn schedule(&self) -> Vec<usize> {
        match &self.n_list {
            Some(list) => list.clone(),
            None => degen_blowup::exhaustion::ExhaustionConfig::geometric(self.n0, self.n_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub family: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta_log: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct B2Config {
    pub margin: f64,
    pub quad_nodes: usize,
    /// Extra weights; the catalogue and the interior falsifier are always run.
    pub weights: Vec<WeightSpec>,
    /// Random admissible parameter draws per parametric family.
    pub draws: usize,
}

impl Default for B2Config {
    fn default() -> Self {
        Self { margin: 0.1, quad_nodes: 16, weights: Vec::new(), draws: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubsuperConfig {
    pub samples: usize,
    pub c_list: Vec<f64>,
    pub a_grid: Option<Vec<f64>>,
}

impl Default for SubsuperConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            c_list: vec![-8.0, -4.0, -2.0, -1.0, -0.5, -0.1],
            a_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub run: RunConfig,
    pub rate: RateConfig,
    pub exhaust: ExhaustConfig,
    pub b2: B2Config,
    pub subsuper: SubsuperConfig,
}

fn bad(key: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let cfg: Self = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the ranges that do not need any computation.
    pub fn validate(&self) -> Result<(), RunError> {
        let p = &self.problem;
        let r = p.radius;
        if !(r > 0.0 && r.is_finite()) {
            return Err(bad("problem.R", format!("must be positive, got {r}")));
        }
        if p.dim == 0 {
            return Err(bad("problem.N", "must be at least 1"));
        }
        if !(p.p > 1.0) && p.kind == ProblemKind::Blowup {
            return Err(bad("problem.p", format!("must exceed 1, got {}", p.p)));
        }
        if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
            return Err(bad("problem.epsilon", format!("must lie in (0, 1), got {}", p.epsilon)));
        }
        if p.gamma - p.alpha < 0.0 {
            return Err(bad("problem.gamma", "gamma - alpha must be nonnegative"));
        }
        if let Some(a) = p.shift_a {
            if !(a > 0.0) {
                return Err(bad("problem.A", format!("must be positive, got {a}")));
            }
        }
        if !(p.shift_c < 0.0) {
            return Err(bad("problem.C", format!("must be negative, got {}", p.shift_c)));
        }
        if !(p.lower_scale >= 0.0 && p.upper_scale > 0.0) {
            return Err(bad("problem.upper_scale", "bound multipliers must be nonnegative"));
        }
        if let Coefficient::Polynomial(cs) = &p.a_coef {
            if cs.is_empty() {
                return Err(bad("problem.a_coef", "empty coefficient list"));
            }
        }
        for k in 0..=1000 {
            let x = r * k as f64 / 1000.0;
            let a = p.a_coef.eval(x);
            if !(a > 0.0 && a.is_finite()) {
                return Err(bad("problem.a_coef", format!("must be positive on [0, R], a({x}) = {a}")));
            }
        }

        let g = &self.grid;
        if !(g.eta > 0.0 && g.eta < r) {
            return Err(bad("grid.eta", format!("must lie in (0, R = {r}), got {}", g.eta)));
        }
        if g.m < degen_blowup::grid::MIN_NODES {
            return Err(bad("grid.m", format!("must be at least {}", degen_blowup::grid::MIN_NODES)));
        }
        if !(g.grading >= 1.0) {
            return Err(bad("grid.grading", format!("must be at least 1, got {}", g.grading)));
        }

        let s = &self.solver;
        if let Some(pen) = s.penalty {
            if !(pen >= 0.0 && pen.is_finite()) {
                return Err(bad("solver.penalty", format!("must be nonnegative, got {pen}")));
            }
        }
        if !(s.tol > 0.0) {
            return Err(bad("solver.tol", format!("must be positive, got {}", s.tol)));
        }
        if s.max_iters == 0 {
            return Err(bad("solver.max_iters", "must be at least 1"));
        }
        if !(s.damping > 0.0 && s.damping < 1.0) {
            return Err(bad("solver.damping", format!("must lie in (0, 1), got {}", s.damping)));
        }

        let rc = &self.rate;
        if !(rc.d_min > 0.0 && rc.d_min < rc.d_max) {
            return Err(bad("rate.d_min", "need 0 < d_min < d_max"));
        }
        if rc.d_min < g.eta {
            return Err(bad("rate.d_min", format!("window starts below grid.eta = {}", g.eta)));
        }
        if rc.d_max > r {
            return Err(bad("rate.d_max", format!("window exceeds R = {r}")));
        }
        if !(rc.slack >= 0.0) {
            return Err(bad("rate.slack", "must be nonnegative"));
        }

        let e = &self.exhaust;
        let schedule = e.schedule();
        let Some(&n0) = schedule.first() else {
            return Err(bad("exhaust.n_list", "empty schedule"));
        };
        if schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("exhaust.n_list", "must be increasing"));
        }
        if n0 == 0 || 1.0 / n0 as f64 >= r {
            return Err(bad("exhaust.n0", format!("D_n is empty for n = {n0} and R = {r}")));
        }
        if !(e.compact_radius > 0.0 && e.compact_radius < r - 1.0 / n0 as f64) {
            return Err(bad("exhaust.compact_radius", format!("must lie in (0, R - 1/n0 = {})", r - 1.0 / n0 as f64)));
        }
        if !(e.tol > 0.0) {
            return Err(bad("exhaust.tol", "must be positive"));
        }
        if e.k_nodes < 2 {
            return Err(bad("exhaust.k_nodes", "must be at least 2"));
        }

        let b = &self.b2;
        if b.quad_nodes < 16 {
            return Err(bad("b2.quad_nodes", "must be at least 16"));
        }
        if !(b.margin > 0.0 && b.margin < 0.5) {
            return Err(bad("b2.margin", "must lie in (0, 0.5)"));
        }

        let ss = &self.subsuper;
        if ss.samples < 2 {
            return Err(bad("subsuper.samples", "must be at least 2"));
        }
        if let Some(c) = ss.c_list.iter().find(|c| !(**c < 0.0)) {
            return Err(bad("subsuper.c_list", format!("entries must be negative, got {c}")));
        }
        if let Some(grid) = &ss.a_grid {
            if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(bad("subsuper.a_grid", "must be nonempty and increasing"));
            }
        }
        Ok(())
    }
}

/// One entry of a sweep file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepJob {
    pub name: String,
    pub command: String,
    /// Relative to the sweep file.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub job: Vec<SweepJob>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let mut names = std::collections::HashSet::new();
        for job in &cfg.job {
            if job.name.is_empty() || job.name.contains(['/', '\\']) || job.name.starts_with('.') {
                return Err(bad("job.name", format!("not a plain directory name: {:?}", job.name)));
            }
            if !names.insert(job.name.as_str()) {
                return Err(bad("job.name", format!("duplicate name {:?}", job.name)));
            }
        }
        Ok(cfg)
    }
}
