//! Explicit blow-up sub- and supersolutions of the radial problem
//!
//! ```text
//! ψ'' + ((N-1)/r - α/(R-r)) ψ' = a(r) (R-r)^(γ-α) ψ^p   in (0, R),
//! ```
//!
//! equivalently `-div(d^α ∇u) + a d^γ u^p = 0` in `B_R` with `d = R - |x|`:
//!
//! ```text
//! ψ̄(r) = A + B̄ (r/R)² (R-r)^(-β),           B̄ = (1+ε) K,
//! ψ̲(r) = max{0, C + B̲ (r/R)² (R-r)^(-β)},   B̲ = (1-ε) K,
//! β = (2+γ-α)/(p-1),   K = (β(β+1-α)/a(R))^(1/(p-1)).
//! ```
//!
//! Substituting `ψ̄` into the equation and multiplying by `(R-r)^(β+2)` turns
//! the supersolution condition into the polynomial-type inequality checked by
//! [`verify_super_inequality`]; the subsolution condition on `[c̄, R)` is
//! checked both in full and in its sufficient form by
//! [`verify_sub_inequality`].

use std::fmt;

use crate::assembly::{BoundaryData, Nonlinearity, Problem};
use crate::weights::{Domain, WeightFamily};
use crate::{scalar_fn, Error, Result, ScalarFn};

/// `β = (2 + γ - α)/(p - 1)`.
pub fn blowup_exponent(p: f64, alpha: f64, gamma: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    if !(gamma - alpha >= 0.0) {
        return Err(Error::Parameter(format!(
            "gamma - alpha must be nonnegative, got {}",
            gamma - alpha
        )));
    }
    Ok((2.0 + gamma - alpha) / (p - 1.0))
}

/// `K = (β(β+1-α)/a(R))^(1/(p-1))`.
pub fn blowup_constant(p: f64, alpha: f64, a_at_radius: f64, beta: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Parameter(format!("p must exceed 1, got {p}")));
    }
    if !(beta > 0.0) || !(a_at_radius > 0.0) {
        return Err(Error::Parameter(format!(
            "need beta > 0 and a(R) > 0, got beta = {beta}, a(R) = {a_at_radius}"
        )));
    }
    if !(beta + 1.0 - alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "beta + 1 - alpha must be positive, got {}",
            beta + 1.0 - alpha
        )));
    }
    Ok((beta * (beta + 1.0 - alpha) / a_at_radius).powf(1.0 / (p - 1.0)))
}

/// `β(β+1-α) - a(R) B^(p-1)`: zero exactly at `B = K`, decreasing in `B`.
pub fn leading_balance_residual(p: f64, alpha: f64, gamma: f64, b: f64, a_at_radius: f64) -> f64 {
    let beta = (2.0 + gamma - alpha) / (p - 1.0);
    beta * (beta + 1.0 - alpha) - a_at_radius * b.powf(p - 1.0)
}

/// Parameters of the radial blow-up problem.
#[derive(Clone)]
pub struct BlowupParams {
    pub p: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub dim: usize,
    pub radius: f64,
    pub a_coef: ScalarFn,
    pub epsilon: f64,
}

impl fmt::Debug for BlowupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlowupParams")
            .field("p", &self.p)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("dim", &self.dim)
            .field("radius", &self.radius)
            .field("a(R)", &(self.a_coef)(self.radius))
            .field("epsilon", &self.epsilon)
            .finish()
    }
}

const A_COEF_SAMPLES: usize = 1001;

impl BlowupParams {
    pub fn new(
        p: f64,
        alpha: f64,
        gamma: f64,
        dim: usize,
        radius: f64,
        a_coef: ScalarFn,
        epsilon: f64,
    ) -> Result<Self> {
        let params = Self {
            p,
            alpha,
            gamma,
            dim,
            radius,
            a_coef,
            epsilon,
        };
        params.validate()?;
        Ok(params)
    }

    /// `p = 3, α = γ = 0, N = 3, R = 1, a ≡ 1`, for which `β = 1`, `K = √2`.
    pub fn standard(epsilon: f64) -> Result<Self> {
        Self::new(3.0, 0.0, 0.0, 3, 1.0, scalar_fn(|_| 1.0), epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Parameter(format!("R must be positive, got {}", self.radius)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        let beta = blowup_exponent(self.p, self.alpha, self.gamma)?;
        for k in 0..A_COEF_SAMPLES {
            let r = self.radius * k as f64 / (A_COEF_SAMPLES - 1) as f64;
            let a = (self.a_coef)(r);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Parameter(format!("a(r) must be positive, a({r}) = {a}")));
            }
        }
        blowup_constant(self.p, self.alpha, self.a_at_radius(), beta)?;
        Ok(())
    }

    pub fn a_at_radius(&self) -> f64 {
        (self.a_coef)(self.radius)
    }

    pub fn beta(&self) -> f64 {
        (2.0 + self.gamma - self.alpha) / (self.p - 1.0)
    }

    /// `β(β+1-α)`
    pub fn balance(&self) -> f64 {
        let beta = self.beta();
        beta * (beta + 1.0 - self.alpha)
    }

    pub fn k_constant(&self) -> f64 {
        (self.balance() / self.a_at_radius()).powf(1.0 / (self.p - 1.0))
    }

    /// `-div(d^α ∇u) + a(r) d^γ u^p = 0` on the ball with outer datum `outer`.
    pub fn problem(&self, outer: f64) -> Result<Problem> {
        let a = self.a_coef.clone();
        let (radius, gamma) = (self.radius, self.gamma);
        Ok(Problem {
            domain: Domain::ball(self.radius, self.dim)?,
            weight: WeightFamily::Power { alpha: self.alpha },
            b_coef: scalar_fn(move |r| a(r) * (radius - r).max(0.0).powf(gamma)),
            nonlin: Nonlinearity::Power { p: self.p },
            source: scalar_fn(|_| 0.0),
            boundary: BoundaryData { inner: None, outer },
        })
    }

    /// Left side shared by the substituted sub/super conditions, for amplitude `b`:
    /// `2N b/R² (R-r)² + (3β+Nβ-2α) b/R² r(R-r) + b β(β+1-α) (r/R)²`.
    pub fn profile_lhs(&self, b: f64, r: f64) -> f64 {
        let (rr, n, beta) = (self.radius, self.dim as f64, self.beta());
        let d = rr - r;
        let q = r / rr;
        2.0 * n * b / (rr * rr) * d * d
            + (3.0 * beta + n * beta - 2.0 * self.alpha) * b / (rr * rr) * r * d
            + b * self.balance() * q * q
    }

    /// `a(r) (shift (R-r)^β + b (r/R)²)^p`, with the base clipped at 0.
    pub fn profile_rhs(&self, shift: f64, b: f64, r: f64) -> f64 {
        let d = (self.radius - r).max(0.0);
        let q = r / self.radius;
        let base = (shift * d.powf(self.beta()) + b * q * q).max(0.0);
        (self.a_coef)(r) * base.powf(self.p)
    }
}

/// `ψ̄(r) = A + B̄ (r/R)² (R-r)^(-β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperSolution {
    pub shift: f64,
    pub b_bar: f64,
    pub beta: f64,
    pub radius: f64,
}

impl SuperSolution {
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r < self.radius) {
            return Err(Error::Domain(format!("ψ̄ is defined on [0, {}), got {r}", self.radius)));
        }
        let q = r / self.radius;
        Ok(self.shift + self.b_bar * q * q * (self.radius - r).powf(-self.beta))
    }
}

/// `ψ̄` with `B̄ = (1+ε) K` and shift `A > 0`.
pub fn build_supersolution(params: &BlowupParams, shift: f64) -> Result<SuperSolution> {
    params.validate()?;
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::Parameter(format!("A must be positive, got {shift}")));
    }
    Ok(SuperSolution {
        shift,
        b_bar: (1.0 + params.epsilon) * params.k_constant(),
        beta: params.beta(),
        radius: params.radius,
    })
}

/// `ψ̲(r) = max{0, C + B̲ (r/R)² (R-r)^(-β)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubSolution {
    pub shift: f64,
    pub b_under: f64,
    pub beta: f64,
    pub radius: f64,
    /// `c̄`: the unique zero of `C + B̲ (r/R)² (R-r)^(-β)` in `(0, R)`.
    pub activation_radius: f64,
}

impl SubSolution {
    /// The unclipped profile `C + B̲ (r/R)² (R-r)^(-β)`.
    pub fn raw(&self, r: f64) -> f64 {
        let q = r / self.radius;
        self.shift + self.b_under * q * q * (self.radius - r).powf(-self.beta)
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0 && r < self.radius) {
            return Err(Error::Domain(format!("ψ̲ is defined on [0, {}), got {r}", self.radius)));
        }
        if r < self.activation_radius {
            return Ok(0.0);
        }
        Ok(self.raw(r).max(0.0))
    }
}

const BISECTION_TOL: f64 = 1e-12;

/// `ψ̲` with `B̲ = (1-ε) K` and shift `C < 0`.
pub fn build_subsolution(params: &BlowupParams, shift: f64) -> Result<SubSolution> {
    params.validate()?;
    if !(shift < 0.0 && shift.is_finite()) {
        return Err(Error::Parameter(format!("C must be negative, got {shift}")));
    }
    let mut sub = SubSolution {
        shift,
        b_under: (1.0 - params.epsilon) * params.k_constant(),
        beta: params.beta(),
        radius: params.radius,
        activation_radius: f64::NAN,
    };
    sub.activation_radius = activation_radius(&sub)?;
    Ok(sub)
}

/// Bisection for `c̄` on `[tiny, R - tiny]`; the profile is nondecreasing in `r`.
/// Returns `tiny` when the profile is already nonnegative there.
fn activation_radius(sub: &SubSolution) -> Result<f64> {
    let tiny = BISECTION_TOL * sub.radius;
    let (mut lo, mut hi) = (tiny, sub.radius - tiny);
    if !(sub.raw(hi) >= 0.0) {
        return Err(Error::ActivationRadius { c: sub.shift });
    }
    if sub.raw(lo) >= 0.0 {
        return Ok(lo);
    }
    while hi - lo > BISECTION_TOL * sub.radius {
        let mid = 0.5 * (lo + hi);
        if sub.raw(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Result of a sampled inequality check; `margin = good side - bad side`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    pub ok: bool,
    pub worst_margin: f64,
    pub worst_r: f64,
    pub samples: usize,
}

/// `n` equispaced points of `[a, b]`, both ends included.
pub fn uniform_samples(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|k| if k + 1 == n { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
        .collect()
}

/// Evaluates `margin` on the samples, then densely around the worst one.
fn sampled_check(samples: &[f64], lo: f64, hi: f64, margin: impl Fn(f64) -> f64) -> InequalityCheck {
    let mut worst = f64::INFINITY;
    let mut worst_k = 0;
    for (k, &r) in samples.iter().enumerate() {
        let m = margin(r);
        // NaN counts as a failure
        if !(m >= worst) {
            worst = m;
            worst_k = k;
            if m.is_nan() {
                break;
            }
        }
    }
    let mut worst_r = samples.get(worst_k).copied().unwrap_or(f64::NAN);
    if worst.is_finite() && samples.len() > 1 {
        let a = samples[worst_k.saturating_sub(1)].max(lo);
        let b = samples[(worst_k + 1).min(samples.len() - 1)].min(hi);
        for r in uniform_samples(a, b, 201) {
            let m = margin(r);
            if !(m >= worst) {
                worst = m;
                worst_r = r;
            }
        }
    }
    InequalityCheck {
        ok: worst >= 0.0,
        worst_margin: worst,
        worst_r,
        samples: samples.len(),
    }
}

fn check_range(samples: &[f64], lo: f64, hi: f64) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Parameter("no samples".into()));
    }
    match samples.iter().find(|r| !(**r >= lo && **r <= hi)) {
        Some(r) => Err(Error::Parameter(format!("sample {r} outside [{lo}, {hi}]"))),
        None => Ok(()),
    }
}

/// Supersolution inequality `LHS(B̄, r) ≤ a(r)(A (R-r)^β + B̄ (r/R)²)^p` on
/// `samples ⊂ [0, R]`. `A = 0` is accepted here (it is not a valid shift for
/// [`build_supersolution`]).
pub fn verify_super_inequality(params: &BlowupParams, shift: f64, samples: &[f64]) -> Result<InequalityCheck> {
    params.validate()?;
    check_range(samples, 0.0, params.radius)?;
    let b_bar = (1.0 + params.epsilon) * params.k_constant();
    Ok(sampled_check(samples, 0.0, params.radius, |r| {
        params.profile_rhs(shift, b_bar, r) - params.profile_lhs(b_bar, r)
    }))
}

/// First `A` in the increasing `a_grid` for which the supersolution
/// inequality holds on `samples`.
pub fn find_min_a(params: &BlowupParams, samples: &[f64], a_grid: &[f64]) -> Result<Option<f64>> {
    if a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("A grid must be increasing".into()));
    }
    for &a in a_grid {
        if verify_super_inequality(params, a, samples)?.ok {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// `{1, 2, 4, …, 2^15}`
pub fn default_a_grid() -> Vec<f64> {
    (0..16).map(|k| 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubInequalityCheck {
    /// `LHS(B̲, r) ≥ a(r)(C (R-r)^β + B̲ (r/R)²)^p`
    pub full: InequalityCheck,
    /// `β(β+1-α) ≥ a(r) B̲^(p-1) (r/R)^(2(p-1))`
    pub sufficient: InequalityCheck,
    pub activation_radius: f64,
}

/// Subsolution inequalities on `samples ⊂ [c̄, R]`.
pub fn verify_sub_inequality(params: &BlowupParams, shift: f64, samples: &[f64]) -> Result<SubInequalityCheck> {
    let sub = build_subsolution(params, shift)?;
    let c_bar = sub.activation_radius;
    check_range(samples, c_bar - 2.0 * BISECTION_TOL * params.radius, params.radius)?;
    let b = sub.b_under;
    let full = sampled_check(samples, c_bar, params.radius, |r| {
        params.profile_lhs(b, r) - params.profile_rhs(shift, b, r)
    });
    let sufficient = sampled_check(samples, c_bar, params.radius, |r| {
        let q = r / params.radius;
        params.balance() - (params.a_coef)(r) * b.powf(params.p - 1.0) * q.powf(2.0 * (params.p - 1.0))
    });
    Ok(SubInequalityCheck {
        full,
        sufficient,
        activation_radius: c_bar,
    })
}

/// Largest sampled width `δ` such that the supersolution inequality with
/// `A = 0` holds at every sample in `[R - δ, R]`.
pub fn super_neighbourhood_width(params: &BlowupParams, samples: &[f64]) -> Result<f64> {
    let b_bar = (1.0 + params.epsilon) * params.k_constant();
    neighbourhood_width(params, samples, |r| {
        params.profile_rhs(0.0, b_bar, r) >= params.profile_lhs(b_bar, r)
    })
}

/// Largest sampled width `δ̃` such that the sufficient subsolution condition
/// holds at every sample in `[R - δ̃, R]`.
pub fn sub_neighbourhood_width(params: &BlowupParams, samples: &[f64]) -> Result<f64> {
    let b = (1.0 - params.epsilon) * params.k_constant();
    neighbourhood_width(params, samples, |r| {
        let q = r / params.radius;
        params.balance() >= (params.a_coef)(r) * b.powf(params.p - 1.0) * q.powf(2.0 * (params.p - 1.0))
    })
}

fn neighbourhood_width(params: &BlowupParams, samples: &[f64], holds: impl Fn(f64) -> bool) -> Result<f64> {
    params.validate()?;
    check_range(samples, 0.0, params.radius)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut inner = params.radius;
    for r in sorted {
        if !holds(r) {
            break;
        }
        inner = r;
    }
    Ok(params.radius - inner)
}
