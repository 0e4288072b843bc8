//! Boundary-distance weights `w(x) = τ(dist(x, ∂Ω))` and a numerical
//! surrogate for the local integrability condition `w⁻¹ ∈ L¹_loc` (class B₂).

use crate::{Error, Result};

/// Geometry of the domain. All solves work in one radial coordinate `r`.
///
/// For both kinds the solver uses the radial convention `d = R - r` for the
/// distance that enters the weight; [`Domain::distance_to_boundary`] returns
/// the geometric distance instead.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// The interval `(0, R)`; Dirichlet data at both ends.
    Interval { length: f64 },
    /// The ball `B_R(x₀) ⊂ ℝᴺ`; radial symmetry at `r = 0`.
    Ball {
        radius: f64,
        dim: usize,
        center: Vec<f64>,
    },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self> {
        let d = Domain::Interval { length };
        d.validate()?;
        Ok(d)
    }

    /// Ball centered at the origin.
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        let d = Domain::Ball {
            radius,
            dim,
            center: vec![0.0; dim],
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.radius();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if let Domain::Ball { dim, center, .. } = self {
            if *dim == 0 {
                return Err(Error::Domain("dimension must be at least 1".into()));
            }
            if center.len() != *dim {
                return Err(Error::Domain(format!(
                    "center has {} coordinates, dimension is {dim}",
                    center.len()
                )));
            }
        }
        Ok(())
    }

    /// `R`: ball radius or interval length.
    pub fn radius(&self) -> f64 {
        match self {
            Domain::Interval { length } => *length,
            Domain::Ball { radius, .. } => *radius,
        }
    }

    /// Spatial dimension entering the radial measure `r^(N-1) dr`.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Ball { dim, .. } => *dim,
        }
    }

    /// Whether `r = 0` is a symmetry point (no boundary condition there).
    pub fn is_radial(&self) -> bool {
        matches!(self, Domain::Ball { .. })
    }

    /// `R - r`, the distance used by the radial problems.
    pub fn radial_distance(&self, r: f64) -> f64 {
        self.radius() - r
    }

    /// Geometric distance from `x` to the boundary.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        match self {
            Domain::Interval { length } => {
                let [t] = x else {
                    return Err(Error::Domain(format!(
                        "interval points have one coordinate, got {}",
                        x.len()
                    )));
                };
                if !(0.0..=*length).contains(t) {
                    return Err(Error::Domain(format!("{t} lies outside [0, {length}]")));
                }
                Ok(t.min(length - t))
            }
            Domain::Ball { radius, center, .. } => {
                if x.len() != center.len() {
                    return Err(Error::Domain(format!(
                        "point has {} coordinates, dimension is {}",
                        x.len(),
                        center.len()
                    )));
                }
                let dist = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dist > *radius * (1.0 + 4.0 * f64::EPSILON) {
                    return Err(Error::Domain(format!(
                        "point at distance {dist} from the center lies outside the ball of radius {radius}"
                    )));
                }
                Ok((radius - dist).max(0.0))
            }
        }
    }
}

/// Admissible weight catalogue, `w = τ(d)`, plus one position-dependent
/// falsifier used to exercise the B₂ check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily {
    /// `τ ≡ 1`
    Constant,
    /// `τ(t) = t^α`, `-1 < α < N-1`
    Power { alpha: f64 },
    /// `τ(t) = t^α ln(2 + 1/t)^β`, `-1 < α < N-1`, `β > 0`
    PowerLog { alpha: f64, beta_log: f64 },
    /// `τ(t) = ln(2 + 1/t)^(-α)`, `α > 0`
    LogNegative { alpha: f64 },
    /// `τ(t) = 1 - e^(a t)`, `a < 0`, `N > 2`
    ExpDeficit { a: f64 },
    /// `w(x) = |x - c|^s`: vanishes inside the domain, not of the form `τ(d)`.
    InteriorPower { center: f64, exponent: f64 },
}

impl WeightFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            WeightFamily::Constant => "constant",
            WeightFamily::Power { .. } => "power",
            WeightFamily::PowerLog { .. } => "power-log",
            WeightFamily::LogNegative { .. } => "log-negative",
            WeightFamily::ExpDeficit { .. } => "exp-deficit",
            WeightFamily::InteriorPower { .. } => "interior-power",
        }
    }

    /// Checks the parameter ranges of the admissible catalogue in dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        let bad = |msg: String| Err(Error::Parameter(msg));
        match *self {
            WeightFamily::Constant => Ok(()),
            WeightFamily::Power { alpha } => {
                if alpha > -1.0 && alpha < n - 1.0 {
                    Ok(())
                } else {
                    bad(format!("power weight needs -1 < alpha < {}, got {alpha}", n - 1.0))
                }
            }
            WeightFamily::PowerLog { alpha, beta_log } => {
                if !(alpha > -1.0 && alpha < n - 1.0) {
                    bad(format!("power-log weight needs -1 < alpha < {}, got {alpha}", n - 1.0))
                } else if beta_log <= 0.0 || !beta_log.is_finite() {
                    bad(format!("power-log weight needs beta_log > 0, got {beta_log}"))
                } else {
                    Ok(())
                }
            }
            WeightFamily::LogNegative { alpha } => {
                if alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    bad(format!("log-negative weight needs alpha > 0, got {alpha}"))
                }
            }
            WeightFamily::ExpDeficit { a } => {
                if !(a < 0.0 && a.is_finite()) {
                    bad(format!("exp-deficit weight needs a < 0, got {a}"))
                } else if dim <= 2 {
                    bad(format!("exp-deficit weight needs N > 2, got {dim}"))
                } else {
                    Ok(())
                }
            }
            WeightFamily::InteriorPower { center, exponent } => {
                if center.is_finite() && exponent > 0.0 && exponent.is_finite() {
                    Ok(())
                } else {
                    bad(format!(
                        "interior-power weight needs finite center and positive exponent, got ({center}, {exponent})"
                    ))
                }
            }
        }
    }

    /// `τ(d)`. Refuses `d = 0` whenever τ degenerates or blows up there.
    pub fn eval(&self, d: f64) -> Result<f64> {
        if !(d >= 0.0) {
            return Err(Error::Domain(format!("distance must be nonnegative, got {d}")));
        }
        let value = match *self {
            WeightFamily::Constant => return Ok(1.0),
            WeightFamily::Power { alpha: 0.0 } => return Ok(1.0),
            WeightFamily::InteriorPower { .. } => {
                return Err(Error::Parameter(
                    "interior-power weight depends on position, not on the boundary distance"
                        .into(),
                ))
            }
            _ if d == 0.0 => return Err(Error::BoundaryEvaluation { d }),
            WeightFamily::Power { alpha } => d.powf(alpha),
            WeightFamily::PowerLog { alpha, beta_log } => {
                d.powf(alpha) * (2.0 + 1.0 / d).ln().powf(beta_log)
            }
            WeightFamily::LogNegative { alpha } => (2.0 + 1.0 / d).ln().powf(-alpha),
            WeightFamily::ExpDeficit { a } => -(a * d).exp_m1(),
        };
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else {
            Err(Error::BoundaryEvaluation { d })
        }
    }

    /// Weight at radial position `r` using the radial convention `d = R - r`.
    pub fn at_radius(&self, domain: &Domain, r: f64) -> Result<f64> {
        match *self {
            WeightFamily::InteriorPower { center, exponent } => {
                let value = (r - center).abs().powf(exponent);
                if value > 0.0 && value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::BoundaryEvaluation { d: (r - center).abs() })
                }
            }
            _ => self.eval(domain.radial_distance(r)),
        }
    }

    /// Weight at an interval point `x ∈ (0, L)` using the geometric distance.
    fn at_interval_point(&self, length: f64, x: f64) -> Result<f64> {
        match *self {
            WeightFamily::InteriorPower { .. } => self.at_radius(&Domain::Interval { length }, x),
            _ => self.eval(x.min(length - x)),
        }
    }
}

/// Outcome of the B₂ surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct B2Check {
    pub passes: bool,
    /// Estimate of `∫_{d ≥ margin} w⁻¹ dx` at the refined level.
    pub integral_estimate: f64,
    /// Estimates under successive doublings of the panel count.
    pub estimates: Vec<f64>,
    /// Set when the estimates keep growing without contracting increments.
    pub divergent: bool,
}

const B2_RELATIVE_TOL: f64 = 1e-3;
const B2_LEVELS: usize = 4;

/// Composite-quadrature surrogate for `w⁻¹ ∈ L¹` on the compact subset
/// `{d ≥ margin}`.
///
/// For a ball the set is `{|x - x₀| ≤ R - margin}` and the integral carries the
/// full surface measure; for an interval it is `[margin, L - margin]`.
/// `passes` is true iff the estimate is finite and changes by less than 10⁻³
/// (relative) when the node count is doubled. This certifies nothing about
/// local integrability, it only detects the obvious failures.
pub fn check_b2(
    family: &WeightFamily,
    domain: &Domain,
    margin: f64,
    quad_nodes: usize,
) -> Result<B2Check> {
    domain.validate()?;
    let radius = domain.radius();
    if quad_nodes < 16 {
        return Err(Error::Parameter(format!("quad_nodes must be at least 16, got {quad_nodes}")));
    }
    if !(margin > 0.0 && margin < radius) {
        return Err(Error::Parameter(format!("margin must lie in (0, {radius}), got {margin}")));
    }
    let panels = quad_nodes.div_ceil(GAUSS4_NODES.len());

    let mut estimates = Vec::with_capacity(B2_LEVELS);
    for level in 0..B2_LEVELS {
        let n = panels << level;
        let est = match domain {
            Domain::Ball { dim, .. } => {
                let surface = unit_sphere_area(*dim);
                let dim = *dim as i32;
                composite_gauss4(0.0, radius - margin, n, |r| {
                    let w = family.at_radius(domain, r)?;
                    Ok(surface * r.powi(dim - 1) / w)
                })
            }
            Domain::Interval { length } => {
                if 2.0 * margin >= *length {
                    return Err(Error::Parameter(format!(
                        "margin {margin} leaves an empty subset of (0, {length})"
                    )));
                }
                composite_gauss4(margin, length - margin, n, |x| {
                    Ok(1.0 / family.at_interval_point(*length, x)?)
                })
            }
        };
        estimates.push(est.unwrap_or(f64::INFINITY));
    }

    let rel = |a: f64, b: f64| (b - a).abs() / b.abs().max(f64::MIN_POSITIVE);
    let finite = estimates[0].is_finite() && estimates[1].is_finite();
    let passes = finite && rel(estimates[0], estimates[1]) < B2_RELATIVE_TOL;
    let divergent = !passes && {
        let inc: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        estimates.iter().any(|e| !e.is_finite())
            || inc.windows(2).all(|w| w[1] > 0.5 * w[0])
    };
    Ok(B2Check {
        passes,
        integral_estimate: estimates[1],
        estimates,
        divergent,
    })
}

/// 1-D Muckenhoupt surrogate: the largest sampled value of
/// `(avg_I τ)(avg_I τ⁻¹)` over intervals `I = [t 2^(-k), t]`,
/// `t = t_max 2^(-j)`, `0 ≤ j < levels`, `1 ≤ k ≤ levels`.
///
/// Bounded for A₂ weights, growing with `levels` otherwise (e.g. `t^α` with
/// `α ≥ 1`). Informational only.
pub fn a2_surrogate(family: &WeightFamily, t_max: f64, levels: usize) -> Result<f64> {
    if !(t_max > 0.0) || levels == 0 {
        return Err(Error::Parameter("a2_surrogate needs t_max > 0 and levels ≥ 1".into()));
    }
    let mut sup = 0.0f64;
    for j in 0..levels {
        let b = t_max * 0.5f64.powi(j as i32);
        for k in 1..=levels {
            let a = b * 0.5f64.powi(k as i32);
            // geometric substitution t = e^s resolves the power behaviour at 0
            let (la, lb) = (a.ln(), b.ln());
            let panels = 4 * k;
            let int_w = composite_gauss4(la, lb, panels, |s| {
                let t = s.exp();
                Ok(family.eval(t)? * t)
            })?;
            let int_inv = composite_gauss4(la, lb, panels, |s| {
                let t = s.exp();
                Ok(t / family.eval(t)?)
            })?;
            let len = b - a;
            sup = sup.max(int_w / len * int_inv / len);
        }
    }
    Ok(sup)
}

/// `|S^(N-1)|`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        n => 2.0 * PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

const GAUSS4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

fn composite_gauss4<F>(a: f64, b: f64, panels: usize, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GAUSS4_NODES.iter().zip(GAUSS4_WEIGHTS) {
            sum += w * f(mid + 0.5 * h * x)?;
        }
    }
    Ok(0.5 * h * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_distance() {
        let ball = Domain::ball(1.0, 3).unwrap();
        assert_relative_eq!(ball.distance_to_boundary(&[0.25, 0.0, 0.0]).unwrap(), 0.75);
        assert_eq!(ball.distance_to_boundary(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        let big = Domain::ball(2.0, 2).unwrap();
        assert_eq!(big.distance_to_boundary(&[0.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(big.distance_to_boundary(&[0.0, 2.5]), Err(Error::Domain(_))));
    }

    #[test]
    fn interval_distance() {
        let iv = Domain::interval(1.0).unwrap();
        assert_relative_eq!(iv.distance_to_boundary(&[0.2]).unwrap(), 0.2);
        assert_relative_eq!(iv.distance_to_boundary(&[0.7]).unwrap(), 0.3, epsilon = 1e-15);
        assert!(iv.distance_to_boundary(&[1.5]).is_err());
        assert_relative_eq!(iv.radial_distance(0.7), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn invalid_domains() {
        assert!(Domain::ball(0.0, 3).is_err());
        assert!(Domain::ball(1.0, 0).is_err());
        assert!(Domain::interval(-1.0).is_err());
    }

    #[test]
    fn weight_values() {
        assert_relative_eq!(WeightFamily::Power { alpha: 0.5 }.eval(0.25).unwrap(), 0.5);
        assert_eq!(WeightFamily::Constant.eval(0.9).unwrap(), 1.0);
        let pl = WeightFamily::PowerLog { alpha: 1.0, beta_log: 1.0 };
        assert_relative_eq!(pl.eval(0.5).unwrap(), 0.5 * 4f64.ln(), max_relative = 1e-15);
        let ln = WeightFamily::LogNegative { alpha: 2.0 };
        assert_relative_eq!(ln.eval(1.0).unwrap(), 3f64.ln().powi(-2), max_relative = 1e-15);
        let ex = WeightFamily::ExpDeficit { a: -1.0 };
        assert_relative_eq!(ex.eval(1.0).unwrap(), 1.0 - (-1f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn boundary_evaluation_refused() {
        for fam in [
            WeightFamily::Power { alpha: -0.5 },
            WeightFamily::Power { alpha: 0.5 },
            WeightFamily::PowerLog { alpha: 0.0, beta_log: 1.0 },
            WeightFamily::LogNegative { alpha: 1.0 },
            WeightFamily::ExpDeficit { a: -2.0 },
        ] {
            assert_eq!(fam.eval(0.0), Err(Error::BoundaryEvaluation { d: 0.0 }), "{fam:?}");
        }
        assert_eq!(WeightFamily::Constant.eval(0.0).unwrap(), 1.0);
        assert_eq!(WeightFamily::Power { alpha: 0.0 }.eval(0.0).unwrap(), 1.0);
        assert!(WeightFamily::Constant.eval(-1.0).is_err());
    }

    #[test]
    fn parameter_ranges() {
        assert!(WeightFamily::Power { alpha: -1.0 }.validate(3).is_err());
        assert!(WeightFamily::Power { alpha: 2.0 }.validate(3).is_err());
        assert!(WeightFamily::Power { alpha: 1.9 }.validate(3).is_ok());
        assert!(WeightFamily::PowerLog { alpha: 0.0, beta_log: 0.0 }.validate(3).is_err());
        assert!(WeightFamily::LogNegative { alpha: 0.0 }.validate(3).is_err());
        assert!(WeightFamily::ExpDeficit { a: -1.0 }.validate(2).is_err());
        assert!(WeightFamily::ExpDeficit { a: 1.0 }.validate(3).is_err());
        assert!(WeightFamily::ExpDeficit { a: -1.0 }.validate(3).is_ok());
    }

    #[test]
    fn b2_passes_on_compact_subsets() {
        let ball = Domain::ball(1.0, 3).unwrap();
        for alpha in [0.5, -0.9] {
            let c = check_b2(&WeightFamily::Power { alpha }, &ball, 0.1, 16).unwrap();
            assert!(c.passes && !c.divergent, "{alpha}: {c:?}");
        }
        // w ≡ 1: the integral is the volume of the ball of radius 0.9
        let c = check_b2(&WeightFamily::Constant, &ball, 0.1, 16).unwrap();
        let vol = 4.0 / 3.0 * std::f64::consts::PI * 0.9f64.powi(3);
        assert_relative_eq!(c.integral_estimate, vol, max_relative = 1e-12);
    }

    #[test]
    fn b2_fails_for_interior_vanishing_weight() {
        // ∫ dx/|x - 1/2| over [0.1, 0.9] diverges logarithmically; each doubling
        // of the panel count adds about 2 ln 2 to the estimate.
        let iv = Domain::interval(1.0).unwrap();
        let fam = WeightFamily::InteriorPower { center: 0.5, exponent: 1.0 };
        let c = check_b2(&fam, &iv, 0.1, 16).unwrap();
        assert!(!c.passes);
        assert!(c.divergent);
        let inc: Vec<f64> = c.estimates.windows(2).map(|w| w[1] - w[0]).collect();
        for d in inc {
            assert!((d - 2.0 * 2f64.ln()).abs() < 0.05, "{d}");
        }
    }

    #[test]
    fn b2_preconditions() {
        let ball = Domain::ball(1.0, 3).unwrap();
        assert!(check_b2(&WeightFamily::Constant, &ball, 0.1, 8).is_err());
        assert!(check_b2(&WeightFamily::Constant, &ball, 1.0, 16).is_err());
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI);
        assert_relative_eq!(unit_sphere_area(4), 2.0 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn a2_surrogate_separates_exponents() {
        let good = WeightFamily::Power { alpha: 0.5 };
        let g8 = a2_surrogate(&good, 1.0, 8).unwrap();
        let g16 = a2_surrogate(&good, 1.0, 16).unwrap();
        // increases toward the [0, b] value (avg t^½)(avg t^-½) = (2/3)(2) = 4/3
        assert!(g8 < g16 && g16 < 4.0 / 3.0 + 1e-9 && g8 > 1.2, "{g8} {g16}");
        let bad = WeightFamily::Power { alpha: 1.5 };
        let b8 = a2_surrogate(&bad, 1.0, 8).unwrap();
        let b16 = a2_surrogate(&bad, 1.0, 16).unwrap();
        assert!(b16 > 10.0 * b8, "{b8} {b16}");
    }
}
