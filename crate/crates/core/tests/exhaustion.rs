mod common;

use common::*;
use degen_blowup::assembly::DiscreteField;
use degen_blowup::asymptotics::fit_blowup_rate;
use degen_blowup::exhaustion::{solve_blowup_exhaustion, ExhaustionConfig, Outcome};
use degen_blowup::grid::build_graded_grid;
use degen_blowup::subsuper::{build_supersolution, BlowupParams};

fn config(n_list: Vec<usize>, compact_radius: f64, m: usize) -> ExhaustionConfig {
    ExhaustionConfig {
        n_list,
        compact_radius,
        tol: 1e-5,
        m,
        grading: 2.0,
        k_nodes: 201,
        solve: blowup_options(None),
        warm_start: true,
    }
}

#[test]
fn longer_schedule_stabilizes() {
    let s = blowup_setup(BLOWUP_EPS, 200, 0.1);
    let cfg = config(ExhaustionConfig::geometric(4, 1024), 0.5, 4000);
    let run = solve_blowup_exhaustion(&s.params, s.sup.shift, s.sub.shift, &cfg).unwrap();
    assert_eq!(run.outcome, Outcome::Stabilized, "{:?}", run.deltas());
    assert!(run.all_sandwiched());
    let limit = run.limit.as_ref().unwrap();
    assert!(limit.residual <= 10.0 * cfg.tol);
    // the running minimum of the deltas keeps falling
    let d = run.deltas();
    let mut best = f64::INFINITY;
    for x in &d {
        best = best.min(*x);
    }
    assert!(best < 1e-5 && best < d[0]);
}

#[test]
fn every_step_is_sandwiched() {
    let s = blowup_setup(0.5, 200, 0.1);
    let cfg = config(ExhaustionConfig::geometric(4, 64), 0.5, 1000);
    let run = solve_blowup_exhaustion(&s.params, s.sup.shift, s.sub.shift, &cfg).unwrap();
    assert!(run.steps.iter().all(|st| st.sandwich_ok && st.converged));
    assert_eq!(run.steps.len(), 5);
    for (st, n) in run.steps.iter().zip([4, 8, 16, 32, 64]) {
        assert_eq!(st.n, n);
        assert!((st.outer_radius - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
    }
}

#[test]
fn limit_grows_toward_the_boundary() {
    let s = blowup_setup(BLOWUP_EPS, 200, 0.1);
    let mut edge_values = Vec::new();
    for r_k in [0.5, 0.9, 0.99] {
        let n_list: Vec<usize> = ExhaustionConfig::geometric(4, 2048)
            .into_iter()
            .filter(|n| 1.0 - 1.0 / *n as f64 > r_k)
            .collect();
        let run = solve_blowup_exhaustion(&s.params, s.sup.shift, s.sub.shift, &config(n_list, r_k, 2000))
            .unwrap();
        assert!(run.all_sandwiched());
        edge_values.push(run.limit_at_compact_edge().unwrap());
    }
    assert!(edge_values.windows(2).all(|w| w[1] > w[0]), "{edge_values:?}");
}

/// Moving the fit window toward `R` brings the fitted exponent of `ψ̄` to `β`.
#[test]
fn fitted_exponent_improves_near_the_boundary() {
    let params = BlowupParams::standard(0.5).unwrap();
    let sup = build_supersolution(&params, 10.0).unwrap();
    let grid = build_graded_grid(1.0, 1e-6, 4000, 2.0).unwrap();
    let u = DiscreteField::try_from_fn(&grid, |r| sup.eval(r)).unwrap();
    let mut errors = Vec::new();
    for d_max in [1e-1, 1e-2, 1e-3, 1e-4] {
        let fit = fit_blowup_rate(&u, &grid, (d_max / 10.0, d_max)).unwrap();
        errors.push((fit.beta_hat - params.beta()).abs());
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}
