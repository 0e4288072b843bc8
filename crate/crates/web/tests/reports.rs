use degen_blowup_web::{exhaustion_report, inequality_report, profile_report};

#[test]
fn profile_has_the_expected_rate() {
    let rep = profile_report(0.1, 2000, 1e-4).unwrap();
    assert!(rep.converged);
    assert!((rep.beta_hat - 1.0).abs() < 0.05);
    assert_eq!(rep.r.len(), rep.u.len());
    assert!(rep.r.len() > 100 && rep.r.len() <= 400);
    assert!(rep.u.iter().zip(&rep.lower).all(|(u, lo)| u >= lo));
    assert!(rep.u.iter().zip(&rep.upper).all(|(u, hi)| u <= hi));
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("\"beta_hat\""));
}

#[test]
fn inequality_margins_with_the_minimal_shift() {
    let rep = inequality_report(0.5, 0.0, -1.0).unwrap();
    assert_eq!(rep.min_a, Some(4.0));
    assert!(rep.super_margin.iter().all(|m| *m >= 0.0));
    let active: Vec<f64> = rep.sub_margin.iter().flatten().copied().collect();
    assert!(!active.is_empty() && active.iter().all(|m| *m >= 0.0));
    assert!(rep.sub_margin[0].is_none());
    assert!(rep.c_bar > 0.6 && rep.c_bar < 0.7);
}

#[test]
fn small_shift_breaks_the_supersolution() {
    let rep = inequality_report(0.5, 0.01, -1.0).unwrap();
    assert!(rep.super_margin.iter().any(|m| *m < 0.0));
}

#[test]
fn exhaustion_deltas_shrink() {
    let rep = exhaustion_report(0.1, 256, 1000, 1e-5).unwrap();
    assert_eq!(rep.n, vec![4, 8, 16, 32, 64, 128, 256]);
    assert!(rep.delta[0].is_none());
    let d: Vec<f64> = rep.delta.iter().flatten().copied().collect();
    assert!(d.last().unwrap() < &d[0]);
    assert!(!rep.limit_r.is_empty());
}

#[test]
fn invalid_input_is_reported() {
    assert!(profile_report(1.5, 2000, 1e-4).is_err());
    assert!(profile_report(0.1, 2000, 2.0).is_err());
}
