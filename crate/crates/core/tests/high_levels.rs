use weber_core::bernoulli::{bernoulli_norm, bounds_report};
use weber_core::certificate::{audit, Certificate, PipelineConfig, Verdict};
use weber_core::factor::FactorConfig;
use weber_core::pipeline::{base_dependency, verify_level};

#[test]
fn norm_digits_stay_below_second_moment_bound() {
    for (k, cap) in [(8u32, 63usize), (9, 63), (10, 143), (11, 325), (12, 726)] {
        let digits = bernoulli_norm(k, 1).unwrap().to_string().len();
        assert!(digits <= cap, "k={k}: {digits} digits > {cap}");
        let report = bounds_report(k).unwrap();
        assert!(digits as u64 <= report.second_moment_digits());
    }
}

#[test]
fn k9_norm_is_exact() {
    let n = bernoulli_norm(9, 1).unwrap();
    assert_eq!(
        n.to_string(),
        "5527622451448555262320005717721937139739376956982951936"
    );
}

#[test]
fn k10_budget_exhaustion_yields_valid_inconclusive_certificate() {
    let config = PipelineConfig {
        small_prime_range: None,
        factor: FactorConfig {
            budget_secs: 1.0,
            rho_iterations: 1 << 12,
            rho_attempts: 2,
            ..FactorConfig::default()
        },
        ..PipelineConfig::default()
    };
    let cert = verify_level(10, &config, base_dependency(10, &config)).unwrap();
    let cands = cert.phase_a.candidates.as_ref().unwrap();
    assert!(cands.unresolved.is_some(), "tiny budget should leave a cofactor");
    assert!(matches!(cert.verdict, Verdict::Inconclusive(_)));

    let again = Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(again.canonical_json().unwrap(), cert.canonical_json().unwrap());
    let report = audit(&again);
    assert!(report.consistent(), "{:?}", report.problems);
}
