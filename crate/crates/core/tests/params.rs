use approx::assert_relative_eq;
use lfcnorm::params::Violation;
use lfcnorm::suites::power_gap_ratio;
use lfcnorm::{Config, Error, ParamSchedule};

fn default_schedule() -> ParamSchedule {
    ParamSchedule::build(&Config::default()).unwrap()
}

#[test]
fn default_schedule_golden_values() {
    let s = default_schedule();
    // δ* = min(0.1/8, 0.1) and ln 3/ln 3 = 1
    assert_eq!(s.delta(1), 0.0125);
    assert_relative_eq!(s.theta(1), 0.002_903_841_658_197_419, max_relative = 1e-12);
    assert_relative_eq!(s.theta(0), 0.003_226_490_731_330_465, max_relative = 1e-12);
    assert_relative_eq!(
        s.accuracy_factor(),
        1.031_127_372_042_757,
        max_relative = 1e-12
    );
    assert!(s.accuracy_factor() <= 1.1);
    assert!(s.validate(100).is_empty());
}

#[test]
fn delta_times_log_is_constant() {
    let s = default_schedule();
    let c = s.delta(1) * 3f64.ln();
    for k in 0..=100 {
        let r = s.delta(k) * ((k + 2) as f64).ln() / c;
        assert!((r - 1.0).abs() <= 1e-6, "k={k}");
    }
}

#[test]
fn schedule_inequalities_hold_directly() {
    for eps in [0.01, 0.1, 0.5, 1.0, 3.0] {
        let cfg = Config {
            epsilon: eps,
            k_max: 200,
            ..Config::default()
        };
        let s = ParamSchedule::build(&cfg).unwrap();
        for k in 0..=200 {
            assert!(s.delta(k + 1) < s.delta(k));
            assert!(s.theta(k + 1) < s.theta(k) && s.theta(k + 1) > 0.0);
            let ratio = (1.0 + s.delta(k + 1)) / (1.0 + s.delta(k));
            assert!(ratio < 1.0 - 2.0 * s.theta(k + 1), "eps={eps} k={k}");
        }
        let t1 = s.theta(1);
        assert!((1.0 + t1) / (1.0 - t1) * (1.0 + s.delta(1)).powi(2) <= 1.0 + eps);
    }
}

#[test]
fn extension_past_k_max_keeps_decreasing() {
    let s = ParamSchedule::build(&Config {
        k_max: 5,
        ..Config::default()
    })
    .unwrap();
    assert_eq!(s.k_max(), 5);
    for k in 5..60 {
        assert!(s.delta(k + 1) < s.delta(k));
        assert!(s.theta(k + 1) < s.theta(k));
    }
}

#[test]
fn export_lengths() {
    let s = ParamSchedule::build(&Config {
        k_max: 2,
        ..Config::default()
    })
    .unwrap();
    let e = s.export();
    assert_eq!(e.delta.len(), 3);
    assert_eq!(e.theta.len(), 3);
    assert_eq!(e.epsilon, 0.1);
}

#[test]
fn validator_flags_broken_budget() {
    let s = ParamSchedule::from_parts(vec![0.2, 0.1, 0.05], vec![0.6, 0.5, 0.4], 0.1).unwrap();
    let v = s.validate(1);
    assert!(
        v.iter()
            .any(|x| matches!(x, Violation::AccuracyBudget { .. })),
        "{v:?}"
    );
}

#[test]
fn validator_flags_constant_delta() {
    let s = ParamSchedule::from_parts(vec![0.01; 4], vec![1e-4, 5e-5, 2e-5, 1e-5], 0.1).unwrap();
    let v = s.validate(2);
    assert!(v
        .iter()
        .any(|x| matches!(x, Violation::DeltaNotDecreasing { .. })));
}

#[test]
fn invalid_configs_rejected() {
    let bad = [
        Config {
            epsilon: 0.0,
            ..Config::default()
        },
        Config {
            epsilon: -1.0,
            ..Config::default()
        },
        Config {
            p: 0.5,
            ..Config::default()
        },
        Config {
            q: 2.0,
            ..Config::default()
        },
        Config {
            smoothness_order: 1,
            ..Config::default()
        },
        Config {
            k_max: 1,
            ..Config::default()
        },
        Config {
            bisect_tol: 1e-3,
            ..Config::default()
        },
    ];
    for c in bad {
        assert!(
            matches!(ParamSchedule::build(&c), Err(Error::InvalidConfig(_))),
            "{c:?}"
        );
    }
}

#[test]
fn config_json_round_trip_and_unknown_fields() {
    let c: Config = serde_json::from_str(r#"{"p": 3.0, "k_max": 7}"#).unwrap();
    assert_eq!(c.p, 3.0);
    assert_eq!(c.k_max, 7);
    assert_eq!(c.q, Config::default().q);
    assert!(serde_json::from_str::<Config>(r#"{"eps": 0.1}"#).is_err());
}

#[test]
fn power_gap_examples() {
    let s = default_schedule();
    // p = 1 is the plain difference, evaluated without cancellation
    for k in [1, 10, 1000] {
        assert_eq!(s.delta_power_gap(1.0, k), s.delta_gap(k));
        let naive = s.delta(k) - s.delta(k + 1);
        assert_relative_eq!(s.delta_gap(k), naive, max_relative = 1e-9);
    }
    let flat = ParamSchedule::from_parts(vec![0.01; 3], vec![1e-3, 5e-4, 2e-4], 0.1).unwrap();
    assert_eq!(flat.delta_power_gap(2.0, 1), 0.0);
    for p in [1.0, 1.5, 2.0, 3.0] {
        let r = power_gap_ratio(&s, p, 1_000_000);
        assert!((0.95..=1.05).contains(&r), "p={p} ratio={r}");
    }
}

#[test]
fn digest_tracks_schedule() {
    let a = default_schedule();
    let b = default_schedule();
    let c = ParamSchedule::build(&Config {
        epsilon: 0.2,
        ..Config::default()
    })
    .unwrap();
    assert_eq!(a.digest(), b.digest());
    assert_ne!(a.digest(), c.digest());
}
