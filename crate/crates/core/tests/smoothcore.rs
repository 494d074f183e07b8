use lfcnorm::smoothcore::{calibrate_mu, BumpRho, SmoothFiniteNorm, SmoothedPower};
use lfcnorm::Error;

#[test]
fn euclidean_case_is_exact() {
    let n = SmoothFiniteNorm::new(3, 0.01, 2.0, 0.0).unwrap();
    let v = [0.3, -0.4, 1.2];
    let e = (0.09f64 + 0.16 + 1.44).sqrt();
    assert_eq!(n.gauge(&v).unwrap(), e);
    assert_eq!(n.value(&v).unwrap(), e);
    assert_eq!(n.value(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    // (1 + 5μ²)^{1/2} ≤ 1.01 needs μ ≤ 0.0634
    assert_eq!(calibrate_mu(5, 0.01, 2.0).unwrap(), 0.0625);
}

#[test]
fn calibration_examples() {
    let mu = calibrate_mu(4, 0.01, 1.5).unwrap();
    // largest dyadic with (1 + 4μ^1.5)^{2/3} ≤ 1.01, scanned directly
    let expected = (0..=80)
        .map(|j| 2f64.powi(-j))
        .find(|m| (1.0 + 4.0 * m.powf(1.5)).powf(1.0 / 1.5) <= 1.01)
        .unwrap();
    assert_eq!(mu, expected);
    assert!(matches!(
        calibrate_mu(3, 0.0, 1.5),
        Err(Error::CalibrationFailed { .. })
    ));
}

/// Root of `f` on `[lo, hi]` by plain bisection, `f(lo) > 0 > f(hi)`.
fn scalar_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn one_dimensional_gauge_matches_scalar_root() {
    let mu: f64 = 0.1;
    // φ(1/λ) = ((1/λ)² + μ²)^{1/2} − μ = 1
    let root = scalar_root(|l| ((1.0 / (l * l)) + mu * mu).sqrt() - mu - 1.0, 0.5, 1.5);
    let phi = SmoothedPower::new(1.0, mu);
    assert!((phi.eval(1.0 / root) - 1.0).abs() < 1e-12);
    let closed = 1.0 / ((1.0 + mu).powi(2) - mu * mu).sqrt();
    assert!((root - closed).abs() < 1e-13);
}

#[test]
fn bump_examples() {
    let theta = 0.01;
    let b = BumpRho::new(3, theta, 4);
    assert_eq!(b.eval(1.0), 1.0);
    assert_eq!(b.eval(1.0 - theta * theta), 0.0);
    assert_eq!(b.eval(0.5), 0.0);
    assert_eq!(b.eval(-1.0), 1.0);
    let h = 1e-3;
    let mut t = 0.0;
    while t <= 2.0 {
        let second = b.eval(t - h) - 2.0 * b.eval(t) + b.eval(t + h);
        assert!(second >= -1e-12, "t={t}");
        t += 0.01;
    }
    assert!(b.eval(1.0 + 1e-9) > 1.0);
}

#[test]
fn smoothed_power_bounds() {
    for p in [1.0, 1.5, 2.5, 3.0] {
        let mu: f64 = 0.05;
        let phi = SmoothedPower::new(p, mu);
        for i in -40..=40 {
            let t = i as f64 * 0.05;
            let v = phi.eval(t);
            assert_eq!(v, phi.eval(-t));
            assert!(t.abs().powf(p) - mu.powf(p) <= v + 1e-15);
            assert!(v <= (t.abs() + mu).powf(p) + 1e-15);
            if p <= 2.0 {
                assert!(v <= t.abs().powf(p) + 1e-15);
            }
            assert!(phi.second_deriv(t) >= 0.0);
        }
        assert_eq!(phi.eval(0.0), 0.0);
    }
}
