use lfcnorm::vectors::p_norm;
use lfcnorm::{Config, NormLab, SparseVector};

fn lab(p: f64) -> NormLab {
    NormLab::from_config(&Config {
        p,
        q: 1.0_f64.min(0.5 * p),
        ..Config::default()
    })
    .unwrap()
}

fn v(e: &[(&str, f64)]) -> SparseVector {
    SparseVector::new(e.iter().copied()).unwrap()
}

#[test]
fn zero_vector_everywhere() {
    let lab = lab(1.5);
    let z = SparseVector::zero();
    assert_eq!(lab.psi(&z).unwrap(), 0.0);
    assert_eq!(lab.final_norm(&z), 0.0);
    let w = lab.active_family(&z).unwrap();
    assert_eq!((w.k0, w.family.len()), (1, 0));
    assert!(lab
        .claim1_verify(&z, 5, &mut rand::thread_rng())
        .unwrap()
        .passed());
    assert!(lab
        .lfc_verify(&z, 5, &mut rand::thread_rng())
        .unwrap()
        .passed());
}

#[test]
fn golden_reports() {
    let x = v(&[("a", 0.5), ("b", -0.25), ("c", 0.125)]);
    let lab15 = lab(1.5);
    let r = lab15.report(&x).unwrap();
    assert_eq!(r.p_norm, 0.648_925_258_351_097_8);
    assert_eq!(r.nu, 0.660_046_513_302_836_7);
    assert_eq!(r.psi, Some(0.0));
    assert!((r.final_norm - 0.660_153_466_422_038_9).abs() <= 1e-10 * r.final_norm);
    assert!(r.bracket_valid && r.monotone_probes);
    assert_eq!(
        r.schedule_digest,
        "7ab884d38f16b35213ba14a211e820e1c9d870775ead73d8117f9156c1b6da36"
    );
    let r = lab(2.5).report(&x).unwrap();
    assert!((r.final_norm - 0.548_632_631_986_905_6).abs() <= 1e-10 * r.final_norm);
}

#[test]
fn three_four_five() {
    let lab = lab(2.0);
    let f = lab.final_norm(&v(&[("a", 3.0), ("b", 4.0)]));
    assert!((5.0..=5.5).contains(&f), "{f}");
}

#[test]
fn vanishing_below_threshold() {
    let lab = lab(2.5);
    let t1 = lab.schedule().theta(1);
    let x = v(&[("a", 0.8), ("b", 0.6), ("c", -0.3), ("d", 0.01)]);
    let y = x.scaled((1.0 - t1) / (1.0 + t1) / lab.nu(&x));
    assert_eq!(lab.psi(&y).unwrap(), 0.0);
    assert_eq!(lab.brute_psi(&y).unwrap(), 0.0);
}

#[test]
fn psi_is_positive_near_the_boundary() {
    let lab = lab(1.5);
    let x = v(&[("a", 0.8), ("b", 0.6), ("c", -0.3)]);
    let y = x.scaled((1.0 - 1e-9) / lab.nu(&x));
    let psi = lab.psi(&y).unwrap();
    assert!(psi > 0.0);
    assert_eq!(psi.to_bits(), lab.brute_psi(&y).unwrap().to_bits());
    let w = lab.active_family(&y).unwrap();
    assert!(!w.family.is_empty());
    assert_eq!(w.family, lab.brute_active_family(&y).unwrap());
}

#[test]
fn euclidean_gradient_direction() {
    let lab = NormLab::from_config(&Config {
        p: 2.0,
        epsilon: 1e-3,
        ..Config::default()
    })
    .unwrap();
    let x = v(&[("a", 0.5), ("b", -0.25), ("c", 0.125), ("d", 0.9)]);
    let g = lab.gradient_check(&x).unwrap();
    assert!(g.passed());
    let n = p_norm(&x, 2.0);
    let gn = g.extrapolated.iter().map(|t| t * t).sum::<f64>().sqrt();
    for (label, gi) in g.labels.iter().zip(&g.extrapolated) {
        let expected = x.get(label) / n;
        assert!(
            (gi / gn - expected).abs() <= 0.05 * expected.abs(),
            "{label}"
        );
    }
}

#[test]
fn homogeneity_along_a_ray() {
    let lab = lab(3.0);
    let x = v(&[("a", 0.9), ("b", 0.2), ("c", -0.45)]);
    let base = lab.final_norm(&x);
    for a in [0.01, 0.5, 2.0, 123.0] {
        let f = lab.final_norm(&x.scaled(a));
        assert!((f - a * base).abs() <= 2.0 * lab.tol() * a * base, "a={a}");
    }
}
