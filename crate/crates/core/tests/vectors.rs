use lfcnorm::vectors::{
    brute_nu, claim_inequality_scan, find_k0, k0_bound_for_decay, nu, p_norm, phi_k,
    tail_bound_check, DecayModel,
};
use lfcnorm::{Config, ParamSchedule, SparseVector};

fn s() -> ParamSchedule {
    ParamSchedule::build(&Config::default()).unwrap()
}

fn v(e: &[(&str, f64)]) -> SparseVector {
    SparseVector::new(e.iter().copied()).unwrap()
}

#[test]
fn p_norm_examples() {
    assert_eq!(p_norm(&SparseVector::zero(), 1.0), 0.0);
    assert_eq!(p_norm(&v(&[("a", 3.0), ("b", 4.0)]), 2.0), 5.0);
    assert_eq!(p_norm(&v(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]), 0.5), 9.0);
}

#[test]
fn vector_file_rules() {
    assert!(SparseVector::from_json(r#"{"entries": [["a", 0.0]]}"#).is_err());
    assert!(SparseVector::from_json(r#"{"entries": [["a", 1.0], ["a", 2.0]]}"#).is_err());
    let x = SparseVector::from_json(r#"{"entries": [["b", -2.0], ["a", 1.5]]}"#).unwrap();
    assert_eq!(x.len(), 2);
    assert_eq!(x.get("b"), -2.0);
    assert_eq!(x.get("zzz"), 0.0);
    let back = serde_json::to_string(&x.to_file()).unwrap();
    assert_eq!(SparseVector::from_json(&back).unwrap(), x);
}

#[test]
fn nu_examples() {
    let s = s();
    let d1 = (1.0 + s.delta(1)).powi(2);
    assert_eq!(nu(&SparseVector::zero(), &s, 2.0), 0.0);
    assert_eq!(nu(&v(&[("a", -0.7)]), &s, 1.5), d1 * 0.7);
    assert_eq!(brute_nu(&v(&[("a", -0.7)]), &s, 1.5).unwrap(), d1 * 0.7);
    let x = v(&[("a", 1.0), ("b", 1.0)]);
    let expected = d1.max(2.0 * (1.0 + s.delta(2)).powi(2));
    assert_eq!(nu(&x, &s, 1.0), expected);
    assert_eq!(brute_nu(&x, &s, 1.0).unwrap(), expected);
}

#[test]
fn phi_examples() {
    let s = s();
    let x = v(&[("a", 2.0), ("b", 1.0)]);
    assert_eq!(phi_k(&x, &s, 1.0, 1), 2.0 * (1.0 + s.delta(1)));
    assert_eq!(phi_k(&x, &s, 1.0, 2), 3.0 * (1.0 + s.delta(2)));
    let far = phi_k(&x, &s, 1.0, 7);
    assert_eq!(far, 3.0 * (1.0 + s.delta(7)));
    assert!(far < phi_k(&x, &s, 1.0, 2));
}

#[test]
fn k0_examples() {
    let s = s();
    assert_eq!(find_k0(&v(&[("a", 4.0)]), &s, 2.0), 1);
    for m in [2usize, 5, 9] {
        let x = SparseVector::new((0..m).map(|i| (format!("e{i}"), 1.0))).unwrap();
        assert_eq!(find_k0(&x, &s, 1.0), m, "m={m}");
    }
}

#[test]
fn claim_scan_examples() {
    let s = s();
    let x = v(&[("a", 1.0), ("b", 1.0)]);
    let scan = claim_inequality_scan(&x, &s, 1.0);
    // k = 1: φ_2 = 2(1+δ_2) against φ_1 = 1+δ_1
    let k1 = scan.iter().find(|(k, _)| *k == 1).unwrap().1;
    assert_eq!(k1, 2.0 * (1.0 + s.delta(2)) <= 1.0 + s.delta(1));
    assert!(!k1);
    // k = n: nothing is added
    assert!(scan.iter().find(|(k, _)| *k == 2).unwrap().1);
}

#[test]
fn tail_bound_examples() {
    let x = v(&[("a", 0.5), ("b", -2.0), ("c", 1.0)]);
    let (lhs, rhs) = tail_bound_check(&x, 1.0, 1).unwrap();
    assert_eq!((lhs, rhs), (2.0, 3.5));
    let ones = SparseVector::new((0..6).map(|i| (format!("e{i}"), 1.0))).unwrap();
    assert_eq!(tail_bound_check(&ones, 1.0, 6).unwrap(), (6.0, 6.0));
    assert!(tail_bound_check(&ones, 1.0, 0).is_err());
    assert!(tail_bound_check(&ones, 1.0, 7).is_err());
}

#[test]
fn decay_bound_golden_and_edges() {
    let s = s();
    let d = DecayModel::new(1.0, 1.1, 1.0).unwrap();
    assert_eq!(k0_bound_for_decay(&d, 2.0, 1.0, &s, 100_000).unwrap(), 249);
    let fast = DecayModel::new(1.0, 5.0, 1.0).unwrap();
    assert_eq!(k0_bound_for_decay(&fast, 2.0, 1.0, &s, 1000).unwrap(), 2);
    assert!(DecayModel::new(1.0, 1.0, 1.0).is_err());
    assert!(DecayModel::new(1.0, 0.4, 2.0).is_err());
    assert!(k0_bound_for_decay(&d, 1.0, 1.0, &s, 100).is_err());
}
