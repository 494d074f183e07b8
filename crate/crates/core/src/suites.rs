//! Randomized verification suites, deterministic in the configured seed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{erdos_rado_bound, exhaustive_sunflower, find_sunflower, SetFamily};
use crate::error::{Error, Result};
use crate::normlab::NormLab;
use crate::params::{Config, ParamSchedule};
use crate::vectors::{brute_nu, p_norm, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sandwich,
    Lfc,
    Oracle,
    Smoothness,
    Combinatorics,
    Schedule,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Sandwich,
        Suite::Lfc,
        Suite::Oracle,
        Suite::Smoothness,
        Suite::Combinatorics,
        Suite::Schedule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::Lfc => "lfc",
            Suite::Oracle => "oracle",
            Suite::Smoothness => "smoothness",
            Suite::Combinatorics => "combinatorics",
            Suite::Schedule => "schedule",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub seed: u64,
    pub p: f64,
    pub epsilon: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Default)]
struct Tally {
    checks: Vec<CheckResult>,
}

impl Tally {
    fn record(&mut self, name: &str, cases: usize, failures: usize) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            cases,
            failures,
        });
    }

    fn count<I: IntoIterator<Item = bool>>(&mut self, name: &str, results: I) {
        let (mut cases, mut failures) = (0, 0);
        for ok in results {
            cases += 1;
            failures += usize::from(!ok);
        }
        self.record(name, cases, failures);
    }
}

/// Random vector with support in `[1, max_support]`, labels drawn out of
/// magnitude order and signs mixed. About one coordinate in ten repeats an
/// earlier magnitude so that ties are exercised.
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, max_support: usize) -> SparseVector {
    let n = rng.gen_range(1..=max_support);
    let mut ids: Vec<usize> = (0..4 * max_support).collect();
    ids.shuffle(rng);
    let mut mags: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..n {
        let m = if !mags.is_empty() && rng.gen_bool(0.1) {
            mags[rng.gen_range(0..mags.len())]
        } else {
            let u: f64 = rng.gen_range(1e-3..1.0);
            if rng.gen_bool(0.5) {
                u
            } else {
                u * u * u
            }
        };
        mags.push(m);
    }
    SparseVector::new(ids.into_iter().zip(mags).map(|(id, m)| {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        (format!("g{id:02}"), sign * m)
    }))
    .expect("labels are distinct and magnitudes nonzero")
}

/// Rescales `x` so that `ν(x)` lands in `[0.9, 1)`, hugging 1 half the time.
pub fn admissible<R: Rng + ?Sized>(lab: &NormLab, x: &SparseVector, rng: &mut R) -> SparseVector {
    let target = if rng.gen_bool(0.5) {
        1.0 - 1e-6 * rng.gen::<f64>() - 1e-12
    } else {
        rng.gen_range(0.9..0.999_999)
    };
    let mut y = x.scaled(target / lab.nu(x));
    while lab.nu(&y) > 1.0 {
        y = y.scaled(1.0 - 1e-15);
    }
    y
}

/// Random family of distinct `k`-sets over a universe of `universe` labels.
pub fn random_family<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    size: usize,
    universe: u32,
) -> SetFamily<u32> {
    assert!(
        binomial(universe as usize, k) >= size,
        "{universe} labels cannot carry {size} distinct {k}-sets"
    );
    let mut seen: BTreeSet<BTreeSet<u32>> = BTreeSet::new();
    let mut sets = Vec::with_capacity(size);
    while sets.len() < size {
        let mut s = BTreeSet::new();
        while s.len() < k {
            s.insert(rng.gen_range(0..universe));
        }
        if seen.insert(s.clone()) {
            sets.push(s);
        }
    }
    SetFamily::new(sets).expect("sets are distinct and of equal size")
}

fn suite_rng(seed: u64, suite: Suite) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (suite as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_suite(suite: Suite, config: &Config) -> Result<SuiteSummary> {
    let lab = NormLab::from_config(config)?;
    let mut rng = suite_rng(config.seed, suite);
    let mut t = Tally::default();
    match suite {
        Suite::Schedule => schedule_suite(&lab, config, &mut t),
        Suite::Sandwich => sandwich_suite(&lab, &mut rng, &mut t),
        Suite::Oracle => oracle_suite(&lab, &mut rng, &mut t)?,
        Suite::Lfc => lfc_suite(&lab, &mut rng, &mut t)?,
        Suite::Smoothness => smoothness_suite(&lab, &mut rng, &mut t)?,
        Suite::Combinatorics => combinatorics_suite(&mut rng, &mut t)?,
    }
    Ok(SuiteSummary {
        suite,
        seed: config.seed,
        p: config.p,
        epsilon: config.epsilon,
        passed: t.checks.iter().all(|c| c.failures == 0),
        checks: t.checks,
    })
}

fn schedule_suite(lab: &NormLab, config: &Config, t: &mut Tally) {
    let s = lab.schedule();
    t.record(
        "inequalities",
        1,
        usize::from(!s.validate(config.k_max).is_empty()),
    );
    let d1 = s.delta(1) * 3f64.ln();
    t.count(
        "delta_log_product",
        (0..=config.k_max).map(|k| (s.delta(k) * ((k + 2) as f64).ln() / d1 - 1.0).abs() <= 1e-6),
    );
    t.count(
        "power_gap_asymptote",
        [1.0, 1.5, 2.0, 3.0].into_iter().map(|p| {
            let r = power_gap_ratio(s, p, 1_000_000);
            (0.95..=1.05).contains(&r)
        }),
    );
}

/// `delta_power_gap(k) · k (ln k)² / (p δ* ln 3)`.
pub fn power_gap_ratio(s: &ParamSchedule, p: f64, k: usize) -> f64 {
    let kf = k as f64;
    let ds = s.delta(1);
    s.delta_power_gap(p, k) * kf * kf.ln().powi(2) / (p * ds * 3f64.ln())
}

fn sandwich_suite<R: Rng>(lab: &NormLab, rng: &mut R, t: &mut Tally) {
    let s = lab.schedule();
    let p = lab.p();
    let tol = lab.tol();
    let t1 = s.theta(1);
    let ratio = (1.0 + t1) / (1.0 - t1);
    let eps = s.epsilon();
    let chain = (0..200).map(|_| {
        let x = random_vector(rng, 10).scaled(rng.gen_range(0.1..10.0));
        let np = p_norm(&x, p);
        let nu = lab.nu(&x);
        let f = lab.final_norm(&x);
        let slack = 1e-9 + tol;
        np <= nu * (1.0 + 1e-12)
            && nu * (1.0 - slack) <= f
            && f <= ratio * nu * (1.0 + slack)
            && f <= (1.0 + eps) * np * (1.0 + slack)
    });
    t.count("norm_chain", chain.collect::<Vec<_>>());

    let vanish = (0..200).map(|_| {
        let x = random_vector(rng, 10);
        let y = x.scaled(0.999 * (1.0 - t1) / (1.0 + t1) / lab.nu(&x));
        matches!(lab.psi(&y), Ok(v) if v == 0.0)
    });
    t.count("psi_vanishing", vanish.collect::<Vec<_>>());

    let homog = (0..200).map(|_| {
        let x = random_vector(rng, 10);
        let a = rng.gen_range(-5.0..5.0);
        let lhs = lab.final_norm(&x.scaled(a));
        let rhs = a.abs() * lab.final_norm(&x);
        (lhs - rhs).abs() <= 2.0 * tol * rhs
    });
    t.count("homogeneity", homog.collect::<Vec<_>>());

    let triangle = (0..200).map(|_| {
        let x = random_vector(rng, 10);
        let y = SparseVector::new(
            x.iter()
                .map(|(l, _)| (l.to_string(), rng.gen_range(0.01..1.0))),
        )
        .unwrap();
        let sum = lab.final_norm(&x.add(&y));
        let bound = lab.final_norm(&x) + lab.final_norm(&y);
        sum <= bound * (1.0 + 4.0 * tol)
    });
    t.count("triangle", triangle.collect::<Vec<_>>());
}

fn oracle_suite<R: Rng>(lab: &NormLab, rng: &mut R, t: &mut Tally) -> Result<()> {
    let s = lab.schedule();
    let p = lab.p();
    let (mut nu_fail, mut psi_fail, mut fam_fail, mut k0_fail, mut scan_fail) = (0, 0, 0, 0, 0);
    let cases = 500;
    for _ in 0..cases {
        let raw = random_vector(rng, 10);
        let x = admissible(lab, &raw, rng);
        if lab.nu(&x) != brute_nu(&x, s, p)? {
            nu_fail += 1;
        }
        if lab.psi(&x)?.to_bits() != lab.brute_psi(&x)?.to_bits() {
            psi_fail += 1;
        }
        if lab.active_family(&x)?.family != lab.brute_active_family(&x)? {
            fam_fail += 1;
        }
        let prof = x.profile(p);
        let n = prof.len();
        let k0 = prof.find_k0(s);
        let phi: Vec<f64> = (1..=n + 2).map(|k| prof.phi(s, k)).collect();
        let brute_k0 = (1..=n)
            .find(|&k0| (k0..=n + 1).all(|k| phi[k] <= phi[k - 1]))
            .unwrap_or(n + 1);
        if k0 != brute_k0 {
            k0_fail += 1;
        }
        if prof
            .claim_inequality_scan(s)
            .iter()
            .any(|&(k, holds)| holds != (phi[k] <= phi[k - 1]))
        {
            scan_fail += 1;
        }
    }
    t.record("nu_vs_brute", cases, nu_fail);
    t.record("psi_vs_brute", cases, psi_fail);
    t.record("family_vs_brute", cases, fam_fail);
    t.record("k0_vs_scan", cases, k0_fail);
    t.record("claim_scan_vs_phi", cases, scan_fail);
    Ok(())
}

fn lfc_suite<R: Rng>(lab: &NormLab, rng: &mut R, t: &mut Tally) -> Result<()> {
    let (mut claim_fail, mut lfc_fail) = (0, 0);
    let cases = 100;
    for _ in 0..cases {
        let raw = random_vector(rng, 10);
        let x = admissible(lab, &raw, rng);
        if !lab.claim1_verify(&x, 20, rng)?.passed() {
            claim_fail += 1;
        }
        if !lab.lfc_verify(&x, 20, rng)?.passed() {
            lfc_fail += 1;
        }
    }
    t.record("claim_neighbourhood", cases, claim_fail);
    t.record("lfc_locality", cases, lfc_fail);
    Ok(())
}

fn smoothness_suite<R: Rng>(lab: &NormLab, rng: &mut R, t: &mut Tally) -> Result<()> {
    let (mut step_fail, mut homog_fail) = (0, 0);
    let cases = 50;
    for _ in 0..cases {
        let x = random_vector(rng, 10);
        let g = lab.gradient_check(&x)?;
        step_fail += usize::from(!g.consistent());
        homog_fail += usize::from(!g.homogeneous());
    }
    t.record("richardson_consistency", cases, step_fail);
    t.record("gradient_homogeneity", cases, homog_fail);
    Ok(())
}

fn combinatorics_suite<R: Rng>(rng: &mut R, t: &mut Tally) -> Result<()> {
    let (mut found_fail, mut agree_fail) = (0, 0);
    let cases = 200;
    for _ in 0..cases {
        let k = rng.gen_range(1..=3);
        let r = rng.gen_range(2..=4);
        let bound = erdos_rado_bound(k, r)? as usize;
        let universe = (3 * k * (r - 1) + k + 3) as u32;
        let f = random_family(rng, k, bound + 1, universe);
        match find_sunflower(&f, r) {
            Some(sf) if sf.is_valid_for(&f) && sf.petal_indices.len() >= r => {}
            _ => found_fail += 1,
        }
    }
    for _ in 0..cases {
        let k = rng.gen_range(1..=3);
        let r = rng.gen_range(2..=4);
        let size = rng.gen_range(1..=18);
        let universe = (2 * k + 2 + rng.gen_range(0..6)) as u32;
        if binomial(universe as usize, k) < size {
            continue;
        }
        let f = random_family(rng, k, size, universe);
        let fast = find_sunflower(&f, r);
        let slow = exhaustive_sunflower(&f, r);
        let ok = match (&fast, &slow) {
            (Some(a), Some(_)) => a.is_valid_for(&f),
            (None, None) => true,
            _ => false,
        };
        agree_fail += usize::from(!ok);
    }
    t.record("sunflower_above_bound", cases, found_fail);
    t.record("sunflower_vs_exhaustive", cases, agree_fail);
    Ok(())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
