//! Finitely supported vectors and the quantities read off their sorted
//! magnitude profile: `‖·‖_r`, the auxiliary norm `ν`, `φ_k` and `k₀`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParamSchedule;

/// A finitely supported real vector indexed by opaque string labels.
///
/// Stored values are finite and nonzero, so the key set is the support.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: BTreeMap<String, f64>,
}

/// On-disk form: `{"entries": [["label", value], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub entries: Vec<(String, f64)>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector::default()
    }

    /// Rejects zero or non-finite values and duplicate labels.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (label, value) in entries {
            let label = label.into();
            if !value.is_finite() {
                return Err(Error::InvalidVector(format!(
                    "entry {label:?} is not finite"
                )));
            }
            if value == 0.0 {
                return Err(Error::InvalidVector(format!("entry {label:?} is zero")));
            }
            if map.insert(label.clone(), value).is_some() {
                return Err(Error::InvalidVector(format!("duplicate label {label:?}")));
            }
        }
        Ok(SparseVector { entries: map })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: VectorFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidVector(e.to_string()))?;
        SparseVector::new(file.entries)
    }

    pub fn to_file(&self) -> VectorFile {
        VectorFile {
            entries: self.iter().map(|(l, v)| (l.to_string(), v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &str) -> f64 {
        self.entries.get(label).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    /// Sets a coordinate; a zero value removes it from the support.
    pub fn set(&mut self, label: impl Into<String>, value: f64) {
        let label = label.into();
        if value == 0.0 {
            self.entries.remove(&label);
        } else {
            self.entries.insert(label, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.entries.iter().map(|(l, &v)| (l.as_str(), v))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn scaled(&self, alpha: f64) -> SparseVector {
        let mut out = SparseVector::zero();
        for (l, v) in self.iter() {
            out.set(l, alpha * v);
        }
        out
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut out = self.clone();
        for (l, v) in other.iter() {
            out.set(l, self.get(l) + v);
        }
        out
    }

    /// Restriction to the labels accepted by `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&str) -> bool) -> SparseVector {
        SparseVector {
            entries: self
                .entries
                .iter()
                .filter(|(l, _)| keep(l))
                .map(|(l, &v)| (l.clone(), v))
                .collect(),
        }
    }

    pub fn profile(&self, p: f64) -> SortedProfile {
        SortedProfile::new(self, p)
    }
}

/// Support labels ordered by non-increasing magnitude (ties by label), with
/// the `p`-th powers of the magnitudes and their prefix sums.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedProfile {
    labels: Vec<String>,
    mags: Vec<f64>,
    powers: Vec<f64>,
    prefix: Vec<f64>,
    p: f64,
}

impl SortedProfile {
    pub fn new(x: &SparseVector, p: f64) -> Self {
        let mut items: Vec<(&str, f64)> = x.iter().map(|(l, v)| (l, v.abs())).collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let labels = items.iter().map(|(l, _)| l.to_string()).collect();
        let mags: Vec<f64> = items.iter().map(|&(_, m)| m).collect();
        let powers: Vec<f64> = mags.iter().map(|m| m.powf(p)).collect();
        let mut prefix = Vec::with_capacity(mags.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &w in &powers {
            acc += w;
            prefix.push(acc);
        }
        SortedProfile {
            labels,
            mags,
            powers,
            prefix,
            p,
        }
    }

    pub fn len(&self) -> usize {
        self.mags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mags.is_empty()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mags(&self) -> &[f64] {
        &self.mags
    }

    /// `|x(γ_j)|^p` in rank order.
    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// `prefix_p()[k] = Σ_{j<k} |x(γ_j)|^p`, of length `n + 1`.
    pub fn prefix_p(&self) -> &[f64] {
        &self.prefix
    }

    /// Largest `ℓ_p`-mass of any `k` coordinates; zero padding past the support.
    pub fn top_norm(&self, k: usize) -> f64 {
        self.prefix[k.min(self.len())].powf(1.0 / self.p)
    }

    pub fn nu(&self, s: &ParamSchedule) -> f64 {
        (1..=self.len())
            .map(|k| {
                let f = 1.0 + s.delta(k);
                f * f * self.top_norm(k)
            })
            .fold(0.0, f64::max)
    }

    pub fn phi(&self, s: &ParamSchedule, k: usize) -> f64 {
        (1.0 + s.delta(k)) * self.top_norm(k)
    }

    /// Smallest `k₀ ≥ 1` with `φ_{k+1} ≤ φ_k` for every `k ≥ k₀`.
    ///
    /// Past the support the ratio is `(1+δ_{k+1})/(1+δ_k) < 1`, so only
    /// `k < n` needs scanning.
    pub fn find_k0(&self, s: &ParamSchedule) -> usize {
        let n = self.len();
        let mut k0 = 1;
        let mut prev = self.phi(s, 1);
        for k in 1..n {
            let next = self.phi(s, k + 1);
            if next > prev {
                k0 = k + 1;
            }
            prev = next;
        }
        k0
    }

    /// `(k, holds)` for `k ∈ [1, n]`, where `holds` is the rearranged form
    /// of `φ_{k+1} ≤ φ_k`:
    /// `|x(γ_{k+1})|^p ≤ ((1+δ_k)^p − (1+δ_{k+1})^p)/(1+δ_{k+1})^p · Σ_{j≤k}|x(γ_j)|^p`.
    /// At `k = n` the left side is zero.
    pub fn claim_inequality_scan(&self, s: &ParamSchedule) -> Vec<(usize, bool)> {
        (1..=self.len())
            .map(|k| {
                let lhs = self.powers.get(k).copied().unwrap_or(0.0);
                let rhs = s.delta_power_gap(self.p, k) / (1.0 + s.delta(k + 1)).powf(self.p)
                    * self.prefix[k];
                (k, lhs <= rhs)
            })
            .collect()
    }
}

/// `(Σ|x(γ)|^r)^{1/r}`, zero for the empty vector.
pub fn p_norm(x: &SparseVector, r: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter()
        .map(|(_, v)| v.abs().powf(r))
        .sum::<f64>()
        .powf(1.0 / r)
}

/// `ν(x) = sup_A (1+δ_{|A|})²‖Ax‖_p`, attained on a top-k prefix.
pub fn nu(x: &SparseVector, s: &ParamSchedule, p: f64) -> f64 {
    x.profile(p).nu(s)
}

pub const BRUTE_NU_LIMIT: usize = 20;

/// `ν` by enumerating every nonempty subset of the support.
pub fn brute_nu(x: &SparseVector, s: &ParamSchedule, p: f64) -> Result<f64> {
    let prof = x.profile(p);
    let n = prof.len();
    if n > BRUTE_NU_LIMIT {
        return Err(Error::SupportTooLarge {
            size: n,
            limit: BRUTE_NU_LIMIT,
        });
    }
    let mut best = 0.0f64;
    for mask in 1u32..(1u32 << n) {
        let mut sum = 0.0;
        for j in 0..n {
            if mask & (1 << j) != 0 {
                sum += prof.powers[j];
            }
        }
        let f = 1.0 + s.delta(mask.count_ones() as usize);
        best = best.max(f * f * sum.powf(1.0 / p));
    }
    Ok(best)
}

/// `φ_k(x) = (1+δ_k)·sup_{|A|=k}‖Ax‖_p`.
pub fn phi_k(x: &SparseVector, s: &ParamSchedule, p: f64, k: usize) -> f64 {
    x.profile(p).phi(s, k)
}

pub fn find_k0(x: &SparseVector, s: &ParamSchedule, p: f64) -> usize {
    x.profile(p).find_k0(s)
}

pub fn claim_inequality_scan(x: &SparseVector, s: &ParamSchedule, p: f64) -> Vec<(usize, bool)> {
    x.profile(p).claim_inequality_scan(s)
}

/// `(k·|x(γ_k)|^q, ‖x‖_q^q)`; the first never exceeds the second.
pub fn tail_bound_check(x: &SparseVector, q: f64, k: usize) -> Result<(f64, f64)> {
    let prof = x.profile(q);
    if k == 0 || k > prof.len() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {}], got {k}",
            prof.len()
        )));
    }
    Ok((k as f64 * prof.powers[k - 1], prof.prefix[prof.len()]))
}

/// Power-law magnitude model `|x(γ_j)| = c·j^{−α}` with `αq > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModel {
    c: f64,
    alpha: f64,
}

impl DecayModel {
    pub fn new(c: f64, alpha: f64, q: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "c must be positive, got {c}"
            )));
        }
        if !(alpha * q > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha*q must exceed 1 for membership in l_q, got {}",
                alpha * q
            )));
        }
        Ok(DecayModel { c, alpha })
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        self.c * (j as f64).powf(-self.alpha)
    }
}

/// First `k ≥ 2` from which the rearranged monotonicity inequality holds at
/// every scanned index up to `k_hi`, for the model coordinates.
pub fn k0_bound_for_decay(
    d: &DecayModel,
    p: f64,
    q: f64,
    s: &ParamSchedule,
    k_hi: usize,
) -> Result<usize> {
    if !(q < p) {
        return Err(Error::InvalidArgument(format!(
            "need q < p, got q = {q}, p = {p}"
        )));
    }
    if k_hi < 2 {
        return Err(Error::InvalidArgument("k_hi must be >= 2".into()));
    }
    let mut prefix = d.coordinate(1).powf(p);
    let mut last_fail = None;
    for k in 2..=k_hi {
        prefix += d.coordinate(k).powf(p);
        let lhs = d.coordinate(k + 1).powf(p);
        let rhs = s.delta_power_gap(p, k) / (1.0 + s.delta(k + 1)).powf(p) * prefix;
        if !(lhs <= rhs) {
            last_fail = Some(k);
        }
    }
    match last_fail {
        None => Ok(2),
        Some(k) if k == k_hi => Err(Error::NotReached { k_hi }),
        Some(k) => Ok(k + 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Config;

    fn schedule() -> ParamSchedule {
        ParamSchedule::build(&Config::default()).unwrap()
    }

    fn v(e: &[(&str, f64)]) -> SparseVector {
        SparseVector::new(e.iter().map(|&(l, x)| (l, x))).unwrap()
    }

    #[test]
    fn p_norm_examples() {
        assert_eq!(p_norm(&SparseVector::zero(), 1.0), 0.0);
        assert_eq!(p_norm(&v(&[("a", 3.0), ("b", 4.0)]), 2.0), 5.0);
        assert_eq!(p_norm(&v(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]), 0.5), 9.0);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(SparseVector::new([("a", 0.0)]).is_err());
        assert!(SparseVector::new([("a", f64::NAN)]).is_err());
        assert!(SparseVector::new([("a", 1.0), ("a", 2.0)]).is_err());
        assert!(SparseVector::from_json(r#"{"entries": [["a", 1.0], ["a", 2.0]]}"#).is_err());
        let x = SparseVector::from_json(r#"{"entries": [["b", -2.5], ["a", 1]]}"#).unwrap();
        assert_eq!(x.get("b"), -2.5);
        assert_eq!(x.len(), 2);
    }

    #[test]
    fn profile_ties_use_label_order() {
        let x = v(&[("z", 1.0), ("a", -1.0), ("m", 2.0)]);
        let prof = x.profile(1.0);
        assert_eq!(prof.labels(), &["m", "a", "z"]);
        assert_eq!(prof.prefix_p(), &[0.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn nu_small_cases() {
        let s = schedule();
        assert_eq!(nu(&SparseVector::zero(), &s, 2.0), 0.0);
        let d1 = 1.0 + s.delta(1);
        assert_eq!(nu(&v(&[("a", -3.0)]), &s, 1.5), d1 * d1 * 3.0);
        let x = v(&[("a", 1.0), ("b", 1.0)]);
        let d2 = 1.0 + s.delta(2);
        let expected = (d1 * d1).max(2.0 * d2 * d2);
        assert_eq!(nu(&x, &s, 1.0), expected);
        assert_eq!(brute_nu(&x, &s, 1.0).unwrap(), expected);
    }

    #[test]
    fn brute_nu_limit() {
        let x = SparseVector::new((0..21).map(|i| (format!("g{i}"), 1.0))).unwrap();
        assert!(matches!(
            brute_nu(&x, &schedule(), 2.0),
            Err(Error::SupportTooLarge { size: 21, .. })
        ));
    }

    #[test]
    fn phi_examples() {
        let s = schedule();
        let x = v(&[("a", 2.0), ("b", 1.0)]);
        assert_eq!(phi_k(&x, &s, 1.0, 1), 2.0 * (1.0 + s.delta(1)));
        let n = x.len();
        assert_eq!(phi_k(&x, &s, 1.0, n), (1.0 + s.delta(n)) * 3.0);
        assert!(phi_k(&x, &s, 1.0, n + 3) < phi_k(&x, &s, 1.0, n));
    }

    #[test]
    fn k0_for_equal_entries() {
        let s = schedule();
        assert_eq!(find_k0(&v(&[("a", 5.0)]), &s, 2.0), 1);
        assert_eq!(find_k0(&SparseVector::zero(), &s, 2.0), 1);
        for m in 1..8 {
            let x = SparseVector::new((0..m).map(|i| (format!("g{i}"), 1.0))).unwrap();
            assert_eq!(find_k0(&x, &s, 1.0), m);
        }
    }

    #[test]
    fn tail_bound_tight_for_equal_entries() {
        let x = SparseVector::new((0..5).map(|i| (format!("g{i}"), 1.0))).unwrap();
        assert_eq!(tail_bound_check(&x, 1.0, 5).unwrap(), (5.0, 5.0));
        let (l, r) = tail_bound_check(&v(&[("a", 0.3), ("b", 2.0)]), 0.7, 1).unwrap();
        assert!(l <= r);
        assert!(tail_bound_check(&x, 1.0, 0).is_err());
        assert!(tail_bound_check(&x, 1.0, 6).is_err());
    }

    #[test]
    fn decay_model_membership() {
        assert!(DecayModel::new(1.0, 1.0, 1.0).is_err());
        assert!(DecayModel::new(1.0, 0.5, 1.5).is_err());
        assert!(DecayModel::new(1.0, 1.1, 1.0).is_ok());
    }

    #[test]
    fn fast_decay_reaches_two() {
        let s = schedule();
        let d = DecayModel::new(1.0, 12.0, 1.0).unwrap();
        assert_eq!(k0_bound_for_decay(&d, 2.0, 1.0, &s, 1000).unwrap(), 2);
    }

    #[test]
    fn slow_decay_needs_room() {
        let s = schedule();
        let d = DecayModel::new(1.0, 1.1, 1.0).unwrap();
        assert_eq!(
            k0_bound_for_decay(&d, 2.0, 1.0, &s, 10),
            Err(Error::NotReached { k_hi: 10 })
        );
    }
}
