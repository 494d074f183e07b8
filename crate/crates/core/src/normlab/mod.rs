//! The bump series `Ψ`, its Minkowski functional, and the active families
//! that make both depend on finitely many coordinates near each point.
//!
//! For a finite coordinate set `A` with `|A| = k` put
//! `w_k = (1+δ_k)²(1+θ_k)` and let `‖·‖_{s,k}` be the calibrated smooth norm
//! on `k` coordinates. Then
//!
//! ```text
//! Ψ(x) = Σ_A ρ_k( w_k · ‖Ax‖_{s,k} )
//! ```
//!
//! and the final norm is the gauge of `{Ψ ≤ 1 − θ_1}`. On `{ν ≤ 1}` every
//! summand with `A ⊄ supp(x)` vanishes, so sums here run over subsets of the
//! support, enumerated in lexicographic order of sorted ranks.

mod search;
mod verify;

use std::borrow::Cow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Config, ParamSchedule};
use crate::smoothcore::{BumpRho, SmoothFiniteNorm};
use crate::vectors::{SortedProfile, SparseVector};

pub use verify::{GradientReport, VerifyOutcome, GRADIENT_TOLERANCE};

pub(crate) use search::for_each_subset;

/// Slack on `ν(x) ≤ 1` accepted by [`NormLab::psi`].
pub const PSI_DOMAIN_SLACK: f64 = 1e-9;

/// Largest support handled by the exhaustive oracles.
pub const BRUTE_PSI_LIMIT: usize = 14;
pub const BRUTE_FAMILY_LIMIT: usize = 20;

// relative margin on prune decisions; keeps cut branches provably zero
const PRUNE_MARGIN: f64 = 1e-12;
const LOWER_BRACKET: f64 = 1e-12;
const LEVELS_CACHED: usize = 64;

/// Per-cardinality constants.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Level {
    /// `(1+δ_k)²`
    pub(crate) nu_factor: f64,
    /// `(1+δ_k)²(1+θ_k)`
    pub(crate) weight: f64,
    pub(crate) theta: f64,
    pub(crate) bump: BumpRho,
    pub(crate) norm: SmoothFiniteNorm,
}

/// Certificate of local finite dependence at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfcWitness {
    pub k0: usize,
    /// Sets `A ⊆ supp(x)`, `|A| ≤ k0`, with `(1+δ_|A|)²‖Ax‖_p > 1 − 2θ_|A|`,
    /// in lexicographic rank order.
    pub family: Vec<BTreeSet<String>>,
    /// `θ_{k0+1}`: the `ν`-radius of the neighbourhood on which only
    /// `family` can contribute to `Ψ`.
    pub radius: f64,
}

impl LfcWitness {
    pub fn union(&self) -> BTreeSet<String> {
        self.family.iter().flatten().cloned().collect()
    }
}

/// Everything computed for one vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub epsilon: f64,
    pub support_size: usize,
    pub p_norm: f64,
    pub nu: f64,
    /// `None` when `ν(x)` lies outside the evaluation domain of `Ψ`.
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub domain_note: Option<String>,
    pub final_norm: f64,
    /// Sets with a nonzero bump at `x / final_norm`.
    pub active_count: usize,
    pub bisect_iters: usize,
    pub monotone_probes: bool,
    pub bracket_valid: bool,
    pub schedule_digest: String,
}

/// Outcome of the Minkowski bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiEval {
    pub value: f64,
    pub iters: usize,
    pub active_count: usize,
    pub monotone_probes: bool,
    pub bracket_valid: bool,
}

/// The full construction for one `(p, schedule)` pair.
#[derive(Debug, Clone)]
pub struct NormLab {
    schedule: ParamSchedule,
    p: f64,
    order: u32,
    tol: f64,
    levels: Vec<Level>,
}

impl NormLab {
    pub fn new(config: &Config, schedule: ParamSchedule) -> Result<Self> {
        config.validate()?;
        let mut lab = NormLab {
            schedule,
            p: config.p,
            order: config.smoothness_order,
            tol: config.bisect_tol,
            levels: Vec::new(),
        };
        let cap = LEVELS_CACHED.max(config.k_max + 1);
        lab.levels = (1..=cap)
            .map(|k| lab.make_level(k))
            .collect::<Result<_>>()?;
        Ok(lab)
    }

    pub fn from_config(config: &Config) -> Result<Self> {
        NormLab::new(config, ParamSchedule::build(config)?)
    }

    pub fn schedule(&self) -> &ParamSchedule {
        &self.schedule
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn make_level(&self, k: usize) -> Result<Level> {
        let d = 1.0 + self.schedule.delta(k);
        let theta = self.schedule.theta(k);
        Ok(Level {
            nu_factor: d * d,
            weight: d * d * (1.0 + theta),
            theta,
            bump: BumpRho::new(k, theta, self.order),
            // bump zones have relative width θ_k², far below any useful
            // tolerance, so the inner gauges run to full precision
            norm: SmoothFiniteNorm::new(k, theta, self.p, 0.0)?,
        })
    }

    /// Levels `1..=n`, indexed by `k − 1`.
    pub(crate) fn levels(&self, n: usize) -> Result<Cow<'_, [Level]>> {
        if n <= self.levels.len() {
            return Ok(Cow::Borrowed(&self.levels[..n]));
        }
        let mut v = self.levels.clone();
        for k in v.len() + 1..=n {
            v.push(self.make_level(k)?);
        }
        Ok(Cow::Owned(v))
    }

    /// Smooth norm on `k` coordinates as used inside `Ψ`.
    pub fn smooth_norm(&self, k: usize) -> Result<SmoothFiniteNorm> {
        if k == 0 {
            return Err(Error::InvalidArgument("dimension 0".into()));
        }
        Ok(self.levels(k)?[k - 1].norm)
    }

    pub fn bump(&self, k: usize) -> BumpRho {
        BumpRho::new(k, self.schedule.theta(k), self.order)
    }

    pub fn nu(&self, x: &SparseVector) -> f64 {
        x.profile(self.p).nu(&self.schedule)
    }

    /// Smooth norm of the coordinates at `ranks`, in rank order.
    fn set_norm(
        profile: &SortedProfile,
        level: &Level,
        ranks: &[usize],
        buf: &mut Vec<f64>,
    ) -> f64 {
        buf.clear();
        buf.extend(ranks.iter().map(|&j| profile.mags()[j]));
        level.norm.value_unchecked(buf)
    }

    /// Summand `ρ_k(w_k ‖Ax‖_{s,k})` for the set at `ranks`.
    fn summand(profile: &SortedProfile, level: &Level, ranks: &[usize], buf: &mut Vec<f64>) -> f64 {
        level
            .bump
            .eval(level.weight * Self::set_norm(profile, level, ranks, buf))
    }

    /// The active family, `k₀` and neighbourhood radius at `x`.
    pub fn active_family(&self, x: &SparseVector) -> Result<LfcWitness> {
        let profile = x.profile(self.p);
        let nu = profile.nu(&self.schedule);
        if nu > 1.0 {
            return Err(Error::NuTooLarge { nu });
        }
        let k0 = profile.find_k0(&self.schedule);
        let levels = self.levels(profile.len())?;
        let inv_p = 1.0 / self.p;
        let violates = |k: usize, s: f64| {
            let lv = &levels[k - 1];
            lv.nu_factor * s.powf(inv_p) > 1.0 - 2.0 * lv.theta
        };
        let mut family = Vec::new();
        for_each_subset(&profile, k0, violates, |ranks, s| {
            if violates(ranks.len(), s) {
                family.push(ranks.iter().map(|&j| profile.labels()[j].clone()).collect());
            }
        });
        Ok(LfcWitness {
            k0,
            family,
            radius: self.schedule.theta(k0 + 1),
        })
    }

    /// Exhaustive counterpart of [`NormLab::active_family`]'s family.
    pub fn brute_active_family(&self, x: &SparseVector) -> Result<Vec<BTreeSet<String>>> {
        let profile = x.profile(self.p);
        let n = profile.len();
        if n > BRUTE_FAMILY_LIMIT {
            return Err(Error::SupportTooLarge {
                size: n,
                limit: BRUTE_FAMILY_LIMIT,
            });
        }
        let nu = profile.nu(&self.schedule);
        if nu > 1.0 {
            return Err(Error::NuTooLarge { nu });
        }
        let k0 = profile.find_k0(&self.schedule);
        let mut sets = lexicographic_subsets(n);
        sets.retain(|r| r.len() <= k0);
        Ok(sets
            .into_iter()
            .filter(|ranks| {
                let k = ranks.len();
                let mut s = 0.0;
                for &j in ranks {
                    s += profile.powers()[j];
                }
                let d = 1.0 + self.schedule.delta(k);
                d * d * s.powf(1.0 / self.p) > 1.0 - 2.0 * self.schedule.theta(k)
            })
            .map(|ranks| ranks.iter().map(|&j| profile.labels()[j].clone()).collect())
            .collect())
    }

    /// `Ψ(x)` for `ν(x) ≤ 1 + 1e-9`.
    pub fn psi(&self, x: &SparseVector) -> Result<f64> {
        let nu = self.nu(x);
        if nu > 1.0 + PSI_DOMAIN_SLACK {
            return Err(Error::DomainExceeded { nu });
        }
        self.psi_support_sum(x)
    }

    /// `Σ_{A ⊆ supp(x)} ρ_|A|(w_|A| ‖Ax‖_{s,|A|})` with no domain check.
    ///
    /// Equals `Ψ(x)` whenever the summands with `A ⊄ supp(x)` vanish, which
    /// holds on `{ν ≤ 1}` and on each neighbourhood of an [`LfcWitness`].
    pub fn psi_support_sum(&self, x: &SparseVector) -> Result<f64> {
        let profile = x.profile(self.p);
        let levels = self.levels(profile.len())?;
        let inv_p = 1.0 / self.p;
        let could = |k: usize, s: f64| {
            let lv = &levels[k - 1];
            lv.weight * s.powf(inv_p) > lv.bump.threshold()
        };
        let mut total = 0.0;
        let mut buf = Vec::new();
        for_each_subset(&profile, profile.len(), could, |ranks, s| {
            let lv = &levels[ranks.len() - 1];
            if lv.weight * s.powf(inv_p) * (1.0 + PRUNE_MARGIN) > lv.bump.threshold() {
                total += Self::summand(&profile, lv, ranks, &mut buf);
            }
        });
        Ok(total)
    }

    /// `Ψ` by summing every one of the `2^n − 1` summands in lexicographic
    /// rank order.
    pub fn brute_psi(&self, x: &SparseVector) -> Result<f64> {
        let profile = x.profile(self.p);
        let n = profile.len();
        if n > BRUTE_PSI_LIMIT {
            return Err(Error::SupportTooLarge {
                size: n,
                limit: BRUTE_PSI_LIMIT,
            });
        }
        let nu = profile.nu(&self.schedule);
        if nu > 1.0 + PSI_DOMAIN_SLACK {
            return Err(Error::DomainExceeded { nu });
        }
        let levels = self.levels(n)?;
        let mut buf = Vec::new();
        let mut total = 0.0;
        for ranks in lexicographic_subsets(n) {
            total += Self::summand(&profile, &levels[ranks.len() - 1], &ranks, &mut buf);
        }
        Ok(total)
    }

    pub fn final_norm(&self, x: &SparseVector) -> f64 {
        self.final_norm_detailed(x, self.tol).value
    }

    /// Gauge of `{Ψ ≤ 1 − θ_1}` at `x`, bisected to relative width `tol` on
    /// `[ν(x)(1 − 1e-12), ν(x)(1+θ_1)/(1−θ_1)]`.
    ///
    /// The smooth-norm value of every set that can reach its bump zone at
    /// scale `1/λ` for some bracketed `λ` is computed once, so each probe
    /// of `λ ↦ Ψ(x/λ)` is an exact monotone function of `λ`.
    pub fn final_norm_detailed(&self, x: &SparseVector, tol: f64) -> MinkowskiEval {
        if x.is_empty() {
            return MinkowskiEval {
                value: 0.0,
                iters: 0,
                active_count: 0,
                monotone_probes: true,
                bracket_valid: true,
            };
        }
        let profile = x.profile(self.p);
        let nu = profile.nu(&self.schedule);
        let t1 = self.schedule.theta(1);
        let level_set = 1.0 - t1;
        let mut lo = nu * (1.0 - LOWER_BRACKET);
        let mut hi = nu * (1.0 + t1) / (1.0 - t1);

        let levels = self
            .levels(profile.len())
            .expect("levels were calibrated for this support");
        let inv_p = 1.0 / self.p;
        let scale = lo;
        let could = |k: usize, s: f64| {
            let lv = &levels[k - 1];
            lv.weight * s.powf(inv_p) / scale > lv.bump.threshold()
        };
        // (cardinality, w_k‖Ax‖_{s,k}) in lexicographic rank order
        let mut terms: Vec<(usize, f64)> = Vec::new();
        let mut buf = Vec::new();
        for_each_subset(&profile, profile.len(), could, |ranks, s| {
            let lv = &levels[ranks.len() - 1];
            if lv.weight * s.powf(inv_p) / scale * (1.0 + PRUNE_MARGIN) > lv.bump.threshold() {
                let arg = lv.weight * Self::set_norm(&profile, lv, ranks, &mut buf);
                terms.push((ranks.len(), arg));
            }
        });
        let series = |lambda: f64| -> f64 {
            terms
                .iter()
                .map(|&(k, arg)| levels[k - 1].bump.eval(arg / lambda))
                .sum()
        };

        let mut probes: Vec<(f64, f64)> = Vec::new();
        let mut bracket_valid = true;
        let g_lo = series(lo);
        probes.push((lo, g_lo));
        if g_lo <= level_set {
            bracket_valid = false;
        }
        let mut g_hi = series(hi);
        let mut widen = 0;
        while g_hi > level_set && widen < 8 {
            hi *= 1.0 + 4.0 * f64::EPSILON;
            g_hi = series(hi);
            widen += 1;
        }
        probes.push((hi, g_hi));
        if g_hi > level_set {
            bracket_valid = false;
        }

        let mut iters = 0;
        if bracket_valid {
            while hi - lo > tol * hi {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let g = series(mid);
                probes.push((mid, g));
                if g > level_set {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iters += 1;
            }
        }
        probes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone_probes = probes.windows(2).all(|w| w[1].1 <= w[0].1);
        let value = if g_lo <= level_set { lo } else { hi };
        let active_count = terms
            .iter()
            .filter(|&&(k, arg)| levels[k - 1].bump.eval(arg / value) > 0.0)
            .count();
        MinkowskiEval {
            value,
            iters,
            active_count,
            monotone_probes,
            bracket_valid,
        }
    }

    pub fn report(&self, x: &SparseVector) -> Result<NormReport> {
        let nu = self.nu(x);
        let (psi, domain_note) = match self.psi(x) {
            Ok(v) => (Some(v), None),
            Err(Error::DomainExceeded { nu }) => (
                None,
                Some(format!(
                    "psi not evaluated: nu(x) = {nu} exceeds 1 + {PSI_DOMAIN_SLACK}"
                )),
            ),
            Err(e) => return Err(e),
        };
        let eval = self.final_norm_detailed(x, self.tol);
        Ok(NormReport {
            p: self.p,
            epsilon: self.schedule.epsilon(),
            support_size: x.len(),
            p_norm: crate::vectors::p_norm(x, self.p),
            nu,
            psi,
            domain_note,
            final_norm: eval.value,
            active_count: eval.active_count,
            bisect_iters: eval.iters,
            monotone_probes: eval.monotone_probes,
            bracket_valid: eval.bracket_valid,
            schedule_digest: self.schedule.digest(),
        })
    }
}

/// All nonempty subsets of `0..n` as sorted lists, in lexicographic order.
fn lexicographic_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1u32 << n))
        .map(|mask| (0..n).filter(|&j| mask & (1 << j) != 0).collect())
        .collect();
    out.sort();
    out
}
